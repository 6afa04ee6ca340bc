"""Joint beamforming and RIS phase design for finite-blocklength downlinks.

The main entry points are :func:`gen_channels` for channel realizations,
:func:`solve` for the alternating GM-rate (or sum-rate) ascent, and
:func:`run_experiment` for Monte-Carlo sweeps.
"""

from .channel import (DESK_PROFILE, LARGE_PROFILE, ChannelSet, Geometry, SystemParams,
                      dbm_to_watt, effective_channel, effective_channels, gen_channels,
                      noise_power, random_geometry)
from .errors import (BracketError, ContractError, DegenerateExpansionError, InitializationError,
                     NonPositiveRateError, UrllcRisError)
from .numerics import RngStream, inverse_q, lambda_max, q_function
from .rates import Design, RateReport, a_coeff, metrics, rate_report, shannon_rates, urllc_rates
from .solver import IterTrace, Mode, SolveResult, SolverConfig, initialize, solve

__version__ = "0.1.0"


def __getattr__(name):
    # the experiment layer pulls in the process pool; load it on first use
    if name in ("ExperimentSpec", "ResultTable", "run_experiment"):
        from . import experiment
        return getattr(experiment, name)
    if name == "emit_plots":
        from .plotting import emit_plots
        return emit_plots
    raise AttributeError(name)


__all__ = [
    "DESK_PROFILE", "LARGE_PROFILE", "ChannelSet", "Geometry", "SystemParams", "dbm_to_watt",
    "effective_channel", "effective_channels", "gen_channels", "noise_power", "random_geometry",
    "BracketError", "ContractError", "DegenerateExpansionError", "InitializationError",
    "NonPositiveRateError", "UrllcRisError", "RngStream", "inverse_q", "lambda_max",
    "q_function", "Design", "RateReport", "a_coeff", "metrics", "rate_report",
    "shannon_rates", "urllc_rates", "IterTrace", "Mode", "SolveResult", "SolverConfig",
    "initialize", "solve", "ExperimentSpec", "ResultTable", "run_experiment", "emit_plots",
]

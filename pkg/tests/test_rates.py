import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urllc_ris.channel import DESK_PROFILE
from urllc_ris.errors import ContractError
from urllc_ris.numerics import RngStream
from urllc_ris.rates import (LOG2E, Design, a_coeff, alpha_beta, dispersion, metrics, rate_report,
                             shannon_rates, sinr, sinrs, to_bps, urllc_rate, urllc_rates)

from conftest import desk_instance, random_design

A_DEFAULT = 0.42648907939228246285  # Q^{-1}(1e-5) / 10 from the 40-digit oracle


def test_a_coeff_examples():
    assert a_coeff(DESK_PROFILE) == pytest.approx(A_DEFAULT, abs=1e-12)
    assert a_coeff(DESK_PROFILE.with_(eps_c=0.5)) == 0.0
    p = DESK_PROFILE.with_(t_t=4e-4)
    assert a_coeff(p) == pytest.approx(a_coeff(DESK_PROFILE) / 2, rel=1e-14)


def test_alpha_beta_and_sinr_identities(cs_desk):
    rng = np.random.default_rng(0)
    d = random_design(cs_desk, 0.1, rng)
    X = (cs_desk.h_eff_base * np.exp(1j * d.theta)) @ cs_desk.H_BR @ d.w.T
    for k in range(cs_desk.K):
        al, be = alpha_beta(cs_desk, k, d)
        assert be - al == pytest.approx(abs(X[k, k]) ** 2, rel=1e-12)
        assert al >= cs_desk.sigma
        assert sinr(cs_desk, k, d) == pytest.approx(be / al - 1, rel=1e-12)
        assert dispersion(sinr(cs_desk, k, d)) == pytest.approx(2 * (1 - al / be), rel=1e-12)
    with pytest.raises(IndexError):
        sinr(cs_desk, cs_desk.K, d)


def test_zero_beamformers(cs_desk):
    d = Design(np.zeros((cs_desk.K, cs_desk.M)), np.zeros(cs_desk.N))
    assert alpha_beta(cs_desk, 0, d) == (cs_desk.sigma, cs_desk.sigma)
    assert np.all(sinrs(cs_desk, d) == 0)
    assert np.all(urllc_rates(cs_desk, d, A_DEFAULT) == 0)


def test_single_user_scalar_case():
    cs = desk_instance(2, DESK_PROFILE.with_(M=1, K=1, N=1))
    w = np.array([[0.3 - 0.1j]])
    d = Design(w, [1.2])
    h = cs.h_eff_base[0, 0] * np.exp(1.2j) * cs.H_BR[0, 0]
    assert alpha_beta(cs, 0, d)[0] == cs.sigma
    assert sinr(cs, 0, d) == pytest.approx(abs(h * w[0, 0]) ** 2 / cs.sigma, rel=1e-12)


def test_dispersion_examples():
    assert dispersion(0.0) == 0.0
    assert dispersion(1.0) == 1.0
    assert dispersion(1e6) == pytest.approx(1.999998, abs=1e-9)


def test_urllc_rate_examples(cs_desk):
    g = np.array([0.0, 1.0])
    from urllc_ris.rates import _fbl
    assert _fbl(g, 0.42649)[0] == 0.0
    # ln 2 - 0.42649, evaluated at 40 digits
    assert _fbl(g, 0.42649)[1] == pytest.approx(0.26665718055994530942, abs=1e-14)
    d = random_design(cs_desk, 0.1, np.random.default_rng(3))
    assert np.array_equal(urllc_rates(cs_desk, d, 0.0), shannon_rates(cs_desk, d))
    assert urllc_rate(cs_desk, 2, d, A_DEFAULT) == urllc_rates(cs_desk, d, A_DEFAULT)[2]


def test_urllc_below_shannon_on_random_designs():
    rng = np.random.default_rng(5)
    for seed in range(10):
        cs = desk_instance(seed)
        for _ in range(100):
            d = random_design(cs, 0.1, rng)
            g = sinrs(cs, d)
            gap = shannon_rates(cs, d) - urllc_rates(cs, d, A_DEFAULT)
            assert np.all(gap[g > 0] > 0)
            assert np.all(gap[g == 0] == 0)


def test_urllc_rate_increases_with_duration(cs_desk):
    d = random_design(cs_desk, 0.1, np.random.default_rng(6))
    rates = [urllc_rates(cs_desk, d, a_coeff(DESK_PROFILE.with_(t_t=t))) for t in (2.5e-5, 5e-5, 1e-4)]
    assert np.all(np.diff(np.array(rates), axis=0) > 0)


def test_metrics_examples():
    assert metrics([3.0, 3.0, 3.0]) == pytest.approx((3.0, 3.0, 1.0, 0.0))
    gm, am, rr, urv = metrics([0.0, 1.0, 1.0, 1.0])
    assert gm == 0 and rr == 0
    assert metrics([1.0, 4.0]) == pytest.approx((2.0, 2.5, 0.25, 2.25))
    assert metrics([0.0, 0.0])[2] == 0.0
    with pytest.raises(ContractError):
        metrics([1.0, float("nan")])


def test_metrics_negative_rates_count_as_zero():
    gm, am, rr, urv = metrics([-0.5, 1.5])
    assert gm == 0.0 and rr == 0.0
    assert am == pytest.approx(0.5) and urv == pytest.approx(1.0)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(min_value=0.0, max_value=50.0), min_size=1, max_size=12))
def test_gm_below_am(rates):
    gm, am, rr, urv = metrics(rates)
    assert gm <= am * (1 + 1e-12) + 1e-300
    assert 0.0 <= rr <= 1.0 and urv >= 0.0


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.0, max_value=1e12))
def test_dispersion_range(g):
    assert 0.0 <= dispersion(g) < 2.0


def test_to_bps():
    assert to_bps(math.log(2)) == pytest.approx(1.0)
    assert to_bps(0.0) == 0.0
    assert to_bps(1.0) == pytest.approx(1.4426950408889634)
    assert np.allclose(to_bps(np.array([1.0, 2.0])), [LOG2E, 2 * LOG2E])


def test_rate_report_consistency(cs_desk):
    d = random_design(cs_desk, 0.1, np.random.default_rng(8))
    rep = rate_report(cs_desk, d, A_DEFAULT)
    assert np.all(rep.per_user_urllc <= rep.per_user_shannon)
    assert np.all((rep.dispersion >= 0) & (rep.dispersion < 2))
    assert 0 <= rep.rr <= 1
    row = rep.csv_row()
    assert row["gm_bps"] == pytest.approx(rep.gm * LOG2E)
    assert row["urv"] == pytest.approx(rep.urv * LOG2E ** 2)
    assert rep.to_dict()["sinr"] == rep.sinr.tolist()


def test_rate_scale_invariance(cs_desk):
    d = random_design(cs_desk, 0.1, np.random.default_rng(9))
    assert np.allclose(urllc_rates(cs_desk.scaled(0.1 + 2j), d, A_DEFAULT),
                       urllc_rates(cs_desk, d, A_DEFAULT), rtol=1e-10, atol=1e-14)


def test_design_feasibility_and_wrapping():
    d = Design(np.ones((2, 3)), [-0.5, 7.0])
    assert d.power == 6.0
    assert d.is_feasible(6.0) and not d.is_feasible(5.9)
    assert np.all((d.theta >= 0) & (d.theta < 2 * np.pi))
    rng = RngStream(0, 0)
    assert random_design(desk_instance(0), 0.1, rng).is_feasible(0.1)

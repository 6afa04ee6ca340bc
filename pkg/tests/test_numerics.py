import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from urllc_ris.errors import BracketError, ContractError
from urllc_ris.numerics import (RngStream, bisect_root, inverse_q, is_hermitian, lambda_max,
                                lambda_max_upper, q_function)

# Q^{-1} values from 40-digit bisection on erfc (mpmath)
INVQ_ORACLE = {
    1e-5: 4.2648907939228246285,
    1e-9: 5.9978070150076868716,
    1e-3: 3.0902323061678135415,
    0.3: 0.52440051270804078404,
}


@pytest.mark.parametrize("p,x", sorted(INVQ_ORACLE.items()))
def test_inverse_q_matches_high_precision_oracle(p, x):
    assert inverse_q(p) == pytest.approx(x, abs=1e-9)


def test_inverse_q_center_and_symmetry():
    assert inverse_q(0.5) == 0.0
    for p in (1e-7, 0.01, 0.2, 0.45):
        assert inverse_q(1 - p) == pytest.approx(-inverse_q(p), abs=1e-9)


@pytest.mark.parametrize("p", [0.0, 1.0, -0.1, 1.5, float("nan")])
def test_inverse_q_domain(p):
    with pytest.raises(ContractError):
        inverse_q(p)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=-5.0, max_value=8.0))
def test_inverse_q_inverts_q(x):
    assert inverse_q(q_function(x)) == pytest.approx(x, abs=1e-8)


def test_inverse_q_far_left_is_exact_for_the_rounded_input():
    # Q(-7) = 1 - 1.3e-12 rounds to a double that only pins x down to ~1e-5;
    # compare with the exact (40-digit) inverse of that double instead.
    assert inverse_q(q_function(-7.0)) == pytest.approx(-6.999994246365374, abs=1e-12)
    assert inverse_q(q_function(-5.0)) == pytest.approx(-4.999999999970175, abs=1e-12)


def test_lambda_max_simple():
    assert lambda_max(np.eye(5)) == pytest.approx(1.0, rel=1e-8)
    assert lambda_max(np.diag([1.0, 3.0, 2.0])) == pytest.approx(3.0, rel=1e-8)


def _random_psd(rng, n, rank=None):
    g = rng.standard_normal((n, rank or n)) + 1j * rng.standard_normal((n, rank or n))
    return g @ g.conj().T


def test_lambda_max_matches_dense_eigensolver():
    rng = np.random.default_rng(0)
    for _ in range(30):
        a = _random_psd(rng, 6)
        assert lambda_max(a) == pytest.approx(np.linalg.eigvalsh(a)[-1], rel=1e-8)


def test_lambda_max_bounds_rayleigh_and_unit_modulus_forms():
    rng = np.random.default_rng(1)
    for _ in range(10):
        n = int(rng.integers(2, 12))
        a = _random_psd(rng, n, rank=int(rng.integers(1, n + 1)))
        lam = lambda_max(a)
        upper = lambda_max_upper(a)
        assert upper >= np.linalg.eigvalsh(a)[-1] * (1 - 1e-14)
        for _ in range(100):
            x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            x /= np.linalg.norm(x)
            assert np.real(np.vdot(x, a @ x)) <= lam * (1 + 1e-8)
            u = np.exp(1j * rng.uniform(0, 2 * np.pi, n))
            assert np.real(np.vdot(u, a @ u)) <= upper * n * (1 + 1e-12)


def test_lambda_max_rejects_non_hermitian():
    with pytest.raises(ContractError):
        lambda_max(np.array([[1.0, 2.0], [0.0, 1.0]]))
    assert is_hermitian(np.array([[2.0, 1j], [-1j, 1.0]]))


def test_bisect_root_examples():
    assert bisect_root(lambda x: x - 2, 0, 10, tol=1e-12) == pytest.approx(2.0, abs=1e-10)
    assert bisect_root(lambda x: x * x - 9, 0, 10, tol=1e-12) == pytest.approx(3.0, abs=1e-10)


def test_bisect_root_power_residual():
    rng = np.random.default_rng(2)
    psi = _random_psd(rng, 6, rank=4)
    b = rng.standard_normal((6, 4)) + 1j * rng.standard_normal((6, 4))
    b = psi @ b  # keep the linear terms in the range of psi
    P = 1e-3
    lam, U = np.linalg.eigh(psi)
    C = U.conj().T @ b

    def g(mu):
        return float(np.sum(np.abs(C) ** 2 / (lam[:, None] + mu) ** 2)) - P

    hi = math.sqrt(np.sum(np.abs(b) ** 2) / P) + lam[-1]
    mu = bisect_root(g, 0.0, hi, tol=1e-12 * P)
    assert abs(g(mu)) <= 1e-10 * P
    # widening the bracket does not move the root
    assert bisect_root(g, 0.0, 10 * hi, tol=1e-12 * P) == pytest.approx(mu, rel=1e-8)


def test_bisect_root_needs_sign_change():
    with pytest.raises(BracketError):
        bisect_root(lambda x: x + 1, 0, 1, tol=1e-9)


def test_rng_stream_reproducible_and_independent():
    a = RngStream(42, 3).complex_normal(10)
    b = RngStream(42, 3).complex_normal(10)
    c = RngStream(42, 4).complex_normal(10)
    assert np.array_equal(a, b)
    assert not np.allclose(a, c)
    z = RngStream(0, 0).complex_normal(200_000)
    assert np.mean(np.abs(z) ** 2) == pytest.approx(1.0, abs=0.02)

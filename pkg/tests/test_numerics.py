import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from wallcross.errors import IllConditioned, PoleError
from wallcross.numerics import (QuadratureConfig, expint_e1, gamma, integrate_ray, loggamma,
                                nilpotent_gamma_expand, numeric_rank, polygamma, rgamma_expand, scaled_lstsq)

mpmath.mp.dps = 30


def _rel(a, b) -> float:
    return abs(complex(a) - complex(b)) / abs(complex(b))


def _near_pole(s: complex) -> bool:
    return abs(s.imag) < 1e-3 and s.real < 0.5 and abs(s.real - round(s.real)) < 1e-3


GRID = [complex(x, y) for x in np.linspace(-49.7, 49.9, 23) for y in np.linspace(-49.3, 49.3, 23)
        if abs(complex(x, y)) <= 50]


def test_gamma_reference_grid():
    worst = max(_rel(gamma(s), mpmath.gamma(mpmath.mpc(s.real, s.imag))) for s in GRID if not _near_pole(s))
    assert worst <= 1e-12


@settings(max_examples=300)
@given(st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False))
def test_gamma_matches_mpmath(s):
    assume(not _near_pole(s))
    assert _rel(gamma(s), mpmath.gamma(mpmath.mpc(s.real, s.imag))) <= 1e-12


@settings(max_examples=100)
@given(st.complex_numbers(max_magnitude=40, allow_nan=False, allow_infinity=False))
def test_gamma_functional_equation(s):
    assume(not _near_pole(s) and abs(s) > 1e-3)
    assert _rel(gamma(s + 1), s * gamma(s)) <= 1e-11


def test_loggamma_exponentiates_to_gamma():
    for s in (0.3 + 2j, -3.7 + 0.2j, 12 - 30j, 40 + 1j):
        assert _rel(cmath.exp(loggamma(s)), gamma(s)) <= 1e-11


def test_poles_raise():
    for s in (0, -1, -7):
        with pytest.raises(PoleError):
            gamma(s)
        with pytest.raises(PoleError):
            polygamma(0, s)


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_polygamma_matches_mpmath(n):
    for s in (0.25, 1.0, 3.5 + 2j, -2.5 + 0.5j, 20 - 7j):
        ref = mpmath.polygamma(n, mpmath.mpc(s.real, s.imag) if isinstance(s, complex) else s)
        assert _rel(polygamma(n, s), ref) <= 1e-11


def test_nilpotent_expansion_matches_taylor_series():
    for s in (1.0, 2.5, 0.5 + 1j):
        got = nilpotent_gamma_expand(s, 4)
        ref = mpmath.taylor(mpmath.gamma, mpmath.mpc(s.real, s.imag) if isinstance(s, complex) else s, 3)
        for a, b in zip(got, ref):
            assert _rel(a, b) <= 1e-10


def test_reciprocal_gamma_expansion_is_finite_at_poles():
    for s in (0, -2, 1.5):
        got = rgamma_expand(s, 4)
        ref = mpmath.taylor(mpmath.rgamma, s, 3)
        for a, b in zip(got, ref):
            assert abs(complex(a) - complex(b)) <= 1e-11 * max(1.0, abs(complex(b)))


def test_shifted_expansion_consistency():
    """Gamma(s + eps)(s + eps) = Gamma(s + 1 + eps) as truncated series."""
    s = 2.25 + 0.5j
    a = nilpotent_gamma_expand(s, 4)
    lhs = [s * a[0]] + [s * a[n] + a[n - 1] for n in range(1, 4)]
    rhs = nilpotent_gamma_expand(s + 1, 4)
    for x, y in zip(lhs, rhs):
        assert _rel(x, y) <= 1e-11


@pytest.mark.parametrize("u", [1e-3, 0.5, 0.999, 1.0, 3.0, 10.0, 40.0, 200.0])
def test_e1_matches_mpmath(u):
    assert expint_e1(u) == pytest.approx(float(mpmath.e1(u)), rel=1e-13)


def test_e1_domain():
    with pytest.raises(ValueError):
        expint_e1(0.0)


def test_ray_quadrature_and_path_independence():
    u = 7.0
    f = lambda x: u * cmath.exp(-u * x) / (1 + x)      # noqa: E731
    ref = u * math.exp(u) * float(mpmath.e1(u))
    v0, err = integrate_ray(f)
    assert abs(v0 - ref) / ref <= 1e-12 and err < 1e-10
    v1, _ = integrate_ray(f, QuadratureConfig(angle=0.3))
    assert abs(v1 - v0) / abs(v0) <= 1e-10


def test_scaled_least_squares_recovers_solution():
    rng = np.random.default_rng(7)
    scales = np.array([1e6, 1.0, 1e-6])
    A = rng.normal(size=(10, 3)) * scales
    # every column contributes at the same size, so all of X is recoverable
    X = rng.normal(size=(3, 2)) / scales[:, None]
    got, sv = scaled_lstsq(A, A @ X)
    assert np.allclose(got * scales[:, None], X * scales[:, None], rtol=1e-9)
    assert sv.max() / sv.min() < 1e3
    assert numeric_rank(np.diag([1.0, 1e-3, 1e-9])) == 2
    with pytest.raises(IllConditioned):
        scaled_lstsq(np.zeros((4, 2)), np.zeros((4, 1)))

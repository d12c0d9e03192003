import cmath

import mpmath
import numpy as np
import pytest

from conftest import sides, wall
from wallcross.errors import NoConvergence
from wallcross.evaluation import NumericSide, eval_I, eval_I_plus, twist_term_map, word_term_map
from wallcross.ifunction import TwistData
from wallcross.transform import minus_logs

mpmath.mp.dps = 30


def _p2_oracle(y: complex, z: complex) -> list:
    """Taylor coefficients in h of z y^{h/z} sum_d y^d / prod_{a=1}^d (h + a z)^3."""
    y, z = mpmath.mpc(y), mpmath.mpc(z)

    def F(h):
        total, term, d = mpmath.mpc(0), mpmath.mpc(1), 0
        while True:
            total += term
            d += 1
            term = term * y / (h + d * z) ** 3
            if abs(term) < mpmath.mpf(10) ** -25 * abs(total):
                return z * mpmath.exp(h * mpmath.log(y) / z) * total

    return [complex(c) for c in mpmath.taylor(F, 0, 2)]


@pytest.mark.parametrize("y,z", [(0.3, 1.0), (2.0 + 1j, 0.7 - 0.2j), (-5.0, 1j)])
def test_p2_matches_scalar_oracle(y, z):
    side = sides("p2")[0]
    R = side.space.rings[0]
    h = np.array([complex(x) for x in R.theta(side.p[0])])
    H = np.array([[complex(x) for x in row] for row in R.mult_matrix(R.theta(side.p[0]))])
    powers = [np.array([complex(x) for x in R.one()]), h, H @ h]
    expected = sum(c * v for c, v in zip(_p2_oracle(y, z), powers))
    got = eval_I_plus(side, [cmath.log(y)], z)
    assert np.allclose(got, expected, rtol=1e-12, atol=1e-12 * np.max(np.abs(expected)))


def test_blocks_sum_to_the_function():
    plus, _ = sides("fixture_a")
    logy = [np.log(0.02) + 0j, np.log(3.0) + 0.05j]
    ns = NumericSide(plus, 1j)
    blocks = ns.evaluate_blocks(logy, "convergent", n_lo_max=6)
    total = sum(v for v, _ in blocks.values())
    assert np.allclose(total, eval_I(plus, logy, 1j, n_lo_max=6), rtol=1e-14)
    assert all(b.tail_bound <= 1e-15 * max(b.peak, 1e-300) * 10 for _, b in blocks.values())


def test_minus_series_does_not_converge():
    _, minus = sides("fixture_a")
    logy = minus_logs(wall("fixture_a"), [np.log(0.01) + 0j, np.log(12.0) + 0.05j])
    ns = NumericSide(minus, 1.0)
    with pytest.raises(NoConvergence):
        ns.block((0,), logy, "convergent", nmax=150)
    b = ns.block((0,), logy, "asymptotic", nmax=150)
    assert 0 < b.n_terms < 150 and b.tail_bound > 0


def test_word_and_twist_maps_agree_on_coefficients():
    """The operator word applied termwise equals the twisted coefficients times e(E)."""
    plus, _ = sides("fixture_a")
    twist = TwistData.of([(1, 0)])
    ns = NumericSide(plus, 0.8 + 0.3j)
    logy = [np.log(0.05) + 0j, np.log(2.0) + 0.05j]
    a = ns.evaluate_blocks(logy, "convergent", 4, term_map=twist_term_map(ns, twist))
    b = ns.evaluate_blocks(logy, "convergent", 4, term_map=word_term_map(ns, twist))
    for key in a:
        assert np.allclose(a[key][0], b[key][0], rtol=1e-12, atol=1e-14)


def test_zero_z_is_rejected():
    with pytest.raises(ValueError):
        NumericSide(sides("p2")[0], 0)

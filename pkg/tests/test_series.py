from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import series, sides
from wallcross.cohomology import HCRClass
from wallcross.errors import DivisionByPureNilpotent, TagMismatch
from wallcross.series import DegreeFunctional, FormalSeries, ZLaurent, sigma_exp

F = Fraction


def _plus_a():
    return sides("fixture_a")[0]


def _class(space, cs):
    return space.from_vector(tuple(F(c) for c in cs))


classes = st.lists(st.integers(-3, 3), min_size=4, max_size=4)


@settings(max_examples=40, deadline=None)
@given(classes, st.integers(-2, 2), st.integers(1, 4) | st.integers(-4, -1), st.tuples(st.integers(-2, 2),
                                                                                        st.integers(-2, 2)))
def test_div_linear_inverts_mul_linear(cs, e, a, xi):
    space = _plus_a().space
    v = ZLaurent({e: _class(space, cs)})
    assert v.mul_linear(space, xi, a).div_linear(space, xi, a) == v
    assert v.div_linear(space, xi, a).mul_linear(space, xi, a) == v


def test_division_by_pure_nilpotent_raises():
    space = _plus_a().space
    with pytest.raises(DivisionByPureNilpotent):
        ZLaurent({0: space.unit()}).div_linear(space, (1, 0), 0)


def test_zlaurent_arithmetic():
    space = _plus_a().space
    a = ZLaurent({0: space.unit(), -1: space.theta((1, 0))})
    assert a - a == ZLaurent()
    assert not (a.scale(0))
    assert a.shift_z(2).terms.keys() == {2, 1}
    assert a.sectors() == {0}


def test_sigma_exp_is_an_eigenfunction_of_the_log_derivatives():
    side = _plus_a()
    E = sigma_exp(side.space, side.name, side.var, side.p, side.degree, 6)
    for i, p in enumerate(side.p):
        assert E.log_derivation(i) == E.mul_theta(p).shift_z(-1)


def test_sigma_exp_of_p2():
    side = sides("p2")[0]
    E = sigma_exp(side.space, side.name, side.var, side.p, side.degree, 3)
    # 1 + H log y / z + H^2 log^2 y / (2 z^2)
    assert sorted(l for (_, l) in E.terms) == [(0,), (1,), (2,)]
    c2 = E.terms[((0,), (2,))]
    assert list(c2.terms) == [-2]
    assert c2.terms[-2] == space_theta_square_half(side)


def space_theta_square_half(side):
    R = side.space.rings[0]
    h = R.theta(side.p[0])
    return HCRClass.from_dict({0: tuple(x / 2 for x in R.mul(h, h))})


def test_tags_are_checked():
    a = series("fixture_a", "plus")
    b = series("fixture_a", "minus")
    with pytest.raises(TagMismatch):
        a + b


def test_truncation_drops_high_degree_terms():
    s = series("fixture_a", "plus")
    t = s.truncate(2)
    assert t.terms and all(s.degree(n) <= 2 for n, _ in t.terms)
    assert all(t.terms[k] == s.terms[k] for k in t.terms)
    d = s.degree((F(0), F(1)))
    shifted = {((n[0], n[1] + 1), l): c for (n, l), c in s.truncate(2 - d).terms.items()}
    assert s.mul_monomial((0, 1)).truncate(2).terms == shifted


def _small_series(side, seed):
    terms = {}
    for i, (n, l) in enumerate([((0, 0), (0, 0)), ((1, 0), (0, 1)), ((0, 1), (1, 0)), ((1, 1), (0, 0))]):
        c = (seed * (i + 1)) % 5 - 2
        if c:
            terms[(tuple(map(F, n)), l)] = ZLaurent({-i: side.space.unit().scale(c)})
    return FormalSeries(side.space, side.name, side.var, side.degree, 4, terms)


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 50), st.integers(1, 50), st.integers(0, 1))
def test_log_derivation_is_a_derivation(s1, s2, i):
    side = _plus_a()
    a, b = _small_series(side, s1), _small_series(side, s2)
    assert (a * b).log_derivation(i) == a.log_derivation(i) * b + a * b.log_derivation(i)
    assert a * b == b * a


def test_degree_functional_from_stability():
    side = _plus_a()
    deg = DegreeFunctional.from_stability((1, 1), side.p)
    # deg(P k) = omega_hat . k
    k = (F(2), F(1))
    assert deg(side.exponents(k)) == 3

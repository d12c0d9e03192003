import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import WALL_FIXTURES, series, sides, wall
from wallcross import linalg as la
from wallcross import resummation as rs
from wallcross.errors import GammaMismatch, WallcrossError
from wallcross.gkz import GammaSymbol
from wallcross.ifunction import enumerate_k

F = Fraction


def _reg(name):
    _, minus = sides(name)
    return rs.regularize(series(name, "minus"), minus, wall(name))


@pytest.mark.parametrize("name", WALL_FIXTURES)
def test_regularization_constants(name):
    reg = _reg(name)
    assert reg.s == wall(name).discrepancy_sum == 1
    assert reg.q < 0
    assert reg.beta == 1
    n_r = {n[-1] for n, l in series(name, "minus").terms if not any(l)}
    assert {xb for _, xb in reg.terms} == {reg.beta * x for x in n_r}


@pytest.mark.parametrize("name", WALL_FIXTURES)
def test_regularize_agrees_with_direct_assembly(name):
    """Route one reads the expanded series, route two the raw coefficients."""
    _, minus = sides(name)
    direct = rs.regularize_direct(minus, wall(name), enumerate_k(minus, 6), 6)
    assert direct.terms == _reg(name).terms


def test_regularize_rejects_plus_series():
    plus, _ = sides("fixture_a")
    with pytest.raises(WallcrossError):
        rs.regularize(series("fixture_a", "plus"), plus, wall("fixture_a"))


def test_laplace_refuses_mismatched_gamma():
    class Shifted(rs.RegSeries):
        def denominator(self, key):
            return GammaSymbol(2 + key[1], self.nil)

    reg = _reg("fixture_a")
    with pytest.raises(GammaMismatch):
        rs.laplace_termwise(Shifted(reg.side, reg.s, reg.q, reg.N, reg.terms))


@pytest.mark.parametrize("name", WALL_FIXTURES)
def test_identity_detects_a_corrupted_coefficient(name):
    I_minus = series(name, "minus")
    img = rs.laplace_termwise(_reg(name))
    key = sorted(k for k in I_minus.terms if not any(k[1]))[2]
    terms = dict(I_minus.terms)
    terms[key] = terms[key].scale(3)
    rep = rs.asymptotic_identity_check(img, I_minus.like(terms))
    assert not rep["passed"]
    assert sum(g["mismatches"] for g in rep["groups"]) == 1


@pytest.mark.parametrize("name", WALL_FIXTURES)
def test_monomials_agree_across_the_change_of_variables(name):
    """y^{P_+ k} = ytilde^{P_- k} under log ytilde = M log y."""
    wc = wall(name)
    plus, minus = sides(name)
    M = rs.cov_matrix(wc)
    MT = la.transpose(M)
    for k in enumerate_k(minus, 6):
        assert la.matvec(MT, minus.exponents(k)) == plus.exponents(k)


@pytest.mark.parametrize("name", WALL_FIXTURES)
def test_change_of_variables_composes(name):
    """(ytilde_lo, u) -> y equals (ytilde_lo, u) -> ytilde followed by ytilde -> y."""
    wc = wall(name)
    reg = _reg(name)
    M1 = rs.u_to_ytilde_matrix(reg)
    M2 = rs.cov_matrix(wc)
    prod = [[la.dot(row, col) for col in zip(*M2)] for row in M1]
    assert prod == rs.cov2_matrix(wc, reg.beta)
    img = rs.laplace_termwise(reg)
    direct = rs.change_variables_to_y(img, wc)
    two_step = rs.relabel_log_coordinates(rs.relabel_log_coordinates(img.series, M1, "minus", "ytilde"),
                                          M2, "laplace", "y")
    assert direct.terms == two_step.terms


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_relabel_round_trip(entries):
    M = [[F(entries[0]), F(entries[1])], [F(entries[2]), F(entries[3])]]
    if la.det(M) == 0:
        return
    I = series("fixture_a", "minus")
    there = rs.relabel_log_coordinates(I, M, "minus", "w")
    back = rs.relabel_log_coordinates(there, la.inverse(M), "minus", "ytilde")
    assert back.terms == I.terms
    assert back.degree == I.degree


def test_convergence_dichotomy_on_fixture_b():
    plus, minus = sides("fixture_b")
    rep = rs.convergence_report(plus, minus, wall("fixture_b"))
    assert rep["plus_tends_to_zero"] and rep["minus_diverges"]
    # alternating signs: the singularity sits on the negative axis, near -1/27
    assert rep["singular_locus_operator"]["roots"] == [F(-1, 27)]
    assert rep["series_radius"]["signs"] == [(-1) ** (i + 1) for i in range(7)]
    assert abs(rep["series_radius"]["radius"] - 1 / 27) < 0.005


def test_closed_form_ratios_track_the_coefficients():
    plus, minus = sides("fixture_a")
    rep = rs.convergence_report(plus, minus, wall("fixture_a"))
    rel = [abs(abs(float(c)) - o) / o for c, o in zip(rep["plus_closed_form_ratio"], rep["plus_observed_ratio"])]
    assert all(b < a for a, b in zip(rel, rel[1:])) and rel[-1] < 0.01
    assert rep["minus_closed_form_ratio"] == pytest.approx(rep["minus_observed_ratio"], rel=1e-12)


def test_watson_against_mpmath_laplace():
    rows = rs.watson_validate(rs.euler_model(), (15.0,))
    u = mpmath.mpf(15)
    ref = mpmath.quad(lambda x: u * mpmath.exp(-u * x) / (1 + x), [0, mpmath.inf])
    assert rows[0]["integral"] == pytest.approx(float(ref), rel=1e-12)
    assert rows[0]["signature"]
    # optimal truncation sits near n = u and its error is of the size of the first omitted term
    assert abs(rows[0]["n_opt"] - 15) <= 1
    assert rows[0]["rel_error_optimal"] <= 2 * rows[0]["expected_error_scale"]


def test_watson_terminating_expansion_is_exact_and_not_divergent():
    row = rs.watson_validate(rs.sqrt_model(), (5.0,))[0]
    assert row["integral"] == pytest.approx(math.gamma(1.5) / math.sqrt(5.0), rel=1e-13)
    assert row["rel_error_optimal"] < 1e-13
    assert not row["signature"]


def test_eval_i_plus_is_exported():
    assert rs.eval_I_plus is not None

"""Acceptance criteria, one test per criterion.

Each test records a single PASS/FAIL line; the lines are printed again in
the terminal summary.  Criteria that do not hold are marked xfail(strict):
the check runs at its stated tolerance, fails, and is reported as FAIL.
"""

from __future__ import annotations

import math
from fractions import Fraction

import pytest

import oracles
from conftest import FIXTURES, WALL_FIXTURES, config, fit_a, series, sides, wall
from wallcross import resummation as rs
from wallcross import transform as tf
from wallcross.cohomology import build_hcr
from wallcross.git_core import compute_chamber, enumerate_boxes
from wallcross.gkz import annihilation_check, default_degrees, reg_annihilation_check
from wallcross.ifunction import TwistData
from wallcross.numerics import QuadratureConfig, expint_e1

N = Fraction(6)


def test_criterion_1_gkz_annihilation(acceptance):
    failures = []
    checked = 0
    for name in FIXTURES:
        degs = default_degrees(config(name).data.r, 2)
        for side in sides(name):
            rep = annihilation_check(side, series(name, side.name), degs, N)
            checked += len(rep["rows"])
            failures += [(name, side.name, row["d"]) for row in rep["rows"] if not row["passed"]]
    ok = acceptance(1, "GKZ annihilation, exact, N = 6, P2/A/B both sides", not failures,
                    f"{checked} operators, {len(failures)} nonzero")
    assert ok, failures


def test_criterion_2_regularized_annihilation(acceptance):
    wc = wall("fixture_a")
    _, minus = sides("fixture_a")
    reg = rs.regularize(series("fixture_a", "minus"), minus, wc)
    degs = [wc.e, tuple(-x for x in wc.e), (1, 0), (0, 1)]
    rep = reg_annihilation_check(reg, degs, N)
    poles = [row["d"] for row in rep["rows"] if row["pole"]]
    ok = acceptance(2, "regularized annihilation on fixture A, degrees e, -e, basis", rep["passed"] and not poles,
                    f"{len(rep['rows'])} operators, unreduced Gamma ratios: {len(poles)}")
    assert ok, rep


def test_criterion_3_resummation_identity(acceptance):
    totals = {}
    passed = True
    for name in WALL_FIXTURES:
        _, minus = sides(name)
        I_minus = series(name, "minus")
        img = rs.laplace_termwise(rs.regularize(I_minus, minus, wall(name)))
        rep = rs.asymptotic_identity_check(img, I_minus)
        totals[name] = rep["total_terms"]
        passed = passed and rep["passed"] and rep["total_terms"] == len(I_minus.terms)
    ok = acceptance(3, "regularize, Laplace, back-substitute reproduces I^- exactly on A and B", passed,
                    ", ".join(f"{k}: {v} terms" for k, v in totals.items()))
    assert ok


def _watson_rows():
    return rs.watson_validate(rs.euler_model(), (10.0, 20.0, 40.0),
                              closed_form=lambda u: u * math.exp(u) * expint_e1(u), quad=QuadratureConfig())


@pytest.mark.xfail(strict=True, reason="at u = 10 the optimally truncated expansion of the Euler model "
                                       "is only accurate to ~1.9e-4 (the optimal error scale is ~e^-u)")
def test_criterion_4_watson(acceptance):
    rows = _watson_rows()
    parts = []
    ok = True
    for row in rows:
        good = row["rel_error_optimal"] <= 1e-6 and row["rel_error_closed_form"] <= 1e-9 and row["signature"]
        ok = ok and good
        parts.append(f"u={row['u']:g}: opt {row['rel_error_optimal']:.1e}, closed {row['rel_error_closed_form']:.1e}"
                     f", signature {row['signature']}")
    acceptance(4, "Watson validation on 1/(1+x) at u = 10, 20, 40", ok, "; ".join(parts))
    assert ok


@pytest.mark.parametrize("u", [20.0, 40.0])
def test_criterion_4_watson_large_u(u):
    row = rs.watson_validate(rs.euler_model(), (u,), closed_form=lambda v: v * math.exp(v) * expint_e1(v))[0]
    assert row["rel_error_optimal"] <= 1e-6
    assert row["rel_error_closed_form"] <= 1e-9
    assert row["signature"]


def test_criterion_4_watson_closed_form_all_u():
    for row in _watson_rows():
        assert row["rel_error_closed_form"] <= 1e-9
        assert row["signature"]


def test_criterion_5_lefschetz_block_identity(acceptance):
    results = []
    for E in ([(1, 0)], [(1, 0), (2, 0)]):
        twist = TwistData.of(E)
        for side in sides("fixture_a"):
            rep = tf.ci_block_identity(side, twist, N)
            results.append((E, side.name, rep["terms"], rep["passed"]))
    ok = acceptance(5, "Lefschetz block identity on fixture A, one and two twists, both sides",
                    all(r[3] for r in results), ", ".join(f"{len(E)} twist(s) {s}: {t} terms" for E, s, t, _ in results))
    assert ok, results


def test_criterion_6_connection_fit(acceptance):
    cm, rep = fit_a()
    plus, minus = sides("fixture_a")
    n_samples = len(tf.FitConfig().radii)
    ok = (plus.chamber.extended_weak_fano and n_samples >= 8 and rep["max_residual"] <= 1e-3
          and rep["max_entry_variation"] <= 1e-3 and rep["max_block_leakage"] <= 1e-3
          and rep["ranks"] == [minus.space.dim] * 3 and minus.space.dim == 3)
    amb = [len(p["ambiguity_directions"]) for p in rep["per_z"]]
    acceptance(6, "connection-matrix fit on fixture A, z = 1, 2i, -1+i", ok,
               f"residual {rep['max_residual']:.1e}, variation {rep['max_entry_variation']:.1e}, "
               f"leakage {rep['max_block_leakage']:.1e}, ranks {rep['ranks']}, {n_samples} samples, "
               f"ambiguity directions {amb}")
    assert ok, rep


def _combinatorics_mismatches() -> list:
    bad = []
    expected = {("p2", "plus"): 3, ("fixture_a", "plus"): 4, ("fixture_b", "plus"): 5}
    for name in FIXTURES:
        data = config(name).data
        D = data.D
        for side in ("plus", "minus"):
            omega = data.omega_plus if side == "plus" else data.omega_minus
            if omega is None:
                continue
            ch = compute_chamber(data, omega)
            fam = oracles.anticones(D, omega)
            if set(ch.anticones.members) != fam:
                bad.append((name, side, "anticones"))
            for x in oracles.grid(data.r):
                inside = all(sum(a * b for a, b in zip(n, x)) >= 0 for n in ch.normals)
                if inside != oracles.in_chamber_closure(D, fam, x):
                    bad.append((name, side, "chamber", x))
                    break
            bx = enumerate_boxes(data, omega, ch.anticones)
            if {b.f for b in bx} != oracles.boxes(D, fam):
                bad.append((name, side, "boxes"))
            space = build_hcr(data, omega, ch.anticones, bx)
            for b, R in zip(bx, space.rings):
                g = oracles.sector_dim_groebner(D, fam, b.I_f)
                c = oracles.sector_dim_cones(D, fam, b.I_f)
                if not R.dim == g == c:
                    bad.append((name, side, "sector dim", b.f, R.dim, g, c))
            if (name, side) in expected and space.dim != expected[(name, side)]:
                bad.append((name, side, "total dim", space.dim))
        if data.omega_minus is not None:
            wc = wall(name)
            e = wc.e
            on_wall = [x for x in oracles.grid(data.r)
                       if oracles.in_chamber_closure(D, oracles.anticones(D, data.omega_plus), x)
                       and oracles.in_chamber_closure(D, oracles.anticones(D, data.omega_minus), x)]
            if any(sum(a * b for a, b in zip(e, x)) != 0 for x in on_wall) or not any(any(x) for x in on_wall):
                bad.append((name, "wall", e))
            if sum(a * b for a, b in zip(e, data.omega_plus)) * sum(a * b for a, b in zip(e, data.omega_minus)) >= 0:
                bad.append((name, "wall sides", e))
    return bad


def test_criterion_7_combinatorial_oracles(acceptance):
    bad = _combinatorics_mismatches()
    ok = acceptance(7, "anticones, chambers, walls, boxes, cohomology dims vs brute force", not bad,
                    f"{len(bad)} mismatches")
    assert ok, bad


def _convergence_a():
    plus, minus = sides("fixture_a")
    return rs.convergence_report(plus, minus, wall("fixture_a"))


@pytest.mark.xfail(strict=True, reason="the operator-derived singular point of fixture A is x = +1 while the "
                                       "displayed equation gives x = -1 (sign (-1)^s)")
def test_criterion_8_convergence_dichotomy(acceptance):
    rep = _convergence_a()
    ok = rep["plus_tends_to_zero"] and rep["minus_diverges"] and rep["loci_agree"]
    acceptance(8, "convergence dichotomy and singular locus on fixture A", ok,
               f"plus ratio -> 0: {rep['plus_tends_to_zero']}, minus diverges: {rep['minus_diverges']}, "
               f"displayed roots {[str(x) for x in rep['singular_locus_displayed']['roots']]}, "
               f"operator roots {[str(x) for x in rep['singular_locus_operator']['roots']]}")
    assert ok


def test_criterion_8_ratio_dichotomy():
    rep = _convergence_a()
    assert rep["plus_tends_to_zero"]
    assert rep["minus_diverges"]


def test_criterion_8_operator_locus_matches_series():
    """The operator-derived singular point is where the minus series actually stops converging."""
    rep = _convergence_a()
    roots = rep["singular_locus_operator"]["roots"]
    assert [complex(x) for x in roots] == [1]
    assert abs(rep["series_radius"]["radius"] - 1) < 0.15

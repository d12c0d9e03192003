"""Command line entry point: wallcross <command> --config PATH [options].

Exit status: 0 all checks pass, 1 a check failed, 2 bad configuration or
input data, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
from fractions import Fraction
from typing import Optional

from . import __version__
from . import config as cfgmod
from . import resummation as rs
from . import transform as tf
from .cohomology import build_hcr
from .errors import (BasisSearchFailed, ConfigError, CrepantWall, InputTooLarge, LabelingError,
                     NotFullDimensional, NotProper, NumericFailure, WallcrossError)
from .git_core import compute_chamber, compute_wall_crossing, enumerate_boxes
from .gkz import annihilation_check, default_degrees, reg_annihilation_check
from .ifunction import TwistData, build_I, make_side, sides_from_wall
from .numerics import QuadratureConfig, expint_e1
from .report import dumps

COMMANDS = ("analyze", "ifunction", "gkz-check", "reg-check", "resum", "watson-demo", "solve-l", "ci-check")
INPUT_ERRORS = (ConfigError, InputTooLarge, NotFullDimensional, NotProper, CrepantWall, LabelingError,
                BasisSearchFailed)
THREADS_ENV = "WALLCROSS_THREADS"

logger = logging.getLogger("wallcross")


class Context:
    def __init__(self, cfg: cfgmod.ConfigDocument, order, tolerance, threads: int):
        self.cfg = cfg
        self.data = cfg.data
        self.N = Fraction(order) if order is not None else cfg.order
        self.tolerance = tolerance
        self.threads = threads
        self._wc = None
        self._sides = None

    @property
    def has_wall(self) -> bool:
        return self.data.omega_minus is not None

    def wall(self):
        if self._wc is None:
            if not self.has_wall:
                raise ConfigError("this command needs git.omega_minus")
            self._wc = compute_wall_crossing(self.data, self.cfg.p_plus, self.cfg.p_minus)
        return self._wc

    def sides(self) -> tuple:
        if self._sides is None:
            if self.has_wall:
                self._sides = sides_from_wall(self.data, self.wall())
            else:
                self._sides = (make_side(self.data, "plus", self.data.omega_plus, self.cfg.p_plus),)
        return self._sides


def _chamber_doc(data, omega) -> dict:
    ch = compute_chamber(data, omega)
    boxes = enumerate_boxes(data, omega, ch.anticones)
    space = build_hcr(data, omega, ch.anticones, boxes)
    return {
        "omega": omega,
        "chamber_normals": ch.normals,
        "proper": ch.proper,
        "extended_weak_fano": ch.extended_weak_fano,
        "minimal_anticones": [[j + 1 for j in a] for a in ch.anticones.minimal()],
        "boxes": [{"f": b.f, "age": b.age, "I_f": [j + 1 for j in b.I_f]} for b in boxes],
        "sector_dims": [R.dim for R in space.rings],
        "hcr_dim": space.dim,
        "basis": space.basis_labels(),
    }


def _wall_doc(wc) -> dict:
    return {"e": wc.e, "p_plus": wc.p_plus, "p_minus": wc.p_minus, "c": wc.c, "c_i": wc.c_i,
            "discrepancy_sum": wc.discrepancy_sum, "basis_source": wc.basis_source}


def cmd_analyze(ctx: Context) -> tuple:
    doc = {"plus": _chamber_doc(ctx.data, ctx.data.omega_plus)}
    if ctx.has_wall:
        doc["minus"] = _chamber_doc(ctx.data, ctx.data.omega_minus)
        doc["wall"] = _wall_doc(ctx.wall())
    return doc, True


def cmd_ifunction(ctx: Context) -> tuple:
    doc = {}
    for side in ctx.sides():
        doc[side.name] = {"variable": side.var, "p": side.p, "order": ctx.N,
                          "basis": side.space.basis_labels(), "terms": build_I(side, ctx.N)}
    return doc, True


def _degrees(ctx: Context) -> list:
    return ctx.cfg.degrees or default_degrees(ctx.data.r, 2)


def cmd_gkz(ctx: Context) -> tuple:
    doc, ok = {}, True
    for side in ctx.sides():
        rep = annihilation_check(side, build_I(side, ctx.N), _degrees(ctx), ctx.N)
        doc[side.name] = rep
        ok = ok and rep["passed"]
    return doc, ok


def _reg(ctx: Context):
    wc = ctx.wall()
    plus, minus = ctx.sides()
    I_minus = build_I(minus, ctx.N)
    return wc, plus, minus, I_minus, rs.regularize(I_minus, minus, wc)


def cmd_reg(ctx: Context) -> tuple:
    wc, _, _, _, reg = _reg(ctx)
    r = ctx.data.r
    degs = ctx.cfg.degrees or ([wc.e, tuple(-x for x in wc.e)] +
                               [tuple(Fraction(int(i == j)) for j in range(r)) for i in range(r)])
    rep = reg_annihilation_check(reg, degs, ctx.N)
    rep["beta"] = reg.beta
    rep["regularized_terms"] = len(reg.terms)
    return rep, rep["passed"]


def cmd_resum(ctx: Context) -> tuple:
    wc, plus, minus, I_minus, reg = _reg(ctx)
    img = rs.laplace_termwise(reg)
    ident = rs.asymptotic_identity_check(img, I_minus)
    y_series = rs.change_variables_to_y(img, wc)
    conv = rs.convergence_report(plus, minus, wc)
    doc = {"identity": ident, "gamma_checks": img.gamma_checks, "beta": reg.beta,
           "laplace_terms": len(img.series.terms), "y_terms": len(y_series.terms),
           "convergence": conv,
           "note": "ray dependence of the asymptotics (Stokes jumps) is out of scope"}
    return doc, ident["passed"]


def cmd_watson(ctx: Context) -> tuple:
    tol = ctx.tolerance if ctx.tolerance is not None else 1e-6
    rows = rs.watson_validate(rs.euler_model(), ctx.cfg.watson_u,
                              closed_form=lambda u: u * math.exp(u) * expint_e1(u), quad=QuadratureConfig())
    ok = True
    for row in rows:
        row["passed"] = (row["rel_error_optimal"] <= tol and row["rel_error_closed_form"] <= 1e-9
                         and row["signature"])
        ok = ok and row["passed"]
    return {"model": "phi(x) = 1/(1+x)", "tolerance": tol, "rows": rows}, ok


def _fit_config(ctx: Context) -> tf.FitConfig:
    f = ctx.cfg.fit
    tol = ctx.tolerance if ctx.tolerance is not None else f.tolerance
    return tf.FitConfig(ray_angle=f.ray_angle, radii=tuple(f.radii), y_lo=tuple(float(x) for x in f.y_lo),
                        z_values=tuple(f.z), window=f.window, tolerance=tol, ridge=f.ridge)


def cmd_solve_l(ctx: Context) -> tuple:
    wc = ctx.wall()
    plus, minus = ctx.sides()
    fc = _fit_config(ctx)
    cm, rep = tf.solve_L_fit(plus, minus, wc, fc, threads=ctx.threads)
    rep["L"] = {z: cm.per_z[z] for z in cm.per_z}
    rep["ray_angle"] = fc.ray_angle
    rep["radii"] = fc.radii
    return rep, rep["passed"]


def cmd_ci(ctx: Context) -> tuple:
    twist = TwistData.of(ctx.cfg.twist)
    doc, ok = {"twist": twist.E}, True
    if ctx.has_wall:
        problems = twist.check_wall(ctx.wall())
        doc["twist_problems"] = problems
        ok = not problems
    for side in ctx.sides():
        rep = tf.ci_block_identity(side, twist, ctx.N)
        doc[side.name] = rep
        ok = ok and rep["passed"]
    if ctx.has_wall and "fit" in ctx.cfg.raw and ok:
        plus, minus = ctx.sides()
        fc = _fit_config(ctx)
        cm, fit = tf.solve_L_fit(plus, minus, ctx.wall(), fc, threads=ctx.threads)
        numeric = tf.ci_transform_check(cm, plus, minus, ctx.wall(), twist, fc)
        doc["fit_passed"] = fit["passed"]
        doc["transform"] = numeric
        ok = ok and numeric["passed"]
    return doc, ok


HANDLERS = {
    "analyze": cmd_analyze,
    "ifunction": cmd_ifunction,
    "gkz-check": cmd_gkz,
    "reg-check": cmd_reg,
    "resum": cmd_resum,
    "watson-demo": cmd_watson,
    "solve-l": cmd_solve_l,
    "ci-check": cmd_ci,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wallcross", description="Wall-crossing checks for toric GIT I-functions.")
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", required=True, help="YAML config document")
    p.add_argument("--order", type=Fraction, default=None, help="truncation order N (overrides the config)")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--threads", type=int, default=None, help=f"worker threads (or set {THREADS_ENV})")
    p.add_argument("--tolerance", type=float, default=None, help="tolerance for numeric checks")
    p.add_argument("--digits", type=int, default=12, help="significant digits for floats in the report")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def resolve_threads(flag: Optional[int]) -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ConfigError(f"{THREADS_ENV}={env!r} is not an integer")
    return max(1, flag or 1)


def run(command: str, cfg: cfgmod.ConfigDocument, order=None, tolerance=None, threads: int = 1) -> tuple:
    ctx = Context(cfg, order, tolerance, threads)
    body, ok = HANDLERS[command](ctx)
    doc = {"command": command, "config": cfg.raw, "order": ctx.N, "passed": ok, "result": body}
    if ctx.has_wall and command != "watson-demo":
        doc["wall"] = _wall_doc(ctx.wall())
    return doc, ok


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        threads = resolve_threads(args.threads)
        cfg = cfgmod.load(args.config)
        doc, ok = run(args.command, cfg, args.order, args.tolerance, threads)
    except INPUT_ERRORS as exc:
        print(f"wallcross: configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericFailure as exc:
        print(f"wallcross: numeric failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except WallcrossError as exc:
        print(f"wallcross: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    text = dumps(doc, args.digits)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line experiment runner.

Every numeric CSV cell is printed with 17 significant digits and each value
column is paired with an error column.  CSV goes to ``--out`` when given,
otherwise to stdout with the human summary on stderr.  Exit codes: 0 pass,
1 check failure, 2 configuration error, 3 numerical non-convergence.
"""
from __future__ import annotations

import argparse
import configparser
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import acceptance
from .analysis import (
    adherence_classify,
    alpha_mass_identity,
    blowup_mass,
    calibrate_kappa,
    coefficient_mass_estimates,
    cone_experiment,
    get_kappa,
    interleaving_check,
    restriction_identity,
)
from .analysis.jensen import CalibrationError, jensen_check
from .currents import ChartInvisibleError, DilatationFamily
from .fixtures import UnknownFixtureError, get_fixture, list_fixtures
from .lelong import DivergentIntegralError, condition_C, dini, lambda_profile, lelong_number, nu_profile, psi_criterion

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_NONCONV = 0, 1, 2, 3

OPERATIONS = (
    "nu", "lelong-number", "lambda", "conditions", "jensen", "calibrate", "alpha-mass", "cone",
    "conic-check", "coeff-masses", "blowup-mass", "restriction", "suite", "list-fixtures",
)

# default radius (or radius pair) grid per operation
DEFAULT_GRIDS = {
    "nu": (0.25, 0.5, 1.0),
    "lambda": (0.25, 0.5, 1.0),
    "jensen": (0.5, 1.0, 2.0),
    "alpha-mass": (0.5, 1.0),
    "blowup-mass": (0.5, 1.0),
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    operation: str
    fixture: str = "T2"
    z0: tuple | None = None
    grid: tuple | None = None
    scales: tuple | None = None
    tol: float = 1e-3
    budget: int = 1_000_000
    seed: int = 0
    kappa: str = "calibrated"
    out: str | None = None
    k: int = 1
    p: int = 1
    profile: str = "quick"
    filter: str = ""

    def validate(self) -> "ExperimentConfig":
        if self.operation not in OPERATIONS:
            raise ConfigError(f"unknown operation {self.operation!r}")
        if self.grid is not None:
            g = np.asarray(self.grid, dtype=float)
            if g.size == 0 or np.any(g <= 0) or np.any(np.diff(g) <= 0):
                raise ConfigError("grid must be positive and strictly increasing")
        if self.budget < 1000:
            raise ConfigError("budget must be at least 1000")
        if not self.tol > 0:
            raise ConfigError("tolerance must be positive")
        if self.kappa not in ("paper", "calibrated"):
            raise ConfigError("kappa mode must be 'paper' or 'calibrated'")
        if self.profile not in acceptance.PROFILES:
            raise ConfigError(f"suite profile must be one of {sorted(acceptance.PROFILES)}")
        return self

    @property
    def kw(self):
        return {"tol": self.tol, "seed": self.seed, "budget": self.budget}

    def radii(self):
        g = self.grid if self.grid is not None else DEFAULT_GRIDS.get(self.operation, (0.25, 0.5, 1.0))
        return tuple(float(x) for x in g)


@dataclass
class RunReport:
    config: ExperimentConfig
    header: list
    rows: list = field(default_factory=list)
    checks: list = field(default_factory=list)  # (name, status) with status pass/fail/flag/nonconverged
    summary: list = field(default_factory=list)
    seconds: float = 0.0

    def add_check(self, name: str, ok: bool, *, converged: bool = True, flagged: bool = False):
        status = "pass" if ok else ("flag" if flagged else ("fail" if converged else "nonconverged"))
        self.checks.append((name, status))

    @property
    def exit_code(self) -> int:
        states = {s for _, s in self.checks}
        if "fail" in states:
            return EXIT_FAIL
        if "nonconverged" in states:
            return EXIT_NONCONV
        return EXIT_OK

    def csv(self) -> str:
        lines = [",".join(self.header)]
        lines += [",".join(_cell(x) for x in row) for row in self.rows]
        return "\n".join(lines) + "\n"


def _cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    if isinstance(x, (complex, np.complexfloating)):
        return f"{complex(x).real:.17g}{complex(x).imag:+.17g}j"
    return str(x).replace(",", ";")


def _floats(text: str, kind=float) -> tuple:
    try:
        return tuple(kind(x.strip().replace(" ", "")) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise ConfigError(f"cannot parse list {text!r}: {exc}") from None


# ----------------------------------------------------------------------------
# operations


def _kappa_value(cfg: ExperimentConfig, p: int) -> float:
    return 1.0 if cfg.kappa == "paper" else get_kappa(p, cfg.seed).kappa


def op_nu(cfg, T, rep):
    prof = nu_profile(T, cfg.radii(), cfg.z0, **cfg.kw)
    rep.header = ["r", "nu", "error"]
    rep.rows = [[r, float(np.real(v)), e] for r, v, e in prof.rows()]
    rep.add_check("quadrature converged", prof.converged, converged=prof.converged)
    rep.summary.append(f"nu_{T.name} on {len(prof)} radii")


def op_lelong(cfg, T, rep):
    res = lelong_number(T, cfg.z0, **cfg.kw)
    rep.header = ["verdict", "value", "error", "exponent", "slope", "residual"]
    rep.rows = [[res.verdict, res.value, res.error, res.exponent, res.slope, res.residual]]
    rep.add_check("limit determined", res.verdict != "inconclusive", converged=res.verdict != "inconclusive")
    rep.summary.append(f"Lelong number of {T.name}: {res.verdict} {res.value:.8g} +- {res.error:.2g}")


def op_lambda(cfg, T, rep):
    rep.header = ["r", "lambda", "error"]
    kappa = _kappa_value(cfg, T.p) if T.p >= 1 else None
    try:
        prof = lambda_profile(T, cfg.radii(), cfg.z0, kappa=kappa, **cfg.kw)
    except DivergentIntegralError as exc:
        rep.add_check("lambda defined", False)
        rep.summary.append(f"lambda undefined: {exc}")
        return
    rep.rows = [[r, float(np.real(v)), e] for r, v, e in prof.rows()]
    rep.add_check("quadrature converged", prof.converged, converged=prof.converged)


def op_conditions(cfg, T, rep):
    r0 = cfg.radii()[-1] if cfg.grid else 1.0
    reports = [dini(T, r0, z0=cfg.z0, **cfg.kw), condition_C(T, cfg.z0, r0, **cfg.kw)]
    if T.p >= 1:
        reports.append(psi_criterion(T, r0, cfg.z0, **cfg.kw))
    rep.header = ["condition", "verdict", "value", "error", "r0", "exponent"]
    for c in reports:
        rep.rows.append([c.label, c.verdict, c.value, c.error, c.r0, c.exponent])
        rep.summary.append(c.summary())
    rep.add_check("verdicts determined", all(c.verdict != "inconclusive" for c in reports),
                  converged=all(c.verdict != "inconclusive" for c in reports))


def op_jensen(cfg, T, rep):
    g = cfg.radii()
    kappa = None if cfg.kappa == "calibrated" else 1.0
    rep.header = ["r1", "r2", "kappa", "lhs", "lhs_error", "alpha_term", "alpha_error", "ddc_raw",
                  "ddc_scaled", "ddc_error", "residual", "error", "status"]
    for r1, r2 in zip(g[:-1], g[1:]):
        j = jensen_check(T, r1, r2, kappa, cfg.z0, **cfg.kw)
        ok = j.within(3.0)
        status = "pass" if ok else ("flag" if cfg.kappa == "paper" else "fail")
        rep.rows.append([r1, r2, j.kappa, j.lhs, j.lhs_error, j.alpha_term, j.alpha_error, j.ddc_raw,
                         j.ddc_scaled, j.ddc_error, j.residual, j.error, status])
        rep.add_check(f"jensen ({r1:g},{r2:g})", ok, flagged=cfg.kappa == "paper")
    if cfg.kappa == "paper":
        rep.summary.append("kappa = 1 (literal coefficient): nonzero residuals are flagged, not failures")


def op_calibrate(cfg, T, rep):
    try:
        cal = calibrate_kappa(cfg.p, **cfg.kw)
    except CalibrationError as exc:
        rep.add_check("calibration", False)
        rep.summary.append(f"calibration failed: {exc}")
        return
    rep.header = ["p", "kappa", "error", "fixtures"]
    rep.rows = [[cfg.p, cal.kappa, cal.error, " ".join(cal.fixtures)]]
    rep.add_check("calibration", True)
    rep.summary.append(cal.to_text().rstrip())


def op_alpha(cfg, T, rep):
    g = cfg.radii()
    if len(g) != 2:
        raise ConfigError("alpha-mass needs a grid of exactly two radii (eps, r)")
    am = alpha_mass_identity(T, g[0], g[1], _kappa_value(cfg, T.p), **cfg.kw)
    rep.header = ["eps", "r", "kappa", "alpha_mass", "alpha_error", "literal_rhs", "scaled_rhs", "error",
                  "match_literal", "match_scaled"]
    rep.rows = [[am.eps, am.r, am.kappa, am.alpha_mass, am.alpha_error, am.literal_rhs, am.scaled_rhs,
                 am.error, am.matches(scaled=False), am.matches(scaled=True)]]
    rep.add_check("alpha-mass law", am.matches(scaled=True), flagged=cfg.kappa == "paper")


def _family(cfg):
    if cfg.scales is None:
        return None
    return DilatationFamily(tuple(cfg.scales))


def op_cone(cfg, T, rep):
    res = cone_experiment(T, _family(cfg), **cfg.kw)
    rep.header = ["a", "form", "pairing_re", "pairing_im", "error"]
    rep.rows = [[a, lab, v.real, v.imag, e] for a, lab, v, e in res.rows()]
    if res.limit is not None:
        for lab, v, e in zip(res.labels, res.limit, res.limit_error):
            rep.rows.append(["limit", lab, complex(v).real, complex(v).imag, float(e)])
    rep.summary.append(f"cone experiment on {T.name}: {res.verdict} (exponent {res.exponent:.4g})")
    if res.note:
        rep.summary.append(res.note)
    if res.refused:
        rep.add_check("cone hypotheses", False)
    else:
        rep.add_check("cauchy convergence", res.converged, converged=res.verdict != "inconclusive")
    il = None
    if res.converged and not res.refused:
        il = interleaving_check(T, _family(cfg), **cfg.kw)
        rep.add_check("interleaved sequences merge", il.ok)
        rep.summary.append(f"interleaving: {'merged' if il.ok else 'not merged'} (exponent {il.exponent:.4g})")


def op_conic(cfg, T, rep):
    k = _kappa_value(cfg, T.p) if T.p >= 1 else 1.0
    ad = adherence_classify(T, kappa=k, **cfg.kw)
    c = ad.conic_report
    rep.header = ["quantity", "value", "error"]
    rep.rows = [
        ["invariant", c.invariant, 0.0],
        ["nu_constant", c.nu_constant, 0.0],
        ["nu_ddc_constant", c.nu_ddc_constant, 0.0],
        ["pluriharmonic", c.pluriharmonic, 0.0],
        ["alpha_consistent", c.alpha_consistent, 0.0],
    ] + [[key, float(v), 0.0] for key, v in c.details.items()]
    rep.summary.append(f"{T.name}: {ad.classification}")
    if ad.violates_condition_C:
        rep.summary.append("dd^c carries mass at 0: condition (C) fails")
    rep.add_check("conic", c.conic)


def op_coeff(cfg, T, rep):
    a_values = cfg.scales if cfg.scales is not None else (0.5, 0.25, 0.125)
    try:
        masses = coefficient_mass_estimates(T, a_values, seed=cfg.seed, tol=cfg.tol, budget=cfg.budget)
    except ChartInvisibleError as exc:
        rep.add_check("chart visibility", False)
        rep.summary.append(str(exc))
        return
    rep.header = ["a", "class", "mass", "error", "gamma_sum", "gamma_error", "ratio"]
    for m in masses:
        for cls in (1, 2, 3):
            q = m.masses[cls]
            rep.rows.append([m.a, cls, float(np.real(q.value)), q.error, m.gamma_sum, m.gamma_error, m.ratio(cls)])
    rep.add_check("estimates finite", all(math.isfinite(float(np.real(m.masses[1].value))) for m in masses))


def op_blowup(cfg, T, rep):
    k = _kappa_value(cfg, T.p)
    rep.header = ["r", "mass", "mass_error", "bound", "bound_error", "bound_kind", "respected"]
    for r in cfg.radii():
        b = blowup_mass(T, r, kappa=k, **cfg.kw)
        rep.rows.append([r, b.mass, b.mass_error, b.bound, b.bound_error, b.bound_kind, b.respected])
        finite = math.isfinite(b.mass) and math.isfinite(b.bound)
        if finite:
            rep.add_check(f"blow-up bound r={r:g}", b.respected)
        else:
            rep.summary.append(f"r={r:g}: {'mass unbounded' if not b.bounded else 'bound infinite'} ({b.bound_kind})")


def op_restriction(cfg, T, rep):
    r = restriction_identity(T, cfg.k, **cfg.kw)
    rep.header = ["quantity", "u", "value", "error"]
    rep.rows = [["lhs", 0.0, r.lhs, r.lhs_error], ["rhs", 0.0, r.rhs, r.rhs_error]]
    for u, lu, lue, ru, rue in r.truncations:
        rep.rows.append(["lhs_truncated", u, lu, lue])
        rep.rows.append(["rhs_truncated", u, ru, rue])
        rep.add_check(f"truncation order u={u:g}", lu >= ru - 3 * (lue + rue) - 1e-12)
    rep.add_check("both sides agree", r.agree)
    rep.summary += r.notes


def op_list(cfg, T, rep):
    rep.header = ["id", "n", "bidimension", "sign_class", "facts"]
    for info in list_fixtures(cfg.filter):
        facts = "; ".join(f"{f} [{prov}]" for f, prov in info.facts)
        rep.rows.append([info.id, info.n, f"({info.p};{info.p})", info.sign_class, facts])
    rep.add_check("listed", True)


def op_suite(cfg, T, rep):
    ctx = acceptance.Context(seed=cfg.seed, budget=acceptance.PROFILES[cfg.profile], tol=cfg.tol,
                             kappa_mode=cfg.kappa)
    results, csv = acceptance.run_suite(ctx)
    rep.header = acceptance.CSV_HEADER.split(",")
    rep.rows = [line.split(",") for line in csv.splitlines()[1:]]
    for res in results:
        rep.summary.append(res.line())
        for c in res.checks:
            rep.checks.append((f"{res.number}: {c.name}", c.status))
        if not res.in_time:
            rep.checks.append((f"{res.number}: runtime", "fail"))


HANDLERS = {
    "nu": op_nu, "lelong-number": op_lelong, "lambda": op_lambda, "conditions": op_conditions,
    "jensen": op_jensen, "calibrate": op_calibrate, "alpha-mass": op_alpha, "cone": op_cone,
    "conic-check": op_conic, "coeff-masses": op_coeff, "blowup-mass": op_blowup,
    "restriction": op_restriction, "suite": op_suite, "list-fixtures": op_list,
}
NEEDS_FIXTURE = set(OPERATIONS) - {"calibrate", "suite", "list-fixtures"}


# ----------------------------------------------------------------------------
# argument and config handling


def _common(parser: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    parser.add_argument("--config", default=S, help="INI file with an [experiment] section")
    parser.add_argument("--seed", type=int, default=S)
    parser.add_argument("--budget", type=float, default=S, help="evaluation budget per integral")
    parser.add_argument("--tol", type=float, default=S, help="relative tolerance")
    parser.add_argument("--kappa", choices=("paper", "calibrated"), default=S,
                        help="coefficient of the dd^c terms: 1 (literal) or the calibrated value")
    parser.add_argument("--out", default=S, help="CSV output path (default stdout)")
    parser.add_argument("--fixture", default=S)
    parser.add_argument("--grid", default=S, help="comma separated radii")
    parser.add_argument("--scales", default=S, help="comma separated (complex) dilatation scales")
    parser.add_argument("--z0", default=S, help="comma separated complex base point")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pshcurrents", description=__doc__.splitlines()[0])
    _common(parser)
    sub = parser.add_subparsers(dest="operation")
    for op in OPERATIONS:
        sp = sub.add_parser(op)
        _common(sp)
        if op == "suite":
            sp.add_argument("profile", nargs="?", choices=sorted(acceptance.PROFILES), default=argparse.SUPPRESS)
        if op == "list-fixtures":
            sp.add_argument("filter", nargs="?", default=argparse.SUPPRESS)
        if op == "restriction":
            sp.add_argument("--k", type=int, default=argparse.SUPPRESS, help="coordinate index of the hyperplane")
        if op == "calibrate":
            sp.add_argument("--p", type=int, default=argparse.SUPPRESS, help="bidimension")
    return parser


_CONVERT = {
    "seed": int,
    "budget": lambda v: int(float(v)),
    "tol": float,
    "k": int,
    "p": int,
    "grid": lambda v: _floats(v) if isinstance(v, str) else tuple(v),
    "scales": lambda v: _floats(v, complex) if isinstance(v, str) else tuple(v),
    "z0": lambda v: _floats(v, complex) if isinstance(v, str) else tuple(v),
}


def load_config(path: str) -> dict:
    cp = configparser.ConfigParser()
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    if "experiment" not in cp:
        raise ConfigError("config needs an [experiment] section")
    return dict(cp["experiment"])


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    values = {}
    given = vars(args)
    if "config" in given:
        values.update(load_config(given["config"]))
    values.update({k: v for k, v in given.items() if k != "config" and v is not None})
    if not values.get("operation"):
        raise ConfigError("no operation given (subcommand or 'operation' in the config)")
    known = set(ExperimentConfig.__dataclass_fields__)
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    try:
        for key, conv in _CONVERT.items():
            if key in values and values[key] is not None:
                values[key] = conv(values[key])
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    return ExperimentConfig(**values).validate()


def run(cfg: ExperimentConfig) -> RunReport:
    rep = RunReport(cfg, [])
    T = None
    if cfg.operation in NEEDS_FIXTURE:
        try:
            T = get_fixture(cfg.fixture)
        except UnknownFixtureError:
            raise ConfigError(f"unknown fixture {cfg.fixture!r}") from None
        if cfg.z0 is not None and len(cfg.z0) != T.n:
            raise ConfigError(f"z0 must have {T.n} coordinates")
    t = time.perf_counter()
    HANDLERS[cfg.operation](cfg, T, rep)
    rep.seconds = time.perf_counter() - t
    return rep


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        rep = run(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NotImplementedError, ChartInvisibleError) as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_FAIL
    csv = rep.csv()
    info = sys.stderr
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(csv)
        info = sys.stdout
    else:
        sys.stdout.write(csv)
    for line in rep.summary:
        print(line, file=info)
    bad = [(n, s) for n, s in rep.checks if s not in ("pass",)]
    for name, status in bad:
        print(f"{status.upper()}: {name}", file=info)
    print(f"{cfg.operation}: exit {rep.exit_code} ({rep.seconds:.1f} s)", file=info)
    return rep.exit_code


if __name__ == "__main__":
    sys.exit(main())

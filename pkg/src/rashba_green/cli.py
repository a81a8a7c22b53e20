"""Command-line front end: ``rashba-green {eval,region,table,verify}``.

Exit codes: 0 ok, 1 other errors, 2 invalid zeta, 3 no convergent
representation, 4 truncation or quadrature failure, 5 failed verification.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import GreenError, InvalidZeta, NoConvergence, OutOfRegion, QuadFailure
from .greens import (
    EPS0, EvalPoint, PhysicalParams, condition_flags, dpm_g1_result, evaluate,
    g1_at_origin_result, g1_result, g2_ren_at_origin_result, g2_result, in_resolvent_set,
    sigma_threshold, u_triple, v_triple,
)
from .oracle import macdonald_sum_g1, macdonald_sum_g2, quad_g1, quad_g2
from .series_engine import SeriesOptions, SeriesResult
from .xy_series import Rep, SeriesParams, boundary_reps, classify_xprime_region

EXIT_OK, EXIT_ERROR, EXIT_ZETA, EXIT_REGION, EXIT_CONVERGENCE, EXIT_VERIFY = 0, 1, 2, 3, 4, 5
SWEEP_VARS = ("r", "alpha", "beta", "zeta_re")
_VALUE_FLAGS = {"--zeta", "--x", "--sweep", "--alpha", "--beta"}


def parse_complex(text: str) -> complex:
    """Parse ``a``, ``a+bi``, ``a-bi`` or ``bi`` (``j`` also accepted), no spaces."""
    s = text.strip()
    if " " in s:
        raise ValueError(f"cannot parse complex number {text!r}")
    try:
        return complex(s.replace("i", "j"))
    except ValueError:
        raise ValueError(f"cannot parse complex number {text!r}") from None


def parse_point(text: str) -> tuple:
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 3:
        raise ValueError("--x needs three comma-separated components")
    return tuple(parts)


@dataclass(frozen=True)
class Sweep:
    variable: str
    start: float
    stop: float
    count: int

    @classmethod
    def parse(cls, text: str) -> "Sweep":
        var, *rest = text.split(":")
        if var not in SWEEP_VARS or len(rest) != 3:
            raise ValueError(f"--sweep must be VAR:START:STOP:COUNT with VAR in {SWEEP_VARS}")
        count = int(rest[2])
        if count < 0:
            raise ValueError("sweep count must be nonnegative")
        return cls(var, float(rest[0]), float(rest[1]), count)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class RunConfig:
    command: str
    alpha: float
    beta: float
    zeta: complex
    point: tuple = (0.0, 0.0, 1.0)
    sweep: Sweep | None = None
    tol_rel: float = 1e-12
    max_terms: int = 2000
    rep: str = "auto"
    fmt: str = "text"
    output: str | None = None
    threads: int = 1
    check_tol: float = 1e-6

    @property
    def options(self) -> SeriesOptions:
        return SeriesOptions(self.tol_rel, self.max_terms, self.max_terms)

    def params(self) -> PhysicalParams:
        return PhysicalParams(self.alpha, self.beta, self.zeta)


# ---------------------------------------------------------------------------
# serialization helpers

def cjson(z) -> dict | None:
    if z is None:
        return None
    z = complex(z)
    return {"re": z.real, "im": z.imag}


def _result_json(res: SeriesResult | None) -> dict | None:
    if res is None:
        return None
    return {"value": cjson(res.value), "representation": res.representation,
            "terms": int(res.terms_used), "error_estimate": float(res.est_error),
            "slow_convergence": bool(res.slow_convergence)}


def _fmt_c(z) -> str:
    if z is None:
        return "n/a"
    z = complex(z)
    return f"{z.real:.17g} {'+' if z.imag >= 0 else '-'} {abs(z.imag):.17g}i"


def _g(x: float) -> str:
    return f"{x:.17g}"


def _params_json(cfg: RunConfig) -> dict:
    return {"alpha": cfg.alpha, "beta": cfg.beta, "zeta": cjson(cfg.zeta)}


# ---------------------------------------------------------------------------
# commands

def _kernels(cfg: RunConfig, p: PhysicalParams, point: EvalPoint) -> dict:
    """Scalar kernels and matrix at one point; origin values when r = 0."""
    opts, rep = cfg.options, cfg.rep
    if point.r < EPS0:
        return {"g1": g1_at_origin_result(p, opts=opts), "g2": None,
                "g2_ren": g2_ren_at_origin_result(p, opts=opts), "dp": None, "dm": None,
                "matrix": None}
    ev = evaluate(point, p, rep, opts=opts)
    dp, dm = ev.dp, ev.dm
    if dp is None:
        dp = dpm_g1_result(point, p, 1, rep, opts=opts)
        dm = dpm_g1_result(point, p, -1, rep, opts=opts)
    return {"g1": ev.g1, "g2": ev.g2, "g2_ren": None, "dp": dp, "dm": dm, "matrix": ev.matrix}


def cmd_eval(cfg: RunConfig) -> tuple[int, dict]:
    p = cfg.params()
    point = EvalPoint(*cfg.point)
    k = _kernels(cfg, p, point)
    m = k["matrix"]
    report = {
        "command": "eval", "params": _params_json(cfg), "point": list(cfg.point), "r": point.r,
        "g1": _result_json(k["g1"]), "g2": _result_json(k["g2"]),
        "g2_ren": _result_json(k["g2_ren"]),
        "dp_g1": _result_json(k["dp"]), "dm_g1": _result_json(k["dm"]),
        "matrix": None if m is None else {n: cjson(getattr(m, n)) for n in ("g11", "g12", "g21", "g22")},
    }
    return EXIT_OK, report


def _region_sets(z, p: SeriesParams) -> dict:
    reps = classify_xprime_region(z, p)
    edge = boundary_reps(z, p)
    return {rep.value: {"converges": rep in reps, "boundary": rep in edge}
            for rep in (Rep.XP1, Rep.XP2, Rep.XP3)}


def cmd_region(cfg: RunConfig) -> tuple[int, dict]:
    sigma = sigma_threshold(cfg.alpha, cfg.beta)
    valid = in_resolvent_set(cfg.alpha, cfg.beta, cfg.zeta)
    flags = condition_flags(cfg.alpha, cfg.beta, cfg.zeta)
    r = EvalPoint(*cfg.point).r
    report = {
        "command": "region", "params": _params_json(cfg), "sigma": sigma, "valid_zeta": valid,
        "note": None if valid else "zeta inside essential spectrum interval - invalid",
        "conditions": {"a": flags.a, "b": flags.b, "c": flags.c},
        "v": None, "u": None,
    }
    if valid:
        p = cfg.params()
        if cfg.beta >= EPS0:
            report["v"] = _region_sets(v_triple(p, r), SeriesParams(0.5, 1.5))
        report["u"] = _region_sets(u_triple(p, r), SeriesParams(0.5, 1.5))
    return EXIT_OK, report


TABLE_COLUMNS = [
    "index", "variable", "value", "g1_re", "g1_im", "g2_re", "g2_im", "dp_g1_re", "dp_g1_im",
    "g1_terms", "g2_terms", "dp_terms", "g1_err", "g2_err", "dp_err", "representation", "error",
]


def _table_row(cfg: RunConfig, sweep: Sweep, i: int, value: float) -> dict:
    row = {c: "" for c in TABLE_COLUMNS}
    row.update(index=i, variable=sweep.variable, value=float(value))
    point = np.asarray(cfg.point, dtype=float)
    alpha, beta, zeta = cfg.alpha, cfg.beta, cfg.zeta
    if sweep.variable == "r":
        norm = np.linalg.norm(point)
        direction = point / norm if norm > 0 else np.array([0.0, 0.0, 1.0])
        point = direction * value
    elif sweep.variable == "alpha":
        alpha = value
    elif sweep.variable == "beta":
        beta = value
    else:
        zeta = complex(value, zeta.imag)
    try:
        p = PhysicalParams(alpha, beta, zeta)
        pt = EvalPoint(*point)
        opts = cfg.options
        if pt.r < EPS0:
            raise OutOfRegion("table rows need r > 0")
        r1 = g1_result(pt, p, cfg.rep, opts=opts)
        r2 = g2_result(pt, p, cfg.rep, opts=opts)
        rd = dpm_g1_result(pt, p, 1, cfg.rep, opts=opts)
    except (GreenError, ValueError) as exc:
        row["error"] = type(exc).__name__
        return row
    for name, res in (("g1", r1), ("g2", r2), ("dp_g1", rd)):
        row[f"{name}_re"], row[f"{name}_im"] = res.value.real, res.value.imag
    row.update(g1_terms=r1.terms_used, g2_terms=r2.terms_used, dp_terms=rd.terms_used,
               g1_err=r1.est_error, g2_err=r2.est_error, dp_err=rd.est_error,
               representation=r1.representation)
    return row


def cmd_table(cfg: RunConfig) -> tuple[int, list]:
    sweep = cfg.sweep
    if sweep is None:
        raise ValueError("table needs --sweep")
    values = sweep.values()
    job = lambda iv: _table_row(cfg, sweep, *iv)
    if cfg.threads > 1 and len(values) > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            rows = list(pool.map(job, enumerate(values)))
    else:
        rows = [job(iv) for iv in enumerate(values)]
    return EXIT_OK, rows


def _rel(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def cmd_verify(cfg: RunConfig) -> tuple[int, dict]:
    p = cfg.params()
    r = EvalPoint(*cfg.point).r
    if r < EPS0:
        raise OutOfRegion("verify needs r > 0")
    opts = cfg.options
    s1 = g1_result(r, p, cfg.rep, opts=opts).value
    s2 = g2_result(r, p, cfg.rep, opts=opts).value
    checks = []

    def add(name, series, ref):
        checks.append({"check": name, "series": cjson(series), "reference": cjson(ref),
                       "rel_deviation": _rel(series, ref)})

    add("g1 vs quadrature", s1, quad_g1(r, p))
    add("g2 vs quadrature", s2, quad_g2(r, p))
    if p.beta > 0 or p.alpha == 0:
        add("g1 vs Macdonald sum", s1, macdonald_sum_g1(r, p))
        add("g2 vs Macdonald sum", s2, macdonald_sum_g2(r, p))
    if p.alpha < EPS0:
        # the closed forms are the default at alpha = 0, so compare with the series
        add("g1 closed form vs series", g1_result(r, p, method="series", opts=opts).value, s1)
        add("g2 closed form vs series", g2_result(r, p, method="series", opts=opts).value, s2)
    worst = max(c["rel_deviation"] for c in checks)
    passed = worst <= cfg.check_tol
    report = {"command": "verify", "params": _params_json(cfg), "r": r, "checks": checks,
              "max_rel_deviation": worst, "tolerance": cfg.check_tol, "passed": passed}
    return (EXIT_OK if passed else EXIT_VERIFY), report


COMMANDS = {"eval": cmd_eval, "region": cmd_region, "table": cmd_table, "verify": cmd_verify}


# ---------------------------------------------------------------------------
# rendering

def _text_report(report: dict) -> str:
    lines = []
    cmd = report["command"]
    par = report["params"]
    lines.append(f"alpha = {_g(par['alpha'])}, beta = {_g(par['beta'])}, "
                 f"zeta = {_fmt_c(complex(par['zeta']['re'], par['zeta']['im']))}")
    if cmd == "eval":
        lines.append(f"x = {report['point']}, r = {_g(report['r'])}")
        for key, label in (("g1", "G1"), ("g2", "G2"), ("g2_ren", "G2ren"),
                           ("dp_g1", "D+G1"), ("dm_g1", "D-G1")):
            res = report[key]
            if res is None:
                continue
            v = res["value"]
            lines.append(f"{label:6s}= {_fmt_c(complex(v['re'], v['im']))}   "
                         f"[{res['representation']}, terms={res['terms']}, "
                         f"err={res['error_estimate']:.3g}]")
        if report["matrix"] is not None:
            for key, v in report["matrix"].items():
                lines.append(f"{key}   = {_fmt_c(complex(v['re'], v['im']))}")
        else:
            lines.append("matrix: G2 is singular at the origin; G2ren reported instead")
    elif cmd == "region":
        lines.append(f"sigma = {_g(report['sigma'])}")
        if report["valid_zeta"]:
            lines.append("zeta in resolvent set: yes")
        else:
            lines.append(f"zeta in resolvent set: no ({report['note']})")
        c = report["conditions"]
        lines.append(f"conditions: (a) {c['a']}  (b) {c['b']}  (c) {c['c']}")
        for key in ("v", "u"):
            if report[key] is None:
                continue
            parts = [f"{rep}: {'yes' if d['converges'] else 'no'}{' (boundary)' if d['boundary'] else ''}"
                     for rep, d in report[key].items()]
            lines.append(f"{key}-triple regions: " + ", ".join(parts))
    elif cmd == "verify":
        for c in report["checks"]:
            lines.append(f"{c['check']:28s} rel deviation {c['rel_deviation']:.3e}")
        lines.append(f"max rel deviation {report['max_rel_deviation']:.3e} "
                     f"(tolerance {report['tolerance']:g}): {'PASS' if report['passed'] else 'FAIL'}")
    return "\n".join(lines) + "\n"


def _csv_value(v) -> str:
    if isinstance(v, float):
        return _g(v)
    return str(v)


def render(cfg: RunConfig, payload) -> str:
    if cfg.command == "table":
        if cfg.fmt == "json":
            return json.dumps({"params": _params_json(cfg), "sweep": vars(cfg.sweep),
                               "columns": TABLE_COLUMNS, "rows": payload}, indent=2) + "\n"
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TABLE_COLUMNS)
        for row in payload:
            w.writerow([_csv_value(row[c]) for c in TABLE_COLUMNS])
        return buf.getvalue()
    if cfg.fmt == "json":
        return json.dumps(payload, indent=2) + "\n"
    if cfg.fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["quantity", "re", "im"])
        for key, v in _flat_values(payload):
            w.writerow([key, _g(v.real), _g(v.imag)])
        return buf.getvalue()
    return _text_report(payload)


def _flat_values(report: dict):
    for key in ("g1", "g2", "g2_ren", "dp_g1", "dm_g1"):
        res = report.get(key)
        if res is not None:
            yield key, complex(res["value"]["re"], res["value"]["im"])
    for key, v in (report.get("matrix") or {}).items():
        yield key, complex(v["re"], v["im"])
    for c in report.get("checks", []):
        yield c["check"], complex(c["rel_deviation"], 0)


# ---------------------------------------------------------------------------
# argument handling

def _attach_values(argv: list) -> list:
    """Join ``--flag value`` so values such as ``-4+0i`` are not taken for options."""
    out, i = [], 0
    while i < len(argv):
        tok = argv[i]
        if tok in _VALUE_FLAGS and i + 1 < len(argv):
            out.append(f"{tok}={argv[i + 1]}")
            i += 2
        else:
            out.append(tok)
            i += 1
    return out


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, required=True, help="spin-orbit strength (>= 0)")
    common.add_argument("--beta", type=float, required=True, help="Zeeman field (>= 0)")
    common.add_argument("--zeta", type=parse_complex, required=True,
                        help="spectral parameter, e.g. -4, -2+1i, -3-0.5i")
    common.add_argument("--x", type=parse_point, default=(0.0, 0.0, 1.0), metavar="X1,X2,X3",
                        help="evaluation point (default 0,0,1)")
    common.add_argument("--rep", choices=["auto", "a", "b", "c"], default="auto",
                        help="force the X' representation of condition (a), (b) or (c)")
    common.add_argument("--tol", type=float, default=1e-12, help="relative series tolerance")
    common.add_argument("--max-terms", type=int, default=2000, help="truncation cap per series")
    common.add_argument("--format", dest="fmt", choices=["text", "json", "csv"], default="text")
    common.add_argument("--output", help="write to this file instead of stdout")
    common.add_argument("--threads", type=int, default=1, help="worker threads for table sweeps")

    parser = argparse.ArgumentParser(prog="rashba-green",
                                     description="Green's function of the 3D Rashba Hamiltonian")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("eval", parents=[common], help="evaluate the Green's matrix at one point")
    sub.add_parser("region", parents=[common], help="diagnose spectrum and convergence regions")
    t = sub.add_parser("table", parents=[common], help="sweep one parameter into a table")
    t.add_argument("--sweep", type=Sweep.parse, required=True, metavar="VAR:START:STOP:COUNT",
                   help=f"VAR one of {', '.join(SWEEP_VARS)}")
    v = sub.add_parser("verify", parents=[common], help="compare the series with the oracles")
    v.add_argument("--check-tol", type=float, default=1e-6,
                   help="largest accepted relative deviation (default 1e-6)")
    return parser


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    return RunConfig(command=ns.command, alpha=ns.alpha, beta=ns.beta, zeta=ns.zeta, point=ns.x,
                     sweep=getattr(ns, "sweep", None), tol_rel=ns.tol, max_terms=ns.max_terms,
                     rep=ns.rep, fmt=ns.fmt, output=ns.output, threads=max(1, ns.threads),
                     check_tol=getattr(ns, "check_tol", 1e-6))


def _exit_code(exc: Exception) -> int:
    if isinstance(exc, InvalidZeta):
        return EXIT_ZETA
    if isinstance(exc, OutOfRegion):
        return EXIT_REGION
    if isinstance(exc, (NoConvergence, QuadFailure)):
        return EXIT_CONVERGENCE
    return EXIT_ERROR


def run(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        sweeps_params = cfg.sweep is not None and cfg.sweep.variable != "r"
        if cfg.command != "region" and not sweeps_params:
            cfg.params()  # reject an invalid zeta before any computation
        code, payload = COMMANDS[cfg.command](cfg)
    except (GreenError, ValueError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=stderr)
        return _exit_code(exc)
    text = render(cfg, payload)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        stdout.write(text)
    return code


def main(argv: list | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    ns = build_parser().parse_args(_attach_values(argv))
    return run(config_from_args(ns))


if __name__ == "__main__":
    sys.exit(main())

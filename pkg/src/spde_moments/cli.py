"""Command-line front end.

Exit codes: 0 success, 1 domain error (failed checks, incompatible method,
failed fit), 2 usage or config parse error.
"""
from __future__ import annotations

import argparse
import csv
import math
import os
import sys
import time
from itertools import product
from typing import Iterable, Optional

from . import __version__, _backend, analysis, fieldsim, moment_mc, oracles, specfun
from .config import ConfigDomainError, ConfigError, ExperimentConfig, load_config
from .model import (
    DO,
    Bounded,
    EquationSpec,
    Generalized,
    NoiseSpec,
    Riesz,
    SpaceWhite,
    WhiteTime,
    dalang_integral,
    predicted_exponents,
    validate,
)

COLUMNS = [
    "method", "equation", "d", "family", "H", "a1", "a2", "spatial", "spatial_param",
    "t", "order", "estimate", "stderr", "log_estimate", "n_rep", "quad_steps", "seed",
    "wall_ms", "config_hash",
]

FIT_COLUMNS = [
    "mode", "config_hash", "method", "group", "rho_hat", "c_hat", "r_squared",
    "points_used", "rho_stderr", "ci_low", "ci_high", "predicted", "tol", "pass",
]


class DomainError(Exception):
    pass


# ---------------------------------------------------------------------------
# CSV helpers


def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return '"true"' if v else '"false"'
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".17g")
    s = str(v)
    return '"' + s.replace('"', '""') + '"'


def write_csv(fh, columns: list[str], rows: Iterable[dict]) -> None:
    fh.write(",".join(_cell(c) for c in columns) + "\n")
    for row in rows:
        fh.write(",".join(_cell(row.get(c)) for c in columns) + "\n")


def _open_out(path: Optional[str]):
    if path in (None, "-"):
        return sys.stdout, False
    return open(path, "w", encoding="utf-8", newline=""), True


# ---------------------------------------------------------------------------
# validate


def _report_checks(cfg: ExperimentConfig) -> tuple[list[str], bool]:
    eq, noise = cfg.equation, cfg.noise
    lines = []
    problems = {p.condition: p for p in validate(eq, noise)}
    conds = ["H < 1", "u0 >= 0"]
    conds.insert(0, "H > a/4" if eq.kind == "heat" else "H > (a-2)/2")
    if isinstance(noise.spatial, Riesz):
        conds.append("alpha < min(2,d)")
    if isinstance(noise.spatial, SpaceWhite):
        conds.append("d = 1")
    if eq.kind == "wave":
        conds.append("d <= 3")
    for c in conds:
        if c in problems:
            lines.append(f"FAIL  {c}: {problems[c].message}")
        else:
            lines.append(f"PASS  {c}")
    ok = not problems
    if not isinstance(noise.spatial, Bounded):
        dal = dalang_integral(noise.spatial, eq.d)
        if dal.finite:
            lines.append(f"PASS  Dalang integral finite: {dal.value:.10g}")
        else:
            lines.append(f"FAIL  Dalang integral diverges as {dal.failing_tail}")
            ok = False
    else:
        lines.append("PASS  Dalang integral finite (bounded covariance)")
    return lines, ok


def cmd_validate(args) -> int:
    cfg = load_config(args.config)
    _maybe_emit(cfg, args)
    lines, ok = _report_checks(cfg)
    print(f"config {cfg.hash}: {cfg.equation.kind} d={cfg.equation.d}, "
          f"{cfg.noise.family} noise H={cfg.noise.H:g}, a={cfg.noise.a:g}")
    for ln in lines:
        print(ln)
    return 0 if ok else 1


def _maybe_emit(cfg: ExperimentConfig, args) -> None:
    if getattr(args, "emit_config", None):
        with open(args.emit_config, "w", encoding="utf-8") as fh:
            fh.write(cfg.to_json())


# ---------------------------------------------------------------------------
# moment


def _spatial_cols(sp) -> tuple[str, Optional[float]]:
    if isinstance(sp, Bounded):
        return ("bounded" if sp.is_constant else "gaussian-bump"), float(sp.A0)
    if isinstance(sp, Riesz):
        return "riesz", float(sp.alpha)
    return "space-white", None


def _base_row(cfg: ExperimentConfig, method: str) -> dict:
    eq, noise = cfg.equation, cfg.noise
    sp, param = _spatial_cols(noise.spatial)
    tf = noise.time
    return {
        "method": method,
        "equation": eq.kind,
        "d": int(eq.d),
        "family": noise.family,
        "H": float(noise.H),
        "a1": float(tf.a1) if isinstance(tf, Generalized) else None,
        "a2": float(tf.a2) if isinstance(tf, Generalized) else None,
        "spatial": sp,
        "spatial_param": param,
        "seed": int(cfg.run["seed"]),
        "config_hash": cfg.hash,
    }


def _oracle_value(cfg: ExperimentConfig, t: float, n: int) -> tuple[float, float]:
    eq, noise = cfg.equation, cfg.noise
    sp = noise.spatial
    if not (isinstance(sp, Bounded) and sp.is_constant):
        raise DomainError("oracle method needs a constant bounded covariance")
    if eq.kind == "heat":
        if eq.u0 <= 0:
            raise DomainError("oracle method needs u0 > 0")
        x = sp.A0 * oracles.time_variance(noise, t) if t > 0 else 0.0
        log_v = n * math.log(eq.u0) + oracles.pair_rate(n) * x
        return (math.exp(log_v) if log_v < 709 else math.inf), log_v
    if not isinstance(noise.time, (WhiteTime, DO)):
        raise DomainError("wave oracle covers white-in-time and DO noise only")
    if n != 2:
        raise DomainError("wave oracle covers the second moment only")
    eq.require_wave_dim()
    v, _ = oracles.constant_f_reference("wave", 2, sp.A0, noise.H, t, eq.u0, eq.v0,
                                        steps=cfg.run["volterra_steps"])
    return v, (math.log(v) if v > 0 else math.nan)


def _fieldsim_config(cfg: ExperimentConfig, t: float) -> fieldsim.LatticeConfig:
    eq, noise = cfg.equation, cfg.noise
    if eq.kind != "heat" or eq.d != 1:
        raise DomainError("field simulator covers the heat equation in d = 1 only")
    if not isinstance(noise.time, (WhiteTime, DO)):
        raise DomainError("field simulator covers white-in-time and DO noise only")
    if not isinstance(noise.spatial, Bounded):
        raise DomainError("field simulator needs a bounded covariance")
    lat = cfg.run["lattice"]
    L = lat.get("L", fieldsim.default_half_width(t))
    n_x = lat.get("n_x", 64)
    dx = 2 * L / n_x
    n_t = lat.get("n_t", max(1, math.ceil(t / dx**2)))
    return fieldsim.LatticeConfig(L, n_x, t, n_t, noise.H, noise.spatial,
                                  cfg.run["n_rep"], cfg.run["seed"], eq.u0)


def _trace_rows(t, n, est: moment_mc.MomentEstimate):
    tr = est.trace
    if tr is None:
        return
    for r in range(tr.log_abs.size):
        yield {
            "t": float(t), "order": int(n), "replica": r,
            "jumps": int(tr.jumps[r]) if tr.jumps is not None else None,
            "log_abs": float(tr.log_abs[r]), "sign": float(tr.sign[r]),
        }


def run_moments(cfg: ExperimentConfig, method: str, workers: int = 1, trace: bool = False,
                timing: bool = True, dump_path: Optional[str] = None):
    eq, noise, run = cfg.equation, cfg.noise, cfg.run
    if not run["t"]:
        raise DomainError("run.t is empty: nothing to compute")
    base = _base_row(cfg, method)
    rows, traces = [], []
    fields = {}
    for t, n in product(run["t"], run["n"]):
        t0 = time.perf_counter()
        row = dict(base, t=float(t), order=int(n))
        if method == "poisson":
            fn = moment_mc.nth_moment_heat_mc if eq.kind == "heat" else moment_mc.nth_moment_wave_mc
            est = fn(eq, noise, t, run["x"], n, run["n_rep"], run["seed"], workers=workers,
                     clip=run["clip"], keep_trace=trace)
            row.update(estimate=est.mean, stderr=est.stderr, log_estimate=est.log_mean,
                       n_rep=est.n_rep, quad_steps=None)
            traces.extend(_trace_rows(t, n, est))
        elif method == "fk":
            if eq.kind != "heat":
                raise DomainError("the Feynman-Kac estimator is for the heat equation")
            est = moment_mc.fk_moment_generalized_mc(
                noise, n, t, run["n_rep"], run["quad_steps"], run["seed"], d=eq.d, u0=eq.u0,
                workers=workers, clip=run["clip"], keep_trace=trace)
            row.update(estimate=est.mean, stderr=est.stderr, log_estimate=est.log_mean,
                       n_rep=est.n_rep, quad_steps=run["quad_steps"])
            traces.extend(_trace_rows(t, n, est))
        elif method == "oracle":
            v, lv = _oracle_value(cfg, t, n)
            row.update(estimate=v, stderr=0.0, log_estimate=lv, n_rep=0, quad_steps=None)
        elif method == "fieldsim":
            if n not in (1, 2, 3):
                raise DomainError("field simulator reports moments of order 1, 2 and 3")
            lat = _fieldsim_config(cfg, t)
            if t not in fields:
                # one simulation serves every order at this time
                fields[t] = fieldsim.simulate_do_field(lat, workers=workers)
                if dump_path:
                    stem, ext = os.path.splitext(dump_path)
                    fieldsim.dump_fields(f"{stem}.t{float(t)!r}{ext}", lat, fields[t])
            m, se = fields[t].at(n, lat.center)
            row.update(estimate=m, stderr=se, log_estimate=math.log(m) if m > 0 else math.nan,
                       n_rep=lat.n_rep, quad_steps=lat.n_t)
        else:
            raise DomainError(f"unknown method {method!r}")
        row["wall_ms"] = (time.perf_counter() - t0) * 1e3 if timing else None
        rows.append(row)
    return rows, traces


def _derived(path: Optional[str], suffix: str, flag: str) -> str:
    if path in (None, "-"):
        raise DomainError(f"{flag} needs an output file (--out or output.csv)")
    stem, _ = os.path.splitext(path)
    return stem + suffix


def write_dat(path: str, rows: list[dict]) -> None:
    """Blocks of ``t estimate`` pairs, one block per order, blank-line separated."""
    orders = sorted({r["order"] for r in rows})
    with open(path, "w", encoding="utf-8") as fh:
        for i, n in enumerate(orders):
            if i:
                fh.write("\n\n")
            fh.write(f"# order {n}: t estimate\n")
            for r in rows:
                if r["order"] == n:
                    fh.write(f"{r['t']:.17g} {r['estimate']:.17g}\n")


def cmd_moment(args) -> int:
    cfg = load_config(args.config)
    _maybe_emit(cfg, args)
    method = args.method or cfg.run["method"]
    out_path = args.out or cfg.output.get("csv")
    trace = args.trace or cfg.output["trace"]
    dump = args.dump_fields or cfg.output["dump_fields"]
    trace_path = _derived(out_path, ".trace.csv", "--trace") if trace else None
    dump_path = _derived(out_path, ".fields.csv", "--dump-fields") if dump else None
    if dump and method != "fieldsim":
        raise DomainError("--dump-fields applies to the fieldsim method only")
    try:
        rows, traces = run_moments(cfg, method, args.workers, bool(trace), not args.no_timing,
                                   dump_path)
    except (moment_mc.IncompatibleMethod, fieldsim.StabilityError) as exc:
        raise DomainError(str(exc)) from None
    except ValueError as exc:
        raise DomainError(str(exc)) from None
    fh, close = _open_out(out_path)
    try:
        write_csv(fh, COLUMNS, rows)
    finally:
        if close:
            fh.close()
    if trace_path:
        with open(trace_path, "w", encoding="utf-8", newline="") as tf:
            write_csv(tf, ["t", "order", "replica", "jumps", "log_abs", "sign"], traces)
    if args.dat:
        write_dat(args.dat, rows)
    return 0


# ---------------------------------------------------------------------------
# fit


def _num(s: str) -> Optional[float]:
    return float(s) if s not in ("", None) else None


def _prediction(row: dict):
    sp = row["spatial"]
    param = _num(row["spatial_param"])
    if sp in ("bounded", "gaussian-bump"):
        spatial = Bounded(1.0)
    elif sp == "riesz":
        spatial = Riesz(param)
    else:
        spatial = SpaceWhite()
    H = float(row["H"])
    time_family = DO(H) if H < 1 else Generalized(0.0, 2 * H - 2)
    eq = EquationSpec(row["equation"], int(row["d"]))
    return predicted_exponents(eq, NoiseSpec(time_family, spatial))


def read_rows(path: str) -> list[dict]:
    try:
        with open(path, encoding="utf-8", newline="") as fh:
            return list(csv.DictReader(fh))
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None


def run_fit(rows: list[dict], mode: str, predict: bool, tol: float,
            config_hash: Optional[str] = None, threshold: float = analysis.LOG_THRESHOLD):
    if config_hash:
        rows = [r for r in rows if r["config_hash"] == config_hash]
    if not rows:
        raise DomainError("no rows to fit")
    hashes = sorted({r["config_hash"] for r in rows})
    if len(hashes) > 1:
        raise DomainError(f"rows mix {len(hashes)} config hashes; select one with --hash")
    key_col, x_col = ("order", "t") if mode == "time" else ("t", "order")
    groups: dict = {}
    for r in rows:
        groups.setdefault((r["method"], r[key_col]), []).append(r)
    out, all_pass = [], True
    for (method, key), grp in sorted(groups.items(), key=lambda kv: (kv[0][0], float(kv[0][1]))):
        samples = [(float(r[x_col]), _num(r["log_estimate"]) or math.nan) for r in grp]
        fitter = analysis.fit_time_exponent if mode == "time" else analysis.fit_order_exponent
        try:
            fit = fitter(samples, threshold=threshold)
        except analysis.FitError as exc:
            raise DomainError(f"{method} {key_col}={key}: {exc}") from None
        row = {
            "mode": mode, "config_hash": hashes[0], "method": method, "group": float(key),
            "rho_hat": fit.rho_hat, "c_hat": fit.c_hat, "r_squared": fit.r_squared,
            "points_used": fit.points_used, "rho_stderr": fit.rho_stderr,
            "ci_low": float(fit.ci95[0]), "ci_high": float(fit.ci95[1]),
        }
        if predict:
            cmp = analysis.compare_exponents(fit, _prediction(grp[0]), tol, mode)
            row.update(predicted=cmp.predicted, tol=tol, **{"pass": cmp.passed})
            all_pass &= cmp.passed
        out.append(row)
    return out, all_pass


def cmd_fit(args) -> int:
    rows = read_rows(args.csv)
    fits, ok = run_fit(rows, args.mode, args.predict, args.tol, args.hash, args.threshold)
    fh, close = _open_out(args.out)
    try:
        write_csv(fh, FIT_COLUMNS, fits)
    finally:
        if close:
            fh.close()
    for f in fits:
        msg = f"{f['method']} {args.mode}: rho_hat = {f['rho_hat']:.6g} (r^2 = {f['r_squared']:.6g})"
        if args.predict:
            msg += f", predicted {f['predicted']:.6g} +/- {args.tol:g}: {'pass' if f['pass'] else 'FAIL'}"
        print(msg, file=sys.stderr)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# specfun


def cmd_specfun(args) -> int:
    a = args.args
    name = args.name
    try:
        if name == "gamma-star":
            v = specfun.incomplete_gamma_star(*a[:2]).value
        elif name == "beta":
            v = specfun.beta_fn(*a[:2])
        elif name == "frac-int":
            v = specfun.frac_int_series(*a[:5]).value
        elif name == "upsilon":
            v = specfun.upsilon_discounted(args.kind, *a[:5])
        elif name == "gamma-integral":
            v = specfun.gamma_time_integral(*a[:3])
        elif name == "sup-gamma":
            v = specfun.sup_gamma_slice(*a[:3])
        elif name == "lemma-a1":
            v = specfun.series_sum_lemma_a1(*a[:2])
        else:  # guarded by argparse choices
            raise DomainError(name)
    except TypeError:
        raise ConfigError(f"specfun {name}: wrong number of arguments") from None
    except ValueError as exc:
        raise DomainError(str(exc)) from None
    print(format(v, ".17g"))
    return 0


_SPECFUN_ARITY = {
    "gamma-star": 2, "beta": 2, "frac-int": 5, "upsilon": 5,
    "gamma-integral": 3, "sup-gamma": 3, "lemma-a1": 2,
}


def cmd_version(args) -> int:
    print(f"spde-moments {__version__} (kernels: {_backend.name})")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spde-moments", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check admissibility and Dalang's condition")
    v.add_argument("--config", required=True)
    v.add_argument("--emit-config", metavar="PATH")
    v.set_defaults(func=cmd_validate)

    m = sub.add_parser("moment", help="compute moments into CSV rows")
    m.add_argument("--config", required=True)
    m.add_argument("--method", choices=["poisson", "fk", "oracle", "fieldsim"])
    m.add_argument("--out", metavar="PATH")
    m.add_argument("--workers", type=int, default=1)
    m.add_argument("--trace", action="store_true", help="per-replica CSV next to --out")
    m.add_argument("--dump-fields", action="store_true", help="field snapshots next to --out")
    m.add_argument("--emit-config", metavar="PATH")
    m.add_argument("--no-timing", action="store_true", help="leave wall_ms empty")
    m.add_argument("--dat", metavar="PATH", help="also write (t, estimate) columns")
    m.set_defaults(func=cmd_moment)

    f = sub.add_parser("fit", help="fit growth exponents from moment CSV rows")
    f.add_argument("--csv", required=True)
    f.add_argument("--mode", choices=["time", "order"], default="time")
    f.add_argument("--predict", action="store_true", help="compare with predicted exponents")
    f.add_argument("--tol", type=float, default=0.05)
    f.add_argument("--hash", help="restrict to one config hash")
    f.add_argument("--threshold", type=float, default=analysis.LOG_THRESHOLD,
                   help="minimum log moment for a point to be used")
    f.add_argument("--out", metavar="PATH")
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("specfun", help="evaluate a special function")
    s.add_argument("name", choices=sorted(_SPECFUN_ARITY))
    s.add_argument("args", type=float, nargs="*")
    s.add_argument("--kind", choices=["heat", "wave"], default="heat", help="for upsilon")
    s.set_defaults(func=cmd_specfun)

    ver = sub.add_parser("version")
    ver.set_defaults(func=cmd_version)
    return p


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be >= 1")
    if args.command == "specfun" and len(args.args) != _SPECFUN_ARITY[args.name]:
        parser.error(f"specfun {args.name} takes {_SPECFUN_ARITY[args.name]} numbers")
    try:
        return args.func(args)
    except ConfigDomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Batch experiments: config parsing, pipeline execution and reports.

Config files are flat ``key = value`` lines; ``#`` starts a comment and
lists are comma separated.  Every key is typed and range checked, and
unknown keys are rejected.  Outputs are ``results.csv`` and a
schema-versioned ``report.json`` in the output directory.

Exit codes: 0 success, 2 if any certificate or checked inequality failed,
3 for an invalid config.
"""

import argparse
import csv
import json
import logging
import math
import os
import statistics
import sys

import numpy as np

from . import density, haar, subsample, zoo
from .analysis import ErrorReport, analyze, rate_fit
from .errors import (ConcentrationFailure, InvalidConfig, PlanFailure, RecoveryError,
                     SparsifyFailure)
from .linalg import DENSE_LIMIT
from .recovery import build_plan

SCHEMA_VERSION = "1.0"
EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 2, 3
MODES = ("pipeline", "adversary", "spline-compare", "rate")
log = logging.getLogger("samplerec")


def _ints(text):
    return [int(t) for t in text.split(",") if t.strip()]


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (parser, default, validator or None)
SCHEMA = {
    "mode": (str, None, lambda v: v in MODES),
    "model": (str, "fourier_sobolev",
              lambda v: v in ("fourier_sobolev", "finite_rank", "tensor", "surrogate", "haar")),
    "alpha": (float, 1.0, None),
    "beta_log": (float, 0.0, None),
    "M": (int, 256, lambda v: 2 <= v <= DENSE_LIMIT),
    "grid": (int, 512, lambda v: v >= 2),
    "rank": (int, 5, lambda v: 1 <= v <= DENSE_LIMIT),
    "base_alpha": (float, 1.0, lambda v: v > 0),
    "base_len": (int, 64, lambda v: v >= 1),
    "d": (int, 2, lambda v: v in (1, 2, 3)),
    "p": (float, 1.0, lambda v: 0 < v < 2),
    "profile": (str, "poly", lambda v: v in ("poly", "boundary")),
    "s": (float, 1.0, lambda v: v > 0.5),
    "levels": (int, 8, lambda v: 1 <= v <= 14),
    "beta": (float, 2.0, lambda v: v > 0),
    "Lmax": (int, 40, lambda v: 1 <= v <= 10 ** 7),
    "grid_level": (int, 20, lambda v: 1 <= v <= haar.GRID_LEVEL_MAX),
    "variant": (str, "power", lambda v: v in ("power", "loglog")),
    "epsilon": (float, 0.1, lambda v: 0 < v < 1),
    "n_list": (_ints, [8, 16, 32, 64], lambda v: len(v) > 0 and all(n >= 1 for n in v)),
    "m_list": (_ints, [4, 8, 16], lambda v: len(v) > 0 and all(m >= 1 for m in v)),
    "C": (float, density.DEFAULT_C, lambda v: v > 0),
    "t": (float, 0.5, lambda v: 0 < v <= 1),
    "max_attempts": (int, 20, lambda v: v >= 1),
    "budget_factor": (int, subsample.DEFAULT_BUDGET_FACTOR, lambda v: v >= 1),
    "c2": (float, subsample.DEFAULT_TARGETS[0], lambda v: v > 0),
    "c3": (float, subsample.DEFAULT_TARGETS[1], lambda v: v > 0),
    "seeds": (_ints, [0, 1, 2], lambda v: len(v) > 0 and all(0 <= s < 2 ** 64 for s in v)),
    "out": (str, "results", None),
}


def parse_config(text):
    """Parse and validate a flat key-value config; returns a dict with
    defaults filled in."""
    cfg = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidConfig(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA:
            raise InvalidConfig(f"line {lineno}: unknown key {key!r}")
        if key in cfg:
            raise InvalidConfig(f"line {lineno}: duplicate key {key!r}")
        parser, _, check = SCHEMA[key]
        try:
            parsed = parser(value)
        except ValueError as exc:
            raise InvalidConfig(f"line {lineno}: bad value for {key!r}: {exc}") from None
        if check is not None and not check(parsed):
            raise InvalidConfig(f"line {lineno}: value {value!r} out of range for {key!r}")
        cfg[key] = parsed
    for key, (_, default, _) in SCHEMA.items():
        cfg.setdefault(key, default)
    return cfg


def load_config(path):
    with open(path) as fh:
        return parse_config(fh.read())


def build_model(cfg):
    name = cfg["model"]
    if name == "fourier_sobolev":
        return zoo.fourier_sobolev(cfg["alpha"], cfg["beta_log"], cfg["M"], cfg["grid"])
    if name == "finite_rank":
        sigma = zoo.sobolev_sigma(np.arange(cfg["rank"]), cfg["alpha"], cfg["beta_log"])
        return zoo.finite_rank(sigma, max(cfg["grid"], cfg["rank"]))
    if name == "tensor":
        base = zoo.sobolev_sigma(np.arange(cfg["base_len"]), cfg["base_alpha"])
        return zoo.tensor_product_model(base, cfg["d"], cfg["M"])
    if name == "surrogate":
        G = cfg["levels"]
        grid = zoo.DomainGrid.uniform(2 ** G)
        spaces = zoo.haar_level_spaces(G, G + 1)
        return zoo.surrogate_rkhs(spaces, grid, alpha=cfg["alpha"], p=cfg["p"],
                                  profile=cfg["profile"], s=cfg["s"],
                                  M=min(cfg["M"], 2 ** G))
    raise InvalidConfig(f"model {name!r} is not a spectral model")


def check_mode(cfg, mode):
    if cfg["mode"] is not None and cfg["mode"] != mode:
        raise InvalidConfig(f"config is for mode {cfg['mode']!r}, not {mode!r}")
    if mode == "adversary" and cfg["model"] != "haar":
        raise InvalidConfig("adversary mode needs model = haar")
    if mode != "adversary" and cfg["model"] == "haar":
        raise InvalidConfig("the haar class has no spectral model; use adversary mode")


def run_cell(model, cfg, m, seed):
    """One draw-to-analysis run; returns ``(report, failure)``."""
    targets = (cfg["c2"], cfg["c3"])
    budget = cfg["budget_factor"] * m
    try:
        batch = density.resample_until_concentrated(
            model, m, None, cfg["t"], cfg["max_attempts"], seed, C=cfg["C"])
    except ConcentrationFailure as exc:
        return None, {"stage": "concentration", "message": str(exc),
                      "best_residual": exc.best_residual, "attempts": exc.attempts}
    red = subsample.reduce_to_finite(batch)
    padded = subsample.pad_identity(red)
    try:
        chosen = subsample.greedy_sparsify(padded, m, budget, targets)
    except SparsifyFailure as exc:
        return None, {"stage": "sparsify", "message": str(exc),
                      "certificate": exc.certificate.to_dict()}
    cert = subsample.certify(batch, chosen.J, m, budget, targets)
    try:
        plan = build_plan(model, batch, cert)
    except PlanFailure as exc:
        return None, {"stage": "plan", "message": str(exc)}
    report = analyze(model, plan, batch, seed=seed)
    report.extra["reduction"] = {"p": red.p, "q": padded.q, "rank_warning": red.rank_warning,
                                 "residual": batch.residual}
    if not (report.bound_ok and report.coarse_ok and report.spline_ok and cert.targets_ok):
        report.status = "check-failed"
    return report, None


def _failure_row(model, m, seed, failure):
    nan = math.nan
    params = model.params
    r = ErrorReport(model.name, float(params.get("alpha", nan)),
                    float(params.get("beta_log", 0.0)), m, 0, 0, nan, nan, nan, nan, nan,
                    nan, nan, nan, nan, int(failure.get("attempts", 0)), seed,
                    status=f"{failure['stage']}-failure")
    r.extra = {"failure": failure}
    return r


def run_pipeline(cfg):
    """One report per ``(m, seed)`` ordered by m then seed."""
    model = build_model(cfg)
    reports = []
    for m in cfg["m_list"]:
        if m > model.M or (m == model.M and not model.rank_exact):
            raise InvalidConfig(f"m={m} is not below the truncation {model.M}")
        for seed in cfg["seeds"]:
            report, failure = run_cell(model, cfg, m, seed)
            if failure is not None:
                report = _failure_row(model, m, seed, failure)
            log.info("m=%d seed=%d status=%s g_ls=%.4g", m, seed, report.status,
                     report.g_emp_ls)
            reports.append(report)
    return model, reports


def run_spline_compare(cfg):
    model, reports = run_pipeline(cfg)
    table = [{"m": r.m, "seed": r.seed, "g_emp_spline": r.g_emp_spline,
              "g_emp_ls": r.g_emp_ls, "ordered": r.spline_ok} for r in reports]
    return model, reports, table


def median_by_m(reports):
    out = {}
    for r in reports:
        if r.status == "ok":
            out.setdefault(r.m, []).append(r.g_emp_ls)
    return {m: statistics.median(v) for m, v in sorted(out.items())}


def run_rate(cfg):
    model, reports = run_pipeline(cfg)
    med = median_by_m(reports)
    fit = rate_fit(list(med), list(med.values())) if len(med) >= 3 else None
    return model, reports, med, fit


ADVERSARY_COLUMNS = ("n", "seed", "l2_norm", "normalized", "lower_bound", "integral",
                     "h", "max_abs_at_points", "L", "top", "budget_ok")


def run_adversary(cfg):
    """Lower-bound table for random dyadic point sets."""
    spec = haar.HaarClassSpec(beta=cfg["beta"], L_max=cfg["Lmax"],
                              grid_level=cfg["grid_level"], variant=cfg["variant"])
    rows = []
    for n in cfg["n_list"]:
        for seed in cfg["seeds"]:
            rng = np.random.Generator(np.random.PCG64(seed))
            pts = rng.integers(0, 2 ** spec.grid_level, size=n)
            fn = haar.haar_adversary(spec, pts, epsilon=cfg["epsilon"])
            if spec.variant == "power":
                normalized = fn.l2_norm * math.sqrt(n) * math.log(n) ** (spec.beta - 1) \
                    if n > 1 else math.nan
            else:
                normalized = fn.l2_norm
            rows.append({
                "n": n, "seed": seed, "l2_norm": fn.l2_norm, "normalized": normalized,
                "lower_bound": fn.lower_bound, "integral": fn.integral, "h": fn.h,
                "max_abs_at_points": fn.max_abs_at_points, "L": fn.L, "top": fn.top,
                "budget_ok": haar.class_budget_ok(spec, fn),
            })
    return spec, rows


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return v


def write_csv(path, columns, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(_clean(payload), fh, indent=2)
        fh.write("\n")


def _config_echo(cfg):
    return {k: v for k, v in sorted(cfg.items())}


def execute(mode, cfg, out_dir):
    """Run `mode`, write outputs and return the exit code."""
    os.makedirs(out_dir, exist_ok=True)
    payload = {"schema_version": SCHEMA_VERSION, "mode": mode, "config": _config_echo(cfg),
               "rng": density.RNG_ALGORITHM}
    failed = False
    if mode == "adversary":
        spec, rows = run_adversary(cfg)
        write_csv(os.path.join(out_dir, "results.csv"), ADVERSARY_COLUMNS,
                  [[r[c] for c in ADVERSARY_COLUMNS] for r in rows])
        for r in rows:
            r["vanishes"] = r["max_abs_at_points"] <= 1e-12
            failed |= not (r["vanishes"] and r["budget_ok"])
        payload["rows"] = rows
    else:
        if mode == "pipeline":
            model, reports = run_pipeline(cfg)
        elif mode == "spline-compare":
            model, reports, table = run_spline_compare(cfg)
            payload["comparison"] = table
        else:
            model, reports, med, fit = run_rate(cfg)
            payload["medians"] = med
            payload["fit"] = None if fit is None else fit.__dict__
        payload["model"] = model.describe()
        payload["neglected_tail"] = model.neglected_tail
        payload["rows"] = [r.to_dict() for r in reports]
        write_csv(os.path.join(out_dir, "results.csv"), ErrorReport.CSV_COLUMNS,
                  [r.csv_row() for r in reports])
        failed = any(r.status != "ok" for r in reports)
    payload["status"] = "failed" if failed else "ok"
    write_json(os.path.join(out_dir, "report.json"), payload)
    return EXIT_FAILED if failed else EXIT_OK


def main(argv=None):
    ap = argparse.ArgumentParser(prog="samplerec", description=__doc__.splitlines()[0])
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("--config", required=True, help="flat key = value config file")
    ap.add_argument("--out", help="output directory (overrides the config)")
    ap.add_argument("--seeds", help="comma separated seeds (overrides the config)")
    ap.add_argument("--quiet", action="store_true")
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        cfg = load_config(args.config)
        if args.seeds is not None:
            seeds = _ints(args.seeds)
            if not seeds or not SCHEMA["seeds"][2](seeds):
                raise InvalidConfig("bad --seeds list")
            cfg["seeds"] = seeds
        check_mode(cfg, args.mode)
        out_dir = args.out or cfg["out"]
        code = execute(args.mode, cfg, out_dir)
    except (InvalidConfig, OSError, ValueError) as exc:
        log.error("invalid config: %s", exc)
        return EXIT_CONFIG
    except RecoveryError as exc:
        log.error("%s: %s", type(exc).__name__, exc)
        return EXIT_FAILED
    if not args.quiet:
        print(f"{args.mode}: {'ok' if code == EXIT_OK else 'failures recorded'} -> {out_dir}")
    return code


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end.

Subcommands:
  gamma      exact piecewise density gamma_k, the polynomial P_k, and
             (optionally) a seeded Monte-Carlo cross-check
  constants  Euler-product constants a_k, a~_k and the modulus-dependent
             a_k(q), with tail bounds
  variance   empirical Delta_k / short-interval sweeps compared against
             the predicted values, with ratio columns
  rmt        exact secular coefficients I_k(m;N) and their scaled
             deviation from gamma_k, plus a shift-average consistency probe
  selftest   fast end-to-end invariant suite

Configuration comes from flags, optionally seeded by a flat key=value
config file (flags override the file).  Reports are emitted as CSV with a
fixed column order or as JSON with stable key order; floats are printed
with 17 significant digits, exact rationals as "num/den" strings.

Exit codes: 0 success, 1 invalid config, 2 computation error, 3 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from fractions import Fraction
from typing import Optional

import numpy as np

from . import constants as consts
from . import gammapoly, rmt, sieve, variance
from .weights import Normalization, make_bump

DEFAULT_DELTA = 1.0 / 20


class ConfigError(ValueError):
    pass


# ----------------------------------------------------------------------------
# Report assembly and emission
# ----------------------------------------------------------------------------

def _fmt(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return v


def emit_report(report: dict, fmt: str, out) -> None:
    """Write a report as CSV (fixed column order) or JSON (stable keys)."""
    if fmt == "json":
        def default(v):
            if isinstance(v, Fraction):
                return f"{v.numerator}/{v.denominator}"
            raise TypeError(type(v).__name__)
        formatted = {
            "config": report["config"],
            "columns": report["columns"],
            "rows": [
                {k: _fmt(v) for k, v in row.items()} for row in report["rows"]
            ],
            "errors": report["errors"],
        }
        json.dump(formatted, out, default=default, indent=2)
        out.write("\n")
        return
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(report["columns"])
    for row in report["rows"]:
        writer.writerow([_fmt(row.get(c, "")) for c in report["columns"]])
    for err in report["errors"]:
        writer.writerow(["#ERROR"] + [err])


def _new_report(config: dict, columns: list) -> dict:
    public = {k: v for k, v in config.items() if v is not None}
    return {"config": public, "columns": columns, "rows": [], "errors": []}


# ----------------------------------------------------------------------------
# Regime tagging (Theorem-1 vs GRH-conditional vs conjectural ranges)
# ----------------------------------------------------------------------------

def regime_tag(k: int, c: float, delta: float) -> str:
    if delta <= c <= (k + 2) / k - delta:
        return "Theorem1Range"
    if delta <= c <= 2 - delta:
        return "GRHRange"
    if c < delta:
        return "SmallC"
    return "ConjecturalOnly"


# ----------------------------------------------------------------------------
# Sieve cache
# ----------------------------------------------------------------------------

def _get_table(k: int, x_max: int, cache_dir: Optional[str]) -> sieve.DivisorTable:
    if cache_dir is None:
        return sieve.sieve_dk(k, x_max)
    os.makedirs(cache_dir, exist_ok=True)
    path = os.path.join(cache_dir, f"dk_{k}_{x_max}.bin")
    if os.path.exists(path):
        table = sieve.load_table(path)
        if table.k == k and table.covers(x_max):
            return table
    table = sieve.sieve_dk(k, x_max)
    sieve.dump_table(table, path)
    return table


# ----------------------------------------------------------------------------
# Subcommands
# ----------------------------------------------------------------------------

def cmd_gamma(cfg: dict) -> dict:
    k = cfg["k"]
    columns = ["kind", "k", "piece", "c", "coefficients_or_value",
               "mc_value", "mc_std_error"]
    report = _new_report(cfg, columns)
    g = gammapoly.gamma_exact(k)
    for j, piece in enumerate(g.pieces):
        report["rows"].append({
            "kind": "gamma_piece", "k": k, "piece": j,
            "coefficients_or_value": " ".join(_fmt(c) for c in piece.coeffs),
        })
    p = gammapoly.p_k(k)
    report["rows"].append({
        "kind": "p_poly", "k": k,
        "coefficients_or_value": " ".join(_fmt(c) for c in p.coeffs),
    })
    report["rows"].append({
        "kind": "integral", "k": k,
        "coefficients_or_value": g.integral(),
    })
    samples = cfg.get("samples")
    if samples:
        for c in cfg["c_grid"]:
            est, err = gammapoly.gamma_mc_oracle(k, c, samples, cfg["seed"])
            report["rows"].append({
                "kind": "mc_check", "k": k, "c": float(c),
                "coefficients_or_value": g.eval_float(c),
                "mc_value": est, "mc_std_error": err,
            })
    return report


def cmd_constants(cfg: dict) -> dict:
    k, limit = cfg["k"], cfg["prime_limit"]
    columns = ["name", "k", "q", "prime_limit", "value", "tail_bound"]
    report = _new_report(cfg, columns)
    base = consts.a_k_const(k, limit)
    tilde = consts.a_tilde_k(k, limit)
    report["rows"].append({"name": "a_k", "k": k, "prime_limit": limit,
                           "value": base.value, "tail_bound": base.tail_bound})
    report["rows"].append({"name": "a_tilde_k", "k": k, "prime_limit": limit,
                           "value": tilde.value, "tail_bound": tilde.tail_bound})
    if cfg.get("q"):
        report["rows"].append({
            "name": "a_k_of_q", "k": k, "q": cfg["q"], "prime_limit": limit,
            "value": consts.a_k_of_q(k, cfg["q"], base),
            "tail_bound": base.tail_bound,
        })
    return report


_VARIANCE_COLUMNS = [
    "k", "Q", "X", "c", "regime", "delta", "a_term", "b_term", "d_term",
    "g_term", "prediction_leading", "prediction_exact_q",
    "prediction_diagonal", "prediction_offdiagonal",
    "ratio_delta_leading", "ratio_delta_exact_q", "short_interval_H",
    "short_interval_variance",
]


def cmd_variance(cfg: dict) -> dict:
    k, Q = cfg["k"], cfg["q"]
    if Q is None:
        raise ConfigError("variance requires --q")
    report = _new_report(cfg, _VARIANCE_COLUMNS)
    if cfg.get("x"):
        xs = [cfg["x"]]
    else:
        grid = cfg["c_grid"] or [0.5, 0.8, 1.0, 1.2, 1.5, (k + 2) / k - 0.1]
        xs = sorted({max(2, int(round(Q ** c))) for c in grid})
    psi = make_bump(1, 2, Normalization.INTEGRAL_OF_SQUARE_ONE)
    phi = make_bump(1, 2, Normalization.INTEGRAL_ONE)
    base = consts.a_k_const(k, cfg["prime_limit"])
    tilde = consts.a_tilde_k(k, cfg["prime_limit"])
    g = gammapoly.gamma_exact(k)
    p = gammapoly.p_k(k)
    h = cfg.get("h")
    for X in xs:
        try:
            x_max = 2 * X + (h or 0)
            table = _get_table(k, x_max, cfg.get("cache_dir"))
            bd = variance.delta_k(table, Q, X, psi, phi, threads=cfg["threads"])
            pred = variance.conjectured_values(
                k, Q, X, base, tilde, g, p, phi=phi, delta=cfg["delta"])
            row = {
                "k": k, "Q": Q, "X": X, "c": pred.c,
                "regime": regime_tag(k, pred.c, cfg["delta"]),
                "delta": bd.delta, "a_term": bd.a_term, "b_term": bd.b_term,
                "d_term": bd.d_term, "g_term": bd.g_term,
                "prediction_leading": pred.smooth_prediction_leading,
                "prediction_exact_q": pred.smooth_prediction_exact_q,
                "prediction_diagonal": pred.diagonal_prediction,
                "prediction_offdiagonal": pred.offdiagonal_prediction,
                "ratio_delta_leading":
                    bd.delta / pred.smooth_prediction_leading
                    if pred.smooth_prediction_leading else float("nan"),
                "ratio_delta_exact_q":
                    bd.delta / pred.smooth_prediction_exact_q
                    if pred.smooth_prediction_exact_q else float("nan"),
            }
            if h:
                row["short_interval_H"] = h
                row["short_interval_variance"] = (
                    variance.short_interval_variance(table, X, h))
            report["rows"].append(row)
        except (ValueError, ArithmeticError) as exc:
            report["errors"].append(f"X={X}: {exc}")
    return report


def cmd_rmt(cfg: dict) -> dict:
    k, N = cfg["k"], cfg["n"]
    columns = ["kind", "k", "N", "m", "value", "deviation", "argmax_m"]
    report = _new_report(cfg, columns)
    table = rmt.secular_coefficients(k, N)
    for m, coeff in enumerate(table.coefficients):
        report["rows"].append({"kind": "secular", "k": k, "N": N, "m": m,
                               "value": coeff})
    g = gammapoly.gamma_exact(k)
    for nn in (max(2, N // 2), N):
        dev, arg = rmt.rmt_gamma_deviation(k, nn, g)
        report["rows"].append({"kind": "gamma_deviation", "k": k, "N": nn,
                               "deviation": dev, "argmax_m": arg})
    rng = np.random.default_rng(cfg["seed"])
    for trial in range(3):
        A = tuple(np.exp(rng.uniform(-0.3, 0.3, size=k)))
        B = tuple(np.exp(rng.uniform(-0.3, 0.3, size=k)))
        lhs = rmt.haar_average_heine(A, B, min(N, 6))
        rhs = rmt.cfkrs_rhs(A, B, min(N, 6))
        report["rows"].append({
            "kind": "shift_average_check", "k": k, "N": min(N, 6), "m": trial,
            "value": float(abs(lhs - rhs) / abs(lhs)),
        })
    return report


def cmd_selftest(cfg: dict) -> dict:
    columns = ["check", "status", "detail"]
    report = _new_report(cfg, columns)

    def record(name, fn):
        try:
            fn()
            report["rows"].append({"check": name, "status": "ok", "detail": ""})
        except Exception as exc:  # noqa: BLE001 - report and continue
            report["rows"].append(
                {"check": name, "status": "FAIL", "detail": str(exc)})
            report["errors"].append(f"{name}: {exc}")

    def sieve_check():
        t = sieve.sieve_dk(3, 1000)
        for n in (1, 6, 12, 64, 997):
            assert int(t.values[n]) == sieve.dk_single(3, n)

    def gamma_check():
        g = gammapoly.gamma_exact(2)
        assert g.integral() == Fraction(1, 12)
        p_res = gammapoly.p_k(2, method="residue")
        p_mul = gammapoly.p_k(2, method="multinomial")
        assert p_res.coeffs == p_mul.coeffs
        c = Fraction(3, 2)
        assert g.eval(c) == c ** 3 / 6 + p_res.eval(c)

    def constants_check():
        base = consts.a_k_const(2, 10**5)
        assert abs(base.value - 6 / math.pi**2) < 1e-4

    def rmt_check():
        A = (1.1, 0.9)
        B = (1.05, 0.97)
        assert abs(rmt.haar_average_heine(A, B, 5)
                   - rmt.cfkrs_rhs(A, B, 5)) < 1e-9

    def variance_check():
        t = sieve.sieve_dk(2, 500)
        psi = make_bump(1, 2, Normalization.INTEGRAL_OF_SQUARE_ONE)
        phi = make_bump(1, 2, Normalization.INTEGRAL_ONE)
        bd = variance.delta_k(t, 40, 150, psi, phi)
        assert abs(bd.delta - (bd.a_term - bd.b_term)) <= 1e-9 * abs(bd.delta)
        assert abs(bd.a_term - (bd.d_term + bd.g_term)) \
            <= 1e-9 * abs(bd.a_term)

    record("sieve_matches_pointwise", sieve_check)
    record("gamma_exact_identities", gamma_check)
    record("euler_product_value", constants_check)
    record("shift_average_identity", rmt_check)
    record("variance_decomposition", variance_check)
    return report


# ----------------------------------------------------------------------------
# Configuration plumbing
# ----------------------------------------------------------------------------

_INT_KEYS = {"k", "x", "q", "h", "prime_limit", "n", "samples", "seed",
             "threads"}
_FLOAT_KEYS = {"delta"}


def _load_config_file(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"malformed config line: {line!r}")
            key, _, val = line.partition("=")
            key = key.strip().replace("-", "_")
            val = val.strip()
            if key in _INT_KEYS:
                out[key] = int(val)
            elif key in _FLOAT_KEYS:
                out[key] = float(val)
            elif key == "c_grid":
                out[key] = [float(t) for t in val.split(",")]
            else:
                out[key] = val
    return out


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="divvar",
        description="Variance of k-fold divisor sums in progressions.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("gamma", "constants", "variance", "rmt", "selftest"):
        p = sub.add_parser(name)
        p.add_argument("--config")
        p.add_argument("--k", type=int)
        p.add_argument("--x", type=int)
        p.add_argument("--q", type=int)
        p.add_argument("--h", type=int)
        p.add_argument("--c-grid", dest="c_grid",
                       type=lambda s: [float(t) for t in s.split(",")])
        p.add_argument("--prime-limit", dest="prime_limit", type=int)
        p.add_argument("--n", type=int)
        p.add_argument("--samples", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--threads", type=int)
        p.add_argument("--format", choices=("json", "csv"))
        p.add_argument("--out")
        p.add_argument("--cache-dir", dest="cache_dir")
        p.add_argument("--delta", type=float)
    return parser


_DEFAULTS = {
    "k": 2, "x": None, "q": None, "h": None, "c_grid": None,
    "prime_limit": 10**6, "n": 20, "samples": None, "seed": 0,
    "threads": 1, "format": "csv", "out": None, "cache_dir": None,
    "delta": DEFAULT_DELTA,
}


def build_config(args: argparse.Namespace) -> dict:
    cfg = dict(_DEFAULTS)
    if args.config:
        cfg.update(_load_config_file(args.config))
    for key in _DEFAULTS:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    cfg["command"] = args.command
    if cfg["k"] < 1 or cfg["k"] > sieve.MAX_K:
        raise ConfigError(f"k must be in [1, {sieve.MAX_K}]")
    if cfg["c_grid"] is None and args.command == "gamma":
        cfg["c_grid"] = [0.5, 0.8, 1.0, 1.2, 1.5, (cfg["k"] + 2) / cfg["k"] - 0.1]
    for key in ("x", "q", "h", "n", "samples", "prime_limit", "threads"):
        if cfg.get(key) is not None and cfg[key] < 1:
            raise ConfigError(f"{key} must be positive")
    if not 0 < cfg["delta"] < 1:
        raise ConfigError("delta must be in (0, 1)")
    return cfg


_COMMANDS = {
    "gamma": cmd_gamma,
    "constants": cmd_constants,
    "variance": cmd_variance,
    "rmt": cmd_rmt,
    "selftest": cmd_selftest,
}


def run_experiment(cfg: dict) -> dict:
    return _COMMANDS[cfg["command"]](cfg)


def main(argv: Optional[list] = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 1
    try:
        cfg = build_config(args)
    except (ConfigError, ValueError) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 1
    try:
        report = run_experiment(cfg)
    except (ConfigError,) as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:  # noqa: BLE001 - map to computation-error code
        print(f"computation error: {exc}", file=sys.stderr)
        return 2
    buf = io.StringIO()
    emit_report(report, cfg["format"], buf)
    text = buf.getvalue()
    try:
        if cfg["out"]:
            tmp = cfg["out"] + ".tmp"
            with open(tmp, "w") as fh:
                fh.write(text)
            os.replace(tmp, cfg["out"])
        else:
            sys.stdout.write(text)
    except OSError as exc:
        print(f"i/o error writing {cfg['out']}: {exc}", file=sys.stderr)
        return 3
    if cfg["command"] == "selftest" and report["errors"]:
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())

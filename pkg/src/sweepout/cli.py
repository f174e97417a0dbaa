"""Batch front-end: one JSON config, one subcommand per pipeline stage.

Commands: decompose, lattice-count, find-lambda, build-eg, build-witness,
verify, trace, check-conditions. Each writes a JSON report with the full
parameter echo plus the artifact version into the output directory;
table-producing commands also emit CSV. Reports carry no timestamps and
all sampling is seeded, so identical configs yield byte-identical output.

Exit codes: 0 success, 1 a certified inequality failed (the report names
it), 2 a resource cap was hit, 3 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__, kernel
from .builder import (SweepOutWitness, build_eg, build_witness,
                      oscillation_trace, trim_witness, verify_witness)
from .errors import (CapExceeded, ConfigError, GrowthExhausted,
                     LambdaNotFound, PrecisionExhausted, SequenceExhausted,
                     VerificationFailed)
from .exactreal import (GeneratorBasis, Point, fraction_str, parse_fraction)
from .lambda_search import find_lambda, lambda_profile
from .lattice import decompose, interval_count_ratio
from .measures import MeasureSequence, chebyshev_check, check_condition_one

COMMANDS = ("decompose", "lattice-count", "find-lambda", "build-eg",
            "build-witness", "verify", "trace", "check-conditions")


def _load_config(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}")


def _basis_from_config(cfg: dict, precision_bits: int | None) -> GeneratorBasis:
    spec = cfg.get("basis", {})
    if isinstance(spec, list):
        spec = {"generators": spec}
    gens = spec.get("generators", [])
    kw = {"assert_independent": bool(spec.get("assert_independent", False))}
    if precision_bits:
        kw["precision_cap"] = precision_bits
    try:
        return GeneratorBasis.from_specs(gens, **kw)
    except ValueError as exc:
        raise ConfigError(str(exc))


def _measures_from_config(cfg: dict, basis: GeneratorBasis) -> MeasureSequence:
    raw = cfg.get("measures")
    if not raw:
        raise ConfigError("config has no measures")
    try:
        return MeasureSequence.from_json(basis, raw)
    except (ValueError, KeyError) as exc:
        raise ConfigError(f"bad measure entry: {exc}")


def _param(params: dict, name: str, default=None, required=False):
    if name in params:
        return params[name]
    if required:
        raise ConfigError(f"missing required parameter: {name}")
    return default


def _frac_param(params, name, default=None, required=False) -> Fraction | None:
    raw = _param(params, name, default=default, required=required)
    if raw is None:
        return None
    try:
        return parse_fraction(raw)
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"parameter {name} is not a rational: {raw!r}")


def _point_param(basis, params, name, required=False) -> Point | None:
    raw = _param(params, name, required=required)
    if raw is None:
        return None
    try:
        return Point.from_json(basis, raw)
    except (ValueError, KeyError):
        raise ConfigError(f"parameter {name} is not a point: {raw!r}")


def _write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def _write_csv(path: Path, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        for row in rows:
            writer.writerow(row)


def _report(command: str, args, cfg: dict, results: dict, status: str) -> dict:
    return {
        "artifact": {"name": "sweepout", "version": __version__,
                     "kernel_backend": kernel.BACKEND},
        "command": command,
        "status": status,
        "seed": args.seed,
        "config_echo": cfg,
        "results": results,
    }


# ---------------------------------------------------------------------------
# command implementations
# ---------------------------------------------------------------------------

def _cmd_decompose(args, cfg, basis, seq, params, out):
    idx = int(_param(params, "measure_index", 0))
    spec = decompose(seq[idx].support())
    _write_json(out / "lattice_spec.json", spec.to_json())
    return {"measure_index": idx, "nu": spec.nu, "p": spec.p, "tau": spec.tau,
            "spec": spec.to_json()}


def _cmd_lattice_count(args, cfg, basis, seq, params, out):
    idx = int(_param(params, "measure_index", 0))
    spec = decompose(seq[idx].support())
    lo = _point_param(basis, params, "interval_lo", required=True)
    hi = _point_param(basis, params, "interval_hi", required=True)
    ms = _param(params, "m_values") or [int(_param(params, "m", required=True))]
    cap = int(_param(params, "enumeration_cap", 10**7))
    rows = []
    for m in ms:
        rep = interval_count_ratio(spec, int(m), (lo, hi), cap=cap)
        rows.append(rep)
    _write_csv(out / "lattice_count.csv",
               [("m", "count", "predicted", "ratio")] +
               [(r.m, r.count, repr(float((r.predicted_lo + r.predicted_hi) / 2)),
                 repr(r.ratio)) for r in rows])
    return {"measure_index": idx, "rows": [r.to_json() for r in rows]}


def _cmd_find_lambda(args, cfg, basis, seq, params, out):
    idx = int(_param(params, "measure_index", 0))
    mu = seq[idx]
    eps = _frac_param(params, "epsilon", required=True)
    delta = _frac_param(params, "delta", required=True)
    floor_scale = int(_param(params, "floor_scale", 10**4))
    res = find_lambda(mu, eps, delta, floor_scale=floor_scale)
    profile = lambda_profile(mu, eps, delta, floor_scale=floor_scale)
    if args.format == "csv" or _param(params, "emit_profile", True):
        _write_csv(out / "lambda_profile.csv", profile.csv_rows())
    return {"measure_index": idx, "lambda": res.to_json(),
            "profile_pieces": len(profile.pieces)}


def _cmd_build_eg(args, cfg, basis, seq, params, out):
    idx = int(_param(params, "measure_index", 0))
    mu = seq[idx]
    eps = _frac_param(params, "epsilon", required=True)
    m_max = int(_param(params, "m_max", 64))
    pair = build_eg(mu, eps, m_max=m_max, mu_index=idx,
                    tuple_cap=int(_param(params, "enumeration_cap", 10**7)))
    cert = pair.certify(mu)
    _write_json(out / "eg_pair.json", pair.to_json())
    if not cert["ok"]:
        raise VerificationFailed("pair certification failed", report=cert)
    return {"measure_index": idx, "m": pair.m, "lambda": fraction_str(pair.lam),
            "count_E": len(pair.E), "count_G": len(pair.G), "certificate": cert}


def _build_witness_from_params(seq, params):
    Delta = parse_fraction(_param(params, "Delta", required=True))
    delta = parse_fraction(_param(params, "delta", required=True))
    if not 0 < delta < 1:
        raise ConfigError(f"delta must lie in (0, 1): {delta}")
    if Delta <= 0:
        raise ConfigError(f"Delta must be positive: {Delta}")
    return build_witness(
        seq, Delta, delta,
        m_cap=int(_param(params, "m_cap", 64)),
        m_max=int(_param(params, "m_max", 64)),
        tuple_cap=int(_param(params, "enumeration_cap", 10**7)))


def _cmd_build_witness(args, cfg, basis, seq, params, out):
    w = _build_witness_from_params(seq, params)
    _write_json(out / "witness.json", w.to_json())
    results = {"m": w.m, "indices": w.indices, "count_E": w.count_E,
               "count_G": w.count_G,
               "ratio": repr(float(Fraction(w.count_E, w.count_G)))}
    trim_to = _param(params, "trim_points")
    if trim_to:
        wt = trim_witness(w, seq, max_points=int(trim_to))
        _write_json(out / "witness_trimmed.json", wt.to_json())
        results["trimmed"] = {"count_E": wt.count_E, "count_G": wt.count_G}
    return results


def _cmd_verify(args, cfg, basis, seq, params, out):
    path = args.witness or _param(params, "witness_path")
    if not path:
        raise ConfigError("verify needs --witness or params.witness_path")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            w = SweepOutWitness.from_json(basis, json.load(fh))
    except FileNotFoundError:
        raise ConfigError(f"witness file not found: {path}")
    except (json.JSONDecodeError, KeyError, ValueError) as exc:
        raise ConfigError(f"bad witness file: {exc}")
    mode = _param(params, "mode", "factor-exact")
    if mode not in ("factor-exact", "explicit-brute-force", "sampled"):
        raise ConfigError(f"unknown verify mode: {mode}")
    report = verify_witness(
        w, seq, mode=mode,
        explicit_cap=args.explicit_cap or int(_param(params, "explicit_cap", 10**6)),
        samples=int(_param(params, "samples", 100)), seed=args.seed)
    _write_json(out / "verification.json", report.to_json())
    if not report.passed:
        raise VerificationFailed(
            "; ".join(c.name for c in report.failing()), report=report.to_json())
    return report.to_json()


def _cmd_trace(args, cfg, basis, seq, params, out):
    schedule = _param(params, "schedule", required=True)
    pairs = [(parse_fraction(a), parse_fraction(b)) for a, b in schedule]
    traces = oscillation_trace(
        seq, pairs, trim_points=int(_param(params, "trim_points", 4)),
        max_sample_points=int(_param(params, "max_sample_points", 24)),
        m_cap=int(_param(params, "m_cap", 64)))
    rows = [("entry", "n", "point_id", "value", "running_max", "running_min")]
    for j, tr in enumerate(traces):
        for row in list(tr.csv_rows())[1:]:
            rows.append((j,) + row)
    _write_csv(out / "trace.csv", rows)
    return {"entries": [t.to_json() for t in traces]}


def _cmd_check_conditions(args, cfg, basis, seq, params, out):
    deltas = [parse_fraction(d) for d in _param(params, "deltas", ["1/10", "1/100"])]
    tail = parse_fraction(_param(params, "tail_ratio", "999/1000"))
    mass_tol = parse_fraction(_param(params, "mass_tol", "1/1000"))
    rep = check_condition_one(seq, deltas, tail_ratio=tail, mass_tol=mass_tol)
    rows = [("delta", "n", "value", "mass")]
    for r in rep.rows:
        for n, v in enumerate(r.values):
            rows.append((fraction_str(r.delta), n, repr(float(v)),
                         repr(float(rep.masses[n]))))
    _write_csv(out / "condition1.csv", rows)
    results = {"condition_1": rep.to_json()}
    cheb = _param(params, "chebyshev")
    if cheb:
        mu = seq[int(cheb.get("measure_index", 0))]
        lo = Point.from_json(basis, cheb["interval_lo"])
        hi = Point.from_json(basis, cheb["interval_hi"])
        from .exactreal import IntervalSet

        G = IntervalSet.single(basis, lo, hi)
        crep = chebyshev_check(mu, G, parse_fraction(cheb["epsilon"]))
        results["chebyshev"] = crep.to_json()
        if not crep.passed():
            raise VerificationFailed("chebyshev bound failed", report=crep.to_json())
    # unbounded sup-ratio demonstration: a certified witness per target
    sweep = _param(params, "sup_ratio_targets")
    if sweep:
        delta = _frac_param(params, "delta", default="1/2")
        rows = []
        for target in sweep:
            Delta = parse_fraction(target)
            w = build_witness(seq, Delta, delta,
                              m_cap=int(_param(params, "m_cap", 64)))
            rows.append({"Delta": fraction_str(Delta), "m": w.m,
                         "indices": w.indices,
                         "ratio": repr(float(Fraction(w.count_E, w.count_G)))})
        results["sup_ratio_witnesses"] = rows
    return results


_HANDLERS = {
    "decompose": _cmd_decompose,
    "lattice-count": _cmd_lattice_count,
    "find-lambda": _cmd_find_lambda,
    "build-eg": _cmd_build_eg,
    "build-witness": _cmd_build_witness,
    "verify": _cmd_verify,
    "trace": _cmd_trace,
    "check-conditions": _cmd_check_conditions,
}


def run(args) -> int:
    cfg = _load_config(args.config)
    basis = _basis_from_config(cfg, args.precision_bits)
    seq = _measures_from_config(cfg, basis)
    params = dict(cfg.get("params", {}))
    out = Path(args.out)
    command = args.command
    try:
        results = _HANDLERS[command](args, cfg, basis, seq, params, out)
        status = "ok"
        code = 0
    except VerificationFailed as exc:
        results = {"error": str(exc), "report": getattr(exc, "report", None)}
        status = "verification-failed"
        code = 1
    except (LambdaNotFound, GrowthExhausted, SequenceExhausted) as exc:
        results = {"error": str(exc),
                   "diagnostics": getattr(exc, "diagnostics", None)}
        status = "verification-failed"
        code = 1
    except (CapExceeded, PrecisionExhausted) as exc:
        results = {"error": str(exc)}
        status = "resource-cap"
        code = 2
    except (ValueError, KeyError, IndexError) as exc:
        raise ConfigError(str(exc))
    _write_json(out / f"report-{command}.json",
                _report(command, args, cfg, results, status))
    if code:
        print(f"{command}: {status}: {results.get('error')}", file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sweepout",
        description="exact construction and verification of sweep-out "
                    "witness sets for convolutions of discrete measures")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, help="experiment config (JSON)")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
    ap.add_argument("--precision-bits", type=int, default=None,
                    help="certified comparison precision cap")
    ap.add_argument("--explicit-cap", type=int, default=None,
                    help="explicit enumeration cap")
    ap.add_argument("--witness", default=None, help="witness file for verify")
    ap.add_argument("--format", choices=("json", "csv"), default="json",
                    help="emit auxiliary tables as CSV in addition to JSON")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())

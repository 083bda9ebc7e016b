"""Command-line front end: gen-matrix, run, report.

Exit codes: 0 all checks passed; 1 a check failed (or matrix generation gave
up); 2 the config or arguments are invalid, with a pointer to the offending
key.  All files are written via write-then-rename so a crash never leaves a
half-written output, and payload.json plus the CSV tables are byte-stable
across reruns of the same config and seed.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import os
import sys
import time
from fractions import Fraction
from importlib import resources
from pathlib import Path

import numpy as np

from .battery import ThresholdTooHighError, generate_matrix, battery_entry
from .rationals import frac_to_pair
from .surface import CoefficientMatrix, min_submatrix_det
from .suites import run_suite

SEED_ENV = "SURFCONV_SEED"


def _json_default(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, Fraction):
        return f"{o.numerator}/{o.denominator}"
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def _canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, default=_json_default) + "\n"


def _config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(blob).hexdigest()


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _csv_cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    if isinstance(x, np.floating):
        return repr(float(x))
    if isinstance(x, np.integer):
        return str(int(x))
    return str(x)


def _csv_text(columns, rows, config_hash: str, matrix_note: str) -> str:
    buf = io.StringIO()
    buf.write(f"# config_hash {config_hash}\n")
    buf.write(f"# matrix {matrix_note}\n")
    buf.write(",".join(columns) + "\n")
    for row in rows:
        buf.write(",".join(_csv_cell(x) for x in row) + "\n")
    return buf.getvalue()


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 2


# ---------------------------------------------------------------------------
# gen-matrix


def cmd_gen_matrix(args) -> int:
    try:
        matrix = generate_matrix(args.k, args.l, seed=args.seed, min_det_threshold=args.threshold)
    except ValueError as exc:
        return _fail(str(exc))
    except ThresholdTooHighError as exc:
        print(f"gen-matrix failed: {exc}", file=sys.stderr)
        return 1
    doc = {
        "matrix": matrix.to_json(),
        "seed": args.seed,
        "min_det_threshold": args.threshold,
        "min_abs_det": frac_to_pair(min_submatrix_det(matrix)),
        "content_hash": matrix.content_hash(),
    }
    text = _canonical_json(doc)
    if args.out:
        _write_atomic(Path(args.out), text)
        print(args.out)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# run


def _load_schema() -> dict:
    return json.loads(
        resources.files("surfconv").joinpath("data/config.schema.json").read_text()
    )


def _resolve_matrix(config: dict, config_dir: Path):
    spec = config.get("matrix")
    if spec is None:
        return None, "none"
    if "battery" in spec:
        entry = battery_entry(spec["battery"])
        return entry.matrix, f"battery:{spec['battery']}"
    if "path" in spec:
        path = Path(spec["path"])
        if not path.is_absolute():
            path = config_dir / path
        doc = json.loads(path.read_text())
        mat = CoefficientMatrix.from_json(doc.get("matrix", doc))
        return mat, f"path:{spec['path']}"
    mat = CoefficientMatrix.from_json(spec)
    return mat, "inline"


def cmd_run(args) -> int:
    config_path = Path(args.config)
    try:
        config = json.loads(config_path.read_text())
    except OSError as exc:
        return _fail(f"cannot read config: {exc}")
    except json.JSONDecodeError as exc:
        return _fail(f"config is not valid JSON: {exc}")

    import jsonschema

    validator = jsonschema.Draft202012Validator(_load_schema())
    errors = sorted(validator.iter_errors(config), key=lambda e: (len(e.path), e.json_path))
    if errors:
        err = errors[0]
        return _fail(f"config invalid at {err.json_path}: {err.message}")

    if args.seed is not None:
        seed = args.seed
    elif os.environ.get(SEED_ENV):
        raw = os.environ[SEED_ENV]
        try:
            seed = int(raw)
        except ValueError:
            return _fail(f"{SEED_ENV} must be an integer, got {raw!r}")
        if seed < 0:
            return _fail(f"{SEED_ENV} must be nonnegative, got {seed}")
    else:
        seed = int(config["seed"])

    threads = args.threads if args.threads is not None else int(config.get("threads", 1))
    suite = config["suite"]
    params = config.get("params", {})

    try:
        matrix, matrix_note = _resolve_matrix(config, config_path.parent)
    except KeyError as exc:
        return _fail(f"config invalid at $.matrix.battery: {exc.args[0]}")
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        return _fail(f"config invalid at $.matrix: {exc}")

    t0 = time.perf_counter()
    try:
        result = run_suite(suite, matrix, params, seed, threads)
    except (ValueError, KeyError) as exc:
        return _fail(f"suite {suite!r} rejected the configuration: {exc}")
    wall = time.perf_counter() - t0

    config_hash = _config_hash(config)
    out_dir = Path(args.out) if args.out else Path("runs") / f"{suite}-{config_hash[:8]}"

    payload_doc = {
        "suite": suite,
        "seed": seed,
        "config_hash": config_hash,
        "matrix": matrix.to_json() if matrix is not None else None,
        "params": params,
        "results": result.payload,
        "verdicts": [v.to_json() for v in result.verdicts],
        "sample_counts": result.sample_counts,
        "passed": result.passed,
    }
    payload_text = _canonical_json(payload_doc)
    _write_atomic(out_dir / "payload.json", payload_text)

    matrix_json = json.dumps(matrix.to_json(), sort_keys=True) if matrix is not None else "none"
    csv_names = []
    for name, (columns, rows) in result.tables.items():
        fname = f"{name}.csv"
        _write_atomic(out_dir / fname, _csv_text(columns, rows, config_hash, matrix_json))
        csv_names.append(fname)

    report_doc = dict(
        payload_doc,
        wall_clock_seconds=wall,
        threads=threads,
        tables=sorted(csv_names),
    )
    _write_atomic(out_dir / "report.json", _canonical_json(report_doc))

    stable = ["payload.json"] + sorted(csv_names)
    manifest = {
        "config": config,
        "config_hash": config_hash,
        "seed": seed,
        "matrix": matrix_note,
        "files": {
            name: hashlib.sha256((out_dir / name).read_bytes()).hexdigest() for name in stable
        },
    }
    _write_atomic(out_dir / "manifest.json", _canonical_json(manifest))

    n_checks = len(result.verdicts)
    if result.passed:
        print(f"PASS {suite}: {n_checks}/{n_checks} checks passed ({out_dir})")
        return 0
    failing = [v for v in result.verdicts if not v.passed]
    print(f"FAIL {suite}: {n_checks - len(failing)}/{n_checks} checks passed ({out_dir})")
    for v in failing:
        print(f"FAIL {v.check_id}: {v.detail}", file=sys.stderr)
    return 1


# ---------------------------------------------------------------------------
# report


def cmd_report(args) -> int:
    root = Path(args.run_dir)
    if not root.is_dir():
        return _fail(f"not a directory: {root}")
    paths = sorted(root.glob("**/report.json"))
    if not paths:
        return _fail(f"no report.json found under {root}")

    verdict_rows, curve_rows = [], []
    suites_seen, any_fail = [], False
    for path in paths:
        doc = json.loads(path.read_text())
        run_id = str(path.parent.relative_to(root)) if path.parent != root else "."
        suites_seen.append((run_id, doc["suite"], doc["passed"]))
        for v in doc["verdicts"]:
            verdict_rows.append([run_id, doc["suite"], v["check_id"], v["passed"], v["detail"]])
            any_fail = any_fail or not v["passed"]
        if doc["suite"] == "ball-scan":
            for row in doc["results"]["report"]["rows"]:
                p = row["p_num"] / row["p_den"]
                curve_rows.append(
                    [
                        run_id,
                        row["delta"],
                        math.log2(row["delta"]),
                        p,
                        row["norm"],
                        math.log2(row["norm"]) if row["norm"] > 0 else float("nan"),
                        row["ratio"],
                        row["center_id"],
                    ]
                )

    buf = io.StringIO()
    buf.write("run,suite,check_id,passed,detail\n")
    for row in verdict_rows:
        detail = str(row[4]).replace('"', "'")
        cells = [str(row[0]), str(row[1]), str(row[2]), _csv_cell(row[3]), f'"{detail}"']
        buf.write(",".join(cells) + "\n")
    _write_atomic(root / "verdicts.csv", buf.getvalue())

    if curve_rows:
        buf = io.StringIO()
        buf.write("run,delta,log2_delta,p,norm,log2_norm,ratio,center_id\n")
        for row in curve_rows:
            buf.write(",".join(_csv_cell(x) for x in row) + "\n")
        _write_atomic(root / "curves.csv", buf.getvalue())

    lines = [f"overall: {'FAIL' if any_fail else 'PASS'}"]
    lines.append(f"runs: {len(suites_seen)}, checks: {len(verdict_rows)}")
    for run_id, suite, passed in suites_seen:
        lines.append(f"  {'PASS' if passed else 'FAIL'} {suite} ({run_id})")
    failing = [r for r in verdict_rows if not r[3]]
    if failing:
        lines.append("failing checks:")
        for run_id, suite, check_id, _, detail in failing:
            lines.append(f"  {run_id}: {check_id}: {detail}")
    text = "\n".join(lines) + "\n"
    _write_atomic(root / "summary.txt", text)
    sys.stdout.write(text)
    return 1 if any_fail else 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="surfconv",
        description="Numerical experiments for convolution bounds on graph surfaces.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-matrix", help="draw a random admissible coefficient matrix")
    gen.add_argument("--k", type=int, required=True, help="surface dimension (rows)")
    gen.add_argument("--l", type=int, required=True, help="codimension (columns)")
    gen.add_argument("--seed", type=int, default=0, help="RNG seed (default 0)")
    gen.add_argument(
        "--threshold", type=int, default=1, help="minimal |det| over row submatrices"
    )
    gen.add_argument("--out", help="write JSON here instead of stdout")
    gen.set_defaults(func=cmd_gen_matrix)

    run = sub.add_parser("run", help="run one experiment suite from a JSON config")
    run.add_argument("--config", required=True, help="path to the suite config JSON")
    run.add_argument(
        "--seed", type=int, help=f"override the seed (beats ${SEED_ENV} and the config)"
    )
    run.add_argument("--out", help="output directory (default runs/<suite>-<hash8>)")
    run.add_argument("--threads", type=int, help="worker threads for the heavy loops")
    run.set_defaults(func=cmd_run)

    rep = sub.add_parser("report", help="merge finished runs into one summary")
    rep.add_argument("run_dir", help="directory scanned recursively for report.json files")
    rep.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())

"""Command-line front end: ``qtime run <scenario.yaml>`` and ``qtime suite <suite.yaml>``.

Exit codes: 0 success, 1 a check failed, 2 malformed configuration,
3 violated precondition, 4 numerical guard tripped.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import yaml

from .errors import NumericalGuardError, PreconditionError
from .scenarios import FORMATS, ConfigError, ResultTable, Scenario, parse_scenario, run_scenario

log = logging.getLogger("qtime")

EXIT_OK, EXIT_CHECK, EXIT_PARSE, EXIT_PRECONDITION, EXIT_GUARD = 0, 1, 2, 3, 4


# ------------------------------------------------------------------ formatting

def format_number(value) -> str:
    """17 significant digits, '.' separator; integers and booleans kept exact."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return "%.17g" % value


def _json(obj) -> str:
    """Deterministic JSON: sorted keys, fixed float format, no whitespace variance."""
    if obj is None:
        return "null"
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer, float, np.floating)):
        text = format_number(obj)
        return text if text not in ("nan", "inf", "-inf") else json.dumps(text)
    if isinstance(obj, (complex, np.complexfloating)):
        return _json({"im": obj.imag, "re": obj.real})
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ", ".join(f"{json.dumps(k)}: {_json(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _split_complex(columns: dict) -> dict:
    out = {}
    for name, values in columns.items():
        arr = np.asarray(values)
        if np.iscomplexobj(arr):
            out[f"{name}_re"] = arr.real
            out[f"{name}_im"] = arr.imag
        else:
            out[name] = list(values)
    return out


def render_csv(table: ResultTable) -> str:
    cols = _split_complex(table.columns)
    names = sorted(cols)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(names)
    n = len(next(iter(cols.values()))) if cols else 0
    for i in range(n):
        writer.writerow([v if isinstance(v := cols[name][i], str) else format_number(v) for name in names])
    return buf.getvalue()


def render_json(table: ResultTable) -> str:
    cols = {k: list(v) for k, v in _split_complex(table.columns).items()}
    return _json({"columns": cols, "metadata": table.metadata}) + "\n"


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_table(table: ResultTable, out_dir: Path, stem: str, fmt: str) -> list[Path]:
    """Write the table (and for CSV a ``.meta.json`` sidecar); returns written paths."""
    if fmt == "csv":
        data = out_dir / f"{stem}.csv"
        meta = out_dir / f"{stem}.meta.json"
        write_atomic(data, render_csv(table))
        write_atomic(meta, _json(table.metadata) + "\n")
        return [data, meta]
    data = out_dir / f"{stem}.json"
    write_atomic(data, render_json(table))
    return [data]


# ------------------------------------------------------------------ loading

def load_yaml(path: Path):
    try:
        with open(path, encoding="utf-8") as fh:
            return yaml.safe_load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from None


def load_scenario(path: Path) -> Scenario:
    return parse_scenario(load_yaml(path), str(path))


def load_suite(path: Path) -> list[Scenario]:
    """A suite is ``{scenarios: [...]}`` whose entries are file paths
    (relative to the suite file) or inline scenario mappings."""
    data = load_yaml(path)
    if not isinstance(data, dict) or set(data) - {"scenarios"}:
        raise ConfigError(f"{path}: suite must be a mapping with a 'scenarios' list")
    entries = data.get("scenarios") or []
    if not isinstance(entries, list):
        raise ConfigError(f"{path}: 'scenarios' must be a list")
    out = []
    for i, entry in enumerate(entries):
        if isinstance(entry, str):
            out.append(load_scenario(path.parent / entry))
        else:
            out.append(parse_scenario(entry, f"{path}[{i}]"))
    names = [sc.name for sc in out]
    if len(set(names)) != len(names):
        raise ConfigError(f"{path}: scenario names must be unique")
    return out


# ------------------------------------------------------------------ execution

def _execute(sc: Scenario, seed: int):
    """Run one scenario; returns ``(table | None, checks, status, message)``."""
    try:
        table, checks = run_scenario(sc, seed)
    except ConfigError as exc:
        return None, [], EXIT_PARSE, str(exc)
    except NumericalGuardError as exc:
        return None, [], EXIT_GUARD, str(exc)
    except PreconditionError as exc:
        return None, [], EXIT_PRECONDITION, str(exc)
    failed = [ch.name for ch in checks if not ch.passed]
    status = EXIT_CHECK if failed else EXIT_OK
    return table, checks, status, ("failed: " + ", ".join(failed)) if failed else "ok"


def cmd_run(args) -> int:
    try:
        sc = load_scenario(Path(args.scenario))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    table, checks, status, message = _execute(sc, args.seed)
    if table is None:
        print(f"error: {sc.name}: {message}", file=sys.stderr)
        return status
    fmt = args.format or sc.output_format or "csv"
    out_dir = Path(args.out_dir)
    stem = Path(sc.output_path).stem if sc.output_path else sc.name
    for path in write_table(table, out_dir, stem, fmt):
        log.info("wrote %s", path)
    for ch in checks:
        print(f"{'PASS' if ch.passed else 'FAIL'} {sc.name} {ch.name} value={format_number(ch.value)}"
              f" threshold={format_number(ch.threshold)}")
    return status


def cmd_suite(args) -> int:
    try:
        scenarios = load_suite(Path(args.suite))
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    fmt = args.format or "csv"
    out_dir = Path(args.out_dir)
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        results = list(pool.map(lambda sc: _execute(sc, args.seed), scenarios))
    summary = {"scenario": [], "check": [], "passed": [], "value": [], "threshold": [], "status": []}

    def add(name, check, passed, value, threshold, status):
        for key, val in zip(summary, (name, check, int(passed), value, threshold, status)):
            summary[key].append(val)

    worst = EXIT_OK
    for sc, (table, checks, status, message) in zip(scenarios, results):
        if table is None:
            add(sc.name, "error: " + message, False, float("nan"), float("nan"), status)
        else:
            write_table(table, out_dir, sc.name, sc.output_format or fmt)
            for ch in checks:
                add(sc.name, ch.name, ch.passed, ch.value, ch.threshold, status)
        print(f"{'PASS' if status == EXIT_OK else 'FAIL'} {sc.name}: {message}")
        if status != EXIT_OK:
            worst = EXIT_CHECK
    write_table(ResultTable(summary, {"suite": str(args.suite), "seed": args.seed}), out_dir,
                "summary", fmt)
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qtime", description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", default="results", help="output directory (default: results)")
    parser.add_argument("--format", choices=FORMATS, default=None,
                        help="output format (default: scenario setting, else csv)")
    parser.add_argument("--seed", type=int, default=0, help="seed for randomized scenarios")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run one scenario file")
    p_run.add_argument("scenario")
    p_suite = sub.add_parser("suite", help="run every scenario listed in a suite file")
    p_suite.add_argument("suite")
    p_suite.add_argument("--jobs", type=int, default=1, help="concurrent scenarios")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_PARSE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    if args.command == "run":
        return cmd_run(args)
    return cmd_suite(args)


if __name__ == "__main__":
    sys.exit(main())

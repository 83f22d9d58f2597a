"""Command-line interface.

Subcommands: ``cluster`` (run the engine on CSV / descriptor / matrix
inputs), ``gen-data`` (synthetic float dataset), ``ari`` (score two label
files), ``baseline-dbscan`` (density baseline on a similarity matrix),
``benchmark`` (the cluster-count x tuple-count grid) and
``convert-descriptors`` (hex text to binary container).

Values resolve as flags over config file over defaults; the config file is
flat ``key = value`` text whose keys match the flag names. Output files are
written via a temporary file plus rename, so failures leave no partial
files. Exit codes: 0 success, 1 usage/configuration error, 2 data error.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
import tempfile

import numpy as np

from .core_model import Parameters
from .engine import run_antclust
from .errors import AntClustError, ConfigError, DataError
from .evaluation import (
    adjusted_rand_index,
    benchmark_grid,
    dbscan_precomputed,
    distance_from_similarity,
    generate_float_dataset,
    grid_csv_text,
    grid_json_text,
)
from .rules import RULE_SETS
from .similarity import (
    DescriptorColumn,
    MatrixColumn,
    ScalarColumn,
    descriptor_container_bytes,
    load_descriptor_input,
    load_scalar_csv,
    load_similarity_matrix,
    normalize_scalar_features,
    read_descriptor_hex,
)


class _UsageError(Exception):
    def __init__(self, message: str, usage: str = ""):
        super().__init__(message)
        self.usage = usage


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; we reserve 2 for data errors
    def error(self, message):
        raise _UsageError(message, self.format_usage())


def _parse_seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"seed must be an integer, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _parse_range(text: str) -> list[int]:
    """Accept "N" or "A..B" (inclusive)."""
    parts = text.split("..")
    try:
        if len(parts) == 1:
            lo = hi = int(parts[0])
        elif len(parts) == 2:
            lo, hi = int(parts[0]), int(parts[1])
        else:
            raise ValueError
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or A..B, got {text!r}") from None
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"invalid range {text!r}")
    return list(range(lo, hi + 1))


def _parse_int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None


def _parse_float(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None


def _atomic_write(path: str, data: str | bytes) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".antclust-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data.encode("utf-8") if isinstance(data, str) else data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def label_csv_text(labels) -> str:
    out = io.StringIO()
    out.write("item,label\n")
    for item, label in enumerate(labels):
        out.write(f"{item},{int(label)}\n")
    return out.getvalue()


def read_label_csv(path: str) -> np.ndarray:
    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows or [cell.strip() for cell in rows[0]] != ["item", "label"]:
        raise DataError(f"{path}: expected a label CSV with header 'item,label'")
    pairs = []
    for lineno, row in enumerate(rows[1:], start=2):
        try:
            item, label = (int(cell) for cell in row)
        except ValueError:
            raise DataError(f"{path}: line {lineno}: expected two integers") from None
        pairs.append((item, label))
    if not pairs:
        raise DataError(f"{path}: no label rows")
    pairs.sort()
    if [item for item, _ in pairs] != list(range(len(pairs))):
        raise DataError(f"{path}: item column must cover 0..{len(pairs) - 1} exactly once")
    return np.array([label for _, label in pairs], dtype=np.int64)


# --------------------------------------------------------------------------
# config file resolution


def _parse_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}: line {lineno}: expected 'key = value'")
        key, _, value = stripped.partition("=")
        values[key.strip()] = value.strip()
    return values


def _apply_config(args: argparse.Namespace, accepted: dict[str, tuple[str, object]]) -> None:
    """Fill unset flags from the config file; unknown keys are rejected."""
    if getattr(args, "config", None) is None:
        return
    config = _parse_config_file(args.config)
    unknown = set(config) - set(accepted)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
    for key, raw in config.items():
        dest, converter = accepted[key]
        if getattr(args, dest) is None:
            try:
                setattr(args, dest, converter(raw))
            except argparse.ArgumentTypeError as exc:
                raise ConfigError(f"config key {key!r}: {exc}") from None


def _build_params(args: argparse.Namespace) -> Parameters:
    kwargs = {}
    if getattr(args, "update_alpha", None) is not None:
        kwargs["update_alpha"] = args.update_alpha
    if getattr(args, "iter_alpha", None) is not None:
        kwargs["iter_alpha"] = args.iter_alpha
    if getattr(args, "beta", None) is not None:
        kwargs["beta"] = args.beta
    if getattr(args, "shrink_threshold", None) is not None:
        kwargs["shrink_threshold"] = args.shrink_threshold
    if getattr(args, "seed", None) is not None:
        kwargs["seed"] = args.seed
    return Parameters(**kwargs)


_PARAM_FLAGS = {
    "seed": ("seed", _parse_seed),
    "alpha": ("iter_alpha", _parse_float),
    "beta": ("beta", _parse_float),
    "update-alpha": ("update_alpha", _parse_float),
    "shrink-threshold": ("shrink_threshold", _parse_float),
}


def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--seed", type=_parse_seed, help="random seed (default 0)")
    parser.add_argument(
        "--alpha", dest="iter_alpha", type=_parse_float,
        help="meeting-phase iteration coefficient (default 150)",
    )
    parser.add_argument("--beta", type=_parse_float, help="template-learning coefficient (default 0.9)")
    parser.add_argument("--update-alpha", type=_parse_float, help="estimator learning rate (default 0.2)")
    parser.add_argument("--shrink-threshold", type=_parse_float, help="colony fitness cut factor (default 0.5)")
    parser.add_argument(
        "--backend", choices=("auto", "pure", "compiled"), default=None,
        help="kernel backend (default auto)",
    )


# --------------------------------------------------------------------------
# subcommand handlers


def _load_columns(args: argparse.Namespace) -> list:
    columns: list = []
    if args.csv:
        for raw in load_scalar_csv(args.csv):
            columns.append(normalize_scalar_features(ScalarColumn(raw)))
    if args.descriptors:
        columns.append(DescriptorColumn(load_descriptor_input(args.descriptors)))
    if args.matrix:
        columns.append(MatrixColumn(load_similarity_matrix(args.matrix)))
    if not columns:
        raise ConfigError("no input: provide at least one of --csv, --descriptors, --matrix")
    return columns


def _cmd_cluster(args: argparse.Namespace) -> int:
    _apply_config(
        args,
        {
            **_PARAM_FLAGS,
            "out": ("out", str),
            "rules": ("rules", str),
            "csv": ("csv", str),
            "descriptors": ("descriptors", str),
            "matrix": ("matrix", str),
            "backend": ("backend", str),
        },
    )
    if args.out is None:
        raise ConfigError("--out is required")
    rules_name = args.rules or "labroche"
    if rules_name not in RULE_SETS:
        raise ConfigError(f"unknown rule set {rules_name!r}; built-ins: {', '.join(RULE_SETS)}")
    columns = _load_columns(args)
    result = run_antclust(columns, _build_params(args), RULE_SETS[rules_name], args.backend)
    _atomic_write(args.out, label_csv_text(result.labels))
    print(result.colony_count)
    return 0


def _cmd_gen_data(args: argparse.Namespace) -> int:
    _apply_config(
        args,
        {
            "seed": ("seed", _parse_seed),
            "clusters": ("clusters", _parse_int),
            "tuples": ("tuples", _parse_int),
            "out": ("out", str),
            "truth-out": ("truth_out", str),
        },
    )
    for name in ("clusters", "tuples", "out", "truth_out"):
        if getattr(args, name) is None:
            raise ConfigError(f"--{name.replace('_', '-')} is required")
    seed = args.seed if args.seed is not None else 0
    rng = np.random.Generator(np.random.PCG64(seed))
    dataset = generate_float_dataset(args.clusters, args.tuples, rng)
    data_text = "".join(f"{value!r}\n" for value in dataset.raw_values.tolist())
    _atomic_write(args.out, data_text)
    _atomic_write(args.truth_out, label_csv_text(dataset.truth))
    return 0


def _cmd_ari(args: argparse.Namespace) -> int:
    truth = read_label_csv(args.truth)
    predicted = read_label_csv(args.predicted)
    print(adjusted_rand_index(truth, predicted))
    return 0


def _cmd_baseline_dbscan(args: argparse.Namespace) -> int:
    _apply_config(
        args,
        {
            "matrix": ("matrix", str),
            "eps": ("eps", _parse_float),
            "min-samples": ("min_samples", _parse_int),
            "out": ("out", str),
        },
    )
    if args.matrix is None or args.out is None:
        raise ConfigError("--matrix and --out are required")
    matrix = load_similarity_matrix(args.matrix)
    eps = 0.33 if args.eps is None else args.eps
    min_samples = 2 if args.min_samples is None else args.min_samples
    labels = dbscan_precomputed(distance_from_similarity(matrix.values), eps, min_samples)
    _atomic_write(args.out, label_csv_text(labels))
    print(len(set(int(v) for v in labels) - {-1}))
    return 0


def _cmd_benchmark(args: argparse.Namespace) -> int:
    _apply_config(
        args,
        {
            **_PARAM_FLAGS,
            "task": ("task", str),
            "clusters": ("clusters", _parse_range),
            "tuples": ("tuples", _parse_range),
            "reps": ("reps", _parse_int),
            "jobs": ("jobs", _parse_int),
            "out": ("out", str),
            "summary": ("summary", str),
            "backend": ("backend", str),
        },
    )
    if args.out is None:
        raise ConfigError("--out is required")
    task = args.task or "float"
    clusters = args.clusters if args.clusters is not None else list(range(2, 31))
    tuples = args.tuples if args.tuples is not None else list(range(3, 91))
    reps = args.reps if args.reps is not None else 1
    summary = args.summary or os.path.splitext(args.out)[0] + ".json"
    grid = benchmark_grid(
        task,
        clusters,
        tuples,
        reps,
        params=_build_params(args),
        base_seed=args.seed if args.seed is not None else 0,
        jobs=args.jobs if args.jobs is not None else 1,
        backend=args.backend,
    )
    _atomic_write(args.out, grid_csv_text(grid))
    _atomic_write(summary, grid_json_text(grid))
    return 0


def _cmd_convert_descriptors(args: argparse.Namespace) -> int:
    sets = read_descriptor_hex(args.input)
    _atomic_write(args.output, descriptor_container_bytes(sets))
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="antclust", description=__doc__)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("cluster", help="cluster a dataset and write labels")
    p.add_argument("--csv", help="scalar dataset CSV (columns are features)")
    p.add_argument("--descriptors", help="descriptor container (binary or hex text)")
    p.add_argument("--matrix", help="precomputed similarity matrix file")
    p.add_argument("--out", help="labels CSV output path")
    p.add_argument("--rules", help="rule set name (default labroche)")
    _add_param_flags(p)
    p.set_defaults(handler=_cmd_cluster)

    p = sub.add_parser("gen-data", help="generate a synthetic float dataset")
    p.add_argument("--clusters", type=_parse_int, help="number of planted clusters")
    p.add_argument("--tuples", type=_parse_int, help="items per cluster")
    p.add_argument("--seed", type=_parse_seed, help="random seed (default 0)")
    p.add_argument("--out", help="dataset CSV output path")
    p.add_argument("--truth-out", dest="truth_out", help="ground-truth labels CSV output path")
    p.add_argument("--config", help="flat key = value config file")
    p.set_defaults(handler=_cmd_gen_data)

    p = sub.add_parser("ari", help="score two label CSVs")
    p.add_argument("truth", help="ground-truth labels CSV")
    p.add_argument("predicted", help="predicted labels CSV")
    p.set_defaults(handler=_cmd_ari)

    p = sub.add_parser("baseline-dbscan", help="DBSCAN baseline on a similarity matrix")
    p.add_argument("--matrix", help="similarity matrix file (distance = 1 - similarity)")
    p.add_argument("--eps", type=_parse_float, help="neighborhood radius (default 0.33)")
    p.add_argument("--min-samples", dest="min_samples", type=_parse_int,
                   help="min neighborhood size incl. self (default 2)")
    p.add_argument("--out", help="labels CSV output path (noise = -1)")
    p.add_argument("--config", help="flat key = value config file")
    p.set_defaults(handler=_cmd_baseline_dbscan)

    p = sub.add_parser("benchmark", help="run the benchmark grid")
    p.add_argument("--task", choices=("float", "descriptor"), default=None,
                   help="dataset kind (default float)")
    p.add_argument("--clusters", type=_parse_range, help="cluster counts, N or A..B (default 2..30)")
    p.add_argument("--tuples", type=_parse_range, help="tuples per cluster, N or A..B (default 3..90)")
    p.add_argument("--reps", type=_parse_int, help="repetitions per cell (default 1)")
    p.add_argument("--jobs", type=_parse_int, help="worker processes over cells (default 1)")
    p.add_argument("--out", help="per-run CSV output path")
    p.add_argument("--summary", help="JSON summary path (default: out with .json)")
    _add_param_flags(p)
    p.set_defaults(handler=_cmd_benchmark)

    p = sub.add_parser("convert-descriptors", help="hex text descriptors to binary container")
    p.add_argument("input", help="hex text file, one item per line")
    p.add_argument("output", help="binary container output path")
    p.set_defaults(handler=_cmd_convert_descriptors)

    return parser


def dispatch(argv) -> int:
    """Parse and execute; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "command", None) is None:
            raise _UsageError("a subcommand is required", parser.format_usage())
        return args.handler(args)
    except _UsageError as exc:
        if exc.usage:
            sys.stderr.write(exc.usage)
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1
    except (DataError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except AntClustError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))

"""Command-line experiment orchestration.

Campaigns are pure functions of (command, parameters, seed): replicate r
derives its own stream via a counter-based split of the master seed, rows
are emitted in replicate order, and the output is byte-identical regardless
of --threads.  Output is JSON-lines by default, CSV on request; exact counts
that can exceed 64 bits (S, K) are emitted as decimal strings.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from . import clustering, hypotheses, oracles, stats
from .errors import (
    BcmrtError,
    ConfigError,
    InfeasibleSizeError,
    ParameterError,
)
from .estimators import estimate_q
from .generator import sample_tree, split_seed
from .tree import Setting, TimeLabelledTree, project

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INFEASIBLE = 3

TV_EXACT_CAP = 4
TV_EXACT_HARD_CAP = 5

_PARAM_TYPES: dict[str, Callable[[str], Any]] = {
    "n": int,
    "q": float,
    "q0": float,
    "q1": float,
    "seed": int,
    "reps": int,
    "threads": int,
    "k": int,
    "i": int,
    "cap": int,
    "limit": int,
    "setting": str,
    "which": str,
    "format": str,
    "out": str,
    "in": str,
}


@dataclass
class ExperimentSpec:
    """One campaign: a command plus its resolved parameter map."""

    command: str
    params: dict[str, Any] = field(default_factory=dict)


@dataclass
class ResultRow:
    """One emitted record: rows are written in replicate order regardless of
    execution order, and carry the replicate's own stream seed."""

    replicate: int
    seed_used: int
    payload: dict[str, Any]

    def flatten(self) -> dict[str, Any]:
        return {"replicate": self.replicate, "seed": self.seed_used, **self.payload}


def parse_config(path: str) -> dict[str, Any]:
    """Read a ``key = value`` file (one pair per line, # comments).  Later
    occurrences of a key win, with a warning; malformed lines and unknown
    keys are errors carrying the line number."""
    params: dict[str, Any] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"expected 'key = value', got {raw.strip()!r}",
                                  line=lineno)
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in _PARAM_TYPES:
                raise ConfigError(f"unknown key {key!r}", line=lineno)
            if not value:
                raise ConfigError(f"empty value for key {key!r}", line=lineno)
            if key in params:
                print(
                    f"warning: duplicate key {key!r} on line {lineno}; "
                    f"last occurrence wins",
                    file=sys.stderr,
                )
            try:
                params[key] = _PARAM_TYPES[key](value)
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}: {exc}", line=lineno)
    return params


def _require(params: dict[str, Any], keys: Sequence[str], command: str) -> None:
    missing = [k for k in keys if params.get(k) is None]
    if missing:
        raise ParameterError(
            f"command {command!r} needs --{', --'.join(missing)}"
        )


class _Writer:
    """Row sink with a fixed field order; JSON-lines or RFC-4180 CSV."""

    def __init__(self, stream, fmt: str, fieldnames: Sequence[str]):
        if fmt not in ("json", "csv"):
            raise ParameterError(f"format must be json or csv, got {fmt!r}")
        self.stream = stream
        self.fmt = fmt
        self.fieldnames = list(fieldnames)
        self._csv = None
        if fmt == "csv":
            self._csv = csv.writer(stream, lineterminator="\n")
            self._csv.writerow(self.fieldnames)

    def write(self, row: dict[str, Any]) -> None:
        if self.fmt == "json":
            self.stream.write(json.dumps({k: row.get(k) for k in self.fieldnames}))
            self.stream.write("\n")
        else:
            cells = []
            for k in self.fieldnames:
                v = row.get(k)
                if v is None:
                    cells.append("")
                elif isinstance(v, (list, tuple)):
                    cells.append(json.dumps(v))
                else:
                    cells.append(v)
            self._csv.writerow(cells)


def _replicate_rows(
    reps: int, threads: int, builder: Callable[[int], ResultRow]
) -> Iterable[ResultRow]:
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            yield from pool.map(builder, range(reps))
    else:
        for r in range(reps):
            yield builder(r)


def _tree_stats_row(tree: TimeLabelledTree) -> dict[str, Any]:
    profile = stats.degree_counts(tree)
    split = stats.root_split(tree)
    truth = np.ones(tree.n, dtype=np.uint8)
    return {
        "N1": profile.counts.get(1, 0),
        "N2": profile.counts.get(2, 0),
        "N3": profile.counts.get(3, 0),
        "Z": stats.collision_count(tree),
        "M_true": stats.monochromatic_count(tree, truth),
        "split_product": split.product,
        "R": split.cross_sum,
        "S": str(stats.sum_distance(tree)),
        "K": str(stats.cross_type_K(tree)),
    }


# ---------------------------------------------------------------------------
# subcommand implementations


def _run_generate(spec: ExperimentSpec, out, err) -> int:
    p = spec.params
    _require(p, ["n", "q"], "generate")
    n, q, seed = p["n"], p["q"], p["seed"]
    setting = p.get("setting") or "full"
    fields = ["replicate", "seed", "n", "q", "setting", "parent", "code"]
    writer = _Writer(out, p["format"], fields)

    def build(r: int) -> ResultRow:
        seed_r = split_seed(seed, r)
        tree = sample_tree(n, q, seed_r)
        payload: dict[str, Any] = {"n": n, "q": q, "setting": setting}
        if setting in ("full", "labelled"):
            payload["parent"] = [None if v < 0 else int(v) for v in tree.parent]
        else:
            payload["code"] = project(tree, Setting(setting)).code.hex()
        return ResultRow(r, seed_r, payload)

    for row in _replicate_rows(p["reps"], p["threads"], build):
        writer.write(row.flatten())
    return EXIT_OK


def _run_stats(spec: ExperimentSpec, out, err) -> int:
    p = spec.params
    fields = ["replicate", "seed", "n", "q", "N1", "N2", "N3", "Z", "M_true",
              "split_product", "R", "S", "K"]
    writer = _Writer(out, p["format"], fields)
    if p.get("in"):
        with open(p["in"], "r", encoding="utf-8") as fh:
            for r, line in enumerate(s for s in fh if s.strip()):
                tree = TimeLabelledTree.from_json(line)
                row = {"replicate": r, "seed": None, "n": tree.n, "q": None}
                row.update(_tree_stats_row(tree))
                writer.write(row)
        return EXIT_OK
    _require(p, ["n", "q"], "stats")
    n, q, seed = p["n"], p["q"], p["seed"]

    def build(r: int) -> ResultRow:
        seed_r = split_seed(seed, r)
        tree = sample_tree(n, q, seed_r)
        return ResultRow(r, seed_r, {"n": n, "q": q, **_tree_stats_row(tree)})

    for row in _replicate_rows(p["reps"], p["threads"], build):
        writer.write(row.flatten())
    return EXIT_OK


def _run_estimate(spec: ExperimentSpec, out, err) -> int:
    p = spec.params
    _require(p, ["n", "q"], "estimate")
    n, q, seed = p["n"], p["q"], p["seed"]
    fields = ["replicate", "seed", "n", "q", "z", "q_hat", "scale", "regime"]
    writer = _Writer(out, p["format"], fields)
    q_hats = []

    def build(r: int) -> ResultRow:
        seed_r = split_seed(seed, r)
        report = estimate_q(sample_tree(n, q, seed_r))
        return ResultRow(r, seed_r, {
            "n": n, "q": q, "z": report.z, "q_hat": report.q_hat,
            "scale": report.scale if math.isfinite(report.scale) else None,
            "regime": report.regime.value,
        })

    for row in _replicate_rows(p["reps"], p["threads"], build):
        q_hats.append(row.payload["q_hat"])
        writer.write(row.flatten())
    quantiles = np.quantile(np.array(q_hats), [0.25, 0.5, 0.75])
    print(
        json.dumps({"q25": quantiles[0], "q50": quantiles[1], "q75": quantiles[2]}),
        file=err,
    )
    return EXIT_OK


_TESTS = {
    "labelled": hypotheses.labelled_test,
    "rooted": hypotheses.split_product_test,
    "unrooted": hypotheses.sum_distance_test,
}


def _run_test(spec: ExperimentSpec, out, err) -> int:
    p = spec.params
    _require(p, ["n", "q0", "q1", "setting"], "test")
    setting = p["setting"]
    if setting not in _TESTS:
        raise ParameterError(f"unknown test setting {setting!r}")
    estimate = hypotheses.risk_mc(
        _TESTS[setting], p["q0"], p["q1"], p["n"], p["reps"], p["seed"],
        threads=p["threads"],
    )
    fields = ["setting", "q0", "q1", "n", "reps", "seed", "risk", "se"]
    writer = _Writer(out, p["format"], fields)
    writer.write({
        "setting": setting, "q0": p["q0"], "q1": p["q1"], "n": p["n"],
        "reps": estimate.reps, "seed": p["seed"],
        "risk": estimate.risk, "se": estimate.se,
    })
    return EXIT_OK


def _run_cluster(spec: ExperimentSpec, out, err) -> int:
    p = spec.params
    _require(p, ["n", "q"], "cluster")
    n, q, seed = p["n"], p["q"], p["seed"]
    cap = p.get("cap") or clustering.SEARCH_CAP
    if n > cap:
        raise InfeasibleSizeError(
            f"cluster sweeps 2^(n-1) colorings; n = {n} exceeds the cap of {cap}"
        )
    fields = ["replicate", "seed", "n", "q", "found", "mono_edges", "threshold",
              "overlap", "searched", "coloring"]
    writer = _Writer(out, p["format"], fields)

    def build(r: int) -> ResultRow:
        seed_r = split_seed(seed, r)
        result = clustering.search_colorings(sample_tree(n, q, seed_r), q, cap=cap)
        bits = None
        if result.coloring is not None:
            bits = "".join(str(int(b)) for b in result.coloring)
        return ResultRow(r, seed_r, {
            "n": n, "q": q,
            "found": result.coloring is not None,
            "mono_edges": result.mono_edges, "threshold": result.threshold,
            "overlap": result.overlap, "searched": result.searched,
            "coloring": bits,
        })

    for row in _replicate_rows(p["reps"], p["threads"], build):
        writer.write(row.flatten())
    return EXIT_OK


def _run_oracle(spec: ExperimentSpec, out, err) -> int:
    p = spec.params
    _require(p, ["which", "n"], "oracle")
    which, n = p["which"], p["n"]
    q = p.get("q")

    def need_q():
        if q is None:
            raise ParameterError(f"oracle --which {which} needs --q")

    if which == "leaf":
        need_q()
        table = oracles.degree_table(n, 1, q)
        rows = ({"n": m, "value": table.value("N1", m)} for m in range(1, n + 1))
        fields = ["n", "value"]
    elif which == "degree":
        need_q()
        k = p.get("k") or 3
        table = oracles.degree_table(n, k, q)
        fields = ["n"] + [f"N{j}" for j in range(1, k + 1)]
        rows = (
            {"n": m, **{f"N{j}": table.value(f"N{j}", m) for j in range(1, k + 1)}}
            for m in range(1, n + 1)
        )
    elif which == "rooted":
        need_q()
        table = oracles.rooted_moments(n, q)
        fields = ["n", "f", "g"]
        rows = (
            {"n": m, "f": table.value("f", m), "g": table.value("g", m)}
            for m in range(1, n + 1)
        )
    elif which == "unrooted":
        need_q()
        table = oracles.unrooted_moments(n, q)
        fields = ["n", "S", "K"]
        rows = (
            {"n": m, "S": table.value("S", m), "K": table.value("K", m)}
            for m in range(1, n + 1)
        )
    elif which == "gamma":
        need_q()
        fields = ["n", "value"]
        rows = ({"n": m, "value": oracles.gamma_product(m, q)} for m in range(1, n + 1))
    elif which == "delta":
        need_q()
        if p.get("q1") is None:
            raise ParameterError("oracle --which delta needs --q and --q1")
        fields = ["q0", "q1", "delta"]
        rows = iter([{"q0": q, "q1": p["q1"], "delta": oracles.delta_lower(q, p["q1"])}])
    elif which == "level":
        fields = ["n", "mean", "second_moment"]
        rows = (
            {"n": m, "mean": oracles.level_moments(m)[0],
             "second_moment": oracles.level_moments(m)[1]}
            for m in range(1, n + 1)
        )
    elif which == "esbound":
        fields = ["n", "bound"]
        rows = ({"n": m, "bound": oracles.efron_stein_bound(m)}
                for m in range(2, n + 1))
    elif which == "subtree":
        if p.get("i") is None:
            raise ParameterError("oracle --which subtree needs --i")
        fields = ["n", "i", "bound"]
        rows = iter([{
            "n": n, "i": p["i"],
            "bound": oracles.subtree_second_moment_bound(n, p["i"]),
        }])
    else:
        raise ParameterError(f"unknown oracle table {which!r}")
    writer = _Writer(out, p["format"], fields)
    for row in rows:
        writer.write(row)
    return EXIT_OK


def _run_tv_exact(spec: ExperimentSpec, out, err) -> int:
    p = spec.params
    _require(p, ["n", "q0", "q1", "setting"], "tv-exact")
    limit = p.get("limit") or TV_EXACT_CAP
    if limit > TV_EXACT_HARD_CAP:
        raise ParameterError(f"--limit is capped at {TV_EXACT_HARD_CAP}")
    tv = hypotheses.exact_tv(p["n"], p["q0"], p["q1"], p["setting"], limit=limit)
    writer = _Writer(out, p["format"], ["setting", "n", "q0", "q1", "tv"])
    writer.write({"setting": p["setting"], "n": p["n"], "q0": p["q0"],
                  "q1": p["q1"], "tv": tv})
    return EXIT_OK


_COMMANDS = {
    "generate": _run_generate,
    "stats": _run_stats,
    "estimate": _run_estimate,
    "test": _run_test,
    "cluster": _run_cluster,
    "oracle": _run_oracle,
    "tv-exact": _run_tv_exact,
}


def run(spec: ExperimentSpec, out=None, err=None) -> int:
    """Execute a campaign, writing rows to ``out`` (or --out / stdout)."""
    if spec.command not in _COMMANDS:
        raise ParameterError(f"unknown command {spec.command!r}")
    params = dict(spec.params)
    params.setdefault("seed", 0)
    params.setdefault("reps", 1)
    params.setdefault("threads", _default_threads())
    params.setdefault("format", "json")
    if params["reps"] < 1:
        raise ParameterError("reps must be >= 1")
    if params["threads"] < 1:
        raise ParameterError("threads must be >= 1")
    err = err if err is not None else sys.stderr
    resolved = ExperimentSpec(spec.command, params)
    target = params.get("out")
    if out is None and target and target != "-":
        with open(target, "w", encoding="utf-8", newline="") as fh:
            return _COMMANDS[spec.command](resolved, fh, err)
    return _COMMANDS[spec.command](resolved, out if out is not None else sys.stdout, err)


def _default_threads() -> int:
    raw = os.environ.get("BCMRT_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bcmrt",
        description="Monte Carlo campaigns and exact oracles for balanced "
                    "two-community recursive trees.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=None)
        sp.add_argument("--reps", type=int, default=None)
        sp.add_argument("--threads", type=int, default=None)
        sp.add_argument("--out", default=None)
        sp.add_argument("--format", choices=["json", "csv"], default=None)
        sp.add_argument("--config", default=None,
                        help="key = value file; explicit flags override it")

    sp = sub.add_parser("generate", help="sample trees")
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--q", type=float, default=None)
    sp.add_argument("--setting", choices=["labelled", "rooted", "unrooted", "full"],
                    default=None)
    common(sp)

    sp = sub.add_parser("stats", help="per-tree statistics")
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--q", type=float, default=None)
    sp.add_argument("--in", dest="in_", default=None,
                    help="JSON-lines file of trees instead of inline sampling")
    common(sp)

    sp = sub.add_parser("estimate", help="estimate q per replicate")
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--q", type=float, default=None)
    common(sp)

    sp = sub.add_parser("test", help="Monte Carlo risk of a two-point test")
    sp.add_argument("--setting", choices=["labelled", "rooted", "unrooted"],
                    default=None)
    sp.add_argument("--q0", type=float, default=None)
    sp.add_argument("--q1", type=float, default=None)
    sp.add_argument("--n", type=int, default=None)
    common(sp)

    sp = sub.add_parser("cluster", help="threshold-search clustering")
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--q", type=float, default=None)
    sp.add_argument("--cap", type=int, default=None)
    common(sp)

    sp = sub.add_parser("oracle", help="exact expectation tables")
    sp.add_argument("--which",
                    choices=["leaf", "degree", "rooted", "unrooted", "gamma",
                             "delta", "level", "esbound", "subtree"],
                    default=None)
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--q", type=float, default=None)
    sp.add_argument("--q1", type=float, default=None)
    sp.add_argument("--k", type=int, default=None)
    sp.add_argument("--i", type=int, default=None)
    common(sp)

    sp = sub.add_parser("tv-exact", help="exact total variation (small n)")
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--q0", type=float, default=None)
    sp.add_argument("--q1", type=float, default=None)
    sp.add_argument("--setting", choices=["labelled", "rooted", "unrooted"],
                    default=None)
    sp.add_argument("--limit", type=int, default=None)
    common(sp)

    return parser


def build_spec(args: argparse.Namespace) -> ExperimentSpec:
    """Resolve the parameter map: hard defaults, then config file values,
    then explicit flags."""
    file_params: dict[str, Any] = {}
    if args.config:
        file_params = parse_config(args.config)
    params = dict(file_params)
    for key, value in vars(args).items():
        if key in ("command", "config") or value is None:
            continue
        params["in" if key == "in_" else key] = value
    return ExperimentSpec(args.command, params)


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        spec = build_spec(args)
        return run(spec)
    except InfeasibleSizeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except BcmrtError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())

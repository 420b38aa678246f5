"""Benchmark harness: run solver suites over instance cells, emit CSV.

A *cell* is one (graph, commodity ratio) combination; it holds
``instances_per_cell`` instances that differ only in the commodity
sample seed.  Every configured solver runs once per instance with a
pre-assigned seed, so results do not depend on scheduling, and the
harness reports both per-run raw rows and per-cell aggregates (mean
best objective, mean time to best).

Graphs are given either as file paths or as generator specs
(``mesh:WxH`` or ``random:N,M,SEED``).  Benchmark specs are plain
``key=value`` text files, e.g.::

    graph=mesh:10x10
    ratios=0.10,0.25,0.40
    instances=20
    time_limit=10
    seed=1
    solvers=ls,msga
"""

from __future__ import annotations

import csv
import io
import os
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .edp import EdpInstance, solve_ls, solve_msga
from .generators import generate_commodities, generate_mesh, generate_random_connected
from .graph import Graph, load_graph
from .search import SearchConfig

SOLVERS = ("ls", "msga")

RAW_HEADER = ("graph", "ratio", "k", "solver", "seed", "q", "t_s")
AGGREGATE_HEADER = ("graph", "ratio", "k", "solver", "q_mean", "t_mean_s", "instances")


@dataclass
class BenchmarkSpec:
    graphs: list[str]
    commodity_ratios: list[str] = field(
        default_factory=lambda: ["0.10", "0.25", "0.40"])
    instances_per_cell: int = 20
    time_limit_s: float = 10.0
    iter_cap: int | None = None
    base_seed: int = 0
    seeds: list[int] | None = None
    solvers: list[str] = field(default_factory=lambda: ["ls", "msga"])
    jobs: int = 1

    def __post_init__(self) -> None:
        if not self.graphs:
            raise ValueError("benchmark spec needs at least one graph")
        if self.instances_per_cell < 1:
            raise ValueError("instances_per_cell must be >= 1")
        for r in self.commodity_ratios:
            f = Fraction(r)
            if not (0 < f <= 1):
                raise ValueError(f"commodity ratio {r} not in (0, 1]")
        for s in self.solvers:
            if s not in SOLVERS:
                raise ValueError(f"unknown solver {s!r}; use one of {SOLVERS}")
        if not self.solvers:
            raise ValueError("benchmark spec needs at least one solver")
        if self.seeds is not None and len(self.seeds) < self.instances_per_cell:
            raise ValueError(
                f"{len(self.seeds)} seeds given for {self.instances_per_cell} instances"
            )
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")

    def instance_seed(self, index: int) -> int:
        if self.seeds is not None:
            return self.seeds[index]
        return self.base_seed + index


def parse_spec(text: str) -> BenchmarkSpec:
    """Parse a line-oriented key=value benchmark spec."""
    kwargs: dict = {"graphs": []}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"spec line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key == "graph":
            kwargs["graphs"].append(value)
        elif key == "ratios":
            kwargs["commodity_ratios"] = [v.strip() for v in value.split(",") if v.strip()]
        elif key == "instances":
            kwargs["instances_per_cell"] = int(value)
        elif key == "time_limit":
            kwargs["time_limit_s"] = float(value)
        elif key == "iter_cap":
            kwargs["iter_cap"] = int(value)
        elif key == "seed":
            kwargs["base_seed"] = int(value)
        elif key == "seeds":
            kwargs["seeds"] = [int(v) for v in value.split(",") if v.strip()]
        elif key == "solvers":
            kwargs["solvers"] = [v.strip() for v in value.split(",") if v.strip()]
        elif key == "jobs":
            kwargs["jobs"] = int(value)
        else:
            raise ValueError(f"spec line {lineno}: unknown key {key!r}")
    return BenchmarkSpec(**kwargs)


_MESH_RE = re.compile(r"^mesh:(\d+)x(\d+)$")
_RANDOM_RE = re.compile(r"^random:(\d+),(\d+),(\d+)$")


def resolve_graph(entry: str) -> tuple[str, Graph]:
    """Turn a graph entry (generator spec or file path) into (name, Graph)."""
    m = _MESH_RE.match(entry)
    if m:
        w, h = int(m.group(1)), int(m.group(2))
        return f"mesh{w}x{h}", generate_mesh(w, h)
    m = _RANDOM_RE.match(entry)
    if m:
        n, edges, seed = (int(g) for g in m.groups())
        return f"random{n}-{edges}-{seed}", generate_random_connected(n, edges, seed)
    with open(entry, "r", encoding="utf-8") as fh:
        g = load_graph(fh.read())
    name = os.path.splitext(os.path.basename(entry))[0]
    return name, g


@lru_cache(maxsize=None)
def _cached_graph(entry: str) -> tuple[str, Graph]:
    return resolve_graph(entry)


@dataclass(frozen=True)
class RawRow:
    graph: str
    ratio: str
    k: int
    solver: str
    seed: int
    q: int
    t_s: float


@dataclass(frozen=True)
class AggregateRow:
    graph: str
    ratio: str
    k: int
    solver: str
    q_mean: float
    t_mean_s: float
    instances: int


@dataclass
class BenchResult:
    raw_rows: list[RawRow]
    aggregate_rows: list[AggregateRow]

    def raw_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(RAW_HEADER)
        for r in self.raw_rows:
            writer.writerow(
                [r.graph, r.ratio, r.k, r.solver, r.seed, r.q, f"{r.t_s:.3f}"])
        return buf.getvalue()

    def aggregate_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(AGGREGATE_HEADER)
        for r in self.aggregate_rows:
            writer.writerow(
                [r.graph, r.ratio, r.k, r.solver,
                 f"{r.q_mean:.3f}", f"{r.t_mean_s:.3f}", r.instances])
        return buf.getvalue()


def commodity_count(ratio: str, node_count: int) -> int:
    """Cell size for a ratio: floor(ratio * n), computed exactly."""
    k = int(Fraction(ratio) * node_count)
    return k


def _run_one(task: tuple) -> tuple:
    entry, ratio, k, solver, seed, time_limit_s, iter_cap = task
    _, g = _cached_graph(entry)
    commodities = tuple(generate_commodities(g, k, seed))
    inst = EdpInstance(g, commodities)
    cfg = SearchConfig(time_limit_s=time_limit_s, seed=seed, iter_cap=iter_cap)
    solve = solve_ls if solver == "ls" else solve_msga
    solution, _ = solve(inst, cfg)
    return task, solution.objective, solution.best_time


def run_benchmark(spec: BenchmarkSpec) -> BenchResult:
    """Run all cells of the spec; deterministic for fixed seeds even when
    jobs > 1 (seeds are pre-assigned per instance and rows are ordered)."""
    tasks = []
    names = {}
    for entry in spec.graphs:
        name, g = _cached_graph(entry)
        names[entry] = name
        for ratio in spec.commodity_ratios:
            k = commodity_count(ratio, g.node_count)
            if k < 1:
                raise ValueError(
                    f"ratio {ratio} yields no commodities on {name} "
                    f"({g.node_count} nodes)"
                )
            for i in range(spec.instances_per_cell):
                seed = spec.instance_seed(i)
                for solver in spec.solvers:
                    tasks.append(
                        (entry, ratio, k, solver, seed,
                         spec.time_limit_s, spec.iter_cap))

    if spec.jobs > 1:
        with ProcessPoolExecutor(max_workers=spec.jobs) as pool:
            outcomes = list(pool.map(_run_one, tasks))
    else:
        outcomes = [_run_one(t) for t in tasks]

    raw_rows = []
    for task, q, t_best in outcomes:
        entry, ratio, k, solver, seed, _, _ = task
        raw_rows.append(RawRow(names[entry], ratio, k, solver, seed, q, t_best))

    aggregate_rows = []
    for entry in spec.graphs:
        for ratio in spec.commodity_ratios:
            for solver in spec.solvers:
                cell = [
                    r for r in raw_rows
                    if r.graph == names[entry] and r.ratio == ratio
                    and r.solver == solver
                ]
                if not cell:
                    continue
                aggregate_rows.append(AggregateRow(
                    graph=names[entry],
                    ratio=ratio,
                    k=cell[0].k,
                    solver=solver,
                    q_mean=sum(r.q for r in cell) / len(cell),
                    t_mean_s=sum(r.t_s for r in cell) / len(cell),
                    instances=len(cell),
                ))
    return BenchResult(raw_rows, aggregate_rows)

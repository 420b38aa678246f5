"""Incrementally evaluated objectives and constraints over tree paths.

Every class here is a *differentiable*: it maintains a value (for
constraints, a violation count that is zero exactly when the constraint
holds) over one or more registered tree variables, and it answers
"what would this edge-replacement move do to my value" queries without
mutating any tree.  All arithmetic is exact integers, so a delta query
must equal value-after minus value-before to the last bit; the test
suite holds every class to that with apply/recompute/undo oracles.

Caches are keyed by the trees' revision counters and are refreshed
lazily on access, so callers may mutate a tree and simply query again;
:meth:`Differentiable.commit` forces the refresh eagerly after a move
is accepted.

Differentiables compose: ``a + b``, ``a - b``, ``a * b`` (or
:func:`combine`) build arithmetic expressions, and :func:`compare`
turns a pair of expressions into a constraint whose violation is the
missing amount (absolute difference for equality).
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .graph import Graph, path_nodes
from .treevar import BasicMove, RootedSpanningTree

MovePairs = Sequence[tuple[RootedSpanningTree, BasicMove]]


class Differentiable:
    """Base class: a value over registered trees plus move-delta queries."""

    kind = "objective"

    def __init__(self, trees: Iterable[RootedSpanningTree]) -> None:
        self.trees: tuple[RootedSpanningTree, ...] = tuple(trees)

    # subclasses implement _refresh() and _delta(pairs)

    def _refresh(self) -> None:
        raise NotImplementedError

    def _delta(self, pairs: MovePairs) -> int:
        raise NotImplementedError

    def _current(self) -> int:
        raise NotImplementedError

    def value(self) -> int:
        self._refresh()
        return self._current()

    def violations(self) -> int:
        if self.kind != "constraint":
            raise TypeError(f"{type(self).__name__} is not a constraint")
        return self.value()

    def commit(self, tree: RootedSpanningTree | None = None) -> None:
        """Bring caches in sync with the trees' current state."""
        del tree  # revision counters already identify what changed
        self._refresh()

    def is_registered(self, tree: RootedSpanningTree) -> bool:
        return any(t is tree for t in self.trees)

    def replace_edge_delta(self, tree: RootedSpanningTree, move: BasicMove) -> int:
        """Exact change of value() if ``move`` were applied to ``tree``."""
        if not self.is_registered(tree):
            raise ValueError("tree is not registered with this differentiable")
        self._refresh()
        return self._delta([(tree, move)])

    def replace_edge_delta_multi(self, pairs: MovePairs) -> int:
        """Exact joint change for one move on each of several trees."""
        seen: set[int] = set()
        for tree, _ in pairs:
            if not self.is_registered(tree):
                raise ValueError("tree is not registered with this differentiable")
            if id(tree) in seen:
                raise ValueError(
                    "at most one move per tree; use a complex move for several"
                )
            seen.add(id(tree))
        self._refresh()
        return self._delta(pairs)

    def move_delta_fn(self, tree: RootedSpanningTree):
        """Bulk form of :meth:`replace_edge_delta` for neighborhood scans:
        validates and refreshes once, then returns ``move -> delta``.
        Only valid while no registered tree is mutated."""
        if not self.is_registered(tree):
            raise ValueError("tree is not registered with this differentiable")
        self._refresh()

        def delta(move: BasicMove) -> int:
            return self._delta(((tree, move),))

        return delta

    def multi_delta_fn(self, trees: Sequence[RootedSpanningTree]):
        """Bulk form of :meth:`replace_edge_delta_multi` for a fixed tree
        tuple: validates and refreshes once, then returns
        ``(move, ...) -> joint delta`` taking one move per tree."""
        if len({id(t) for t in trees}) != len(trees):
            raise ValueError("trees must be distinct")
        for tree in trees:
            if not self.is_registered(tree):
                raise ValueError("tree is not registered with this differentiable")
        self._refresh()

        def delta(moves: Sequence[BasicMove]) -> int:
            return self._delta(tuple(zip(trees, moves)))

        return delta

    # -- composition sugar ----------------------------------------------------

    def __add__(self, other):
        return combine(self, "+", other)

    def __radd__(self, other):
        return combine(other, "+", self)

    def __sub__(self, other):
        return combine(self, "-", other)

    def __rsub__(self, other):
        return combine(other, "-", self)

    def __mul__(self, other):
        return combine(self, "*", other)

    def __rmul__(self, other):
        return combine(other, "*", self)


class _Const(Differentiable):
    """Constant operand for combined expressions."""

    def __init__(self, value: int) -> None:
        super().__init__(())
        if not isinstance(value, int):
            raise TypeError(f"constants must be exact integers, got {value!r}")
        self._value = value

    def _refresh(self) -> None:
        pass

    def _current(self) -> int:
        return self._value

    def _delta(self, pairs: MovePairs) -> int:
        return 0


class _SinglePathMetric(Differentiable):
    """Base for metrics of one tree's induced path."""

    def __init__(self, tree: RootedSpanningTree) -> None:
        super().__init__((tree,))
        self.tree = tree
        self._cached_version = -1
        self._value = 0

    def _compute(self, path: tuple[int, ...]) -> int:
        raise NotImplementedError

    def _refresh(self) -> None:
        if self._cached_version != self.tree.version:
            self._value = self._compute(self.tree.induced_path())
            self._cached_version = self.tree.version

    def _current(self) -> int:
        return self._value

    def _delta(self, pairs: MovePairs) -> int:
        move = None
        for tree, m in pairs:
            if tree is self.tree:
                move = m
        if move is None:
            return 0
        # A removal off the induced path never changes the path.
        if move.e_out not in self.tree.induced_path_set():
            return 0
        return self._compute(self.tree.simulate_path(move)) - self._value


def _check_weight_index(g: Graph, k: int) -> None:
    if not (0 <= k < g.weight_count):
        raise ValueError(
            f"weight index {k} out of range; graph has {g.weight_count} column(s)"
        )


class PathCost(_SinglePathMetric):
    """Total weight (column ``k``) accumulated along the induced path."""

    def __init__(self, tree: RootedSpanningTree, k: int = 0) -> None:
        super().__init__(tree)
        _check_weight_index(tree.graph, k)
        self.k = k

    def _compute(self, path: tuple[int, ...]) -> int:
        g = self.tree.graph
        k = self.k
        return sum(g.weights[e][k] for e in path)


class MinEdgeCost(_SinglePathMetric):
    """Smallest edge weight (column ``k``) on the induced path; the
    bottleneck value of the modeled path."""

    def __init__(self, tree: RootedSpanningTree, k: int = 0) -> None:
        super().__init__(tree)
        _check_weight_index(tree.graph, k)
        self.k = k

    def _compute(self, path: tuple[int, ...]) -> int:
        g = self.tree.graph
        k = self.k
        return min(g.weights[e][k] for e in path)


class MaxEdgeCost(_SinglePathMetric):
    """Largest edge weight (column ``k``) on the induced path."""

    def __init__(self, tree: RootedSpanningTree, k: int = 0) -> None:
        super().__init__(tree)
        _check_weight_index(tree.graph, k)
        self.k = k

    def _compute(self, path: tuple[int, ...]) -> int:
        g = self.tree.graph
        k = self.k
        return max(g.weights[e][k] for e in path)


class NodesVisited(_SinglePathMetric):
    """How many nodes of a fixed set the induced path visits.

    Path endpoints count: a path visits its source and its target.
    """

    def __init__(self, tree: RootedSpanningTree, nodes: Iterable[int]) -> None:
        super().__init__(tree)
        self.nodes = frozenset(nodes)
        for node in self.nodes:
            if not (0 <= node < tree.graph.node_count):
                raise ValueError(f"node id {node} out of range")

    def _compute(self, path: tuple[int, ...]) -> int:
        visited = path_nodes(self.tree.graph, self.tree.source, path)
        return len(self.nodes.intersection(visited))


class EdgeLoadMap:
    """Per-edge count of registered paths using the edge."""

    __slots__ = ("counts",)

    def __init__(self, edge_count: int) -> None:
        self.counts = [0] * edge_count

    def load(self, eid: int) -> int:
        return self.counts[eid]

    def add_path(self, path: Iterable[int]) -> int:
        """Add a path; returns the violation increase: edges whose new load exceeds 1."""
        grew = 0
        for e in path:
            if self.counts[e] >= 1:
                grew += 1
            self.counts[e] += 1
        return grew

    def remove_path(self, path: Iterable[int]) -> int:
        """Remove a path; returns the violation decrease: edges whose old load exceeded 1."""
        shrank = 0
        for e in path:
            if self.counts[e] >= 2:
                shrank += 1
            self.counts[e] -= 1
        return shrank


class PathEdgeDisjoint(Differentiable):
    """Constraint: the registered trees' induced paths are mutually
    edge-disjoint.

    The violation count is the total excess usage over all edges,
    sum over edges of max(0, load(e) - 1), where load(e) is how many paths use edge e.
    It is zero exactly when the paths are pairwise edge-disjoint.
    """

    kind = "constraint"

    def __init__(self, trees: Sequence[RootedSpanningTree]) -> None:
        super().__init__(trees)
        if self.trees:
            g = self.trees[0].graph
            for tree in self.trees:
                if tree.graph is not g:
                    raise ValueError("all trees must share one graph")
            if len({id(t) for t in self.trees}) != len(self.trees):
                raise ValueError("each tree may be registered once")
            self.loads = EdgeLoadMap(g.edge_count)
        else:
            self.loads = EdgeLoadMap(0)
        self._index = {id(t): i for i, t in enumerate(self.trees)}
        self._violation = 0
        self._cached_versions = [-1] * len(self.trees)
        self._cached_paths: list[tuple[int, ...]] = [()] * len(self.trees)
        self._cached_sets: list[frozenset[int]] = [frozenset()] * len(self.trees)
        self._refresh()

    def _refresh(self) -> None:
        for i, tree in enumerate(self.trees):
            if self._cached_versions[i] == tree.version:
                continue
            new_path = tree.induced_path()
            self._violation -= self.loads.remove_path(self._cached_paths[i])
            self._violation += self.loads.add_path(new_path)
            self._cached_paths[i] = new_path
            self._cached_sets[i] = frozenset(new_path)
            self._cached_versions[i] = tree.version

    def _current(self) -> int:
        return self._violation

    def _delta(self, pairs: MovePairs) -> int:
        overlay: dict[int, int] = {}
        counts = self.loads.counts
        overlay_get = overlay.get
        delta = 0
        for tree, move in pairs:
            i = self._index.get(id(tree))
            if i is None:  # move on a tree this constraint does not watch
                continue
            old_set = self._cached_sets[i]
            if move.e_out not in old_set:
                continue
            new_set = frozenset(tree.simulate_path(move))
            for e in old_set - new_set:
                l = overlay_get(e, counts[e])
                if l >= 2:
                    delta -= 1
                overlay[e] = l - 1
            for e in new_set - old_set:
                l = overlay_get(e, counts[e])
                if l >= 1:
                    delta += 1
                overlay[e] = l + 1
        return delta

    def is_registered(self, tree: RootedSpanningTree) -> bool:
        return id(tree) in self._index

    def tree_contribution(self, tree: RootedSpanningTree) -> int:
        """How many of this tree's path edges are shared with other paths;
        used to pick the worst offender for restarts."""
        self._refresh()
        i = self._index[id(tree)]
        return sum(1 for e in self._cached_paths[i] if self.loads.counts[e] >= 2)

    def conflicted_trees(self) -> list[RootedSpanningTree]:
        """Trees whose paths currently share at least one edge; these are
        the ones diversification should shake."""
        self._refresh()
        counts = self.loads.counts
        return [
            tree for i, tree in enumerate(self.trees)
            if any(counts[e] >= 2 for e in self._cached_paths[i])
        ]

    def sample_conflict_pair(
        self, rng
    ) -> tuple[RootedSpanningTree, RootedSpanningTree] | None:
        """Two distinct trees sharing one overloaded edge, or None; lets
        the search aim coordinated moves at actual conflicts."""
        self._refresh()
        loaded = [e for e, c in enumerate(self.loads.counts) if c >= 2]
        if not loaded:
            return None
        edge = rng.choice(loaded)
        users = [i for i, s in enumerate(self._cached_sets) if edge in s]
        if len(users) < 2:
            return None
        a, b = rng.sample(users, 2)
        return self.trees[a], self.trees[b]


_OPS = {
    "+": lambda a, b: a + b,
    "-": lambda a, b: a - b,
    "*": lambda a, b: a * b,
}

_RELS = {
    "<=": lambda a, b: max(0, a - b),
    ">=": lambda a, b: max(0, b - a),
    "==": lambda a, b: abs(a - b),
}


def _as_operand(x) -> Differentiable:
    if isinstance(x, Differentiable):
        return x
    return _Const(x)


def _merged_trees(a: Differentiable, b: Differentiable) -> list[RootedSpanningTree]:
    trees = list(a.trees)
    for t in b.trees:
        if not any(t is u for u in trees):
            trees.append(t)
    return trees


class _Combined(Differentiable):
    """Arithmetic combination of two differentiables (or constants)."""

    def __init__(self, a, op: str, b) -> None:
        if op not in _OPS:
            raise ValueError(f"unknown operator {op!r}; use one of {sorted(_OPS)}")
        self.a = _as_operand(a)
        self.b = _as_operand(b)
        self.op = op
        super().__init__(_merged_trees(self.a, self.b))

    def _refresh(self) -> None:
        self.a._refresh()
        self.b._refresh()

    def _current(self) -> int:
        return _OPS[self.op](self.a._current(), self.b._current())

    def _delta(self, pairs: MovePairs) -> int:
        da = self.a._delta(pairs)
        db = self.b._delta(pairs)
        if self.op == "+":
            return da + db
        if self.op == "-":
            return da - db
        va, vb = self.a._current(), self.b._current()
        return (va + da) * (vb + db) - va * vb


class _Comparison(Differentiable):
    """Constraint relating two expressions; the violation is the deficit."""

    kind = "constraint"

    def __init__(self, a, rel: str, b) -> None:
        if rel not in _RELS:
            raise ValueError(f"unknown relation {rel!r}; use one of {sorted(_RELS)}")
        self.a = _as_operand(a)
        self.b = _as_operand(b)
        self.rel = rel
        super().__init__(_merged_trees(self.a, self.b))

    def _refresh(self) -> None:
        self.a._refresh()
        self.b._refresh()

    def _current(self) -> int:
        return _RELS[self.rel](self.a._current(), self.b._current())

    def _delta(self, pairs: MovePairs) -> int:
        va, vb = self.a._current(), self.b._current()
        after = _RELS[self.rel](va + self.a._delta(pairs), vb + self.b._delta(pairs))
        return after - _RELS[self.rel](va, vb)


def combine(a, op: str, b) -> Differentiable:
    """Arithmetic composition: op is '+', '-' or '*'; operands may be
    differentiables or plain integers (so '* int' covers scaling)."""
    return _Combined(a, op, b)


def compare(a, rel: str, b) -> Differentiable:
    """State a constraint between two expressions; rel is '<=', '>=' or
    '=='.  The violation is how far the relation is from holding."""
    return _Comparison(a, rel, b)

"""Rooted spanning tree variables and edge-replacement moves.

A :class:`RootedSpanningTree` represents one elementary path implicitly:
the tree spans the whole graph, is rooted at the path's target node, and
the unique source-to-root chain of father pointers is the modeled path
(the *induced path*).  Changing the tree by swapping one non-tree edge in
and one tree edge out yields a new spanning tree and therefore possibly a
new induced path; that swap is the elementary move of the neighborhood.

Terminology used throughout:

* a *replacing* edge is a non-tree edge; inserting it closes exactly one
  cycle (its fundamental cycle),
* a *replacable* edge (for a given replacing edge) is any tree edge on
  that cycle; removing it restores a spanning tree,
* a move is *preferred* when it actually changes the induced path, which
  happens exactly when the removed edge lies on the induced path: removing
  a tree edge detaches the subtree below it, and the path changes iff the
  source sits inside that detached subtree.

Complex moves bundle pairwise independent basic moves; independence is
prechecked by requiring pairwise edge-disjoint fundamental cycles (each
removed edge inside its own cycle), which makes the application order
irrelevant.  Setting :data:`DEBUG_CHECKS` additionally re-verifies order
independence and full tree invariants after every mutation; the test
suite runs with it enabled.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

from .graph import Graph

# Extra order-independence and invariant validation after every mutation.
# Slow; intended for tests.
DEBUG_CHECKS = False


class InvalidMoveError(ValueError):
    """The move is not applicable to the tree in its current state."""


@dataclass(frozen=True)
class BasicMove:
    """Swap a non-tree edge in (``e_in``) and a cycle edge out (``e_out``)."""

    e_in: int
    e_out: int


@dataclass(frozen=True)
class ComplexMove:
    """An unordered bundle of pairwise independent basic moves."""

    moves: tuple[BasicMove, ...]

    def __post_init__(self) -> None:
        if not self.moves:
            raise InvalidMoveError("complex move needs at least one basic move")


@dataclass
class _BasicUndo:
    reoriented: list[tuple[int, int, int]]  # (node, old father node, old father edge)
    e_in: int
    e_out: int
    version_after: int


@dataclass
class _ComplexUndo:
    parts: list[_BasicUndo]
    version_after: int


def _as_rng(seed: int | random.Random) -> random.Random:
    if isinstance(seed, random.Random):
        return seed
    return random.Random(seed)


class RootedSpanningTree:
    """Mutable spanning tree of a graph, rooted at the path target.

    Father pointers orient every edge towards the root.  The variable is
    single-writer: mutate it from one thread only.
    """

    __slots__ = ("graph", "source", "root", "version",
                 "_father_node", "_father_edge", "_tree_edges", "_path_cache",
                 "_index_cache", "_preferred_cache")

    def __init__(self, graph: Graph, source: int, root: int,
                 father_node: list[int], father_edge: list[int]) -> None:
        if source == root:
            raise ValueError("source must differ from root")
        for node in (source, root):
            if not (0 <= node < graph.node_count):
                raise ValueError(f"node id {node} out of range")
        self.graph = graph
        self.source = source
        self.root = root
        self._father_node = father_node
        self._father_edge = father_edge
        self._tree_edges = {e for e in father_edge if e >= 0}
        self.version = 0
        self._path_cache: tuple[int, tuple[int, ...]] | None = None
        self._index_cache: tuple | None = None
        self._preferred_cache: tuple | None = None
        if DEBUG_CHECKS:
            self.validate()

    # -- construction --------------------------------------------------------

    @classmethod
    def random_tree(cls, graph: Graph, source: int, root: int,
                    rng: int | random.Random) -> "RootedSpanningTree":
        """Random spanning tree grown breadth-first from the root with
        shuffled adjacency; deterministic for a fixed seed.

        Breadth-first growth makes every father chain hop-minimal, so the
        variable starts on a (randomly chosen) shortest induced path;
        search moves then only lengthen it when that pays off."""
        father_node, father_edge = cls._random_fathers(graph, root, _as_rng(rng))
        return cls(graph, source, root, father_node, father_edge)

    @classmethod
    def from_edges(cls, graph: Graph, source: int, root: int,
                   tree_edges: Iterable[int]) -> "RootedSpanningTree":
        """Build the variable from an explicit spanning-tree edge set."""
        edge_set = set(tree_edges)
        if len(edge_set) != graph.node_count - 1:
            raise ValueError(
                f"{len(edge_set)} edges cannot span {graph.node_count} nodes"
            )
        father_node = [-1] * graph.node_count
        father_edge = [-1] * graph.node_count
        seen = [False] * graph.node_count
        seen[root] = True
        stack = [root]
        while stack:
            u = stack.pop()
            for eid in graph.adjacency[u]:
                if eid not in edge_set:
                    continue
                w = graph.other_end(eid, u)
                if not seen[w]:
                    seen[w] = True
                    father_node[w] = u
                    father_edge[w] = eid
                    stack.append(w)
        if not all(seen):
            raise ValueError("tree_edges do not form a spanning tree")
        return cls(graph, source, root, father_node, father_edge)

    @staticmethod
    def _random_fathers(graph: Graph, root: int,
                        rng: random.Random) -> tuple[list[int], list[int]]:
        father_node = [-1] * graph.node_count
        father_edge = [-1] * graph.node_count
        seen = [False] * graph.node_count
        seen[root] = True
        queue = deque([root])
        while queue:
            u = queue.popleft()
            incident = list(graph.adjacency[u])
            rng.shuffle(incident)
            for eid in incident:
                w = graph.other_end(eid, u)
                if not seen[w]:
                    seen[w] = True
                    father_node[w] = u
                    father_edge[w] = eid
                    queue.append(w)
        return father_node, father_edge

    def reinit_random(self, rng: int | random.Random) -> None:
        """Replace the whole tree with a fresh random one (used by restarts)."""
        self._father_node, self._father_edge = self._random_fathers(
            self.graph, self.root, _as_rng(rng))
        self._tree_edges = {e for e in self._father_edge if e >= 0}
        self._bump()
        if DEBUG_CHECKS:
            self.validate()

    # -- read-only queries ---------------------------------------------------

    @property
    def tree_edges(self) -> frozenset[int]:
        return frozenset(self._tree_edges)

    def has_tree_edge(self, eid: int) -> bool:
        return eid in self._tree_edges

    def father_of(self, node: int) -> int:
        """Father node id, or -1 for the root."""
        return self._father_node[node]

    def father_edge_of(self, node: int) -> int:
        """Edge id towards the father, or -1 for the root."""
        return self._father_edge[node]

    def induced_path(self) -> tuple[int, ...]:
        """Edge sequence of the source-to-root path (never empty)."""
        cache = self._path_cache
        if cache is not None and cache[0] == self.version:
            return cache[1]
        path = []
        node = self.source
        while node != self.root:
            path.append(self._father_edge[node])
            node = self._father_node[node]
        result = tuple(path)
        self._path_cache = (self.version, result)
        return result

    def induced_path_nodes(self) -> list[int]:
        nodes = [self.source]
        node = self.source
        while node != self.root:
            node = self._father_node[node]
            nodes.append(node)
        return nodes

    def induced_path_set(self) -> frozenset[int]:
        """Edges of the induced path as a set (cached per revision)."""
        return self._path_index()[3]

    def replacing_edges(self) -> list[int]:
        """All non-tree edges, ascending."""
        return [e for e in range(self.graph.edge_count) if e not in self._tree_edges]

    def fundamental_cycle(self, e_in: int) -> list[int]:
        """Tree edges on the cycle closed by inserting ``e_in``, ordered
        from e_in's first endpoint to its second."""
        if not (0 <= e_in < self.graph.edge_count) or e_in in self._tree_edges:
            raise InvalidMoveError(f"edge {e_in} is not a replacing edge")
        seg_u, seg_v = self._cycle_segments(e_in)
        return seg_u + seg_v[::-1]

    def replacable_edges(self, e_in: int) -> list[int]:
        """Tree edges removable together with inserting ``e_in``."""
        return self.fundamental_cycle(e_in)

    def preferred_replacable_edges(self, e_in: int) -> list[int]:
        """The replacable edges of ``e_in`` that lie on the induced path,
        i.e. exactly the removals that change the modeled path.

        The fundamental cycle meets the induced path in a contiguous
        stretch: the cycle follows father chains from e_in's endpoints,
        and each chain joins the induced path at one node and then stays
        on it.  The stretch runs between those two join positions, so it
        can be read off the cached path index without walking the cycle.
        """
        if e_in in self._tree_edges or not (0 <= e_in < self.graph.edge_count):
            raise InvalidMoveError(f"edge {e_in} is not a replacing edge")
        _, path_edges, _, _, q = self._path_index()
        u, v = self.graph.endpoints(e_in)
        a, b = q[u], q[v]
        if a > b:
            a, b = b, a
        return list(path_edges[a:b])

    def preferred_replacing_edges(self) -> list[int]:
        """Non-tree edges admitting at least one path-changing move."""
        return [e_in for e_in, _ in self.preferred_moves()]

    def preferred_moves(self) -> tuple[tuple[int, tuple[int, ...]], ...]:
        """All path-changing moves as ``(e_in, (e_out, ...))`` pairs,
        cached per revision; the workhorse of neighborhood scans."""
        cache = self._preferred_cache
        if cache is not None and cache[0] == self.version:
            return cache[1]
        _, path_edges, _, _, q = self._path_index()
        out = []
        endpoints = self.graph.edges
        tree_edges = self._tree_edges
        for e_in in range(self.graph.edge_count):
            if e_in in tree_edges:
                continue
            u, v = endpoints[e_in]
            a, b = q[u], q[v]
            if a == b:
                continue
            if a > b:
                a, b = b, a
            out.append((e_in, path_edges[a:b]))
        result = tuple(out)
        self._preferred_cache = (self.version, result)
        return result

    def independent(self, moves: Sequence[BasicMove]) -> bool:
        """Sufficient precheck for move independence in the current tree:
        pairwise edge-disjoint fundamental cycles, each removed edge inside
        its own cycle."""
        cycles: list[set[int]] = []
        for m in moves:
            if m.e_in in self._tree_edges:
                return False
            cycle = set(self.fundamental_cycle(m.e_in))
            if m.e_out not in cycle:
                return False
            if any(not cycle.isdisjoint(other) for other in cycles):
                return False
            cycles.append(cycle)
        seen_in = {m.e_in for m in moves}
        return len(seen_in) == len(moves)

    # -- mutation ------------------------------------------------------------

    def apply(self, move: BasicMove) -> _BasicUndo:
        """Perform the edge replacement; returns a token for :meth:`undo`.

        Only father pointers along the chain from the inserted edge's
        detached endpoint up to the removed edge are touched, so the cost
        is O(cycle length)."""
        token = self._apply_basic(move)
        if DEBUG_CHECKS:
            self.validate()
        return token

    def _apply_basic(self, move: BasicMove) -> _BasicUndo:
        e_in, e_out = move.e_in, move.e_out
        if not (0 <= e_in < self.graph.edge_count):
            raise InvalidMoveError(f"no such edge {e_in}")
        if e_in in self._tree_edges:
            raise InvalidMoveError(f"edge {e_in} is already a tree edge")
        seg_u, seg_v = self._cycle_segments(e_in)
        u, v = self.graph.endpoints(e_in)
        if e_out in seg_u:
            inside, outside = u, v
        elif e_out in seg_v:
            inside, outside = v, u
        else:
            raise InvalidMoveError(
                f"edge {e_out} is not on the cycle closed by edge {e_in}"
            )

        # Reverse father pointers from `inside` up to the lower endpoint of
        # e_out; everything else in the detached subtree keeps its father.
        reoriented: list[tuple[int, int, int]] = []
        cur = inside
        new_father, new_edge = outside, e_in
        while True:
            old_father = self._father_node[cur]
            old_edge = self._father_edge[cur]
            reoriented.append((cur, old_father, old_edge))
            self._father_node[cur] = new_father
            self._father_edge[cur] = new_edge
            if old_edge == e_out:
                break
            new_father, new_edge = cur, old_edge
            cur = old_father

        self._tree_edges.discard(e_out)
        self._tree_edges.add(e_in)
        self._bump()
        return _BasicUndo(reoriented, e_in, e_out, self.version)

    def apply_complex(self, cm: ComplexMove) -> _ComplexUndo | _BasicUndo:
        """Apply all basic moves of an independent bundle atomically.

        Rejected (tree unchanged) when the independence precheck fails.
        The final tree does not depend on the order the moves are listed.
        """
        if len(cm.moves) == 1:
            return self.apply(cm.moves[0])
        if not self.independent(cm.moves):
            raise InvalidMoveError("basic moves are not independent")
        parts = self._apply_sequence(cm.moves)
        token = _ComplexUndo(parts, self.version)
        if DEBUG_CHECKS:
            self._debug_check_order(cm, token)
            self.validate()
        return token

    def _apply_sequence(self, moves: Sequence[BasicMove]) -> list[_BasicUndo]:
        parts: list[_BasicUndo] = []
        try:
            for m in moves:
                parts.append(self._apply_basic(m))
        except InvalidMoveError:
            for part in reversed(parts):
                self._undo_basic(part)
            raise
        return parts

    def _debug_check_order(self, cm: ComplexMove, token: _ComplexUndo) -> None:
        expected = set(self._tree_edges)
        for part in reversed(token.parts):
            self._undo_basic(part)
        reversed_parts = self._apply_sequence(list(reversed(cm.moves)))
        if set(self._tree_edges) != expected:
            raise AssertionError(
                "complex move is order dependent despite passing the precheck"
            )
        for part in reversed(reversed_parts):
            self._undo_basic(part)
        token.parts[:] = self._apply_sequence(cm.moves)
        token.version_after = self.version

    def undo(self, token: _BasicUndo | _ComplexUndo) -> None:
        """Restore the exact tree state from before the matching apply.

        Tokens must be undone in LIFO order; the version counter keeps
        increasing (it tracks revisions, not states)."""
        if token.version_after != self.version:
            raise InvalidMoveError(
                "undo token is stale; undo must mirror apply order"
            )
        if isinstance(token, _ComplexUndo):
            for part in reversed(token.parts):
                self._undo_basic(part)
        else:
            self._undo_basic(token)
        if DEBUG_CHECKS:
            self.validate()

    def _undo_basic(self, token: _BasicUndo) -> None:
        for node, old_father, old_edge in reversed(token.reoriented):
            self._father_node[node] = old_father
            self._father_edge[node] = old_edge
        self._tree_edges.discard(token.e_in)
        self._tree_edges.add(token.e_out)
        self._bump()

    # -- simulation ----------------------------------------------------------

    def simulate_path(self, move: BasicMove) -> tuple[int, ...]:
        """Induced path the tree would have after ``move``, without mutating.

        Equals the current path when the removed edge is off it; otherwise
        it is the in-subtree walk from the source to the inserted edge's
        detached endpoint, the inserted edge, and the untouched father
        chain from the other endpoint to the root."""
        e_in, e_out = move.e_in, move.e_out
        if not (0 <= e_in < self.graph.edge_count):
            raise InvalidMoveError(f"no such edge {e_in}")
        if e_in in self._tree_edges:
            raise InvalidMoveError(f"edge {e_in} is already a tree edge")
        pos, path_edges, edge_pos, _, q = self._path_index()
        u, v = self.graph.endpoints(e_in)
        j = edge_pos.get(e_out)
        if j is None:
            # Removal off the induced path: the path stays as it is, but the
            # move must still be valid (slow check; cold in practice).
            seg_u, seg_v = self._cycle_segments(e_in)
            if e_out not in seg_u and e_out not in seg_v:
                raise InvalidMoveError(
                    f"edge {e_out} is not on the cycle closed by edge {e_in}"
                )
            return path_edges
        a, b = q[u], q[v]
        if not (min(a, b) <= j < max(a, b)):
            raise InvalidMoveError(
                f"edge {e_out} is not on the cycle closed by edge {e_in}"
            )
        # Exactly one endpoint hangs below the removed path edge.
        if a <= j:
            inside, outside, q_in, q_out = u, v, a, b
        else:
            inside, outside, q_in, q_out = v, u, b, a
        chain_in = []
        node = inside
        while node not in pos:
            chain_in.append(self._father_edge[node])
            node = self._father_node[node]
        chain_out = []
        node = outside
        while node not in pos:
            chain_out.append(self._father_edge[node])
            node = self._father_node[node]
        return (path_edges[:q_in] + tuple(reversed(chain_in)) + (e_in,)
                + tuple(chain_out) + path_edges[q_out:])

    # -- internals -----------------------------------------------------------

    def _bump(self) -> None:
        self.version += 1
        self._path_cache = None
        self._index_cache = None
        self._preferred_cache = None

    def _path_index(self):
        """Cached per revision: (pos, path_edges, edge_pos, path_set, q).

        ``pos`` maps on-path nodes to their index from the source,
        ``edge_pos`` maps path edges to their index, and ``q[x]`` is the
        index of the first on-path node on x's father chain (x's own
        index if x is on the path).  Everything downstream of the
        neighborhood reduction reads from this index.
        """
        cache = self._index_cache
        if cache is not None and cache[0] == self.version:
            return cache[1]
        path_edges = self.induced_path()
        nodes = self.induced_path_nodes()
        pos = {node: i for i, node in enumerate(nodes)}
        edge_pos = {e: i for i, e in enumerate(path_edges)}
        q = [-1] * self.graph.node_count
        for node, i in pos.items():
            q[node] = i
        father = self._father_node
        for start in range(self.graph.node_count):
            if q[start] >= 0:
                continue
            trail = [start]
            node = father[start]
            while q[node] < 0:
                trail.append(node)
                node = father[node]
            hit = q[node]
            for x in trail:
                q[x] = hit
        result = (pos, path_edges, edge_pos, frozenset(path_edges), q)
        self._index_cache = (self.version, result)
        return result

    def _cycle_segments(self, e_in: int) -> tuple[list[int], list[int]]:
        """Father-chain segments (u-to-meet, v-to-meet) for e_in = (u, v)."""
        u, v = self.graph.endpoints(e_in)
        pos = {u: 0}
        chain = [u]
        edges_u = []
        x = u
        while x != self.root:
            edges_u.append(self._father_edge[x])
            x = self._father_node[x]
            pos[x] = len(chain)
            chain.append(x)
        edges_v = []
        y = v
        while y not in pos:
            edges_v.append(self._father_edge[y])
            y = self._father_node[y]
        return edges_u[: pos[y]], edges_v

    def _tree_walk_between(self, a: int, b: int) -> list[int]:
        """Edges of the unique tree path from a to b."""
        if a == b:
            return []
        pos = {a: 0}
        chain = [a]
        edges_a = []
        x = a
        while x != self.root:
            edges_a.append(self._father_edge[x])
            x = self._father_node[x]
            pos[x] = len(chain)
            chain.append(x)
        edges_b = []
        y = b
        while y not in pos:
            edges_b.append(self._father_edge[y])
            y = self._father_node[y]
        return edges_a[: pos[y]] + edges_b[::-1]

    # -- state management and diagnostics -------------------------------------

    def snapshot(self) -> tuple[list[int], list[int]]:
        """Copy of the tree structure, for later :meth:`restore`."""
        return (list(self._father_node), list(self._father_edge))

    def restore(self, state: tuple[list[int], list[int]]) -> None:
        father_node, father_edge = state
        self._father_node = list(father_node)
        self._father_edge = list(father_edge)
        self._tree_edges = {e for e in self._father_edge if e >= 0}
        self._bump()
        if DEBUG_CHECKS:
            self.validate()

    def validate(self) -> None:
        """Check all spanning-tree invariants; raises AssertionError."""
        g = self.graph
        n = g.node_count
        if len(self._tree_edges) != n - 1:
            raise AssertionError(
                f"{len(self._tree_edges)} tree edges, expected {n - 1}"
            )
        used = set()
        for node in range(n):
            fe = self._father_edge[node]
            fn = self._father_node[node]
            if node == self.root:
                if fe != -1 or fn != -1:
                    raise AssertionError("root must have no father")
                continue
            if fe not in self._tree_edges:
                raise AssertionError(f"father edge of {node} not a tree edge")
            if set(g.endpoints(fe)) != {node, fn}:
                raise AssertionError(f"father edge of {node} has wrong endpoints")
            if fe in used:
                raise AssertionError(f"edge {fe} is father edge of two nodes")
            used.add(fe)
        reached = {self.root}
        for node in range(n):
            trail = []
            x = node
            while x not in reached:
                trail.append(x)
                x = self._father_node[x]
                if len(trail) > n:
                    raise AssertionError(f"father chain from {node} cycles")
            reached.update(trail)

    def dump(self) -> str:
        """Debug dump: one 'node father' line per node, then the induced
        path as an edge list."""
        lines = [f"{node} {self._father_node[node]}" for node in range(self.graph.node_count)]
        lines.append("path: " + " ".join(str(e) for e in self.induced_path()))
        return "\n".join(lines) + "\n"

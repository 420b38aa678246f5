"""Instance generators: mesh graphs, random connected graphs, commodities."""

from __future__ import annotations

import random

from .graph import Commodity, Graph


def generate_mesh(width: int, height: int) -> Graph:
    """4-neighbor grid with unit weights.

    ``width * height`` nodes (node (r, c) has id ``r * width + c``) and
    ``2 * width * height - width - height`` edges.
    """
    if width < 2 or height < 2:
        raise ValueError(f"mesh needs width and height >= 2, got {width}x{height}")
    edges: list[tuple[int, int]] = []
    for r in range(height):
        for c in range(width):
            node = r * width + c
            if c + 1 < width:
                edges.append((node, node + 1))
            if r + 1 < height:
                edges.append((node, node + width))
    weights = [(1,)] * len(edges)
    return Graph(width * height, edges, weights, (0,))


def generate_random_connected(n: int, m: int, seed: int) -> Graph:
    """Random connected graph: a random recursive tree plus random extra
    edges, unit weights.  Deterministic per seed."""
    if n < 2:
        raise ValueError(f"need at least 2 nodes, got {n}")
    max_edges = n * (n - 1) // 2
    if not (n - 1 <= m <= max_edges):
        raise ValueError(
            f"edge count {m} out of range [{n - 1}, {max_edges}] for {n} nodes"
        )
    rng = random.Random(seed)
    edges: list[tuple[int, int]] = []
    used: set[tuple[int, int]] = set()
    for v in range(1, n):
        u = rng.randrange(v)
        edges.append((u, v))
        used.add((u, v))
    while len(edges) < m:
        u = rng.randrange(n)
        v = rng.randrange(n)
        if u == v:
            continue
        key = (u, v) if u < v else (v, u)
        if key in used:
            continue
        used.add(key)
        edges.append(key)
    weights = [(1,)] * len(edges)
    return Graph(n, edges, weights, (0,))


def generate_commodities(g: Graph, count: int, seed: int) -> list[Commodity]:
    """Uniform sample of ``count`` ordered (source, target) pairs with
    source != target, without replacement.  Deterministic per seed."""
    n = g.node_count
    available = n * (n - 1)
    if count > available:
        raise ValueError(
            f"cannot draw {count} distinct pairs from {available} available"
        )
    if count < 0:
        raise ValueError("count must be >= 0")
    rng = random.Random(seed)
    seen: set[tuple[int, int]] = set()
    out: list[Commodity] = []
    while len(out) < count:
        s = rng.randrange(n)
        t = rng.randrange(n)
        if s == t or (s, t) in seen:
            continue
        seen.add((s, t))
        out.append(Commodity(s, t))
    return out

import random

import pytest

from treeroute import (
    BasicMove,
    ComplexMove,
    Model,
    PathCost,
    PathEdgeDisjoint,
    RootedSpanningTree,
    SearchConfig,
    compare,
    explore_one_move,
    explore_pair_move,
    explore_two_move,
    load_graph,
    run,
)
from treeroute.generators import generate_mesh

import oracles


def plateau_instance():
    """Single tree whose equality target is unreachable by one swap but
    hit exactly by two independent swaps (verified by enumeration)."""
    g = load_graph("5 6\n0 1 1\n1 2 5\n2 3 1\n3 4 5\n0 2 10\n2 4 4\n")
    tree = RootedSpanningTree.from_edges(g, 0, 4, [0, 1, 2, 3])
    objective = compare(PathCost(tree, 0), "==", 14)
    return g, tree, objective


def deadlock_instance():
    """Two commodities sharing an edge where no single preferred move
    reduces the violation but a coordinated pair does (found by
    exhaustive enumeration over all single and pair moves)."""
    g = load_graph("6 7\n0 1 1\n0 2 8\n2 3 8\n3 4 7\n3 5 5\n1 4 5\n0 5 3\n")
    t_a = RootedSpanningTree.from_edges(g, 1, 3, [1, 2, 3, 4, 5])
    t_b = RootedSpanningTree.from_edges(g, 0, 4, [0, 2, 3, 4, 5])
    constraint = PathEdgeDisjoint([t_a, t_b])
    return g, t_a, t_b, constraint


def all_preferred_moves(tree):
    for e_in, outs in tree.preferred_moves():
        for e_out in outs:
            yield BasicMove(e_in, e_out)


class TestSearchConfig:
    def test_defaults_valid(self):
        cfg = SearchConfig()
        assert cfg.move_portfolio == ("one-move", "two-move", "pair-move")

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            SearchConfig(time_limit_s=0)
        with pytest.raises(ValueError):
            SearchConfig(move_portfolio=())
        with pytest.raises(ValueError):
            SearchConfig(move_portfolio=("three-move",))
        with pytest.raises(ValueError):
            SearchConfig(max_stall_iterations=0)


class TestExploreOneMove:
    def test_returns_improving_move(self):
        # swap the weight-5 edge out: 0-1-2 costs 6, 0-3-1-2 would cost 3
        g = load_graph("4 4\n0 1 5\n1 2 1\n0 3 1\n3 1 1\n")
        tree = RootedSpanningTree.from_edges(g, 0, 2, [0, 1, 2])
        cost = PathCost(tree, 0)
        move = explore_one_move(tree, cost)
        assert move is not None
        assert cost.replace_edge_delta(tree, move) < 0

    def test_absent_at_verified_local_optimum(self):
        _, tree, objective = plateau_instance()
        assert all(
            objective.replace_edge_delta(tree, m) >= 0
            for m in all_preferred_moves(tree)
        )
        assert explore_one_move(tree, objective) is None

    def test_absent_on_tree_shaped_graph(self):
        g = load_graph("4 3\n0 1 1\n1 2 1\n2 3 1\n")
        tree = RootedSpanningTree.from_edges(g, 0, 3, [0, 1, 2])
        assert explore_one_move(tree, PathCost(tree, 0)) is None

    def test_global_optimum_on_enumerable_instance(self):
        # all spanning trees enumerated: no tree gives a cheaper 0-3 path
        g = load_graph("4 5\n0 1 1\n1 2 1\n2 3 1\n0 2 3\n1 3 3\n")
        best_cost = min(
            sum(g.weights[e][0] for e in oracles.path_from_tree(g, edges, 0, 3))
            for edges in oracles.all_spanning_trees(g)
        )
        tree = RootedSpanningTree.from_edges(g, 0, 3, [0, 1, 2])
        cost = PathCost(tree, 0)
        assert cost.value() == best_cost
        assert explore_one_move(tree, cost) is None


class TestExploreTwoMove:
    def test_finds_pair_on_plateau(self):
        _, tree, objective = plateau_instance()
        rng = random.Random(1)
        cm = explore_two_move(tree, objective, rng, samples=200)
        assert cm is not None
        before = objective.value()
        tree.apply_complex(cm)
        assert objective.value() < before

    def test_returned_bundle_is_independent(self):
        _, tree, objective = plateau_instance()
        cm = explore_two_move(tree, objective, random.Random(3), samples=200)
        assert cm is not None and tree.independent(cm.moves)

    def test_zero_budget_finds_nothing(self):
        _, tree, objective = plateau_instance()
        assert explore_two_move(tree, objective, random.Random(0), samples=0) is None


class TestExplorePairMove:
    def test_resolves_deadlock(self):
        _, t_a, t_b, constraint = deadlock_instance()
        assert constraint.violations() == 1
        # verified: no single preferred move on either tree improves
        for tree in (t_a, t_b):
            assert all(
                constraint.replace_edge_delta(tree, m) >= 0
                for m in all_preferred_moves(tree)
            )
        found = explore_pair_move(t_a, t_b, constraint, random.Random(5), samples=500)
        assert found is not None
        move_a, move_b = found
        t_a.apply(move_a)
        t_b.apply(move_b)
        constraint.commit()
        assert constraint.violations() == 0

    def test_absent_at_joint_optimum(self):
        g = generate_mesh(3, 3)
        t_a = RootedSpanningTree.random_tree(g, 0, 2, rng=1)
        t_b = RootedSpanningTree.random_tree(g, 6, 8, rng=1)
        constraint = PathEdgeDisjoint([t_a, t_b])
        assert constraint.violations() == 0
        assert explore_pair_move(t_a, t_b, constraint, random.Random(2), 200) is None

    def test_same_tree_rejected(self):
        g = generate_mesh(3, 3)
        tree = RootedSpanningTree.random_tree(g, 0, 8, rng=0)
        with pytest.raises(ValueError):
            explore_pair_move(tree, tree, PathEdgeDisjoint([tree]), random.Random(0))


def small_model(seed=0, k=4):
    g = generate_mesh(4, 4)
    rng = random.Random(seed)
    trees = []
    pairs = set()
    while len(trees) < k:
        s, t = rng.sample(range(16), 2)
        if (s, t) in pairs:
            continue
        pairs.add((s, t))
        trees.append(RootedSpanningTree.random_tree(g, s, t, rng.randrange(2 ** 32)))
    return Model(trees=trees, objective=PathEdgeDisjoint(trees))


class TestRun:
    def test_tiny_budget_still_reports_initial(self):
        model = small_model(1)
        cfg = SearchConfig(iter_cap=0, seed=1)
        trace = run(model, cfg)
        assert trace.iterations == 0
        assert len(trace.improvements) == 1
        assert trace.best_value == model.objective.value()

    def test_iteration_capped_runs_are_reproducible(self):
        def one():
            model = small_model(7)
            trace = run(model, SearchConfig(iter_cap=150, seed=3))
            return trace.improvements, trace.events, [t.tree_edges for t in model.trees]

        a = one()
        b = one()
        assert a == b

    def test_improvement_log_strictly_decreases(self):
        model = small_model(3)
        trace = run(model, SearchConfig(iter_cap=200, seed=2))
        values = [v for _, v in trace.improvements]
        assert all(x > y for x, y in zip(values, values[1:]))
        assert trace.best_value == values[-1]

    def test_accepted_moves_strictly_improve_between_kicks(self):
        model = small_model(5)
        trace = run(model, SearchConfig(iter_cap=300, seed=5))
        last = None
        for _, kind, value in trace.events:
            if kind.startswith("accept:"):
                if last is not None:
                    assert value < last
                last = value
            else:
                last = None  # perturbation/restart breaks the monotone run

    def test_portfolio_order_prefers_one_move(self):
        # an improving single move exists, so the first accepted move of a
        # run must come from the one-move phase
        model = small_model(1, k=5)
        assert model.objective.value() > 0
        assert any(explore_one_move(t, model.objective) for t in model.trees)
        trace = run(model, SearchConfig(iter_cap=50, seed=4))
        accepts = [kind for _, kind, _ in trace.events if kind.startswith("accept:")]
        assert accepts and accepts[0] == "accept:one-move"

    def test_trace_csv_shape(self):
        model = small_model(9)
        trace = run(model, SearchConfig(iter_cap=50, seed=0))
        lines = trace.to_csv().splitlines()
        assert lines[0] == "time_s,value"
        assert len(lines) == 1 + len(trace.improvements)

    def test_wall_clock_budget_respected(self):
        import time

        model = small_model(13)
        start = time.monotonic()
        run(model, SearchConfig(time_limit_s=0.3, seed=0))
        assert time.monotonic() - start < 3.0

    def test_moves_come_from_preferred_sets_and_change_paths(self):
        # every accepted move changes at least one induced path: the path
        # set over all trees must differ around each accept event
        model = small_model(17)
        objective = model.objective
        seen_paths = [tuple(t.induced_path() for t in model.trees)]

        def callback(kind, iteration, value, clock):
            seen_paths.append(tuple(t.induced_path() for t in model.trees))

        run(model, SearchConfig(iter_cap=120, seed=6), callback)
        assert objective.value() == objective._current()

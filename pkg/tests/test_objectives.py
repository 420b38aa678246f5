import random

import pytest

from treeroute import (
    BasicMove,
    MaxEdgeCost,
    MinEdgeCost,
    NodesVisited,
    PathCost,
    PathEdgeDisjoint,
    RootedSpanningTree,
    combine,
    compare,
    load_graph,
)
from treeroute.generators import generate_mesh

import oracles


def weighted_path_graph():
    # 0 -2- 1 -5- 2 -3- 3 plus chords so moves exist
    return load_graph("4 5\n0 1 2\n1 2 5\n2 3 3\n0 2 9\n1 3 4\n")


def chain_tree(g, s=0, t=3):
    return RootedSpanningTree.from_edges(g, s, t, [0, 1, 2])


def recompute(metric, tree):
    """From-scratch reference value for a single-path metric."""
    g = tree.graph
    path = tree.induced_path()
    kind = type(metric).__name__
    if kind == "PathCost":
        return sum(g.weights[e][metric.k] for e in path)
    if kind == "MinEdgeCost":
        return min(g.weights[e][metric.k] for e in path)
    if kind == "MaxEdgeCost":
        return max(g.weights[e][metric.k] for e in path)
    raise AssertionError(kind)


class TestPathCost:
    def test_chain(self):
        g = weighted_path_graph()
        assert PathCost(chain_tree(g), 0).value() == 10  # 2 + 5 + 3

    def test_single_edge(self):
        g = load_graph("2 1\n0 1 7\n")
        tree = RootedSpanningTree.from_edges(g, 0, 1, [0])
        assert PathCost(tree, 0).value() == 7

    def test_random_mesh_matches_recompute(self):
        rng = random.Random(2)
        for _ in range(30):
            g = oracles.random_connected_graph(rng, rng.randint(3, 10), rng.randint(1, 8))
            tree = oracles.random_tree_variable(rng, g)
            assert PathCost(tree, 0).value() == recompute(PathCost(tree, 0), tree)

    def test_invalid_weight_index(self):
        g = weighted_path_graph()
        with pytest.raises(ValueError, match="weight index"):
            PathCost(chain_tree(g), 3)


class TestMinMax:
    def test_chain(self):
        g = weighted_path_graph()
        tree = chain_tree(g)
        assert MinEdgeCost(tree, 0).value() == 2
        assert MaxEdgeCost(tree, 0).value() == 5

    def test_single_edge_identity(self):
        g = load_graph("2 1\n0 1 7\n")
        tree = RootedSpanningTree.from_edges(g, 0, 1, [0])
        assert MinEdgeCost(tree, 0).value() == 7
        assert MaxEdgeCost(tree, 0).value() == 7

    def test_random_matches_recompute(self):
        rng = random.Random(8)
        for _ in range(30):
            g = oracles.random_connected_graph(rng, rng.randint(3, 10), rng.randint(0, 8))
            tree = oracles.random_tree_variable(rng, g)
            assert MinEdgeCost(tree, 0).value() == recompute(MinEdgeCost(tree, 0), tree)
            assert MaxEdgeCost(tree, 0).value() == recompute(MaxEdgeCost(tree, 0), tree)


class TestNodesVisited:
    def test_counts_interior_hits(self):
        g = load_graph("4 3\n0 1\n1 2\n2 3\n")
        tree = RootedSpanningTree.from_edges(g, 1, 3, [0, 1, 2])
        # path 1-2-3; watched {2, 0}: only node 2 is on it
        assert NodesVisited(tree, {2, 0}).value() == 1

    def test_empty_set(self, triangle):
        tree = RootedSpanningTree.from_edges(triangle, 0, 2, [0, 1])
        assert NodesVisited(tree, set()).value() == 0

    def test_all_nodes_counts_path_nodes_with_endpoints(self, triangle):
        tree = RootedSpanningTree.from_edges(triangle, 0, 2, [0, 1])
        assert NodesVisited(tree, {0, 1, 2}).value() == 3

    def test_bad_node_rejected(self, triangle):
        tree = RootedSpanningTree.from_edges(triangle, 0, 2, [0, 1])
        with pytest.raises(ValueError):
            NodesVisited(tree, {9})


class TestPathEdgeDisjoint:
    def two_tree_setup(self):
        g = generate_mesh(3, 3)
        t1 = RootedSpanningTree.random_tree(g, 0, 8, rng=1)
        t2 = RootedSpanningTree.random_tree(g, 2, 6, rng=2)
        return g, t1, t2

    def test_one_shared_edge(self):
        g = load_graph("4 4\n0 1\n1 2\n2 3\n0 3\n")
        # paths 0-1-2 and 3-0-1 share edge (0,1)
        t1 = RootedSpanningTree.from_edges(g, 0, 2, [0, 1, 2])
        t2 = RootedSpanningTree.from_edges(g, 3, 1, [0, 1, 3])
        assert t2.induced_path() == (3, 0)
        constraint = PathEdgeDisjoint([t1, t2])
        assert constraint.violations() == 1

    def test_disjoint_paths(self):
        g = generate_mesh(3, 3)
        t1 = RootedSpanningTree.random_tree(g, 0, 2, rng=1)
        t2 = RootedSpanningTree.random_tree(g, 6, 8, rng=1)
        constraint = PathEdgeDisjoint([t1, t2])
        expected = oracles.violation_count([t1.induced_path(), t2.induced_path()])
        assert constraint.violations() == expected

    def test_three_paths_over_one_bridge(self):
        # bridge (0,1); three commodities forced over it
        g = load_graph("5 5\n0 1\n2 0\n3 0\n1 4\n1 2\n")
        trees = [
            RootedSpanningTree.from_edges(g, 2, 1, [0, 1, 2, 3]),
            RootedSpanningTree.from_edges(g, 3, 1, [0, 1, 2, 3]),
            RootedSpanningTree.from_edges(g, 0, 4, [0, 1, 2, 3]),
        ]
        constraint = PathEdgeDisjoint(trees)
        paths = [t.induced_path() for t in trees]
        assert all(0 in p for p in paths)  # all cross the bridge, load 3
        assert constraint.violations() == 2
        assert constraint.violations() == oracles.violation_count(paths)

    def test_empty_tree_list(self):
        assert PathEdgeDisjoint([]).violations() == 0

    def test_duplicate_tree_rejected(self, triangle):
        tree = RootedSpanningTree.from_edges(triangle, 0, 2, [0, 1])
        with pytest.raises(ValueError):
            PathEdgeDisjoint([tree, tree])

    def test_commit_consistency_randomized(self):
        rng = random.Random(77)
        g = generate_mesh(4, 4)
        trees = [oracles.random_tree_variable(rng, g) for _ in range(5)]
        constraint = PathEdgeDisjoint(trees)
        for _ in range(300):
            tree = rng.choice(trees)
            move = oracles.random_valid_move(rng, tree)
            if move is None:
                continue
            tree.apply(BasicMove(*move))
            constraint.commit(tree)
            paths = [t.induced_path() for t in trees]
            assert constraint.violations() == oracles.violation_count(paths)


class TestReplaceEdgeDelta:
    def test_move_off_path_is_zero_for_every_kind(self):
        g = load_graph("5 5\n0 1 2\n1 2 5\n2 3 3\n2 4 1\n3 4 9\n")
        tree = RootedSpanningTree.from_edges(g, 0, 1, [0, 1, 2, 3])
        move = BasicMove(e_in=4, e_out=2)  # cycle 2-3-4, off the 0-1 path
        for d in (PathCost(tree, 0), MinEdgeCost(tree, 0), MaxEdgeCost(tree, 0),
                  NodesVisited(tree, {3}), PathEdgeDisjoint([tree])):
            assert d.replace_edge_delta(tree, move) == 0

    def test_cost_swap_five_for_two(self):
        # path edge of weight 5 replaced by a chord of weight 2
        g = load_graph("3 3\n0 1 5\n1 2 1\n0 2 0\n")
        g2 = load_graph("4 4\n0 1 5\n1 2 1\n0 3 1\n3 1 1\n")
        tree = RootedSpanningTree.from_edges(g2, 0, 2, [0, 1, 2])
        cost = PathCost(tree, 0)
        assert cost.value() == 6
        # replace (0,1) w5 with the 0-3-1 detour: e_in=(3,1), e_out=(0,1)
        delta = cost.replace_edge_delta(tree, BasicMove(3, 0))
        assert delta == (1 + 1) - 5  # -3

    def test_unregistered_tree_rejected(self):
        g = load_graph("3 3\n0 1 1\n1 2 1\n0 2 1\n")
        t1 = RootedSpanningTree.from_edges(g, 0, 2, [0, 1])
        t2 = RootedSpanningTree.from_edges(g, 0, 2, [0, 1])
        cost = PathCost(t1, 0)
        with pytest.raises(ValueError, match="not registered"):
            cost.replace_edge_delta(t2, BasicMove(2, 0))

    def _delta_oracle(self, differentiable, tree, move):
        before = differentiable.value()
        token = tree.apply(move)
        differentiable.commit(tree)
        after = differentiable.value()
        tree.undo(token)
        differentiable.commit(tree)
        return after - before

    def test_single_tree_kinds_match_apply_recompute_undo(self):
        rng = random.Random(4)
        g = oracles.random_connected_graph(rng, 8, 8, columns=2)
        tree = oracles.random_tree_variable(rng, g)
        watched = {1, 3, 5}
        kinds = [
            PathCost(tree, 0),
            MinEdgeCost(tree, 1),
            MaxEdgeCost(tree, 0),
            NodesVisited(tree, watched),
            compare(PathCost(tree, 0), "<=", 12),
            combine(PathCost(tree, 0), "+", PathCost(tree, 1)),
            combine(PathCost(tree, 0), "*", 3),
        ]
        for _ in range(400):
            move = oracles.random_valid_move(rng, tree)
            if move is None:
                break
            m = BasicMove(*move)
            for d in kinds:
                assert d.replace_edge_delta(tree, m) == self._delta_oracle(d, tree, m)
            token = tree.apply(m)
            if rng.random() < 0.5:
                tree.undo(token)

    def test_disjoint_constraint_matches_oracle(self):
        rng = random.Random(6)
        g = generate_mesh(4, 4)
        trees = [oracles.random_tree_variable(rng, g) for _ in range(6)]
        constraint = PathEdgeDisjoint(trees)
        for _ in range(400):
            tree = rng.choice(trees)
            move = oracles.random_valid_move(rng, tree)
            m = BasicMove(*move)
            assert constraint.replace_edge_delta(tree, m) == \
                self._delta_oracle(constraint, tree, m)
            if rng.random() < 0.4:
                tree.apply(m)
                constraint.commit(tree)


class TestReplaceEdgeDeltaMulti:
    def test_two_moves_one_tree_rejected(self, triangle):
        tree = RootedSpanningTree.from_edges(triangle, 0, 2, [0, 1])
        c = PathEdgeDisjoint([tree])
        with pytest.raises(ValueError, match="one move per tree"):
            c.replace_edge_delta_multi(
                [(tree, BasicMove(2, 0)), (tree, BasicMove(2, 1))])

    def test_both_paths_unchanged_gives_zero(self):
        g = load_graph("5 5\n0 1\n1 2\n2 3\n2 4\n3 4\n")
        t1 = RootedSpanningTree.from_edges(g, 0, 1, [0, 1, 2, 3])
        t2 = RootedSpanningTree.from_edges(g, 0, 1, [0, 1, 2, 3])
        c = PathEdgeDisjoint([t1, t2])
        off_path = BasicMove(e_in=4, e_out=2)
        assert c.replace_edge_delta_multi(
            [(t1, off_path), (t2, off_path)]) == 0

    def test_vacating_a_doubly_loaded_edge(self):
        # both paths cross (0,1); moving one off it drops the violation
        g = load_graph("4 4\n0 1\n1 2\n0 3\n3 1\n")
        t1 = RootedSpanningTree.from_edges(g, 0, 2, [0, 1, 2])
        t2 = RootedSpanningTree.from_edges(g, 0, 1, [0, 1, 2])
        c = PathEdgeDisjoint([t1, t2])
        assert c.violations() == 1
        move_t2 = BasicMove(e_in=3, e_out=0)  # reroute t2 via 0-3-1
        off_path_t1 = BasicMove(e_in=3, e_out=0)
        delta = c.replace_edge_delta_multi([(t2, move_t2)])
        assert delta == -1

    def test_joint_delta_when_single_deltas_do_not_sum(self):
        rng = random.Random(12)
        g = generate_mesh(4, 4)
        found_interaction = False
        for _ in range(600):
            t1 = oracles.random_tree_variable(rng, g)
            t2 = oracles.random_tree_variable(rng, g)
            c = PathEdgeDisjoint([t1, t2])
            m1 = oracles.random_valid_move(rng, t1)
            m2 = oracles.random_valid_move(rng, t2)
            m1, m2 = BasicMove(*m1), BasicMove(*m2)
            joint = c.replace_edge_delta_multi([(t1, m1), (t2, m2)])
            singles = c.replace_edge_delta(t1, m1) + c.replace_edge_delta(t2, m2)
            # oracle: apply both, recompute, undo both
            tok1 = t1.apply(m1)
            tok2 = t2.apply(m2)
            c.commit()
            after = c.violations()
            t2.undo(tok2)
            t1.undo(tok1)
            c.commit()
            before = c.violations()
            assert joint == after - before
            if joint != singles:
                found_interaction = True
        assert found_interaction, "expected at least one interacting pair"


class TestCombineCompare:
    def test_comparison_satisfied(self):
        g = weighted_path_graph()
        tree = chain_tree(g)
        assert compare(PathCost(tree, 0), "<=", 10).violations() == 0

    def test_comparison_deficit(self):
        g = weighted_path_graph()
        tree = chain_tree(g)
        assert compare(PathCost(tree, 0), "<=", 7).violations() == 3
        assert compare(PathCost(tree, 0), ">=", 13).violations() == 3
        assert compare(PathCost(tree, 0), "==", 13).violations() == 3

    def test_constraint_zero_iff_satisfied(self):
        g = weighted_path_graph()
        tree = chain_tree(g)
        c = compare(PathCost(tree, 0), "==", 10)
        assert c.violations() == 0

    def test_arithmetic_composition(self):
        g = weighted_path_graph()
        tree = chain_tree(g)
        cost = PathCost(tree, 0)
        assert (cost + 5).value() == 15
        assert (cost - MinEdgeCost(tree, 0)).value() == 8
        assert (cost * 2).value() == 20
        assert (3 * cost).value() == 30
        assert combine(cost, "-", 4).value() == 6

    def test_budget_sum_delta_matches_oracle(self):
        rng = random.Random(3)
        g = generate_mesh(3, 3)
        t1 = oracles.random_tree_variable(rng, g, 0, 8)
        t2 = oracles.random_tree_variable(rng, g, 2, 6)
        both = compare(combine(PathCost(t1, 0), "+", PathCost(t2, 0)), "<=", 5)
        for _ in range(200):
            tree = rng.choice([t1, t2])
            move = oracles.random_valid_move(rng, tree)
            m = BasicMove(*move)
            before = both.violations()
            token = tree.apply(m)
            after = both.violations()
            tree.undo(token)
            assert both.replace_edge_delta(tree, m) == after - before

    def test_non_integer_constant_rejected(self):
        g = weighted_path_graph()
        with pytest.raises(TypeError):
            combine(PathCost(chain_tree(g), 0), "+", 1.5)

    def test_violations_requires_constraint(self):
        g = weighted_path_graph()
        with pytest.raises(TypeError):
            PathCost(chain_tree(g), 0).violations()

"""Event trees, filtrations, conditional expectations, enlargements."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from filtration_lab import (
    StoppingTime,
    build_tree,
    conditional_expectation,
    enlarge,
    random_tree,
)
from filtration_lab.errors import (
    DanglingNode,
    NonPositiveProbability,
    NotARefinement,
    NotAStoppingTime,
    NotMonotone,
    ProbabilitySumNotOne,
    TimeOutOfRange,
)

F = Fraction


class TestBuildTree:
    def test_bin1_shape(self, bin1):
        assert bin1.horizon == 1
        assert len(bin1.nodes) == 3
        assert bin1.n_leaves == 2
        assert bin1.leaf_probs == [F(1, 2), F(1, 2)]

    def test_ter1_shape(self, ter1):
        assert len(ter1.nodes) == 4
        assert ter1.n_leaves == 3
        assert sum(ter1.leaf_probs) == 1

    def test_probability_sum_checked(self):
        with pytest.raises(ProbabilitySumNotOne):
            build_tree({
                "horizon": 1,
                "nodes": [
                    {"id": "r", "time": 0, "parent": None, "prob": None},
                    {"id": "u", "time": 1, "parent": "r", "prob": "1/2"},
                    {"id": "d", "time": 1, "parent": "r", "prob": "1/3"},
                ],
            })

    def test_zero_probability_rejected(self):
        with pytest.raises(NonPositiveProbability):
            build_tree({
                "horizon": 1,
                "nodes": [
                    {"id": "r", "time": 0, "parent": None, "prob": None},
                    {"id": "u", "time": 1, "parent": "r", "prob": "1"},
                    {"id": "d", "time": 1, "parent": "r", "prob": "0"},
                ],
            })

    def test_dangling_parent_rejected(self):
        with pytest.raises(DanglingNode):
            build_tree({
                "horizon": 1,
                "nodes": [
                    {"id": "r", "time": 0, "parent": None, "prob": None},
                    {"id": "u", "time": 1, "parent": "ghost", "prob": "1"},
                ],
            })

    def test_spec_round_trip(self, ter1):
        assert build_tree(ter1.to_spec()).to_spec() == ter1.to_spec()


class TestConditionalExpectation:
    def test_mean_zero_at_root(self, ter1):
        assert conditional_expectation([1, -1, 0], 0, ter1) == {"r": F(0)}

    def test_enlarged_atom_averages(self, ter1, ga):
        # oracle: (-1 * 1/3 + 0 * 1/3) / (2/3) = -1/2 on {b, c}
        values = conditional_expectation([1, -1, 0], 0, ga)
        assert values == {"a": F(1), "b|c": F(-1, 2)}

    def test_constants_are_fixed_points(self, bin1):
        assert conditional_expectation([5, 5], 0, bin1) == {"r": F(5)}

    def test_time_out_of_range(self, bin1):
        with pytest.raises(TimeOutOfRange):
            conditional_expectation([1, 2], 5, bin1)

    def test_tower_property_on_random_trees(self):
        from filtration_lab.tree import conditional_expectation_leafwise
        for seed in range(6):
            tree = random_tree(seed, horizon=3, max_branching=3)
            x = [F(i * i - 3, 2) for i in range(tree.n_leaves)]
            for s in range(3):
                for t in range(s, 4):
                    inner = conditional_expectation_leafwise(x, t, tree)
                    assert (conditional_expectation_leafwise(inner, s, tree)
                            == conditional_expectation_leafwise(x, s, tree))

    def test_enlargement_tower_into_base(self, ter1, ga):
        from filtration_lab.tree import conditional_expectation_leafwise
        x = [F(7), F(-2), F(5)]
        fine = conditional_expectation_leafwise(x, 0, ga)
        assert (conditional_expectation_leafwise(fine, 0, ter1)
                == conditional_expectation_leafwise(x, 0, ter1))


class TestEnlarge:
    def test_ga_valid(self, ga):
        atoms0 = [a.label for a in ga.filtration().atoms(0)]
        assert sorted(atoms0) == ["a", "b|c"]

    def test_gb_valid(self, gb):
        atoms0 = [a.label for a in gb.filtration().atoms(0)]
        assert sorted(atoms0) == ["a|b", "c"]

    def test_coarser_than_base_rejected(self, ter1):
        # time-1 base atoms are singletons; {a, b} cannot be a G1 cell
        with pytest.raises(NotARefinement):
            enlarge(ter1, {0: [["a"], ["b"], ["c"]],
                           1: [["a", "b"], ["c"]]})

    def test_non_monotone_rejected(self, two_step):
        # each partition refines the base at its own time, but the time-1
        # cells split a time-0 cell
        with pytest.raises(NotMonotone):
            enlarge(two_step, {0: [["uu", "ud", "du"], ["dm", "dd"]],
                               1: [["uu", "ud"], ["du", "dm", "dd"]]})

    def test_missing_times_default_to_refinement(self, ter1):
        g = enlarge(ter1, {0: [["a"], ["b", "c"]]})
        assert sorted(a.label for a in g.filtration().atoms(1)) == ["a", "b", "c"]

    def test_atoms_partition_leaves(self, ga):
        filtration = ga.filtration()
        for t in range(2):
            seen = sorted(i for atom in filtration.atoms(t) for i in atom.leaves)
            assert seen == list(range(3))


class TestRandomTree:
    def test_deterministic_per_seed(self):
        assert (random_tree(0, horizon=2, max_branching=3).to_spec()
                == random_tree(0, horizon=2, max_branching=3).to_spec())

    def test_seeds_differ(self):
        specs = {str(random_tree(seed, horizon=2, max_branching=3).to_spec())
                 for seed in range(6)}
        assert len(specs) > 1

    def test_single_path_when_branching_one(self):
        tree = random_tree(3, horizon=3, max_branching=1)
        assert tree.n_leaves == 1
        assert all(len(node.children) <= 1 for node in tree.nodes.values())

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000))
    def test_invariants_always_hold(self, seed):
        tree = random_tree(seed, horizon=3, max_branching=4)
        for node in tree.nodes.values():
            if node.children:
                total = sum((c.branch_prob for c in node.children), start=F(0))
                assert total == 1
                assert all(c.branch_prob > 0 for c in node.children)
                assert all(c.time == node.time + 1 for c in node.children)


class TestStoppingTime:
    def test_constant_time_is_predictable(self, ter1):
        tau = StoppingTime.constant(ter1, 1)
        assert tau.is_predictable()

    def test_non_measurable_rejected(self, two_step):
        # {tau <= 1} = {uu} is not a union of time-1 atoms
        with pytest.raises(NotAStoppingTime):
            StoppingTime(two_step, [1, 2, 2, 2, 2])

    def test_infinity_sentinel(self, bin1):
        tau = StoppingTime(bin1, [2, 2])  # horizon + 1 means never
        assert list(tau.graph_at(1)) == []

"""Shared fixtures: the two worked lattices, their drivers, and enlargements.

BIN1 is the symmetric coin (root r -> u, d at 1/2 each). TER1 is the
symmetric ternary split (root r -> a, b, c at 1/3 each) with the
two-dimensional driver whose increments are (1,-1,0) and (1,1,-2), the
price S with increments (1/2,-1/2,0), and the two enlargements GA
(reveals {a} vs {b,c} at time 0) and GB (reveals {a,b} vs {c}).
"""

from fractions import Fraction

import pytest

from filtration_lab import Process, build_tree, enlarge


@pytest.fixture
def bin1():
    return build_tree({
        "horizon": 1,
        "nodes": [
            {"id": "r", "time": 0, "parent": None, "prob": None},
            {"id": "u", "time": 1, "parent": "r", "prob": "1/2"},
            {"id": "d", "time": 1, "parent": "r", "prob": "1/2"},
        ],
    })


@pytest.fixture
def w_bin(bin1):
    return Process.from_node_values(
        bin1, {"r": [0], "u": [1], "d": [-1]}, dim=1)


@pytest.fixture
def ter1():
    return build_tree({
        "horizon": 1,
        "nodes": [
            {"id": "r", "time": 0, "parent": None, "prob": None},
            {"id": "a", "time": 1, "parent": "r", "prob": "1/3"},
            {"id": "b", "time": 1, "parent": "r", "prob": "1/3"},
            {"id": "c", "time": 1, "parent": "r", "prob": "1/3"},
        ],
    })


@pytest.fixture
def w_ter(ter1):
    # rows: increments (1,-1,0) and (1,1,-2) on (a,b,c)
    return Process.from_node_values(
        ter1,
        {"r": [0, 0], "a": [1, 1], "b": [-1, 1], "c": [0, -2]},
        dim=2)


@pytest.fixture
def s_ter(ter1):
    return Process.from_node_values(
        ter1,
        {"r": [1], "a": [Fraction(3, 2)], "b": [Fraction(1, 2)], "c": [1]},
        dim=1)


@pytest.fixture
def ga(ter1):
    return enlarge(ter1, {0: [["a"], ["b", "c"]],
                          1: [["a"], ["b"], ["c"]]}, name="GA")


@pytest.fixture
def gb(ter1):
    return enlarge(ter1, {0: [["a", "b"], ["c"]],
                          1: [["a"], ["b"], ["c"]]}, name="GB")


@pytest.fixture
def two_step():
    """Mixed branching over two steps: u splits in two, d in three."""
    return build_tree({
        "horizon": 2,
        "nodes": [
            {"id": "r", "time": 0, "parent": None, "prob": None},
            {"id": "u", "time": 1, "parent": "r", "prob": "1/2"},
            {"id": "d", "time": 1, "parent": "r", "prob": "1/2"},
            {"id": "uu", "time": 2, "parent": "u", "prob": "1/2"},
            {"id": "ud", "time": 2, "parent": "u", "prob": "1/2"},
            {"id": "du", "time": 2, "parent": "d", "prob": "1/3"},
            {"id": "dm", "time": 2, "parent": "d", "prob": "1/3"},
            {"id": "dd", "time": 2, "parent": "d", "prob": "1/3"},
        ],
    })

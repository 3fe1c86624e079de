"""Finite filtered probability spaces as rooted event trees.

A tree with horizon T carries one node per (time, atom): the time-t nodes are
exactly the atoms of F_t, every edge holds a strictly positive rational branch
probability, and the time-T nodes are the elementary outcomes. Enlargements
refine the leaf partitions per time without touching the tree itself.

Conventions used throughout the library: F_{t-} means F_{t-1} for t >= 1 and
F_0 for t = 0; a process is predictable at t when it is F_{t-1}-measurable;
increments at time 0 are null; stopping times use horizon+1 as the infinity
sentinel.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    DanglingNode,
    NonPositiveProbability,
    NotARefinement,
    NotAStoppingTime,
    NotMonotone,
    ProbabilitySumNotOne,
    TimeOutOfRange,
)
from .rationals import to_fraction

ONE = Fraction(1)
ZERO = Fraction(0)


class Node:
    __slots__ = ("id", "time", "parent", "branch_prob", "children", "prob",
                 "leaf_lo", "leaf_hi")

    def __init__(self, node_id, time, parent, branch_prob):
        self.id = node_id
        self.time = time
        self.parent = parent
        self.branch_prob = branch_prob
        self.children = []
        self.prob = None
        self.leaf_lo = None
        self.leaf_hi = None

    def leaves(self):
        return tuple(range(self.leaf_lo, self.leaf_hi))

    def __repr__(self):
        return f"Node({self.id!r}, t={self.time})"


@dataclass(frozen=True)
class Atom:
    """One cell of a leaf partition, with its unconditional probability."""
    label: str
    leaves: tuple[int, ...]
    prob: Fraction


class FilteredTree:
    """Event tree plus its base filtration.

    Leaves are indexed in depth-first order, so the leaf set of any node is a
    contiguous range. F_t-atoms are the time-t nodes.
    """

    def __init__(self, horizon: int, node_specs):
        if horizon < 0:
            raise TimeOutOfRange(f"horizon must be >= 0, got {horizon}")
        self.horizon = horizon
        self.nodes: dict[str, Node] = {}
        roots = []
        order = []
        # stable sort by time so parents are processed first; same-time nodes
        # keep their listed order, which fixes the child order everywhere
        node_specs = sorted(node_specs, key=lambda s: s[1])
        for spec in node_specs:
            node_id, time, parent_id, prob = spec
            if node_id in self.nodes:
                raise DanglingNode(f"duplicate node id {node_id!r}")
            if not 0 <= time <= horizon:
                raise TimeOutOfRange(f"node {node_id!r} has time {time}")
            if parent_id is None:
                if time != 0:
                    raise DanglingNode(f"node {node_id!r} has no parent but time {time}")
                node = Node(node_id, time, None, None)
                roots.append(node)
            else:
                parent = self.nodes.get(parent_id)
                if parent is None:
                    raise DanglingNode(
                        f"node {node_id!r} references unknown parent {parent_id!r}")
                if parent.time != time - 1:
                    raise DanglingNode(
                        f"node {node_id!r} at time {time} under parent at time {parent.time}")
                branch = to_fraction(prob)
                if branch <= 0:
                    raise NonPositiveProbability(
                        f"branch probability {branch} into node {node_id!r}")
                node = Node(node_id, time, parent, branch)
                parent.children.append(node)
            self.nodes[node_id] = node
            order.append(node)
        if len(roots) != 1:
            raise DanglingNode(f"expected exactly one root, found {len(roots)}")
        self.root = roots[0]

        for node in order:
            if node.time < horizon and not node.children:
                raise DanglingNode(f"non-terminal node {node.id!r} has no children")
            if node.time == horizon and node.children:
                raise TimeOutOfRange(f"node {node.id!r} at the horizon has children")
            if node.children:
                total = sum((c.branch_prob for c in node.children), start=ZERO)
                if total != 1:
                    raise ProbabilitySumNotOne(
                        f"children of {node.id!r} have probabilities summing to {total}")

        if len(order) != self._count_reachable():
            raise DanglingNode("tree contains nodes unreachable from the root")

        self.leaves: list[Node] = []
        self._assign_leaf_ranges(self.root, ONE)
        self.leaf_ids = [leaf.id for leaf in self.leaves]
        self.leaf_probs = [leaf.prob for leaf in self.leaves]
        self.nodes_at: list[list[Node]] = [[] for _ in range(horizon + 1)]
        self._collect_by_time(self.root)
        # time-t ancestor of each leaf
        self._ancestor: list[list[Node]] = [[None] * len(self.leaves)
                                            for _ in range(horizon + 1)]
        for t in range(horizon + 1):
            for node in self.nodes_at[t]:
                for leaf in range(node.leaf_lo, node.leaf_hi):
                    self._ancestor[t][leaf] = node
        self._base_filtration = None

    def _count_reachable(self):
        seen = 0
        stack = [self.root]
        while stack:
            node = stack.pop()
            seen += 1
            stack.extend(node.children)
        return seen

    def _assign_leaf_ranges(self, node, prob):
        node.prob = prob
        if not node.children:
            node.leaf_lo = len(self.leaves)
            self.leaves.append(node)
            node.leaf_hi = len(self.leaves)
            return
        node.leaf_lo = len(self.leaves)
        for child in node.children:
            self._assign_leaf_ranges(child, prob * child.branch_prob)
        node.leaf_hi = len(self.leaves)

    def _collect_by_time(self, node):
        self.nodes_at[node.time].append(node)
        for child in node.children:
            self._collect_by_time(child)

    @property
    def n_leaves(self) -> int:
        return len(self.leaves)

    def node_at(self, t: int, leaf: int) -> Node:
        """Time-t ancestor of the given leaf."""
        return self._ancestor[t][leaf]

    def base_filtration(self) -> "Filtration":
        if self._base_filtration is None:
            partitions = []
            for t in range(self.horizon + 1):
                atoms = tuple(Atom(n.id, n.leaves(), n.prob) for n in self.nodes_at[t])
                partitions.append(atoms)
            self._base_filtration = Filtration(self, partitions, kind="base")
        return self._base_filtration

    def to_spec(self):
        """Serializable node list, parents before children."""
        specs = []
        stack = [self.root]
        ordered = []
        while stack:
            node = stack.pop()
            ordered.append(node)
            stack.extend(reversed(node.children))
        for node in ordered:
            specs.append({
                "id": node.id,
                "time": node.time,
                "parent": node.parent.id if node.parent else None,
                "prob": None if node.branch_prob is None else str(node.branch_prob),
            })
        return {"horizon": self.horizon, "nodes": specs}


def build_tree(spec) -> FilteredTree:
    """Build and validate a tree from {"horizon": T, "nodes": [...]}, where each
    node entry carries id, time, parent (null for the root) and prob."""
    horizon = int(spec["horizon"])
    node_specs = [(str(n["id"]), int(n["time"]), n.get("parent"), n.get("prob"))
                  for n in spec["nodes"]]
    return FilteredTree(horizon, node_specs)


class Filtration:
    """A time-indexed sequence of leaf partitions, finest at the horizon."""

    def __init__(self, tree: FilteredTree, partitions, kind="base"):
        self.tree = tree
        self.kind = kind
        self._atoms = partitions
        self._atom_of = []
        for t, atoms in enumerate(partitions):
            lookup = [None] * tree.n_leaves
            for atom in atoms:
                for leaf in atom.leaves:
                    lookup[leaf] = atom
            self._atom_of.append(lookup)

    def atoms(self, t: int) -> tuple[Atom, ...]:
        if not 0 <= t <= self.tree.horizon:
            raise TimeOutOfRange(f"time {t} outside 0..{self.tree.horizon}")
        return self._atoms[t]

    def atom_of(self, t: int, leaf: int) -> Atom:
        if not 0 <= t <= self.tree.horizon:
            raise TimeOutOfRange(f"time {t} outside 0..{self.tree.horizon}")
        return self._atom_of[t][leaf]

    def conditioning_atoms(self, t: int) -> tuple[Atom, ...]:
        """Atoms of F_{t-}: F_{t-1} for t >= 1, F_0 for t = 0."""
        return self.atoms(t - 1 if t >= 1 else 0)

    def conditioning_atom_of(self, t: int, leaf: int) -> Atom:
        return self.atom_of(t - 1 if t >= 1 else 0, leaf)

    def is_base(self) -> bool:
        return self.kind == "base"


def _atom_label(tree: FilteredTree, leaves) -> str:
    return "|".join(tree.leaf_ids[i] for i in sorted(leaves))


class Enlargement:
    """A filtration G with G_t containing F_t, given by refined leaf partitions.

    Partitions may be supplied for any subset of times; a missing time defaults
    to the common refinement of the base partition at t and the enlarged
    partition at t-1, the coarsest valid completion.
    """

    def __init__(self, tree: FilteredTree, partitions_by_time, name: str = "G"):
        self.tree = tree
        self.name = name
        given = {}
        for t, parts in partitions_by_time.items():
            t = int(t)
            if not 0 <= t <= tree.horizon:
                raise TimeOutOfRange(f"enlargement at time {t} outside 0..{tree.horizon}")
            cells = []
            for cell in parts:
                idx = tuple(sorted(self._leaf_index(leaf) for leaf in cell))
                if not idx:
                    raise NotARefinement(f"empty cell in enlargement at time {t}")
                cells.append(idx)
            given[t] = cells
        self.partitions: list[tuple[tuple[int, ...], ...]] = []
        previous = None
        base = tree.base_filtration()
        for t in range(tree.horizon + 1):
            base_cells = [set(a.leaves) for a in base.atoms(t)]
            if t in given:
                cells = [tuple(c) for c in given[t]]
                self._check_partition(cells, tree.n_leaves, t)
                for cell in cells:
                    if not any(set(cell) <= b for b in base_cells):
                        raise NotARefinement(
                            f"cell {cell} at time {t} is not inside a base atom")
                if previous is not None:
                    prev_cells = [set(c) for c in previous]
                    for cell in cells:
                        if not any(set(cell) <= p for p in prev_cells):
                            raise NotMonotone(
                                f"cell {cell} at time {t} splits across time-{t-1} cells")
            else:
                cells = self._common_refinement(base_cells, previous)
            cells = tuple(sorted(cells, key=lambda c: c[0]))
            self.partitions.append(cells)
            previous = cells
        self._filtration = None

    def _leaf_index(self, leaf) -> int:
        if isinstance(leaf, int):
            if not 0 <= leaf < self.tree.n_leaves:
                raise NotARefinement(f"leaf index {leaf} out of range")
            return leaf
        try:
            node = self.tree.nodes[leaf]
        except KeyError:
            raise NotARefinement(f"unknown leaf id {leaf!r}") from None
        if node.time != self.tree.horizon:
            raise NotARefinement(f"node {leaf!r} is not a leaf")
        return node.leaf_lo

    @staticmethod
    def _check_partition(cells, n_leaves, t):
        seen = set()
        for cell in cells:
            for leaf in cell:
                if leaf in seen:
                    raise NotARefinement(f"leaf {leaf} duplicated at time {t}")
                seen.add(leaf)
        if len(seen) != n_leaves:
            raise NotARefinement(f"partition at time {t} does not cover all leaves")

    @staticmethod
    def _common_refinement(base_cells, previous):
        if previous is None:
            return [tuple(sorted(b)) for b in base_cells]
        out = []
        for b in base_cells:
            for p in previous:
                cell = sorted(b & set(p))
                if cell:
                    out.append(tuple(cell))
        return out

    def filtration(self) -> Filtration:
        if self._filtration is None:
            partitions = []
            for t, cells in enumerate(self.partitions):
                atoms = tuple(
                    Atom(_atom_label(self.tree, cell), cell,
                         sum((self.tree.leaf_probs[i] for i in cell), start=ZERO))
                    for cell in cells)
                partitions.append(atoms)
            self._filtration = Filtration(self.tree, partitions, kind="enlarged")
        return self._filtration

    def to_spec(self):
        return {
            str(t): [[self.tree.leaf_ids[i] for i in cell] for cell in cells]
            for t, cells in enumerate(self.partitions)
        }


def enlarge(tree: FilteredTree, partitions_by_time, name: str = "G") -> Enlargement:
    """Validate and wrap refined leaf partitions as an enlargement of the base
    filtration. Raises NotARefinement or NotMonotone on bad input."""
    return Enlargement(tree, partitions_by_time, name=name)


def as_filtration(obj) -> Filtration:
    if isinstance(obj, Filtration):
        return obj
    if isinstance(obj, FilteredTree):
        return obj.base_filtration()
    if isinstance(obj, Enlargement):
        return obj.filtration()
    raise TypeError(f"cannot view {obj!r} as a filtration")


def conditional_expectation_leafwise(x, t, filtration_like):
    """E[x | F_t] as a leaf-indexed list, for a leaf-indexed rational vector x."""
    filtration = as_filtration(filtration_like)
    tree = filtration.tree
    values = [to_fraction(v) for v in x]
    if len(values) != tree.n_leaves:
        raise TimeOutOfRange(
            f"expected {tree.n_leaves} leaf values, got {len(values)}")
    out = [ZERO] * tree.n_leaves
    for atom in filtration.atoms(t):
        mean = sum((tree.leaf_probs[i] * values[i] for i in atom.leaves),
                   start=ZERO) / atom.prob
        for i in atom.leaves:
            out[i] = mean
    return out


def conditional_expectation(x, t, filtration_like):
    """E[x | F_t] keyed by atom label."""
    filtration = as_filtration(filtration_like)
    leafwise = conditional_expectation_leafwise(x, t, filtration)
    return {atom.label: leafwise[atom.leaves[0]] for atom in filtration.atoms(t)}


class StoppingTime:
    """Leaf-indexed time with horizon+1 standing for infinity.

    The defining measurability, {tau <= t} a union of F_t-atoms, is checked on
    construction. On these trees every stopping time is accessible; whether it
    is predictable ({tau = t} already known at t-1) is a separate query.
    """

    def __init__(self, tree: FilteredTree, values):
        self.tree = tree
        self.infinity = tree.horizon + 1
        vals = tuple(int(v) for v in values)
        if len(vals) != tree.n_leaves:
            raise NotAStoppingTime(
                f"expected {tree.n_leaves} leaf values, got {len(vals)}")
        for v in vals:
            if not 0 <= v <= self.infinity:
                raise NotAStoppingTime(f"value {v} outside 0..{self.infinity}")
        self.values = vals
        base = tree.base_filtration()
        for t in range(tree.horizon + 1):
            for atom in base.atoms(t):
                hits = {vals[i] <= t for i in atom.leaves}
                if len(hits) > 1:
                    raise NotAStoppingTime(
                        f"{{tau <= {t}}} cuts through atom {atom.label}")

    @classmethod
    def constant(cls, tree, t):
        return cls(tree, [t] * tree.n_leaves)

    def is_predictable(self) -> bool:
        """True when {tau = t} is F_{t-1}-measurable for every t >= 1 and
        {tau = 0} is trivial."""
        base = self.tree.base_filtration()
        zero_set = {i for i, v in enumerate(self.values) if v == 0}
        if zero_set and len(zero_set) != self.tree.n_leaves:
            return False
        for t in range(1, self.tree.horizon + 1):
            for atom in base.atoms(t - 1):
                hits = {self.values[i] == t for i in atom.leaves}
                if len(hits) > 1:
                    return False
        return True

    def graph_at(self, t: int):
        """Leaves with tau exactly t."""
        return tuple(i for i, v in enumerate(self.values) if v == t)


def random_tree(seed: int, horizon: int = 2, max_branching: int = 3,
                denominator_bound: int = 8) -> FilteredTree:
    """Deterministic random tree: branching in 1..max_branching, branch
    probabilities with small denominators, ids spelling the path from the root."""
    if horizon < 1:
        raise TimeOutOfRange("random_tree needs horizon >= 1")
    max_branching = max(1, min(int(max_branching), 8))
    denominator_bound = max(2, int(denominator_bound))
    rng = random.Random(seed)
    specs = [("r", 0, None, None)]

    def grow(node_id, time):
        if time == horizon:
            return
        n_children = rng.randint(1, max_branching)
        weights = [rng.randint(1, denominator_bound) for _ in range(n_children)]
        total = sum(weights)
        for k in range(n_children):
            child_id = node_id + "abcdefgh"[k]
            specs.append((child_id, time + 1, node_id, Fraction(weights[k], total)))
            grow(child_id, time + 1)

    grow("r", 0)
    return FilteredTree(horizon, specs)

"""Discrete stochastic calculus on event trees, in exact rationals.

Processes are stored pathwise: one d-vector per (time, leaf). A process is
adapted to a filtration when each time slice is constant on that filtration's
atoms; base-adapted processes are equivalently tables on tree nodes, which is
how they serialize. All increments at time 0 are null by convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import (
    DimensionMismatch,
    IncompleteFunctionTable,
    NotAMartingale,
    NotPredictable,
)
from .rationals import to_fraction
from .tree import FilteredTree, Filtration, as_filtration

ZERO = Fraction(0)


class Process:
    """Adapted process with exact rational values, immutable after build."""

    __slots__ = ("tree", "dim", "values")

    def __init__(self, tree: FilteredTree, values, dim: int | None = None):
        self.tree = tree
        rows = []
        for t in range(tree.horizon + 1):
            slice_t = values[t]
            row = tuple(tuple(to_fraction(c) for c in slice_t[leaf])
                        for leaf in range(tree.n_leaves))
            rows.append(row)
        self.values = tuple(rows)
        dims = {len(vec) for row in self.values for vec in row}
        if len(dims) > 1:
            raise DimensionMismatch(f"ragged value vectors: lengths {sorted(dims)}")
        self.dim = dims.pop() if dims else (dim or 0)
        if dim is not None and dim != self.dim:
            raise DimensionMismatch(f"declared dim {dim}, values have dim {self.dim}")

    # construction helpers

    @classmethod
    def zero(cls, tree, dim=1):
        vec = tuple([Fraction(0)] * dim)
        data = [[vec] * tree.n_leaves for _ in range(tree.horizon + 1)]
        return cls(tree, data, dim=dim)

    @classmethod
    def from_node_values(cls, tree, node_values, dim=None):
        """Build from a complete {node id: vector} table."""
        missing = [nid for nid in tree.nodes if nid not in node_values]
        if missing:
            raise IncompleteFunctionTable(
                f"no value for nodes {sorted(missing)[:4]}")
        data = []
        for t in range(tree.horizon + 1):
            row = []
            for leaf in range(tree.n_leaves):
                node = tree.node_at(t, leaf)
                vec = node_values[node.id]
                if isinstance(vec, (int, str, Fraction)):
                    vec = (vec,)
                row.append(tuple(to_fraction(c) for c in vec))
            data.append(row)
        return cls(tree, data, dim=dim)

    @classmethod
    def from_leaf_slices(cls, tree, slices, dim=None):
        """Build from per-time leaf-indexed vectors (already pathwise)."""
        return cls(tree, slices, dim=dim)

    @classmethod
    def doob(cls, tree, terminal, filtration=None):
        """Martingale closed by a terminal payoff: X_t = E[xi | F_t]."""
        filtration = as_filtration(filtration or tree)
        vecs = []
        for v in terminal:
            if isinstance(v, (int, str, Fraction)):
                v = (v,)
            vecs.append(tuple(to_fraction(c) for c in v))
        if len(vecs) != tree.n_leaves:
            raise DimensionMismatch(
                f"expected {tree.n_leaves} terminal values, got {len(vecs)}")
        dims = {len(v) for v in vecs}
        if len(dims) != 1:
            raise DimensionMismatch("ragged terminal vectors")
        d = dims.pop()
        data = []
        for t in range(tree.horizon + 1):
            row = [None] * tree.n_leaves
            for atom in filtration.atoms(t):
                mean = [ZERO] * d
                for i in atom.leaves:
                    w = tree.leaf_probs[i]
                    for k in range(d):
                        mean[k] += w * vecs[i][k]
                mean = tuple(m / atom.prob for m in mean)
                for i in atom.leaves:
                    row[i] = mean
            data.append(row)
        return cls(tree, data, dim=d)

    @classmethod
    def stack(cls, processes):
        """Concatenate components into one vector process."""
        if not processes:
            raise DimensionMismatch("stack needs at least one process")
        tree = processes[0].tree
        for p in processes:
            if p.tree is not tree:
                raise DimensionMismatch("stack across different trees")
        data = []
        for t in range(tree.horizon + 1):
            row = []
            for leaf in range(tree.n_leaves):
                vec = ()
                for p in processes:
                    vec = vec + p.values[t][leaf]
                row.append(vec)
            data.append(row)
        return cls(tree, data)

    # access

    def at(self, t, leaf):
        return self.values[t][leaf]

    def increment(self, t, leaf):
        """Delta X_t on the path through the given leaf; null at t = 0."""
        if t == 0:
            return tuple([ZERO] * self.dim)
        prev = self.values[t - 1][leaf]
        curr = self.values[t][leaf]
        return tuple(a - b for a, b in zip(curr, prev))

    def component(self, i):
        data = [[(self.values[t][leaf][i],) for leaf in range(self.tree.n_leaves)]
                for t in range(self.tree.horizon + 1)]
        return Process(self.tree, data, dim=1)

    def components(self):
        return [self.component(i) for i in range(self.dim)]

    def initial(self):
        return self.values[0][0]

    def minus_initial(self):
        x0 = {leaf: self.values[0][leaf] for leaf in range(self.tree.n_leaves)}
        data = [[tuple(a - b for a, b in zip(self.values[t][leaf], x0[leaf]))
                 for leaf in range(self.tree.n_leaves)]
                for t in range(self.tree.horizon + 1)]
        return Process(self.tree, data, dim=self.dim)

    def max_abs(self) -> Fraction:
        best = ZERO
        for row in self.values:
            for vec in row:
                for c in vec:
                    if abs(c) > best:
                        best = abs(c)
        return best

    # arithmetic

    def _zip(self, other, op):
        if not isinstance(other, Process):
            raise TypeError("expected a Process")
        if other.tree is not self.tree or other.dim != self.dim:
            raise DimensionMismatch("process shapes differ")
        data = [[tuple(op(a, b) for a, b in zip(self.values[t][leaf],
                                                other.values[t][leaf]))
                 for leaf in range(self.tree.n_leaves)]
                for t in range(self.tree.horizon + 1)]
        return Process(self.tree, data, dim=self.dim)

    def __add__(self, other):
        return self._zip(other, lambda a, b: a + b)

    def __sub__(self, other):
        return self._zip(other, lambda a, b: a - b)

    def scale(self, factor):
        factor = to_fraction(factor)
        data = [[tuple(factor * c for c in vec) for vec in row]
                for row in self.values]
        return Process(self.tree, data, dim=self.dim)

    def __eq__(self, other):
        return (isinstance(other, Process) and other.tree is self.tree
                and other.values == self.values)

    def __ne__(self, other):
        return not self.__eq__(other)

    __hash__ = None

    def first_divergence(self, other):
        """Earliest (t, leaf) where the two processes differ, or None."""
        if other.tree is not self.tree or other.dim != self.dim:
            raise DimensionMismatch("process shapes differ")
        for t in range(self.tree.horizon + 1):
            for leaf in range(self.tree.n_leaves):
                if self.values[t][leaf] != other.values[t][leaf]:
                    return (t, leaf)
        return None

    # measurability

    def is_adapted(self, filtration_like) -> bool:
        filtration = as_filtration(filtration_like)
        for t in range(self.tree.horizon + 1):
            for atom in filtration.atoms(t):
                first = self.values[t][atom.leaves[0]]
                if any(self.values[t][i] != first for i in atom.leaves[1:]):
                    return False
        return True

    def is_predictable(self, filtration_like) -> bool:
        """Value at t known at t-1 (at 0: F_0-measurable)."""
        filtration = as_filtration(filtration_like)
        for t in range(self.tree.horizon + 1):
            for atom in filtration.conditioning_atoms(t):
                first = self.values[t][atom.leaves[0]]
                if any(self.values[t][i] != first for i in atom.leaves[1:]):
                    return False
        return True

    def is_martingale(self, filtration_like) -> bool:
        filtration = as_filtration(filtration_like)
        if not self.is_adapted(filtration):
            return False
        tree = self.tree
        for t in range(1, tree.horizon + 1):
            for atom in filtration.atoms(t - 1):
                mean = [ZERO] * self.dim
                for i in atom.leaves:
                    w = tree.leaf_probs[i]
                    inc = self.increment(t, i)
                    for k in range(self.dim):
                        mean[k] += w * inc[k]
                if any(m != 0 for m in mean):
                    return False
        return True

    def require_martingale(self, filtration_like, what="process"):
        if not self.is_martingale(filtration_like):
            raise NotAMartingale(f"{what} is not a martingale for this filtration")

    def node_values(self):
        """Export as a node table; requires base adaptedness."""
        if not self.is_adapted(self.tree):
            raise NotPredictable("process is not adapted to the base filtration")
        out = {}
        for t in range(self.tree.horizon + 1):
            for node in self.tree.nodes_at[t]:
                out[node.id] = self.values[t][node.leaf_lo]
        return out

    def __repr__(self):
        return f"Process(dim={self.dim}, horizon={self.tree.horizon})"


@dataclass(frozen=True)
class Decomposition:
    """X = X_0 + martingale_part + drift_part, both parts null at 0."""
    martingale_part: Process
    drift_part: Process


def _conditional_increment_means(x: Process, filtration: Filtration, t: int):
    """E[Delta X_t | F_{t-1}] per conditioning atom, as {atom: vector}."""
    tree = x.tree
    out = {}
    for atom in filtration.atoms(t - 1):
        mean = [ZERO] * x.dim
        for i in atom.leaves:
            w = tree.leaf_probs[i]
            inc = x.increment(t, i)
            for k in range(x.dim):
                mean[k] += w * inc[k]
        out[atom] = tuple(m / atom.prob for m in mean)
    return out


def dual_predictable_projection(a: Process, filtration_like) -> Process:
    """Compensator: null at 0, increments E[Delta A_t | F_{t-1}].

    The result is predictable for the given filtration by construction.
    """
    filtration = as_filtration(filtration_like)
    tree = a.tree
    data = [[tuple([ZERO] * a.dim) for _ in range(tree.n_leaves)]]
    for t in range(1, tree.horizon + 1):
        means = _conditional_increment_means(a, filtration, t)
        row = [None] * tree.n_leaves
        for atom, mean in means.items():
            for i in atom.leaves:
                prev = data[t - 1][i]
                row[i] = tuple(p + m for p, m in zip(prev, mean))
        data.append(row)
    return Process(tree, data, dim=a.dim)


def decompose(x: Process, filtration_like) -> Decomposition:
    """Unique decomposition X = X_0 + M + V with M a martingale null at 0 and
    V predictable null at 0."""
    filtration = as_filtration(filtration_like)
    drift = dual_predictable_projection(x, filtration)
    martingale = x.minus_initial() - drift
    return Decomposition(martingale_part=martingale, drift_part=drift)


def bracket(x: Process, y: Process) -> Process:
    """Pathwise covariation sum of Delta X . Delta Y; scalar output.

    Inputs must share their dimension; components pair up, so two scalars give
    the ordinary bracket.
    """
    if x.tree is not y.tree:
        raise DimensionMismatch("bracket across different trees")
    if x.dim != y.dim:
        raise DimensionMismatch(f"bracket dims {x.dim} and {y.dim}")
    tree = x.tree
    data = [[(ZERO,)] * tree.n_leaves]
    for t in range(1, tree.horizon + 1):
        row = []
        for leaf in range(tree.n_leaves):
            xi = x.increment(t, leaf)
            yi = y.increment(t, leaf)
            step = sum((a * b for a, b in zip(xi, yi)), start=ZERO)
            row.append((data[t - 1][leaf][0] + step,))
        data.append(row)
    return Process(tree, data, dim=1)


def bracket_matrix(x: Process, y: Process):
    """All pairwise scalar brackets as a dim_x by dim_y nested list."""
    return [[bracket(x.component(i), y.component(j)) for j in range(y.dim)]
            for i in range(x.dim)]


def predictable_bracket(x: Process, y: Process, filtration_like) -> Process:
    """[X, Y]^p computed directly from conditional products.

    Agrees exactly with dual_predictable_projection(bracket(X, Y)).
    """
    filtration = as_filtration(filtration_like)
    if x.tree is not y.tree:
        raise DimensionMismatch("bracket across different trees")
    if x.dim != y.dim:
        raise DimensionMismatch(f"bracket dims {x.dim} and {y.dim}")
    tree = x.tree
    data = [[(ZERO,)] * tree.n_leaves]
    for t in range(1, tree.horizon + 1):
        row = [None] * tree.n_leaves
        for atom in filtration.atoms(t - 1):
            mean = ZERO
            for i in atom.leaves:
                w = tree.leaf_probs[i]
                xi = x.increment(t, i)
                yi = y.increment(t, i)
                mean += w * sum((a * b for a, b in zip(xi, yi)), start=ZERO)
            mean /= atom.prob
            for i in atom.leaves:
                row[i] = (data[t - 1][i][0] + mean,)
        data.append(row)
    return Process(tree, data, dim=1)


def dot_integral(h: Process, x: Process, filtration_like=None) -> Process:
    """(H . X)_t = sum over s <= t of <H_s, Delta X_s>, null at 0.

    H must be predictable for the given filtration (default: the base).
    """
    filtration = as_filtration(filtration_like or x.tree)
    if h.tree is not x.tree:
        raise DimensionMismatch("integrand and integrator on different trees")
    if h.dim != x.dim:
        raise DimensionMismatch(f"integrand dim {h.dim}, integrator dim {x.dim}")
    if not h.is_predictable(filtration):
        raise NotPredictable("integrand is not predictable for this filtration")
    tree = x.tree
    data = [[(ZERO,)] * tree.n_leaves]
    for t in range(1, tree.horizon + 1):
        row = []
        for leaf in range(tree.n_leaves):
            hv = h.values[t][leaf]
            inc = x.increment(t, leaf)
            step = sum((a * b for a, b in zip(hv, inc)), start=ZERO)
            row.append((data[t - 1][leaf][0] + step,))
        data.append(row)
    return Process(tree, data, dim=1)


class JumpMeasure:
    """Integer-valued random measure of a base-adapted process's jumps.

    Support: the time-t nodes (t >= 1) where the increment is a nonzero
    vector; the location there is that increment.
    """

    def __init__(self, tree: FilteredTree, dim: int, support: dict):
        self.tree = tree
        self.dim = dim
        self.support = dict(support)
        self._by_time: dict[int, list] = {}
        for node_id in sorted(self.support):
            node = tree.nodes[node_id]
            self._by_time.setdefault(node.time, []).append(node)
        self._compensators: dict[int, CompensatorTable] = {}

    def nodes_at(self, t):
        return self._by_time.get(t, [])

    def location(self, node_id):
        return self.support[node_id]

    def jump_at(self, t, leaf):
        """Location if (t, leaf) sits under a support node, else None."""
        node = self.tree.node_at(t, leaf)
        return self.support.get(node.id)

    def compensator(self, filtration_like) -> "CompensatorTable":
        filtration = as_filtration(filtration_like)
        key = id(filtration)
        if key not in self._compensators:
            self._compensators[key] = CompensatorTable(self, filtration)
        return self._compensators[key]


def jump_measure(x: Process) -> JumpMeasure:
    if not x.is_adapted(x.tree):
        raise NotPredictable("jump measure needs a base-adapted process")
    support = {}
    for t in range(1, x.tree.horizon + 1):
        for node in x.tree.nodes_at[t]:
            inc = x.increment(t, node.leaf_lo)
            if any(c != 0 for c in inc):
                support[node.id] = inc
    return JumpMeasure(x.tree, x.dim, support)


class CompensatorTable:
    """Conditional jump distribution per (time, conditioning atom).

    nu({t} x {v} | atom) adds the conditional probabilities of the time-t
    support nodes with location v, seen from the atom at t-1.
    """

    def __init__(self, measure: JumpMeasure, filtration: Filtration):
        self.measure = measure
        self.filtration = filtration
        tree = measure.tree
        self.entries: dict[tuple[int, str], dict[tuple, Fraction]] = {}
        for t in range(1, tree.horizon + 1):
            nodes = measure.nodes_at(t)
            if not nodes:
                continue
            for atom in filtration.atoms(t - 1):
                dist: dict[tuple, Fraction] = {}
                atom_leaves = set(atom.leaves)
                for node in nodes:
                    overlap = sum(
                        (tree.leaf_probs[i] for i in range(node.leaf_lo, node.leaf_hi)
                         if i in atom_leaves), start=ZERO)
                    if overlap == 0:
                        continue
                    value = measure.location(node.id)
                    dist[value] = dist.get(value, ZERO) + overlap / atom.prob
                if dist:
                    self.entries[(t, atom.label)] = dist

    def charged(self, t, atom_label):
        dist = self.entries.get((t, atom_label), {})
        return sorted(dist)

    def prob(self, t, atom_label, value) -> Fraction:
        return self.entries.get((t, atom_label), {}).get(tuple(value), ZERO)

    def mass(self, t, atom_label) -> Fraction:
        dist = self.entries.get((t, atom_label), {})
        return sum(dist.values(), start=ZERO)


def compensate_measure(mu: JumpMeasure, filtration_like) -> CompensatorTable:
    """Predictable compensator of the jump measure for the given filtration."""
    return mu.compensator(filtration_like)


class JumpFunction:
    """Rational function of (time, conditioning atom, jump location).

    Anchored to a filtration: the atom argument is the filtration's atom at
    t-1, which is how the function stays predictable in its first slot. A
    table anchored to the base filtration can be integrated under any
    enlargement unchanged.
    """

    def __init__(self, filtration: Filtration, entries: dict):
        self.filtration = filtration
        self.entries = {}
        for (t, label, value), g in entries.items():
            self.entries[(t, label, tuple(value))] = to_fraction(g)

    @classmethod
    def from_callable(cls, mu: JumpMeasure, filtration_like, fn):
        """Tabulate fn(t, location) on every point charged by mu or its
        compensator under the given filtration."""
        filtration = as_filtration(filtration_like)
        table = mu.compensator(filtration)
        entries = {}
        for (t, label), dist in table.entries.items():
            for value in dist:
                entries[(t, label, value)] = to_fraction(fn(t, value))
        return cls(filtration, entries)

    @classmethod
    def component(cls, mu: JumpMeasure, filtration_like, i: int):
        """The coordinate function x -> x_i as a table."""
        return cls.from_callable(mu, filtration_like, lambda t, value: value[i])

    def value(self, t, leaf, location) -> Fraction:
        atom = self.filtration.conditioning_atom_of(t, leaf)
        key = (t, atom.label, tuple(location))
        if key not in self.entries:
            raise IncompleteFunctionTable(
                f"no entry at time {t}, atom {atom.label}, location {location}")
        return self.entries[key]


def star_integral(g: JumpFunction, mu: JumpMeasure, filtration_like) -> Process:
    """Compensated jump-measure integral of a predictable function.

    Increment at t: g(t, jump) when the path jumps, minus the conditional
    mean of that quantity given the atom at t-1. Always a martingale for the
    integration filtration.
    """
    filtration = as_filtration(filtration_like)
    tree = mu.tree
    table = mu.compensator(filtration)
    data = [[(ZERO,)] * tree.n_leaves]
    for t in range(1, tree.horizon + 1):
        row = [None] * tree.n_leaves
        for atom in filtration.atoms(t - 1):
            leaf0 = atom.leaves[0]
            comp = ZERO
            for value in table.charged(t, atom.label):
                comp += table.prob(t, atom.label, value) * g.value(t, leaf0, value)
            for i in atom.leaves:
                jump = mu.jump_at(t, i)
                step = (g.value(t, i, jump) if jump is not None else ZERO) - comp
                row[i] = (data[t - 1][i][0] + step,)
        data.append(row)
    return Process(tree, data, dim=1)


def project_onto_jump_measure(y: Process, mu: JumpMeasure,
                              filtration_like) -> JumpFunction:
    """Represent the jump action of a scalar martingale through the measure.

    Returns g with [Y, M]^p = [g * (mu - nu), M]^p componentwise for any
    martingale M carrying the measure. Built as the conditional expectation of
    Delta Y given (atom, jump location), corrected so the compensated integral
    reproduces the bracket; at full conditional jump mass the correction is
    zero on its own because Y is a martingale.
    """
    filtration = as_filtration(filtration_like)
    if y.dim != 1:
        raise DimensionMismatch("projection expects a scalar martingale")
    y.require_martingale(filtration, what="projected process")
    tree = y.tree
    table = mu.compensator(filtration)
    entries = {}
    for (t, label), dist in table.entries.items():
        atom = next(a for a in filtration.atoms(t - 1) if a.label == label)
        atom_leaves = set(atom.leaves)
        # numerator and denominator of the conditional mean per location
        num: dict[tuple, Fraction] = {v: ZERO for v in dist}
        den: dict[tuple, Fraction] = {v: ZERO for v in dist}
        for node in mu.nodes_at(t):
            value = mu.location(node.id)
            for i in range(node.leaf_lo, node.leaf_hi):
                if i in atom_leaves:
                    w = tree.leaf_probs[i] / atom.prob
                    num[value] += w * y.increment(t, i)[0]
                    den[value] += w
        mass = sum(dist.values(), start=ZERO)
        hat = sum((num[v] for v in dist), start=ZERO)
        if mass == 1:
            correction = ZERO
        else:
            correction = hat / (1 - mass)
        for v in dist:
            entries[(t, label, v)] = num[v] / den[v] + correction
    return JumpFunction(filtration, entries)

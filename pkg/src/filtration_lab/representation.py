"""Martingale representation on trees: rank checks, coefficients, and the
reconstruction of a representation family from partition data.

At a node with m successors the mean-zero functions on those successors form
an (m-1)-dimensional space; a d-dimensional martingale represents every
martingale exactly when its increment vectors span that space at every node.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .calculus import Process, jump_measure
from .constraint import ConstraintSystem, constraint_martingales, detect_fpcc
from .errors import (
    ConstraintMismatch,
    DanglingNode,
    DimensionMismatch,
    NoRepresentation,
    NotMeasurable,
    NotPredictable,
    TimeOutOfRange,
)
from .linalg import null_space, rank, solve
from .rationals import to_fraction
from .tree import FilteredTree, StoppingTime

ZERO = Fraction(0)


@dataclass(frozen=True)
class MrpReport:
    """Per-node rank audit of a candidate representation basis."""
    holds: bool
    dim: int
    ranks: dict
    failing_atom: str | None
    counterexample: tuple | None


@dataclass(frozen=True)
class RepresentationBasis:
    w: Process
    report: MrpReport

    @classmethod
    def build(cls, w: Process) -> "RepresentationBasis":
        return cls(w=w, report=check_mrp(w))


@dataclass(frozen=True)
class PartitionWitness:
    """Ordered successor classes of one conditioning atom.

    time is the successor side: the classes are time-`time` atoms inside the
    atom at time-1. Classes are ordered by descending conditional
    probability, ties by first leaf id; padding classes are empty.
    """
    time: int
    atom: str
    subatoms: tuple
    leaves: tuple
    probs: tuple


def _increment_matrix(w: Process, t: int, children):
    return [[w.increment(t, child.leaf_lo)[j] for child in children]
            for j in range(w.dim)]


def check_mrp(w: Process) -> MrpReport:
    """Rank test: increments must span each node's mean-zero space.

    The first failing node also yields an unrepresentable mean-zero vector,
    found in the null space of the increments stacked with the branch
    probabilities and scaled to coprime integers.
    """
    tree = w.tree
    w.require_martingale(tree, what="candidate basis")
    ranks = {}
    failing = None
    counterexample = None
    for t in range(1, tree.horizon + 1):
        for node in tree.nodes_at[t - 1]:
            children = node.children
            m = len(children)
            matrix = _increment_matrix(w, t, children)
            r = rank(matrix) if matrix else 0
            ranks[node.id] = (m, r)
            if r < m - 1 and failing is None:
                failing = node.id
                probs = [child.branch_prob for child in children]
                basis = null_space(matrix + [probs])
                counterexample = tuple(basis[0])
    return MrpReport(holds=failing is None, dim=w.dim, ranks=ranks,
                     failing_atom=failing, counterexample=counterexample)


def representation_coefficient(x: Process, w: Process) -> Process:
    """Predictable H with (H . W) = X - X_0, least-index per atom."""
    if x.dim != 1:
        raise DimensionMismatch("representation targets are scalar processes")
    tree = w.tree
    if x.tree is not tree:
        raise DimensionMismatch("target and basis on different trees")
    w.require_martingale(tree, what="basis")
    x.require_martingale(tree, what="target")
    data = [[tuple([ZERO] * w.dim)] * tree.n_leaves]
    for t in range(1, tree.horizon + 1):
        row = [None] * tree.n_leaves
        for node in tree.nodes_at[t - 1]:
            children = node.children
            matrix = [[w.increment(t, child.leaf_lo)[j] for j in range(w.dim)]
                      for child in children]
            rhs = [x.increment(t, child.leaf_lo)[0] for child in children]
            h = solve(matrix, rhs)
            if h is None:
                raise NoRepresentation(
                    "target increment outside the basis span",
                    time=t, atom=node.id, witness=tuple(rhs))
            vec = tuple(h)
            for i in node.leaves():
                row[i] = vec
        data.append(row)
    return Process(tree, data, dim=w.dim)


def _ordered_children(node):
    return sorted(node.children, key=lambda c: (-c.branch_prob, c.id))


def conditional_multiplicity(tree: FilteredTree, t: int, atom_label: str,
                             d: int | None = None):
    """Successor-class count of one atom, with its ordered witness.

    With d given, the witness pads to d + 1 classes; the count itself is
    always the number of nonempty classes.
    """
    if not 1 <= t <= tree.horizon:
        raise TimeOutOfRange(f"time {t} outside 1..{tree.horizon}")
    node = tree.nodes.get(atom_label)
    if node is None or node.time != t - 1:
        raise DanglingNode(f"no atom {atom_label!r} at time {t - 1}")
    children = _ordered_children(node)
    count = len(children)
    width = count if d is None else d + 1
    if width < count:
        raise DimensionMismatch(
            f"{count} successor classes do not fit in {width} slots")
    subatoms = []
    leaves = []
    probs = []
    for k in range(width):
        if k < count:
            child = children[k]
            subatoms.append(child.id)
            leaves.append(tuple(range(child.leaf_lo, child.leaf_hi)))
            probs.append(child.branch_prob)
        else:
            subatoms.append(None)
            leaves.append(())
            probs.append(ZERO)
    witness = PartitionWitness(time=t, atom=atom_label,
                               subatoms=tuple(subatoms), leaves=tuple(leaves),
                               probs=tuple(probs))
    return count, witness


def single_jump_coefficient(xi, r: StoppingTime, w: Process) -> Process:
    """H supported on the graph of a predictable time with
    (H . W) jump at r equal to xi - E[xi | F_{r-}].

    xi is a terminal payoff vector (one rational per leaf), measurable at
    the time r reaches; the coefficient vanishes off the graph of r.
    """
    tree = w.tree
    if r.tree is not tree:
        raise DimensionMismatch("stopping time and basis on different trees")
    if not r.is_predictable():
        raise NotPredictable("single-jump coefficients need a predictable time")
    w.require_martingale(tree, what="basis")
    values = [to_fraction(v) for v in xi]
    if len(values) != tree.n_leaves:
        raise DimensionMismatch(
            f"expected {tree.n_leaves} payoff values, got {len(values)}")
    # measurability at the reached time: constant on each atom of that time
    for t in range(tree.horizon + 1):
        for node in tree.nodes_at[t]:
            leaves = list(node.leaves())
            if r.values[leaves[0]] != t:
                continue
            first = values[leaves[0]]
            if any(values[i] != first for i in leaves[1:]):
                raise NotMeasurable(
                    f"payoff not settled at time {t} on atom {node.id}")

    data = [[tuple([ZERO] * w.dim)] * tree.n_leaves]
    for t in range(1, tree.horizon + 1):
        row = [tuple([ZERO] * w.dim)] * tree.n_leaves
        for node in tree.nodes_at[t - 1]:
            leaves = list(node.leaves())
            if r.values[leaves[0]] != t:
                continue
            mean = sum((tree.leaf_probs[i] * values[i] for i in leaves),
                       start=ZERO) / node.prob
            children = node.children
            matrix = [[w.increment(t, child.leaf_lo)[j] for j in range(w.dim)]
                      for child in children]
            rhs = [values[child.leaf_lo] - mean for child in children]
            h = solve(matrix, rhs)
            if h is None:
                raise NoRepresentation(
                    "centered payoff outside the basis span",
                    time=t, atom=node.id, witness=tuple(rhs))
            vec = tuple(h)
            for i in leaves:
                row[i] = vec
        data.append(row)
    return Process(tree, data, dim=w.dim)


@dataclass(frozen=True)
class ReconstructedBasis:
    """The (d+1)-dimensional successor-indicator family with its witnesses."""
    process: Process
    witnesses: tuple
    d: int


def reconstruct_accessible(w: Process) -> ReconstructedBasis:
    """Build the compensated successor-indicator family, weight 1/2^t.

    Component h jumps by (1/2^t)(1 - p_h) on the h-th successor class and by
    -(1/2^t) p_h elsewhere under the same atom; empty padding classes give
    identically zero components on their slots.
    """
    tree = w.tree
    report = check_mrp(w)
    if not report.holds:
        raise NoRepresentation(
            "basis lacks the representation property",
            atom=report.failing_atom, witness=report.counterexample)
    d = w.dim
    witnesses = []
    width = d + 1
    zero = tuple([ZERO] * width)
    data = [[zero] * tree.n_leaves]
    for t in range(1, tree.horizon + 1):
        row = [None] * tree.n_leaves
        for node in tree.nodes_at[t - 1]:
            count, witness = conditional_multiplicity(tree, t, node.id, d=d)
            witnesses.append(witness)
            weight = Fraction(1, 2 ** t)
            for k, leaves in enumerate(witness.leaves):
                for i in leaves:
                    prev = data[t - 1][i]
                    step = tuple(
                        weight * ((1 if h == k else 0) - witness.probs[h])
                        for h in range(width))
                    row[i] = tuple(a + b for a, b in zip(prev, step))
        data.append(row)
    process = Process(tree, data, dim=width)
    return ReconstructedBasis(process=process, witnesses=tuple(witnesses), d=d)


def orthogonalize(m: Process) -> Process:
    """Split a process's jumps into per-location compensated indicators.

    Components never share a jump node; integrands against m translate
    through translate_integrand.
    """
    mu = jump_measure(m)
    cs = detect_fpcc(mu)
    nu = mu.compensator(cs.filtration)
    return constraint_martingales(mu, nu, cs)


def translate_integrand(h: Process, m: Process) -> Process:
    """Map an integrand against m to one against orthogonalize(m).

    The k-th output is <h, alpha_k> / gauge(alpha_k) on nonempty slots, so
    (h . m) minus its compensator part equals the translated dot integral
    against the orthogonal family wherever m is a martingale.
    """
    mu = jump_measure(m)
    cs = detect_fpcc(mu)
    if h.dim != m.dim:
        raise DimensionMismatch(f"integrand dim {h.dim}, process dim {m.dim}")
    if not h.is_predictable(cs.filtration):
        raise NotPredictable("integrand is not predictable")
    tree = m.tree
    zero = tuple([ZERO] * cs.n)
    data = [[zero] * tree.n_leaves]
    for t in range(1, tree.horizon + 1):
        row = [None] * tree.n_leaves
        for atom in cs.filtration.atoms(t - 1):
            menu = cs.slot_values(t, atom.label)
            hv = h.values[t][atom.leaves[0]]
            vec = []
            for k in range(cs.n):
                value = menu[k]
                if value is None:
                    vec.append(ZERO)
                    continue
                scale = cs.gauges[k](value)
                paired = sum((a * b for a, b in zip(hv, value)), start=ZERO)
                vec.append(ZERO if scale == 0 else paired / scale)
            vec = tuple(vec)
            for i in atom.leaves:
                row[i] = vec
        data.append(row)
    return Process(tree, data, dim=cs.n)


def jump_constraint(w: Process) -> ConstraintSystem:
    """Constraint system of the basis's own jumps, with the slot-count bound.

    Under the representation property every conditioning atom has at most
    d + 1 successors, so no menu can exceed d + 1 entries.
    """
    report = check_mrp(w)
    if not report.holds:
        raise NoRepresentation(
            "basis lacks the representation property",
            atom=report.failing_atom, witness=report.counterexample)
    cs = detect_fpcc(jump_measure(w))
    bound = w.dim + 1
    for key, menu in cs.slots.items():
        filled = sum(1 for value in menu if value is not None)
        if filled > bound:
            raise ConstraintMismatch(
                f"menu at {key} has {filled} entries, bound {bound}")
    return cs

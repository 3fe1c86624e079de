"""Finite predictable constraint systems and star-to-dot conversions.

On a finite tree a jump measure confines its locations, per (time,
conditioning atom), to finitely many values. Enumerating those values with a
uniform slot count turns compensated jump-measure integrals into dot
integrals against finitely many compensated indicator martingales. The three
constructions here index the slots differently: per-atom value menus,
partition classes at accessible times, and abstract spanning directions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .calculus import (
    JumpFunction,
    JumpMeasure,
    Process,
    dot_integral,
    star_integral,
)
from .errors import (
    ConstraintMismatch,
    DimensionMismatch,
    NotOrthogonal,
    NotPredictable,
    PartitionNotMeasurable,
    ProbabilitySumNotOne,
    RankDeficient,
    SpanDeficient,
    VanishingWeight,
)
from .linalg import right_inverse, solve
from .rationals import format_rational, to_fraction
from .tree import StoppingTime, as_filtration

ZERO = Fraction(0)


def l1_gauge(x) -> Fraction:
    """Shared slot gauge: min of the l1 norm and 1.

    Bounded, vanishes only at 0, and |gauge(x)| <= (|x| and 1) with constant
    1, which keeps every constraint martingale increment in [-2, 2].
    """
    total = sum((abs(c) for c in x), start=ZERO)
    return total if total < 1 else Fraction(1)


class ConstraintSystem:
    """Per-atom menus of jump locations with a uniform slot count.

    slots maps (t, conditioning atom label) to an n-tuple of location
    vectors; empty slots hold None so that n stays uniform across atoms.
    """

    def __init__(self, filtration, dim, n, slots, gauges=None):
        self.filtration = filtration
        self.dim = dim
        self.n = n
        self.slots = dict(slots)
        self.gauges = tuple(gauges) if gauges else tuple([l1_gauge] * n)
        if len(self.gauges) != n:
            raise DimensionMismatch(f"{len(self.gauges)} gauges for {n} slots")
        for key, values in self.slots.items():
            if len(values) != n:
                raise ConstraintMismatch(f"slot row at {key} has wrong length")
            for k, value in enumerate(values):
                if value is not None and self.gauges[k](value) == 0:
                    raise ConstraintMismatch(
                        f"gauge vanishes on the slot value {value} at {key}")

    def slot_values(self, t, label):
        return self.slots.get((t, label), tuple([None] * self.n))

    def alpha(self, k) -> Process:
        """The k-th slot as a predictable process; zero on empty slots."""
        tree = self.filtration.tree
        zero = tuple([ZERO] * self.dim)
        data = [[zero] * tree.n_leaves]
        for t in range(1, tree.horizon + 1):
            row = [None] * tree.n_leaves
            for atom in self.filtration.atoms(t - 1):
                value = self.slot_values(t, atom.label)[k]
                vec = zero if value is None else value
                for i in atom.leaves:
                    row[i] = vec
            data.append(row)
        return Process(tree, data, dim=self.dim)

    def alphas(self):
        return [self.alpha(k) for k in range(self.n)]

    def as_table(self):
        """JSON-ready per-atom slot listing."""
        rows = []
        for (t, label) in sorted(self.slots):
            values = self.slots[(t, label)]
            rows.append({
                "time": t,
                "atom": label,
                "values": [None if v is None else [format_rational(c) for c in v]
                           for v in values],
            })
        return {"n": self.n, "dim": self.dim, "slots": rows}


def detect_fpcc(mu: JumpMeasure, filtration_like=None) -> ConstraintSystem:
    """Enumerate, per (time, conditioning atom), the distinct jump locations.

    Slot order is lexicographic on the location vectors; n is the maximum
    count over atoms and shorter menus keep trailing empty slots.
    """
    filtration = as_filtration(filtration_like or mu.tree)
    nu = mu.compensator(filtration)
    menus = {key: tuple(sorted(dist)) for key, dist in nu.entries.items()}
    n = max((len(m) for m in menus.values()), default=0)
    slots = {key: menu + tuple([None] * (n - len(menu)))
             for key, menu in menus.items()}
    return ConstraintSystem(filtration, mu.dim, n, slots)


def _slot_indicator_table(mu, nu, cs, k):
    """u_k = gauge_k(x) on {x = alpha_k}, zero on the other charged points."""
    entries = {}
    gauge = cs.gauges[k]
    for (t, label), dist in nu.entries.items():
        menu = cs.slot_values(t, label)
        for value in dist:
            if value not in menu:
                raise ConstraintMismatch(
                    f"location {value} at time {t}, atom {label} "
                    "is outside the constraint menu")
            entries[(t, label, value)] = gauge(value) if value == menu[k] else ZERO
    return JumpFunction(cs.filtration, entries)


def constraint_martingales(mu: JumpMeasure, nu, cs: ConstraintSystem) -> Process:
    """The n compensated slot-indicator martingales, stacked."""
    if nu.measure is not mu:
        raise ConstraintMismatch("compensator belongs to a different measure")
    if nu.filtration is not cs.filtration:
        raise ConstraintMismatch(
            "constraint system and compensator use different filtrations")
    if cs.n == 0:
        return Process.zero(mu.tree, dim=0)
    parts = [star_integral(_slot_indicator_table(mu, nu, cs, k), mu, cs.filtration)
             for k in range(cs.n)]
    return Process.stack(parts)


@dataclass(frozen=True)
class ConversionCertificate:
    """Exact pathwise comparison of a star integral and its dot rewrite."""
    holds: bool
    star_side: Process
    dot_side: Process
    divergence: tuple | None


def star_to_dot(g: JumpFunction, mu: JumpMeasure, cs: ConstraintSystem):
    """Rewrite g * (mu - nu) as an integrand against the slot martingales.

    H_k at (t, atom) is g(t, alpha_k) / gauge_k(alpha_k) on nonempty slots
    and 0 elsewhere; the certificate compares both sides at every node.
    """
    filtration = cs.filtration
    tree = filtration.tree
    nu = mu.compensator(filtration)
    x = constraint_martingales(mu, nu, cs)

    zero_row = tuple([ZERO] * cs.n)
    data = [[zero_row] * tree.n_leaves]
    for t in range(1, tree.horizon + 1):
        row = [None] * tree.n_leaves
        for atom in filtration.atoms(t - 1):
            menu = cs.slot_values(t, atom.label)
            vec = []
            for k in range(cs.n):
                value = menu[k]
                if value is None:
                    vec.append(ZERO)
                    continue
                scale = cs.gauges[k](value)
                vec.append(ZERO if scale == 0
                           else g.value(t, atom.leaves[0], value) / scale)
            vec = tuple(vec)
            for i in atom.leaves:
                row[i] = vec
        data.append(row)
    h = Process(tree, data, dim=cs.n)

    star = star_integral(g, mu, filtration)
    dot = dot_integral(h, x, filtration)
    certificate = ConversionCertificate(
        holds=(star == dot), star_side=star, dot_side=dot,
        divergence=star.first_divergence(dot))
    return h, certificate


def expand_integrand(h: Process, mu: JumpMeasure, cs: ConstraintSystem) -> JumpFunction:
    """Rebuild the jump function sum_k H_k gauge_k(x) 1{x = alpha_k}.

    Star-integrating the result recovers the dot integral of h against the
    slot martingales, which closes the conversion in the other direction.
    """
    filtration = cs.filtration
    if h.dim != cs.n:
        raise DimensionMismatch(f"integrand dim {h.dim}, constraint count {cs.n}")
    if not h.is_predictable(filtration):
        raise NotPredictable("integrand is not predictable for this filtration")
    nu = mu.compensator(filtration)
    entries = {}
    for (t, label), dist in nu.entries.items():
        atom = next(a for a in filtration.atoms(t - 1) if a.label == label)
        menu = cs.slot_values(t, label)
        hv = h.values[t][atom.leaves[0]]
        for value in dist:
            if value not in menu:
                raise ConstraintMismatch(
                    f"location {value} at time {t}, atom {label} "
                    "is outside the constraint menu")
            k = menu.index(value)
            entries[(t, label, value)] = hv[k] * cs.gauges[k](value)
    return JumpFunction(filtration, entries)


def jump_supports_disjoint(x: Process) -> bool:
    """No node charges more than one component's jump.

    This is the discrete reading of components never jumping simultaneously:
    the per-component jump supports, as node sets, are pairwise disjoint.
    """
    tree = x.tree
    for t in range(1, tree.horizon + 1):
        for node in tree.nodes_at[t]:
            inc = x.increment(t, node.leaf_lo)
            jumping = sum(1 for c in inc if c != 0)
            if jumping > 1:
                return False
    return True


def slot_events_disjoint(mu: JumpMeasure, cs: ConstraintSystem) -> bool:
    """Each charged location matches exactly one slot of its menu.

    This is what survives of pairwise orthogonality for the compensated
    slot-indicator family here: no two raw slot events ever fire together.
    The compensated processes themselves still co-move through their
    predictable parts, as any two compensated indicators on one atom must.
    """
    tree = mu.tree
    for node_id, value in mu.support.items():
        node = tree.nodes[node_id]
        atom = cs.filtration.conditioning_atom_of(node.time, node.leaf_lo)
        menu = cs.slot_values(node.time, atom.label)
        if sum(1 for v in menu if v == value) != 1:
            return False
    return True


@dataclass(frozen=True)
class AccessibleSlot:
    """One accessible time with its partition classes and weight.

    tau is a predictable stopping time (an int means the constant time);
    classes lists the partition sets as leaf collections, aligned by class
    index across slots; weight is any nonzero rational.
    """
    tau: object
    classes: tuple
    weight: object = 1


@dataclass(frozen=True)
class AccessibleConversion:
    """Output of the accessible-time rewrite, with its verification."""
    scale: Process
    integrand: Process
    martingales: Process
    star_side: Process
    dot_side: Process
    holds: bool
    divergence: tuple | None


def _leaf_index(tree, item):
    if isinstance(item, int):
        if not 0 <= item < tree.n_leaves:
            raise PartitionNotMeasurable(f"leaf index {item} out of range")
        return item
    try:
        return tree.leaf_ids.index(str(item))
    except ValueError:
        raise PartitionNotMeasurable(f"unknown leaf id {item!r}") from None


def _normalize_slots(tree, slots):
    """Coerce taus, leaf sets and weights; pad class lists to a common count."""
    rows = []
    for slot in slots:
        tau = slot.tau
        if not isinstance(tau, StoppingTime):
            tau = StoppingTime.constant(tree, int(tau))
        if not tau.is_predictable():
            raise NotPredictable("accessible slots need predictable times")
        weight = to_fraction(slot.weight)
        if weight == 0:
            raise VanishingWeight("slot weight must be nonzero")
        classes = tuple(frozenset(_leaf_index(tree, x) for x in cls)
                        for cls in slot.classes)
        rows.append((tau, classes, weight))
    count = max((len(c) for _, c, _ in rows), default=0)
    rows = [(tau, classes + tuple([frozenset()] * (count - len(classes))), w)
            for tau, classes, w in rows]
    return rows, count


def accessible_star_to_dot(g: JumpFunction, mu: JumpMeasure, slots,
                           filtration_like=None) -> AccessibleConversion:
    """Rewrite g * (mu - nu) over partition classes at accessible times.

    Per slot, the classes split each conditioning atom's successors by jump
    location; the class martingales Y_k compensate the weighted class
    indicators, the scale G undoes the weights on each time's graph, and the
    integrand picks g at the class location wherever that location is
    nonzero. The identity is verified node by node.
    """
    tree = mu.tree
    filtration = as_filtration(filtration_like or tree)
    rows, count = _normalize_slots(tree, slots)

    occupied = {}
    for idx, (tau, classes, _) in enumerate(rows):
        for leaf in range(tree.n_leaves):
            t = tau.values[leaf]
            if t <= tree.horizon and (t, leaf) in occupied:
                raise ConstraintMismatch("accessible times overlap")
            occupied[(t, leaf)] = idx
        claimed = set()
        for cls in classes:
            if cls & claimed:
                raise PartitionNotMeasurable("partition classes overlap")
            claimed |= cls
            for leaf in cls:
                if tau.values[leaf] > tree.horizon:
                    raise PartitionNotMeasurable(
                        "class contains a path its time never reaches")
        # each class, restricted to {tau = t}, must be a union of time-t atoms
        for t in range(1, tree.horizon + 1):
            for atom in filtration.atoms(t):
                inside = [leaf for leaf in atom.leaves if tau.values[leaf] == t]
                if not inside:
                    continue
                for cls in classes:
                    hit = [leaf for leaf in inside if leaf in cls]
                    if hit and len(hit) != len(inside):
                        raise PartitionNotMeasurable(
                            f"class splits an atom at time {t}")

    # every support node must sit on a slot graph, inside one class
    for node_id in mu.support:
        node = tree.nodes[node_id]
        leaf = node.leaf_lo
        idx = occupied.get((node.time, leaf))
        if idx is None:
            raise ConstraintMismatch(
                f"support node {node_id} lies on no accessible time")
        if not any(leaf in cls for cls in rows[idx][1]):
            raise ConstraintMismatch(
                f"support node {node_id} is outside every partition class")

    # class locations per (slot, class, conditioning atom)
    alpha = {}
    for idx, (tau, classes, _) in enumerate(rows):
        for t in range(1, tree.horizon + 1):
            for atom in filtration.atoms(t - 1):
                if tau.values[atom.leaves[0]] != t:
                    continue
                for k, cls in enumerate(classes):
                    members = [leaf for leaf in atom.leaves if leaf in cls]
                    if not members:
                        continue
                    values = {mu.jump_at(t, leaf) for leaf in members}
                    if len(values) != 1:
                        raise ConstraintMismatch(
                            f"class {k} mixes jump locations on atom "
                            f"{atom.label} at time {t}")
                    value = values.pop()
                    if value is not None:
                        alpha[(idx, k, t, atom.label)] = value

    zero_k = tuple([ZERO] * count)
    y_data = [[zero_k] * tree.n_leaves]
    gh_data = [[zero_k] * tree.n_leaves]
    h_data = [[zero_k] * tree.n_leaves]
    for t in range(1, tree.horizon + 1):
        y_row = [None] * tree.n_leaves
        gh_row = [None] * tree.n_leaves
        h_row = [None] * tree.n_leaves
        for atom in filtration.atoms(t - 1):
            idx = occupied.get((t, atom.leaves[0]))
            if idx is None:
                for i in atom.leaves:
                    y_row[i] = tuple(y_data[t - 1][i])
                    gh_row[i] = zero_k
                    h_row[i] = zero_k
                continue
            tau, classes, weight = rows[idx]
            probs = []
            for cls in classes:
                mass = sum((tree.leaf_probs[i] for i in atom.leaves if i in cls),
                           start=ZERO)
                probs.append(mass / atom.prob)
            h_vec = []
            for k in range(count):
                loc = alpha.get((idx, k, t, atom.label))
                h_vec.append(ZERO if loc is None
                             else g.value(t, atom.leaves[0], loc))
            h_vec = tuple(h_vec)
            gh_vec = tuple(v / weight for v in h_vec)
            for i in atom.leaves:
                steps = tuple(
                    weight * ((1 if i in classes[k] else 0) - probs[k])
                    for k in range(count))
                y_row[i] = tuple(a + b for a, b in zip(y_data[t - 1][i], steps))
                gh_row[i] = gh_vec
                h_row[i] = h_vec
        y_data.append(y_row)
        gh_data.append(gh_row)
        h_data.append(h_row)

    y = Process(tree, y_data, dim=count)
    h = Process(tree, h_data, dim=count)
    gh = Process(tree, gh_data, dim=count)
    scale_data = [[(ZERO,)] * tree.n_leaves]
    for t in range(1, tree.horizon + 1):
        row = []
        for leaf in range(tree.n_leaves):
            idx = occupied.get((t, leaf))
            row.append((ZERO,) if idx is None else (1 / rows[idx][2],))
        scale_data.append(row)
    scale = Process(tree, scale_data, dim=1)

    star = star_integral(g, mu, filtration)
    dot = dot_integral(gh, y, filtration)
    return AccessibleConversion(
        scale=scale, integrand=h, martingales=y, star_side=star,
        dot_side=dot, holds=(star == dot), divergence=star.first_divergence(dot))


def value_slots_from_measure(mu: JumpMeasure, filtration_like=None,
                             weights=None):
    """Build accessible slots from a measure: one slot per support time.

    Classes group each conditioning atom's successors by jump location (lex
    order), with a final class collecting the non-jumping successors, so the
    classes partition the whole space at each support time.
    """
    tree = mu.tree
    filtration = as_filtration(filtration_like or tree)
    times = sorted({tree.nodes[nid].time for nid in mu.support})
    slots = []
    for pos, t in enumerate(times):
        per_atom = []
        for atom in filtration.atoms(t - 1):
            groups: dict[tuple, list] = {}
            still = []
            seen = set()
            for leaf in atom.leaves:
                node = tree.node_at(t, leaf)
                if node.id in seen:
                    continue
                seen.add(node.id)
                value = mu.support.get(node.id)
                leaves = list(range(node.leaf_lo, node.leaf_hi))
                if value is None:
                    still.extend(leaves)
                else:
                    groups.setdefault(value, []).extend(leaves)
            ordered = [groups[v] for v in sorted(groups)]
            per_atom.append((ordered, still))
        depth = max((len(ordered) for ordered, _ in per_atom), default=0)
        classes = []
        for k in range(depth):
            cls = set()
            for ordered, _ in per_atom:
                if k < len(ordered):
                    cls.update(ordered[k])
            classes.append(frozenset(cls))
        quiet = set()
        for _, still in per_atom:
            quiet.update(still)
        classes.append(frozenset(quiet))
        weight = 1 if weights is None else weights[pos]
        slots.append(AccessibleSlot(tau=t, classes=tuple(classes), weight=weight))
    return slots


def solve_accessible_K(gamma, p):
    """Express every centered unit target through the given directions.

    gamma holds the directions as columns of an n by d matrix, each
    orthogonal to the probability vector p; the solution K (d by n) gives,
    per h, coefficients with sum_i gamma_i K[i][h] = e_h - p_h * ones.
    """
    rows = [[to_fraction(c) for c in row] for row in gamma]
    pv = [to_fraction(c) for c in p]
    n = len(pv)
    if len(rows) != n:
        raise DimensionMismatch(f"{len(rows)} direction rows for {n} outcomes")
    widths = {len(row) for row in rows}
    if len(widths) > 1:
        raise DimensionMismatch("ragged direction matrix")
    d = widths.pop() if widths else 0
    if sum(pv, start=ZERO) != 1:
        raise ProbabilitySumNotOne("probability vector does not sum to 1")
    for i in range(d):
        against = sum((rows[k][i] * pv[k] for k in range(n)), start=ZERO)
        if against != 0:
            raise NotOrthogonal(f"direction {i} is not orthogonal to p")
    columns = []
    for h in range(n):
        target = [(1 if k == h else 0) - pv[h] for k in range(n)]
        x = solve(rows, target)
        if x is None:
            raise SpanDeficient(
                f"directions and p do not span: centered unit {h} unreachable",
                residual=tuple(target))
        columns.append(x)
    return [[columns[h][i] for h in range(n)] for i in range(d)]


def solve_inaccessible_K(gamma):
    """Exact right inverse of the direction matrix, least-index pivots."""
    rows = [[to_fraction(c) for c in row] for row in gamma]
    k = right_inverse(rows)
    if k is None:
        raise RankDeficient(
            f"directions do not have full rank {len(rows)}")
    return k

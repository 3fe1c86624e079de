"""Enlarging the information flow: drift operators, deflators, the drift
multiplier construction, and covariance-kernel certificates.

Every martingale for the base flow becomes, under a refining flow, a
martingale plus a predictable drift; everything here either computes that
drift, represents it through a fixed pair (N, phi), or tests whether
strictly positive prices survive the extra information.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .calculus import (
    Process,
    dot_integral,
    dual_predictable_projection,
    predictable_bracket,
    star_integral,
)
from .errors import (
    DegeneratePartition,
    DimensionMismatch,
    NotADeflator,
    NotIncreasing,
    NotStrictlyPositive,
)
from .linalg import dot, gram_schmidt, invert, mat_mul, null_space, transpose
from .rationals import format_rational, to_fraction
from .representation import representation_coefficient
from .simplex import OPTIMAL, maximize
from .tree import as_filtration

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass(frozen=True)
class DriftResult:
    """Predictable drift of a base-flow martingale under the larger flow,
    with the remaining martingale part."""
    drift: Process
    g_martingale: Process


def drift_operator(x: Process, enlargement_like) -> DriftResult:
    """Drift increment E[delta X | larger flow at t-1]; X minus it is a
    martingale for the larger flow."""
    filtration = as_filtration(enlargement_like)
    x.require_martingale(x.tree, what="drift input")
    drift = dual_predictable_projection(x, filtration)
    return DriftResult(drift=drift, g_martingale=x - drift)


def doleans_exponential(a, x: Process) -> Process:
    """Pathwise product of (1 + a * delta X), started at 1."""
    if x.dim != 1:
        raise DimensionMismatch("exponentials take scalar processes")
    a = to_fraction(a)
    tree = x.tree
    data = [[(ONE,)] * tree.n_leaves]
    for t in range(1, tree.horizon + 1):
        row = []
        for leaf in range(tree.n_leaves):
            step = 1 + a * x.increment(t, leaf)[0]
            row.append((data[t - 1][leaf][0] * step,))
        data.append(row)
    return Process(tree, data, dim=1)


@dataclass(frozen=True)
class Deflator:
    """Strictly positive process making itself and price * itself
    martingales under the larger flow."""
    process: Process
    target: Process


@dataclass(frozen=True)
class AtomAudit:
    """One conditioning atom's pricing system and its LP outcome."""
    time: int
    atom: str
    subatoms: tuple
    weights: tuple
    price_moves: tuple
    status: str
    floor: object
    solution: tuple | None
    separating: object


@dataclass(frozen=True)
class DeflatorSearch:
    feasible: bool
    deflator: Deflator | None
    violations: tuple
    audit: tuple


def _require_positive(s: Process, what: str):
    for row in s.values:
        for vec in row:
            if any(c <= 0 for c in vec):
                raise NotStrictlyPositive(f"{what} must stay strictly positive")


def find_deflator(s: Process, enlargement_like) -> DeflatorSearch:
    """Search for per-atom positive reweightings that keep the price fair.

    Per conditioning atom: find y_i > 0 over the successor atoms with
    sum q_i y_i = 1 and sum q_i y_i S_i = S_previous, by maximizing the
    floor min y_i in exact arithmetic. An atom fails when the optimum is not
    strictly positive (or the equalities admit no nonnegative solution);
    every failing atom is reported, with a sign vector separating the price
    moves from zero as the witness.
    """
    if s.dim != 1:
        raise DimensionMismatch("deflator targets are scalar prices")
    filtration = as_filtration(enlargement_like)
    tree = s.tree
    _require_positive(s, "price")
    s.require_martingale(tree, what="price")

    audit = []
    violations = []
    factors = {}
    for t in range(1, tree.horizon + 1):
        for atom in filtration.atoms(t - 1):
            atom_leaves = set(atom.leaves)
            subs = sorted((sub for sub in filtration.atoms(t)
                           if set(sub.leaves) <= atom_leaves),
                          key=lambda sub: sub.leaves[0])
            q = [sub.prob / atom.prob for sub in subs]
            s_prev = s.values[t - 1][atom.leaves[0]][0]
            s_next = [s.values[t][sub.leaves[0]][0] for sub in subs]
            moves = [v - s_prev for v in s_next]
            m = len(subs)
            # variables: y_1..y_m, floor, slack_1..slack_m
            n_vars = 2 * m + 1
            objective = [ZERO] * n_vars
            objective[m] = ONE
            eq_lhs = []
            eq_rhs = []
            for i in range(m):
                lhs = [ZERO] * n_vars
                lhs[i] = ONE
                lhs[m] = -ONE
                lhs[m + 1 + i] = -ONE
                eq_lhs.append(lhs)
                eq_rhs.append(ZERO)
            eq_lhs.append([*q, *([ZERO] * (m + 1))])
            eq_rhs.append(ONE)
            eq_lhs.append([*(qi * si for qi, si in zip(q, s_next)),
                           *([ZERO] * (m + 1))])
            eq_rhs.append(s_prev)
            result = maximize(objective, eq_lhs, eq_rhs)

            ok = result.status == OPTIMAL and result.value > 0
            separating = None
            if not ok:
                # one-dimensional separation: the moves all lie weakly on
                # one side of zero, strictly somewhere
                if all(v >= 0 for v in moves):
                    separating = 1
                elif all(v <= 0 for v in moves):
                    separating = -1
            ys = tuple(result.x[:m]) if result.status == OPTIMAL else None
            record = AtomAudit(
                time=t, atom=atom.label,
                subatoms=tuple(sub.label for sub in subs),
                weights=tuple(q), price_moves=tuple(moves),
                status=result.status,
                floor=result.value if result.status == OPTIMAL else None,
                solution=ys, separating=separating)
            audit.append(record)
            if ok:
                for sub, y in zip(subs, ys):
                    factors[(t, sub.label)] = y
            else:
                violations.append(record)

    if violations:
        return DeflatorSearch(feasible=False, deflator=None,
                              violations=tuple(violations), audit=tuple(audit))

    data = [[(ONE,)] * tree.n_leaves]
    for t in range(1, tree.horizon + 1):
        row = [None] * tree.n_leaves
        for atom in filtration.atoms(t):
            y = factors[(t, atom.label)]
            for i in atom.leaves:
                row[i] = (data[t - 1][i][0] * y,)
        data.append(row)
    deflator = Deflator(process=Process(tree, data, dim=1), target=s)
    return DeflatorSearch(feasible=True, deflator=deflator,
                          violations=(), audit=tuple(audit))


@dataclass(frozen=True)
class ViabilityReport:
    """Family-relative verdict: a failure refutes viability outright, while
    an all-pass certifies it for the tested family only."""
    viable: bool
    results: tuple


def check_full_viability(enlargement_like, family) -> ViabilityReport:
    results = []
    viable = True
    for entry in family:
        if isinstance(entry, tuple):
            name, process = entry
        else:
            name, process = repr(entry), entry
        search = find_deflator(process, enlargement_like)
        results.append((name, search))
        if not search.feasible:
            viable = False
    return ViabilityReport(viable=viable, results=tuple(results))


def max_abs_increment(x: Process) -> Fraction:
    best = ZERO
    for t in range(1, x.tree.horizon + 1):
        for leaf in range(x.tree.n_leaves):
            for c in x.increment(t, leaf):
                if abs(c) > best:
                    best = abs(c)
    return best


def default_viability_family(w: Process):
    """Small exponential grid around each component of the driver.

    Factors 1 + a * delta W stay in [1/4, 7/4] by the choice of a, so every
    member is a strictly positive martingale.
    """
    family = []
    for k in range(w.dim):
        component = w.component(k)
        bound = max_abs_increment(component)
        if bound == 0:
            continue
        for a in (Fraction(1, 2) / bound, Fraction(-1, 2) / bound,
                  Fraction(3, 4) / bound, Fraction(-3, 4) / bound):
            family.append((f"exp[{k}]*{format_rational(a)}",
                           doleans_exponential(a, component)))
    return family


def verify_fbd(x: Process, deflator: Deflator, enlargement_like) -> bool:
    """Drift of X against minus the deflator-weighted predictable bracket.

    Exact identity: drift(X) = -(1 / Y_prev) . [Y, X]^p under the larger
    flow, for any deflator Y of a price driven by X.
    """
    filtration = as_filtration(enlargement_like)
    tree = x.tree
    y = deflator.process
    _require_positive(y, "deflator")
    if any(y.values[0][i][0] != 1 for i in range(tree.n_leaves)):
        raise NotADeflator("deflator must start at 1")
    if not y.is_martingale(filtration):
        raise NotADeflator("deflator is not a martingale for the larger flow")
    priced = _pathwise_product(y, deflator.target)
    if not priced.is_martingale(filtration):
        raise NotADeflator("deflated price is not a martingale")

    drift = drift_operator(x, filtration).drift
    inv_prev = [[(Fraction(-1),)] * tree.n_leaves]
    for t in range(1, tree.horizon + 1):
        inv_prev.append([(-1 / y.values[t - 1][leaf][0],)
                         for leaf in range(tree.n_leaves)])
    integrand = Process(tree, inv_prev, dim=1)
    bracket_p = predictable_bracket(y, x, filtration)
    rhs = dot_integral(integrand, bracket_p, filtration)
    return drift == rhs


def _pathwise_product(a: Process, b: Process) -> Process:
    if a.dim != 1 or b.dim != 1:
        raise DimensionMismatch("pathwise products take scalar processes")
    tree = a.tree
    data = [[(a.values[t][leaf][0] * b.values[t][leaf][0],)
             for leaf in range(tree.n_leaves)]
            for t in range(tree.horizon + 1)]
    return Process(tree, data, dim=1)


def check_compensator_abs_continuity(a: Process, enlargement_like):
    """Null base-flow compensator increments stay null under the larger flow.

    Returns (True, None) or (False, (time, base atom, larger atom)); with
    every branch probability positive the scan cannot fail, and running it
    keeps that claim honest.
    """
    if a.dim != 1:
        raise DimensionMismatch("compensator scan takes scalar processes")
    filtration = as_filtration(enlargement_like)
    tree = a.tree
    for t in range(1, tree.horizon + 1):
        for leaf in range(tree.n_leaves):
            if a.increment(t, leaf)[0] < 0:
                raise NotIncreasing(f"decrement at time {t}")
    base = tree.base_filtration()
    fine = dual_predictable_projection(a, filtration)
    coarse = dual_predictable_projection(a, base)
    for t in range(1, tree.horizon + 1):
        for atom in base.atoms(t - 1):
            if coarse.increment(t, atom.leaves[0])[0] != 0:
                continue
            atom_leaves = set(atom.leaves)
            for sub in filtration.atoms(t - 1):
                if not set(sub.leaves) <= atom_leaves:
                    continue
                if fine.increment(t, sub.leaves[0])[0] != 0:
                    return False, (t, atom.label, sub.label)
    return True, None


@dataclass(frozen=True)
class SlotWitness:
    """Per conditioning atom: branch probabilities, the orthogonal frame,
    and each larger-flow atom's reweighted coordinates."""
    time: int
    atom: str
    p: tuple
    epsilons: tuple
    sub_records: tuple


@dataclass(frozen=True)
class SubAtomRecord:
    label: str
    p_bar: tuple
    sigma: tuple
    phi: tuple


@dataclass(frozen=True)
class MultiplierSolution:
    n: Process
    phi: Process
    slots: tuple
    holds: bool
    basis: object


def solve_drift_multiplier(enlargement_like, basis) -> MultiplierSolution:
    """Common pair (N, phi) expressing every drift through base brackets.

    Per conditioning atom, the successor-class probabilities p give an
    orthogonal frame of the hyperplane against p; the larger flow reweights
    p to p_bar, and the coordinates of (1/2^t)(p_bar/p - 1) in the frame
    (scaled by 4^t for the non-unit covariance normalization) define phi,
    while the frame itself integrates the reconstructed family into N. The
    defining identity is verified exactly for every component before
    returning.
    """
    filtration = as_filtration(enlargement_like)
    tree = basis.process.tree
    width = basis.d + 1
    by_slot = {(wit.time, wit.atom): wit for wit in basis.witnesses}

    x2 = basis.process
    frames = {}
    slot_records = []
    n_data = [[tuple([ZERO] * basis.d)] * tree.n_leaves]
    phi_data = [[tuple([ZERO] * basis.d)] * tree.n_leaves]
    for t in range(1, tree.horizon + 1):
        n_row = [None] * tree.n_leaves
        phi_row = [None] * tree.n_leaves
        for node in tree.nodes_at[t - 1]:
            wit = by_slot[(t, node.id)]
            p = list(wit.probs)
            if all(c == 0 for c in p):
                raise DegeneratePartition(f"no mass below atom {node.id}")
            units = [[ONE if j == h else ZERO for j in range(width)]
                     for h in range(width)]
            frame = gram_schmidt([p, *units])
            epsilons = frame[1:]
            if len(epsilons) != basis.d:
                raise DegeneratePartition(
                    f"frame at atom {node.id} has {len(epsilons)} directions")
            frames[(t, node.id)] = epsilons
            sub_records = []
            leaves = set(node.leaves())
            for sub in filtration.atoms(t - 1):
                sub_leaves = set(sub.leaves)
                if not sub_leaves <= leaves:
                    continue
                p_bar = []
                for h in range(width):
                    mass = sum((tree.leaf_probs[i] for i in wit.leaves[h]
                                if i in sub_leaves), start=ZERO)
                    p_bar.append(mass / sub.prob)
                rho = [ZERO if p[h] == 0
                       else Fraction(1, 2 ** t) * (p_bar[h] / p[h] - 1)
                       for h in range(width)]
                sigma = [dot(rho, eps) / dot(eps, eps) for eps in epsilons]
                phi_vec = tuple(Fraction(4 ** t) * c for c in sigma)
                sub_records.append(SubAtomRecord(
                    label=sub.label, p_bar=tuple(p_bar),
                    sigma=tuple(sigma), phi=phi_vec))
                for i in sub.leaves:
                    phi_row[i] = phi_vec
            slot_records.append(SlotWitness(
                time=t, atom=node.id, p=tuple(p),
                epsilons=tuple(tuple(e) for e in epsilons),
                sub_records=tuple(sub_records)))
            for i in node.leaves():
                inc = x2.increment(t, i)
                steps = tuple(dot(eps, inc) for eps in epsilons)
                n_row[i] = tuple(a + b for a, b in
                                 zip(n_data[t - 1][i], steps))
        n_data.append(n_row)
        phi_data.append(phi_row)

    n = Process(tree, n_data, dim=basis.d)
    phi = Process(tree, phi_data, dim=basis.d)

    holds = all(
        _multiplier_identity(phi, n, x2.component(h), filtration)
        for h in range(width))
    return MultiplierSolution(n=n, phi=phi, slots=tuple(slot_records),
                              holds=holds, basis=basis)


def _multiplier_identity(phi, n, x, filtration) -> bool:
    drift = dual_predictable_projection(x, filtration)
    rhs = _phi_bracket(phi, n, x, filtration)
    return drift == rhs


def _phi_bracket(phi, n, x, filtration) -> Process:
    base = x.tree.base_filtration()
    brackets = Process.stack([predictable_bracket(n.component(j), x, base)
                              for j in range(n.dim)])
    return dot_integral(phi, brackets, filtration)


def verify_drift_multiplier(solution: MultiplierSolution, x: Process,
                            enlargement_like) -> bool:
    """Check the multiplier identity for an arbitrary representable input.

    The input is first represented against the solution's basis, so a
    non-representable input fails loudly at the representation step rather
    than muddying the identity check.
    """
    filtration = as_filtration(enlargement_like)
    representation_coefficient(x, solution.basis.process)
    drift = dual_predictable_projection(x, filtration)
    rhs = _phi_bracket(solution.phi, solution.n, x, filtration)
    return drift == rhs


@dataclass(frozen=True)
class KernelCertificate:
    time: int
    atom: str
    matrix: tuple
    kernel_basis: tuple
    claimed_basis: tuple
    kernel_matches: bool
    j: tuple
    sub_checks: tuple
    holds: bool


def covariance_kernel(enlargement_like, basis, time: int,
                      atom_label: str) -> KernelCertificate:
    """Kernel of the per-atom covariance step and its reflexive certificate.

    The step matrix is (1/4^t)(diag(p) - p pT); its kernel is spanned by the
    all-ones vector on the charged classes together with the units of the
    empty classes. J inverts the step on the charged sum-zero directions, and
    every larger-flow atom's own covariance step M satisfies M = M J C.
    """
    filtration = as_filtration(enlargement_like)
    tree = basis.process.tree
    wit = next((w for w in basis.witnesses
                if w.time == time and w.atom == atom_label), None)
    if wit is None:
        raise DegeneratePartition(
            f"no slot at time {time}, atom {atom_label}")
    width = basis.d + 1
    p = list(wit.probs)
    scale = Fraction(1, 4 ** time)
    c = [[scale * ((p[g] if g == h else ZERO) - p[g] * p[h])
          for h in range(width)] for g in range(width)]

    charged = [h for h in range(width) if p[h] > 0]
    if not charged:
        raise DegeneratePartition(f"no mass below atom {atom_label}")
    claimed = []
    ones = [ONE if h in charged else ZERO for h in range(width)]
    claimed.append(tuple(ones))
    for h in range(width):
        if p[h] == 0:
            claimed.append(tuple(ONE if g == h else ZERO for g in range(width)))
    kernel = null_space(c)
    in_kernel = all(
        all(dot(row, vec) == 0 for row in c) for vec in claimed)
    kernel_matches = in_kernel and len(kernel) == len(claimed)

    # sum-zero frame on the charged classes
    b_cols = []
    lead = charged[0]
    for h in charged[1:]:
        col = [ZERO] * width
        col[lead] = ONE
        col[h] = -ONE
        b_cols.append(col)
    if b_cols:
        b = transpose(b_cols)
        core = mat_mul(mat_mul(transpose(b), c), b)
        core_inv = invert(core)
        j = mat_mul(mat_mul(b, core_inv), transpose(b))
    else:
        j = [[ZERO] * width for _ in range(width)]

    jc = mat_mul(j, c)
    x2 = basis.process
    node = tree.nodes[atom_label]
    node_leaves = set(node.leaves())
    sub_checks = []
    holds = kernel_matches
    for sub in filtration.atoms(time - 1):
        if not set(sub.leaves) <= node_leaves:
            continue
        mean = [ZERO] * width
        for i in sub.leaves:
            w = tree.leaf_probs[i] / sub.prob
            inc = x2.increment(time, i)
            for h in range(width):
                mean[h] += w * inc[h]
        m = [[ZERO] * width for _ in range(width)]
        for i in sub.leaves:
            w = tree.leaf_probs[i] / sub.prob
            inc = x2.increment(time, i)
            for g in range(width):
                for h in range(width):
                    m[g][h] += w * (inc[g] - mean[g]) * (inc[h] - mean[h])
        back = mat_mul(m, jc)
        ok = back == m
        sub_checks.append((sub.label, ok))
        holds = holds and ok

    return KernelCertificate(
        time=time, atom=atom_label,
        matrix=tuple(tuple(row) for row in c),
        kernel_basis=tuple(tuple(v) for v in kernel),
        claimed_basis=tuple(claimed),
        kernel_matches=kernel_matches,
        j=tuple(tuple(row) for row in j),
        sub_checks=tuple(sub_checks),
        holds=holds)


def g_star_consistency(g, mu, enlargement_like) -> bool:
    """Star integral under the larger flow against the drift-corrected one.

    The base-anchored jump function integrates unchanged under the larger
    flow; the result must equal the base star integral minus its drift.
    """
    filtration = as_filtration(enlargement_like)
    base = mu.tree.base_filtration()
    fine_side = star_integral(g, mu, filtration)
    coarse = star_integral(g, mu, base)
    corrected = drift_operator(coarse, filtration).g_martingale
    return fine_side == corrected

"""Batch front door: scenario runs, fuzz campaigns, focused reports.

Subcommands: run, fuzz, check-mrp, viability, explain. Reports are
deterministic given inputs and seed: canonical JSON with sorted keys, no
wall-clock content unless --timing is passed. Exit codes: 0 all checks pass,
1 a check failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

from . import __version__
from .calculus import Process, jump_measure, star_integral
from .constraint import (
    accessible_star_to_dot,
    detect_fpcc,
    expand_integrand,
    slot_events_disjoint,
    star_to_dot,
    value_slots_from_measure,
)
from .enlargement import (
    check_compensator_abs_continuity,
    check_full_viability,
    covariance_kernel,
    default_viability_family,
    drift_operator,
    g_star_consistency,
    max_abs_increment,
    solve_drift_multiplier,
    verify_drift_multiplier,
    verify_fbd,
)
from .errors import FiltrationLabError, NoRepresentation, ParseError, UnknownCheck
from .fuzz import (
    random_increasing,
    random_jump_function,
    random_representable,
    random_scenario,
    rng_for,
    undersized_basis,
    widest_branching,
)
from .representation import (
    check_mrp,
    conditional_multiplicity,
    jump_constraint,
    orthogonalize,
    reconstruct_accessible,
)
from .scenario import Scenario, canonical_json, load, save, scenario_hash
from .tree import Enlargement, FilteredTree


class CheckContext:
    """One scenario's shared state across checks, lazily built."""

    def __init__(self, scenario: Scenario, seed: int, mode: str):
        self.scenario = scenario
        self.seed = seed
        self.mode = mode
        self.tree = scenario.tree
        self._cache = {}

    def basis(self) -> Process:
        return self.scenario.basis_process()

    def measure(self):
        if "mu" not in self._cache:
            self._cache["mu"] = jump_measure(self.basis())
        return self._cache["mu"]

    def constraint(self):
        if "cs" not in self._cache:
            self._cache["cs"] = detect_fpcc(self.measure())
        return self._cache["cs"]

    def reconstructed(self):
        if "rb" not in self._cache:
            self._cache["rb"] = reconstruct_accessible(self.basis())
        return self._cache["rb"]

    def enlargements(self):
        return sorted(self.scenario.enlargements.items())


def _json_safe(value):
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _json_safe(v) for k, v in value.items()}
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return _json_safe(dataclasses.asdict(value))
    return value


def _jump_counter(w: Process) -> Process:
    """Cumulative count of the driver's jump nodes along each path."""
    tree = w.tree
    support = jump_measure(w).support
    values = {tree.root.id: Fraction(0)}
    for t in range(1, tree.horizon + 1):
        for node in tree.nodes_at[t]:
            step = 1 if node.id in support else 0
            values[node.id] = values[node.parent.id] + step
    return Process.from_node_values(tree, values, dim=1)


def _multiplicity_table(tree):
    table = {}
    for t in range(1, tree.horizon + 1):
        for node in tree.nodes_at[t - 1]:
            count, _ = conditional_multiplicity(tree, t, node.id)
            table[f"{t}:{node.id}"] = count
    return table


# check runners: each returns (ok, details)

def _run_mrp(ctx: CheckContext):
    w = ctx.basis()
    report = check_mrp(w)
    details = {
        "holds": report.holds,
        "dim": report.dim,
        "ranks": {nid: list(pair) for nid, pair in sorted(report.ranks.items())},
        "failing_atom": report.failing_atom,
        "counterexample": report.counterexample,
        "multiplicity": _multiplicity_table(ctx.tree),
    }
    if report.holds:
        details["constraint"] = jump_constraint(w).as_table()
    return report.holds, details


def _run_reconstruct(ctx: CheckContext):
    try:
        rebuilt = ctx.reconstructed()
    except NoRepresentation as exc:
        return False, {"reason": str(exc)}
    orthogonal = orthogonalize(ctx.basis())
    combined = Process.stack([rebuilt.process, orthogonal])
    joint = check_mrp(combined)
    disjoint = slot_events_disjoint(ctx.measure(), ctx.constraint())
    bound = max_abs_increment(rebuilt.process)
    ok = joint.holds and disjoint and bound <= 1
    return ok, {
        "d": rebuilt.d,
        "components": combined.dim,
        "joint_mrp": joint.holds,
        "events_disjoint": disjoint,
        "class_increment_bound": bound,
    }


def _run_star_to_dot(ctx: CheckContext):
    mu = ctx.measure()
    cs = ctx.constraint()
    base = ctx.tree.base_filtration()
    slots = value_slots_from_measure(mu)
    samples = []
    ok = True
    for j in range(5):
        rng = rng_for(ctx.seed, "star-to-dot", str(j))
        g = random_jump_function(mu, ctx.tree, rng)
        h, certificate = star_to_dot(g, mu, cs)
        back = star_integral(expand_integrand(h, mu, cs), mu, base)
        round_trip = back == certificate.dot_side
        accessible = accessible_star_to_dot(g, mu, slots)
        good = certificate.holds and round_trip and accessible.holds
        ok = ok and good
        samples.append({
            "sample": j,
            "forward": certificate.holds,
            "round_trip": round_trip,
            "accessible": accessible.holds,
        })
    return ok, {"n": cs.n, "samples": samples}


def _run_drift(ctx: CheckContext):
    w = ctx.basis()
    ok = True
    per_enlargement = {}
    for name, enlargement in ctx.enlargements():
        filtration = enlargement.filtration()
        rows = []
        for i in range(w.dim):
            result = drift_operator(w.component(i), enlargement)
            good = (result.g_martingale.is_martingale(filtration)
                    and result.drift.is_predictable(filtration))
            ok = ok and good
            table = {}
            for t in range(1, ctx.tree.horizon + 1):
                for atom in filtration.atoms(t - 1):
                    inc = result.drift.increment(t, atom.leaves[0])[0]
                    if inc != 0:
                        table[f"{t}:{atom.label}"] = inc
            rows.append({"component": i, "decomposed": good, "drift": table})
        per_enlargement[name] = rows
    return ok, {"enlargements": per_enlargement}


def _run_multiplier(ctx: CheckContext):
    try:
        rebuilt = ctx.reconstructed()
    except NoRepresentation as exc:
        return False, {"reason": str(exc)}
    ok = True
    per_enlargement = {}
    for name, enlargement in ctx.enlargements():
        solution = solve_drift_multiplier(enlargement, rebuilt)
        good = solution.holds
        for j in range(3):
            rng = rng_for(ctx.seed, "multiplier", name, str(j))
            x = random_representable(ctx.basis(), rng)
            good = good and verify_drift_multiplier(solution, x, enlargement)
        ok = ok and good
        phi = {}
        for slot in solution.slots:
            phi[f"{slot.time}:{slot.atom}"] = {
                record.label: list(record.phi) for record in slot.sub_records}
        per_enlargement[name] = {
            "holds": solution.holds, "verified_samples": 3, "phi": phi}
    return ok, {"enlargements": per_enlargement}


def _run_viability(ctx: CheckContext):
    family = ctx.scenario.family_processes()
    if not family:
        family = default_viability_family(ctx.basis())
    economic = True
    identities = True
    per_enlargement = {}
    for name, enlargement in ctx.enlargements():
        report = check_full_viability(enlargement, family)
        rows = []
        for price_name, search in report.results:
            if search.feasible:
                fair = verify_fbd(search.deflator.target, search.deflator,
                                  enlargement)
                identities = identities and fair
                rows.append({"price": price_name, "feasible": True,
                             "identity": fair})
            else:
                witnesses = [{"time": v.time, "atom": v.atom,
                              "separating": v.separating}
                             for v in search.violations]
                identities = identities and all(
                    v.separating is not None for v in search.violations)
                rows.append({"price": price_name, "feasible": False,
                             "violations": witnesses})
        economic = economic and report.viable
        per_enlargement[name] = {"viable": report.viable, "results": rows}
    ok = identities if ctx.mode == "fuzz" else (economic and identities)
    return ok, {"family_size": len(family), "enlargements": per_enlargement}


def _run_kernel(ctx: CheckContext):
    try:
        rebuilt = ctx.reconstructed()
    except NoRepresentation as exc:
        return False, {"reason": str(exc)}
    ok = True
    per_enlargement = {}
    for name, enlargement in ctx.enlargements():
        rows = []
        for witness in rebuilt.witnesses:
            certificate = covariance_kernel(enlargement, rebuilt,
                                            witness.time, witness.atom)
            good = certificate.holds and certificate.kernel_matches
            ok = ok and good
            rows.append({
                "time": witness.time,
                "atom": witness.atom,
                "kernel_dim": len(certificate.kernel_basis),
                "holds": good,
            })
        per_enlargement[name] = rows
    return ok, {"enlargements": per_enlargement}


def _run_consistency(ctx: CheckContext):
    mu = ctx.measure()
    counter = _jump_counter(ctx.basis())
    ok = True
    per_enlargement = {}
    for name, enlargement in ctx.enlargements():
        count_ok, witness = check_compensator_abs_continuity(counter,
                                                             enlargement)
        extra = random_increasing(ctx.tree,
                                  rng_for(ctx.seed, "consistency", name))
        extra_ok, extra_witness = check_compensator_abs_continuity(extra,
                                                                   enlargement)
        star_ok = True
        for j in range(3):
            rng = rng_for(ctx.seed, "consistency", name, str(j))
            g = random_jump_function(mu, ctx.tree, rng)
            star_ok = star_ok and g_star_consistency(g, mu, enlargement)
        good = count_ok and extra_ok and star_ok
        ok = ok and good
        per_enlargement[name] = {
            "counter_scan": count_ok,
            "random_scan": extra_ok,
            "star": star_ok,
            "witness": witness or extra_witness,
        }
    return ok, {"enlargements": per_enlargement}


@dataclass(frozen=True)
class CheckDef:
    runner: object
    needs_enlargement: bool
    explain: str


CHECKS = {
    "mrp": CheckDef(
        runner=_run_mrp, needs_enlargement=False,
        explain=(
            "Tests whether the scenario basis can represent every "
            "martingale: at each non-terminal node the centered one-step "
            "increments must span the mean-zero directions over its "
            "children, i.e. have rank one less than the child count. "
            "Passes when every node spans; otherwise the report names the "
            "first failing atom and an unrepresentable mean-zero "
            "direction.")),
    "reconstruct": CheckDef(
        runner=_run_reconstruct, needs_enlargement=False,
        explain=(
            "Rebuilds a representation family from the tree itself: "
            "successor-class indicator martingales weighted 1/2^t per "
            "time, stacked with the compensated jump-location indicators "
            "of the basis. Passes when the stacked family has the "
            "representation property, each charged location matches "
            "exactly one slot, and the class-indicator increments never "
            "exceed 1 in absolute value.")),
    "star-to-dot": CheckDef(
        runner=_run_star_to_dot, needs_enlargement=False,
        explain=(
            "Converts compensated jump-measure integrals into dot "
            "integrals against the compensated location-indicator "
            "martingales and back, plus the accessible-time class "
            "version. Passes when every conversion agrees with the "
            "original node for node, in exact arithmetic, for seeded "
            "random jump functions.")),
    "drift": CheckDef(
        runner=_run_drift, needs_enlargement=True,
        explain=(
            "Decomposes each basis component under each enlargement into "
            "a martingale for the enlarged flow plus a predictable drift. "
            "Passes when the drift is predictable for the enlarged flow "
            "and the remainder is an exact martingale; the report "
            "tabulates the nonzero drift increments per conditioning "
            "atom.")),
    "multiplier": CheckDef(
        runner=_run_multiplier, needs_enlargement=True,
        explain=(
            "Finds one pair (N, phi) expressing the enlarged-flow drift "
            "of every representable martingale X as the phi-weighted "
            "integral of the base predictable bracket of N and X. Passes "
            "when the defining identity holds exactly for the "
            "reconstructed family's components and for seeded "
            "representable test martingales.")),
    "viability": CheckDef(
        runner=_run_viability, needs_enlargement=True,
        explain=(
            "Searches each enlargement for deflators: per conditioning "
            "atom, strictly positive reweightings of the successor atoms "
            "keeping each family price fair, found by maximizing the "
            "minimum weight with an exact simplex. Passes when every "
            "price admits a deflator and the deflator drift identity "
            "verifies; otherwise it lists the violating atoms, each with "
            "a one-sided price-move witness.")),
    "kernel": CheckDef(
        runner=_run_kernel, needs_enlargement=True,
        explain=(
            "Certifies the per-atom covariance step C of the "
            "reconstructed family: its null space is spanned by the "
            "all-ones direction on charged classes together with the "
            "units of empty classes, and every enlarged-flow atom's own "
            "covariance step M satisfies M = M J C for the pseudo-inverse "
            "J built on the charged sum-zero directions. Passes when both "
            "statements hold at every atom.")),
    "consistency": CheckDef(
        runner=_run_consistency, needs_enlargement=True,
        explain=(
            "Coherence of compensators across flows: increments null "
            "under the base compensator must stay null under the "
            "enlargement, checked for the driver's jump counter and a "
            "seeded increasing process, and base-anchored jump functions "
            "must integrate under the enlarged flow to the drift-"
            "corrected base integral. Passes when both hold exactly.")),
}


def _validate_checks(scenario: Scenario, names):
    for name in names:
        if name not in CHECKS:
            raise UnknownCheck(
                f"unknown check {name!r}; known: {', '.join(CHECKS)}")
    if names and scenario.basis is None:
        raise ParseError("checks need a basis process; set \"basis\"")
    for name in names:
        if CHECKS[name].needs_enlargement and not scenario.enlargements:
            raise ParseError(f"check {name!r} needs an enlargement")


def run_check(ctx: CheckContext, name: str) -> dict:
    ok, details = CHECKS[name].runner(ctx)
    return {"name": name, "status": "pass" if ok else "fail",
            "details": _json_safe(details)}


def run_scenario(path, checks=None, seed=None) -> tuple[dict, int]:
    """Execute a scenario's checks; returns (report, exit code)."""
    scenario = load(path)
    names = tuple(checks) if checks is not None else scenario.checks
    _validate_checks(scenario, names)
    if seed is None:
        seed = scenario.seed
    ctx = CheckContext(scenario, seed, mode="run")
    rows = [run_check(ctx, name) for name in names]
    verdict = "pass" if all(r["status"] == "pass" for r in rows) else "fail"
    report = {
        "tool": "filtration-lab",
        "version": __version__,
        "kind": "run",
        "scenario_hash": scenario_hash(scenario),
        "seed": seed,
        "checks": rows,
        "verdict": verdict,
    }
    return report, 0 if verdict == "pass" else 1


def _adversarial_probe(scenario: Scenario, seed: int):
    """Deliberately undersized driver: the rank test must reject it."""
    if widest_branching(scenario.tree) < 3:
        return None
    bad = undersized_basis(scenario.tree, rng_for(seed, "adversarial"))
    report = check_mrp(bad)
    return {
        "name": "mrp-adversarial",
        "status": "pass" if not report.holds else "fail",
        "details": {"dim": bad.dim, "failing_atom": report.failing_atom},
    }


def _truncate_scenario(scenario: Scenario, horizon: int):
    """Shrink to a smaller horizon when every partition cell survives."""
    old = scenario.tree
    specs = []
    for t in range(horizon + 1):
        for node in old.nodes_at[t]:
            specs.append((node.id, node.time,
                          node.parent.id if node.parent else None,
                          node.branch_prob))
    try:
        tree = FilteredTree(horizon, specs)
    except FiltrationLabError:
        return None

    new_leaves = old.nodes_at[horizon]
    enlargements = {}
    for name, enlargement in scenario.enlargements.items():
        parts = {}
        for t in range(horizon + 1):
            cells = []
            for cell in enlargement.partitions[t]:
                members = []
                for node in new_leaves:
                    inside = [i for i in range(node.leaf_lo, node.leaf_hi)
                              if i in cell]
                    if inside and len(inside) != node.leaf_hi - node.leaf_lo:
                        return None
                    if inside:
                        members.append(node.id)
                if members:
                    cells.append(members)
            parts[t] = cells
        try:
            enlargements[name] = Enlargement(tree, parts, name=name)
        except FiltrationLabError:
            return None

    processes = {}
    for name, process in scenario.processes.items():
        table = process.node_values()
        kept = {nid: table[nid] for nid in tree.nodes}
        processes[name] = Process.from_node_values(tree, kept)
    return Scenario(tree=tree, enlargements=enlargements,
                    processes=processes, checks=scenario.checks,
                    seed=scenario.seed, basis=scenario.basis,
                    viability_family=scenario.viability_family)


def minimize_failure(scenario: Scenario, check_name: str, seed: int) -> Scenario:
    """Greedy shrink of a failing scenario, keeping the failure."""

    def still_fails(candidate):
        try:
            _validate_checks(candidate, (check_name,))
            ctx = CheckContext(candidate, seed, mode="fuzz")
            return run_check(ctx, check_name)["status"] != "pass"
        except FiltrationLabError:
            return False

    current = dataclasses.replace(scenario, checks=(check_name,))
    for name in sorted(current.enlargements):
        if len(current.enlargements) == 1:
            break
        smaller = dict(current.enlargements)
        del smaller[name]
        trial = dataclasses.replace(current, enlargements=smaller)
        if still_fails(trial):
            current = trial
    if check_name != "viability" and current.viability_family:
        trial = dataclasses.replace(current, viability_family=())
        if still_fails(trial):
            current = trial
    for name in sorted(current.processes):
        if name == current.basis or name in current.viability_family:
            continue
        smaller = dict(current.processes)
        del smaller[name]
        trial = dataclasses.replace(current, processes=smaller)
        if still_fails(trial):
            current = trial
    for horizon in range(1, current.tree.horizon):
        trial = _truncate_scenario(current, horizon)
        if trial is not None and still_fails(trial):
            current = trial
            break
    return current


def fuzz_campaign(seed_start, count, checks=None, horizon=None,
                  max_branching=None, repro_dir=".") -> tuple[dict, int]:
    """Run the check registry over seeded random scenarios."""
    names = tuple(checks) if checks else tuple(CHECKS)
    for name in names:
        if name not in CHECKS:
            raise UnknownCheck(
                f"unknown check {name!r}; known: {', '.join(CHECKS)}")
    params = {
        "seed_start": seed_start,
        "count": count,
        "checks": list(names),
        "horizon": horizon,
        "max_branching": max_branching,
    }
    results = []
    failures = 0
    for seed in range(seed_start, seed_start + count):
        scenario = random_scenario(seed, horizon=horizon,
                                   max_branching=max_branching, checks=names)
        ctx = CheckContext(scenario, seed, mode="fuzz")
        rows = [run_check(ctx, name) for name in names]
        probe = _adversarial_probe(scenario, seed)
        if probe is not None:
            rows.append(probe)
        failing = [r["name"] for r in rows if r["status"] != "pass"]
        entry = {
            "seed": seed,
            "verdict": "fail" if failing else "pass",
            "checks": [{"name": r["name"], "status": r["status"]}
                       for r in rows],
        }
        if failing:
            failures += 1
            entry["failing"] = failing
            culprit = next((n for n in failing if n in CHECKS), None)
            if culprit is not None:
                reduced = minimize_failure(scenario, culprit, seed)
                path = os.path.join(repro_dir, f"repro-{seed}.json")
                save(reduced, path)
                entry["reproducer"] = path
        results.append(entry)
    verdict = "pass" if failures == 0 else "fail"
    report = {
        "tool": "filtration-lab",
        "version": __version__,
        "kind": "fuzz",
        "params": params,
        "params_hash": scenario_hash_of_params(params),
        "results": results,
        "failures": failures,
        "verdict": verdict,
    }
    return report, 0 if failures == 0 else 1


def scenario_hash_of_params(params) -> str:
    digest = hashlib.sha256(canonical_json(params).encode("utf-8"))
    return digest.hexdigest()[:16]


def check_mrp_report(path) -> tuple[dict, int]:
    """Focused rank report with multiplicity and constraint tables."""
    scenario = load(path)
    if scenario.basis is None:
        raise ParseError("scenario has no basis process")
    w = scenario.basis_process()
    report = check_mrp(w)
    doc = {
        "tool": "filtration-lab",
        "version": __version__,
        "kind": "check-mrp",
        "scenario_hash": scenario_hash(scenario),
        "mrp": report.holds,
        "dim": report.dim,
        "ranks": _json_safe({nid: list(pair)
                             for nid, pair in sorted(report.ranks.items())}),
        "failing_atom": report.failing_atom,
        "counterexample": _json_safe(report.counterexample),
        "multiplicity": _multiplicity_table(scenario.tree),
        "verdict": "pass" if report.holds else "fail",
    }
    if report.holds:
        doc["constraint"] = jump_constraint(w).as_table()
    return doc, 0 if report.holds else 1


def viability_report(path) -> tuple[dict, int]:
    """Focused deflator search with the full per-atom audit."""
    scenario = load(path)
    if not scenario.enlargements:
        raise ParseError("scenario has no enlargement")
    family = scenario.family_processes()
    if not family:
        if scenario.basis is None:
            raise ParseError(
                "scenario needs a viability family or a basis process")
        family = default_viability_family(scenario.basis_process())
    per_enlargement = {}
    viable = True
    for name, enlargement in sorted(scenario.enlargements.items()):
        report = check_full_viability(enlargement, family)
        viable = viable and report.viable
        rows = []
        for price_name, search in report.results:
            audits = [{
                "time": audit.time,
                "atom": audit.atom,
                "subatoms": list(audit.subatoms),
                "weights": audit.weights,
                "price_moves": audit.price_moves,
                "status": audit.status,
                "floor": audit.floor,
                "solution": audit.solution,
                "separating": audit.separating,
            } for audit in search.audit]
            rows.append({
                "price": price_name,
                "feasible": search.feasible,
                "violations": [a.atom for a in search.violations],
                "audit": audits,
            })
        per_enlargement[name] = {"viable": report.viable, "results": rows}
    doc = {
        "tool": "filtration-lab",
        "version": __version__,
        "kind": "viability",
        "scenario_hash": scenario_hash(scenario),
        "family_size": len(family),
        "enlargements": _json_safe(per_enlargement),
        "verdict": "pass" if viable else "fail",
    }
    return doc, 0 if viable else 1


def explain(name: str) -> str:
    if name not in CHECKS:
        raise UnknownCheck(
            f"unknown check {name!r}; known: {', '.join(CHECKS)}")
    return CHECKS[name].explain


# rendering

def render_table(report) -> str:
    lines = [f"filtration-lab {report['version']}"]
    if "scenario_hash" in report:
        lines[0] += f"  scenario {report['scenario_hash']}"
    if "seed" in report:
        lines[0] += f"  seed {report['seed']}"
    if report["kind"] == "run":
        width = max((len(r["name"]) for r in report["checks"]), default=5)
        for row in report["checks"]:
            lines.append(f"  {row['name']:<{width}}  {row['status']}")
    elif report["kind"] == "fuzz":
        lines.append(f"  seeds {report['params']['seed_start']}"
                     f"..{report['params']['seed_start'] + report['params']['count'] - 1}"
                     f"  failures {report['failures']}")
        for entry in report["results"]:
            if entry["verdict"] != "pass":
                lines.append(f"  seed {entry['seed']}: fail "
                             f"({', '.join(entry['failing'])})"
                             + (f" -> {entry['reproducer']}"
                                if "reproducer" in entry else ""))
    elif report["kind"] == "check-mrp":
        lines.append(f"  mrp: {report['mrp']} (dim {report['dim']})")
        if report["failing_atom"] is not None:
            lines.append(f"  failing atom: {report['failing_atom']}"
                         f"  counterexample: {report['counterexample']}")
        for key in sorted(report["multiplicity"]):
            lines.append(f"  multiplicity {key}: {report['multiplicity'][key]}")
    elif report["kind"] == "viability":
        for name in sorted(report["enlargements"]):
            block = report["enlargements"][name]
            lines.append(f"  {name}: {'viable' if block['viable'] else 'not viable'}")
            for row in block["results"]:
                if not row["feasible"]:
                    lines.append(f"    {row['price']}: violations "
                                 f"{', '.join(row['violations'])}")
    lines.append(f"verdict: {report['verdict']}")
    return "\n".join(lines) + "\n"


def emit(report, args) -> None:
    text = (canonical_json_indented(report) if args.format == "json"
            else render_table(report))
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def canonical_json_indented(report) -> str:
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def _split_checks(raw):
    if raw is None:
        return None
    return tuple(part.strip() for part in raw.split(",") if part.strip())


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="filtration-lab",
        description="Exact checks for event-tree martingale scenarios.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=("json", "table"), default="table")
        p.add_argument("--timing", action="store_true",
                       help="append wall-clock seconds (breaks byte-identical output)")

    p_run = sub.add_parser("run", help="run a scenario's checks")
    p_run.add_argument("scenario")
    p_run.add_argument("--checks", default=None,
                       help="comma-separated override of the scenario's list")
    common(p_run)

    p_fuzz = sub.add_parser("fuzz", help="run checks over random scenarios")
    p_fuzz.add_argument("--count", type=int, default=20)
    p_fuzz.add_argument("--checks", default=None)
    p_fuzz.add_argument("--horizon", type=int, default=None)
    p_fuzz.add_argument("--branching", type=int, default=None)
    p_fuzz.add_argument("--repro-dir", default=".")
    common(p_fuzz)

    p_mrp = sub.add_parser("check-mrp", help="rank report for the basis")
    p_mrp.add_argument("scenario")
    common(p_mrp)

    p_via = sub.add_parser("viability", help="deflator search with audit")
    p_via.add_argument("scenario")
    common(p_via)

    p_exp = sub.add_parser("explain", help="what a check verifies")
    p_exp.add_argument("check")

    args = parser.parse_args(argv)
    started = time.monotonic()
    try:
        if args.command == "run":
            report, code = run_scenario(args.scenario,
                                        checks=_split_checks(args.checks),
                                        seed=args.seed)
        elif args.command == "fuzz":
            report, code = fuzz_campaign(
                args.seed if args.seed is not None else 0,
                args.count, checks=_split_checks(args.checks),
                horizon=args.horizon, max_branching=args.branching,
                repro_dir=args.repro_dir)
        elif args.command == "check-mrp":
            report, code = check_mrp_report(args.scenario)
        elif args.command == "viability":
            report, code = viability_report(args.scenario)
        else:
            sys.stdout.write(explain(args.check) + "\n")
            return 0
    except FiltrationLabError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    if args.timing:
        report["timing"] = {"seconds": round(time.monotonic() - started, 3)}
    emit(report, args)
    return code


if __name__ == "__main__":
    sys.exit(main())

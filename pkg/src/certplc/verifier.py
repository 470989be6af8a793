"""Proof search for inductive invariants and the derived lemma checks.

Untrusted by design: everything produced here is re-derived and replayed by
the certificate checker.  A property is proved by induction over the
reachable-state construction: it must hold in the initial configuration and
be preserved by every rule instance (one case per action block, per
transition and per step).  Case hypotheses found contradictory are closed
with a refutation witness; the remaining cases must entail the property on
the symbolic post-state.

A refutation of an inductive case is reported as an inductiveness
counterexample only; it says nothing about reachability of the violating
configuration.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import obligations as O
from . import properties as P
from .lia.solver import (DeciderResourceError, FragmentViolation, Sat,
                         decide_sat)
from .lia.witness import Witness
from .linear import TRUE_DNF, attach_bounds, dnf_and, normalize
from .model import SfcModel
from .prooftree import ArithLeaf, CaseProof, HypEntry, ProofTree
from .semantics import RuleInstance, init_state


@dataclass
class Proved:
    tree: ProofTree | None
    obligations: int = 0


@dataclass
class Refuted:
    rule: RuleInstance | None  # None means the base case failed
    assignment: dict = field(default_factory=dict)
    note: str = ""


@dataclass
class Undecided:
    rule: RuleInstance | None
    reason: str = ""


VerifyResult = Proved | Refuted | Undecided


def check_base(model: SfcModel, formula: P.Formula,
               init_actions: str = "from-steps"):
    """Concrete evaluation on the initial configuration; None when it holds."""
    state = init_state(model, init_actions)
    if P.holds_on(formula, state):
        return None
    mem = {k: v.payload for k, v in state.mem.items()}
    return Refuted(None, mem, "fails in the initial configuration")


def inductive_obligations(model: SfcModel, formula: P.Formula, *,
                          cap: int = 512):
    """One obligation per rule instance, in enumeration order.

    Opaque or oversized cases yield (rule, Undecided) so callers report
    them instead of silently skipping.
    """
    out = []
    for rule in O.rule_instances(model):
        try:
            out.append((rule, O.build_obligation(model, formula, rule,
                                                 cap=cap)))
        except (O.UnsupportedEffect, O.ObligationOverflow) as err:
            out.append((rule, Undecided(rule, str(err))))
    return out


def discharge(model: SfcModel, ob: O.CaseObligation, *,
              max_derived: int = 50_000, split_limit: int = 4096):
    """Close one obligation; returns CaseProof, Refuted or Undecided."""
    entries = []
    try:
        for hyp_cube in ob.hyp_cubes:
            res = decide_sat(hyp_cube, max_derived=max_derived,
                             split_limit=split_limit)
            if not isinstance(res, Sat):
                entries.append(HypEntry(contradiction=res.witness))
                continue
            leaves = []
            for neg_dnf in ob.neg_concl:
                witnesses = []
                for neg_cube in neg_dnf:
                    joint = O.joint_cube(hyp_cube, neg_cube)
                    if joint is None:  # visibly false join
                        witnesses.append(Witness(()))
                        continue
                    sub = decide_sat(joint, max_derived=max_derived,
                                     split_limit=split_limit)
                    if isinstance(sub, Sat):
                        return Refuted(ob.rule, sub.assignment,
                                       "inductive step violated")
                    witnesses.append(sub.witness)
                leaves.append(ArithLeaf(tuple(witnesses)))
            entries.append(HypEntry(conjuncts=tuple(leaves)))
    except (DeciderResourceError, FragmentViolation) as err:
        return Undecided(ob.rule, str(err))
    return CaseProof(ob.rule.label(), tuple(entries))


def verify_invariant(model: SfcModel, inv: P.Invariant, *, jobs: int = 1,
                     cap: int = 512, max_derived: int = 50_000,
                     split_limit: int = 4096,
                     init_actions: str = "from-steps") -> VerifyResult:
    """Induction proof attempt for one invariant."""
    base = check_base(model, inv.formula, init_actions)
    if base is not None:
        return base
    pending = inductive_obligations(model, inv.formula, cap=cap)

    def close(item):
        rule, ob = item
        if isinstance(ob, Undecided):
            return ob
        return discharge(model, ob, max_derived=max_derived,
                         split_limit=split_limit)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(close, pending))
    else:
        results = [close(item) for item in pending]

    cases = {}
    undecided = None
    for (rule, _), res in zip(pending, results):
        if isinstance(res, Refuted):
            return res
        if isinstance(res, Undecided):
            undecided = undecided or res
        else:
            cases[rule.label()] = res
    if undecided is not None:
        return undecided
    ordered = tuple(cases[rule.label()] for rule in O.rule_instances(model))
    return Proved(ProofTree(ordered), obligations=len(pending))


def gen_basic_lemmas(model: SfcModel, **opts):
    """Structural facts proved for every model and reusable as context.

    Active action blocks stay within the declared set, and active steps
    within the declared steps.  A failure here indicates a defect in the
    semantics encoding and is raised, not returned.
    """
    lemmas = [
        P.Invariant("actions_declared",
                    P.ActionsWithin(tuple(sorted(model.action_ids())))),
        P.Invariant("steps_declared",
                    P.StepsWithin(tuple(sorted(model.steps)))),
    ]
    out = []
    for inv in lemmas:
        res = verify_invariant(model, inv, **opts)
        if not isinstance(res, Proved):
            raise AssertionError(
                f"structural lemma {inv.name!r} failed: {res!r}")
        out.append((inv, res))
    return out


def _conjoin(formulas) -> P.Formula:
    acc = None
    for f in formulas:
        acc = f if acc is None else P.PAnd(acc, f)
    if acc is None:
        raise ValueError("empty conjunction")
    return acc


def check_guard_unreachable(model: SfcModel, target: str,
                            context: tuple[P.Formula, ...] = (),
                            **opts) -> VerifyResult:
    """Prove a non-initial step can never activate.

    Every transition into the target must have a guard that is
    unsatisfiable under the context invariants.  The context is conjoined
    into the certified property and re-proved with it, so the result is
    self-contained even though callers normally prove the context first.
    When some guard stays satisfiable the result is Undecided and names
    the transition.
    """
    if target in model.initial:
        raise ValueError(f"step {target!r} is initial")
    if target not in model.steps:
        raise ValueError(f"unknown step {target!r}")
    env = O.symbolic_env(model)
    sm = O.pre_state_map(model)
    ctx_dnf = TRUE_DNF
    for f in context:
        ctx_dnf = dnf_and(ctx_dnf, O.formula_dnf(f, sm, env, 512), 512)
    for i, t in enumerate(model.transitions):
        if target not in t.targets:
            continue
        guard = normalize(t.guard, env, max_cubes=512)
        for cube in dnf_and(ctx_dnf, guard, 4096):
            cube = attach_bounds(cube, env)
            if isinstance(decide_sat(cube), Sat):
                return Undecided(None,
                                 f"guard of transition {i} into {target!r} "
                                 f"is satisfiable under the context")
    prop = _conjoin(tuple(context) + (P.PNot(P.StepActive(target)),))
    inv = P.Invariant(f"unreachable_{target}", prop)
    return verify_invariant(model, inv, **opts)


@dataclass
class DeterminedResult:
    status: str  # proved | refuted | undecided
    offenders: tuple[tuple[int, dict], ...] = ()
    reason: str = ""


def check_determined_successor(model: SfcModel, trigger: P.Formula,
                               step: str,
                               context: tuple[P.Formula, ...] = ()
                               ) -> DeterminedResult:
    """Whenever the trigger holds, only transitions targeting exactly the
    given step can fire, and at least one of them is a candidate.

    The candidate reading ignores pending action blocks: a transition is a
    candidate when its sources are active and its guard holds.  Exclusivity
    under that weaker reading is sound for the full firing condition.
    Context invariants must be proved separately.
    """
    if step not in model.steps:
        raise ValueError(f"unknown step {step!r}")
    env = O.symbolic_env(model)
    sm = O.pre_state_map(model)
    cap = 4096
    hyp = O.formula_dnf(trigger, sm, env, cap)
    for f in context:
        hyp = dnf_and(hyp, O.formula_dnf(f, sm, env, cap), cap)

    offenders = []
    candidates = []
    try:
        for i, t in enumerate(model.transitions):
            enabled = P.ArithAtom(t.guard)
            for s in t.sources:
                enabled = P.PAnd(enabled, P.StepActive(s))
            if set(t.targets) == {step}:
                candidates.append(enabled)
                continue
            enabled_dnf = O.formula_dnf(enabled, sm, env, cap)
            for cube in dnf_and(hyp, enabled_dnf, cap):
                cube = attach_bounds(cube, env)
                res = decide_sat(cube)
                if isinstance(res, Sat):
                    offenders.append((i, res.assignment))
                    break
        if offenders:
            return DeterminedResult("refuted", tuple(offenders),
                                    "trigger enables a transition with a "
                                    "different target")
        if not candidates:
            return DeterminedResult(
                "undecided", (), f"no transition targets exactly {{{step}}}")
        want = candidates[0]
        for c in candidates[1:]:
            want = P.POr(want, c)
        neg = O.formula_dnf(P.negate(want), sm, env, cap)
        for cube in dnf_and(hyp, neg, cap):
            cube = attach_bounds(cube, env)
            if isinstance(decide_sat(cube), Sat):
                return DeterminedResult(
                    "undecided", (),
                    "trigger does not force any candidate transition")
    except (DeciderResourceError, FragmentViolation) as err:
        return DeterminedResult("undecided", (), str(err))
    return DeterminedResult("proved")

"""Dialectical property checks for strength maps on argument graphs.

Strength sets are compared by injective domination: ``A1 <= A2`` iff an
injective map m into A2 exists with ``s(a) <= s(m(a))`` for every a.
Sorting both sides ascending and greedily matching each element of A1 to
the smallest unused dominating element of A2 realizes the maximum
matching, so the greedy answer equals exhaustive enumeration.
"""

from __future__ import annotations

from dataclasses import dataclass

from .gaf import ArgumentGraph

DEFAULT_TOLERANCE = 1e-6

PROPERTIES = ("dialectical-monotonicity", "additive-monotonicity", "counter-factuality")


@dataclass(frozen=True)
class PropertyReport:
    property: str
    verdict: str  # pass | fail | not-applicable
    checked: int
    counterexamples: tuple
    notes: tuple = ()

    def __post_init__(self):
        if self.verdict == "fail" and not self.counterexamples:
            raise ValueError("a failing report needs at least one counterexample")
        if self.verdict == "pass" and self.counterexamples:
            raise ValueError("a passing report cannot carry counterexamples")

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_json(self) -> dict:
        return {
            "property": self.property,
            "verdict": self.verdict,
            "checked": self.checked,
            "counterexamples": [dict(c) for c in self.counterexamples],
            "notes": list(self.notes),
        }


def _values(args, sigma):
    if sigma is None:
        return sorted(float(a) for a in args)
    return sorted(float(sigma[a]) for a in args)


def _leq_sorted(lo, hi, tolerance: float) -> bool:
    if len(lo) > len(hi):
        return False
    j = 0
    for value in lo:
        while j < len(hi) and hi[j] < value - tolerance:
            j += 1
        if j == len(hi):
            return False
        j += 1
    return True


def strength_set_leq(args1, args2, sigma=None, tolerance: float = 0.0) -> bool:
    """Injective-domination order on strength sets.

    ``args1``/``args2`` are argument ids evaluated through ``sigma``, or
    raw numbers when ``sigma`` is None.
    """
    return _leq_sorted(_values(args1, sigma), _values(args2, sigma), tolerance)


def strength_set_eq(args1, args2, sigma=None, tolerance: float = 0.0) -> bool:
    return strength_set_leq(args1, args2, sigma, tolerance) and strength_set_leq(args2, args1, sigma, tolerance)


def strength_set_lt(args1, args2, sigma=None, tolerance: float = 0.0) -> bool:
    return strength_set_leq(args1, args2, sigma, tolerance) and not strength_set_leq(args2, args1, sigma, tolerance)


def _polarity_sets(gaf: ArgumentGraph, arg_id: str):
    """Attackers and (critical included) supporters of an argument."""
    return gaf.attackers(arg_id), gaf.supporters(arg_id, include_critical=True)


def check_dialectical_monotonicity(
    gaf: ArgumentGraph,
    sigma,
    tolerance: float = DEFAULT_TOLERANCE,
    restrict=None,
) -> PropertyReport:
    """Stronger attack sets must lower, stronger support sets raise, strength.

    All ordered pairs of distinct arguments are checked against the three
    clauses; critical support counts as support; a framework without
    attacks is treated as an attack-free bipolar framework.
    """
    ids = [a.id for a in gaf.arguments]
    pairs = restrict if restrict is not None else [(x, y) for x in ids for y in ids if x != y]
    sets = {}
    for i in ids:
        attackers, supporters = _polarity_sets(gaf, i)
        sets[i] = (_values(attackers, sigma), _values(supporters, sigma))
    counterexamples = []
    checked = 0
    for alpha, beta in pairs:
        checked += 1
        att_a, sup_a = sets[alpha]
        att_b, sup_b = sets[beta]
        att_ab = _leq_sorted(att_a, att_b, tolerance)
        att_ba = _leq_sorted(att_b, att_a, tolerance)
        sup_ab = _leq_sorted(sup_a, sup_b, tolerance)
        sup_ba = _leq_sorted(sup_b, sup_a, tolerance)
        att_lt, att_eq = att_ab and not att_ba, att_ab and att_ba
        sup_lt, sup_eq = sup_ab and not sup_ba, sup_ab and sup_ba
        s_a, s_b = sigma[alpha], sigma[beta]
        clause = None
        if att_lt and sup_eq and not s_a > s_b - tolerance:
            clause = "fewer attacks must mean greater strength"
        elif att_eq and sup_lt and not s_a < s_b + tolerance:
            clause = "fewer supports must mean lower strength"
        elif att_eq and sup_eq and not abs(s_a - s_b) <= tolerance:
            clause = "equal attack and support sets must mean equal strength"
        if clause:
            counterexamples.append(
                {"pair": [alpha, beta], "strengths": [s_a, s_b], "violated": clause}
            )
    counterexamples.sort(key=lambda c: c["pair"])
    return PropertyReport(
        property="dialectical-monotonicity",
        verdict="fail" if counterexamples else "pass",
        checked=checked,
        counterexamples=tuple(counterexamples),
    )


def check_additive_monotonicity(
    gaf: ArgumentGraph,
    sigma,
    tolerance: float = DEFAULT_TOLERANCE,
    restrict=None,
    notes=(),
) -> PropertyReport:
    """Each argument's strength equals supporter sum minus attacker sum.

    Arguments with no incoming relations are exempt: the unrestricted
    reading would force every leaf to strength zero. Critical supporters
    count as supporters.
    """
    ids = restrict if restrict is not None else [a.id for a in gaf.arguments]
    counterexamples = []
    checked = 0
    for arg_id in ids:
        attackers, supporters = _polarity_sets(gaf, arg_id)
        if not attackers and not supporters:
            continue
        checked += 1
        expected = sum(sigma[s] for s in supporters) - sum(sigma[s] for s in attackers)
        got = sigma[arg_id]
        if abs(got - expected) > tolerance:
            counterexamples.append(
                {"argument": arg_id, "strength": got, "signed_sum": expected}
            )
    counterexamples.sort(key=lambda c: c["argument"])
    return PropertyReport(
        property="additive-monotonicity",
        verdict="fail" if counterexamples else "pass",
        checked=checked,
        counterexamples=tuple(counterexamples),
        notes=tuple(notes) + ("leaf arguments exempt",),
    )


def check_counterfactuality(
    gaf: ArgumentGraph,
    sigma,
    tolerance: float = DEFAULT_TOLERANCE,
    restrict=None,
) -> PropertyReport:
    """Critical supporters are at least as strong as what they support.

    For every critical-support edge (alpha, beta): sigma(beta) > 0 and
    sigma(beta) - sigma(alpha) <= 0. Not applicable without critical
    support edges.
    """
    edges = restrict if restrict is not None else gaf.relations("critical-support")
    counterexamples = []
    for alpha, beta in edges:
        s_a, s_b = sigma[alpha], sigma[beta]
        if not s_b > 0:
            counterexamples.append(
                {"edge": [alpha, beta], "strengths": [s_a, s_b], "violated": "supported strength must be positive"}
            )
        elif s_b - s_a > tolerance:
            counterexamples.append(
                {"edge": [alpha, beta], "strengths": [s_a, s_b], "violated": "critical supporter must be at least as strong"}
            )
    if not edges:
        return PropertyReport(
            property="counter-factuality", verdict="not-applicable", checked=0, counterexamples=()
        )
    counterexamples.sort(key=lambda c: c["edge"])
    return PropertyReport(
        property="counter-factuality",
        verdict="fail" if counterexamples else "pass",
        checked=len(edges),
        counterexamples=tuple(counterexamples),
    )


def check_property(name: str, gaf: ArgumentGraph, sigma, tolerance: float = DEFAULT_TOLERANCE) -> PropertyReport:
    if name == "dialectical-monotonicity":
        return check_dialectical_monotonicity(gaf, sigma, tolerance)
    if name == "additive-monotonicity":
        return check_additive_monotonicity(gaf, sigma, tolerance)
    if name == "counter-factuality":
        return check_counterfactuality(gaf, sigma, tolerance)
    raise ValueError(f"unknown property {name!r}; choose from {PROPERTIES}")

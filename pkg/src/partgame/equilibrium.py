"""Ground-truth equilibrium checks by explicit deviation search."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .model import (
    Action,
    Composition,
    GameSpec,
    Variant,
    check_profile,
    expected_utility,
    profile_from_counts,
)

DEFAULT_GUARD_TWO_ACTION = 12
DEFAULT_GUARD_THREE_ACTION = 9


class GuardExceeded(RuntimeError):
    """The requested exhaustive search is larger than the configured guard."""


def default_guard(spec: GameSpec) -> int:
    if spec.variant.allows_retraction:
        return DEFAULT_GUARD_THREE_ACTION
    return DEFAULT_GUARD_TWO_ACTION


@dataclass
class EquilibriumCheck:
    """Outcome of a unilateral-deviation check.

    ``margins[i][b]`` is ``u_i(s) - u_i(b, s_-i)``; the profile is stable when
    no margin is negative beyond the numeric tolerance.  Truthiness is the
    verdict.
    """

    profile: tuple
    is_equilibrium: bool
    margins: dict
    violations: list = field(default_factory=list)  # (player, better action, margin)

    def __bool__(self) -> bool:
        return self.is_equilibrium


@dataclass
class EquilibriumRecord:
    profile: tuple
    composition: Composition
    margins: dict
    verified_by: str = "brute_force"  # brute_force | structure | both


def deviation_margins(spec: GameSpec, profile, i: int) -> dict:
    current = expected_utility(spec, profile, i)
    return {
        b: current - expected_utility(spec, profile, i, b)
        for b in spec.actions
        if b != profile[i]
    }


def is_equilibrium(spec: GameSpec, profile: Sequence[Action]) -> EquilibriumCheck:
    profile = tuple(Action(a) for a in profile)
    check_profile(spec, profile)
    margins, violations = {}, []
    for i in range(spec.n):
        margins[i] = deviation_margins(spec, profile, i)
        for b, m in margins[i].items():
            if spec.numeric.sign(m) < 0:
                violations.append((i, b, m))
    return EquilibriumCheck(profile, not violations, margins, violations)


def _candidate_profiles(spec: GameSpec, dedupe: bool):
    acts = spec.actions
    if dedupe and spec.symmetric:
        n = spec.n
        # One representative per (|C|, |F|, |A|), lexicographic in that triple.
        for c in range(n + 1):
            for f in range(n - c + 1) if spec.variant.allows_retraction else (0,):
                yield profile_from_counts(c, f, n - c - f)
        return
    yield from itertools.product(acts, repeat=spec.n)


def enumerate_equilibria(
    spec: GameSpec, guard: Optional[int] = None, dedupe: bool = False
) -> list:
    """All pure equilibria, by scanning every profile.

    With ``dedupe=True`` and a symmetric game only one representative per
    composition class is checked (equilibrium status is invariant under
    relabelling players).  Each candidate still goes through the full
    deviation check.
    """
    guard = default_guard(spec) if guard is None else guard
    if spec.n > guard:
        raise GuardExceeded(f"n={spec.n} exceeds the exhaustive-search guard {guard}")
    out = []
    for prof in _candidate_profiles(spec, dedupe):
        res = is_equilibrium(spec, prof)
        if res:
            out.append(EquilibriumRecord(res.profile, Composition.of(res.profile), res.margins))
    return out


def is_strong_equilibrium(spec: GameSpec, profile, max_coalition: Optional[int] = None, guard: int = 12) -> bool:
    """True when no coalition of size <= ``max_coalition`` has a joint deviation
    that makes every member strictly better off."""
    if spec.n > guard:
        raise GuardExceeded(f"n={spec.n} exceeds the coalition-search guard {guard}")
    profile = tuple(Action(a) for a in profile)
    check_profile(spec, profile)
    max_coalition = spec.n if max_coalition is None else max_coalition
    base = [expected_utility(spec, profile, i) for i in range(spec.n)]
    sign = spec.numeric.sign
    for size in range(1, max_coalition + 1):
        for coalition in itertools.combinations(range(spec.n), size):
            for joint in itertools.product(spec.actions, repeat=size):
                if all(profile[i] == b for i, b in zip(coalition, joint)):
                    continue
                dev = list(profile)
                for i, b in zip(coalition, joint):
                    dev[i] = b
                if all(sign(expected_utility(spec, dev, i) - base[i]) > 0 for i in coalition):
                    return False
    return True


@dataclass
class LatticeCheck:
    closed: bool
    counterexample: Optional[tuple] = None  # (profile_a, profile_b, "join" | "meet")

    def __bool__(self) -> bool:
        return self.closed


def check_lattice_closure(spec: GameSpec, guard: Optional[int] = None) -> LatticeCheck:
    """Check that equilibria are closed under componentwise join and meet
    (participate > abstain)."""
    if spec.variant is not Variant.BASIC or spec.v != 0:
        raise ValueError("lattice closure applies to the basic variant with v = 0")
    eqs = {rec.profile for rec in enumerate_equilibria(spec, guard)}
    for a, b in itertools.combinations(sorted(eqs), 2):
        join = tuple(max(x, y) for x, y in zip(a, b))
        meet = tuple(min(x, y) for x, y in zip(a, b))
        if join not in eqs:
            return LatticeCheck(False, (a, b, "join"))
        if meet not in eqs:
            return LatticeCheck(False, (a, b, "meet"))
    return LatticeCheck(True)

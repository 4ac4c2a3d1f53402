"""Minimum sustaining rewards and expenditure comparisons.

A reward ``r`` sustains a target profile when the profile is an equilibrium
at ``r``.  Every constraint involved is monotone in ``r``, so the sustaining
rewards form an interval ``[r_min, r_max]``; the lower end is attained
because all constraints are weak inequalities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from .model import GameSpec, Variant
from .numeric import Number
from .prob import f_or_zero, poisson_binomial_tail
from .structure import f_sum, lambda_lower_bound


class InfeasibleTarget(ValueError):
    """No reward makes the requested profile an equilibrium."""

    def __init__(self, message: str, constraint: str):
        super().__init__(message)
        self.constraint = constraint


@dataclass
class CalibrationReport:
    variant: Variant
    target: Union[str, int]           # "all-in" or the contributor count of a mixed profile
    r_min: Number
    binding_constraint: str
    expenditure: Number
    candidates: dict = field(default_factory=dict)  # constraint name -> lower bound on r
    r_max: Optional[Number] = None                  # None: unbounded above
    attained: bool = True


def _infinite_if_zero(num: Number, den: Number, what: str) -> Number:
    if den == 0:
        if num <= 0:
            return num * 0
        raise InfeasibleTarget(f"{what}: no finite reward satisfies the constraint", what)
    return num / den


def _pick(candidates: dict) -> tuple:
    name = max(candidates, key=lambda key: candidates[key])
    return candidates[name], name


def _expenditure(spec: GameSpec, r: Number) -> Number:
    """Expected payout per epoch: everyone under universal payments, the
    eligible share otherwise."""
    if spec.variant.universal:
        return spec.n * r
    return sum(spec.probs) * r


def r_min_all_in(spec: GameSpec) -> CalibrationReport:
    """Smallest reward for which everybody participating is an equilibrium.

    ``spec.r`` is ignored.  The basic variant supports ``v > 0`` and
    per-player selection probabilities (``v = 0`` only); the other
    variants require ``v = 0`` and a scalar ``q``.
    """
    n, k, alpha, beta, v = spec.n, spec.k, spec.alpha, spec.beta, spec.v
    variant = spec.variant
    cands = {}
    if variant is Variant.BASIC and not spec.symmetric:
        if v != 0:
            raise ValueError("heterogeneous selection is supported for v = 0 only")
        for i, qi in enumerate(spec.probs):
            others = spec.probs[:i] + spec.probs[i + 1:]
            cands[f"contributor_{i}_vs_abstain"] = _infinite_if_zero(
                alpha, qi * poisson_binomial_tail(others, k - 1), "contributor_vs_abstain"
            )
    elif variant is Variant.BASIC:
        q = spec.q
        num = alpha / q - v * f_or_zero(n, k, q)
        cands["contributor_vs_abstain"] = max(
            num * 0, _infinite_if_zero(num, f_sum(n, k - 1, n - 1, q), "contributor_vs_abstain")
        )
    else:
        if v != 0:
            raise ValueError(f"calibration of the {variant.value} variant is for v = 0")
        if not spec.symmetric:
            raise ValueError("needs a scalar q")
        q = spec.q
        if variant is Variant.UNIVERSAL_BASIC:
            cands["contributor_vs_abstain"] = _infinite_if_zero(alpha, f_sum(n + 1, k, n, q), "contributor_vs_abstain")
        else:
            cands["contributor_vs_free_ride"] = _infinite_if_zero(beta, f_or_zero(n, k, q), "contributor_vs_free_ride")
            if variant is Variant.RETRACTION:
                gain = q * f_sum(n, k - 1, n - 1, q)
            else:
                gain = f_sum(n + 1, k, n, q)
            cands["contributor_vs_abstain"] = _infinite_if_zero(alpha + q * beta, gain, "contributor_vs_abstain")
    r_min, name = _pick(cands)
    return CalibrationReport(variant, "all-in", r_min, name, _expenditure(spec, r_min), cands)


def r_min_mixed(spec: GameSpec, lam: int) -> CalibrationReport:
    """Smallest reward sustaining ``lam`` contributors and ``n - lam`` free riders.

    The candidates are the three lower bounds from the completion,
    contributor-abstain and free-rider-abstain constraints (``r1``, ``r2``,
    ``r3``).  The contributor-abstain bound contains ``beta/r`` itself;
    rearranged it is linear in ``r`` and solved in closed form.  The
    free-rider-contribute constraint bounds ``r`` from above by
    ``beta / f(lam+1, k, q)``; a target whose lower bound exceeds it raises
    :class:`InfeasibleTarget`.
    """
    variant = spec.variant
    if not variant.allows_retraction:
        raise ValueError("mixed contributor/free-rider targets need a variant with retraction")
    if spec.v != 0 or not spec.symmetric:
        raise ValueError("mixed calibration is for v = 0 and a scalar q")
    n, k, q, alpha, beta = spec.n, spec.k, spec.q, spec.alpha, spec.beta
    if not lambda_lower_bound(spec) <= lam <= n - 1:
        raise InfeasibleTarget(
            f"lam={lam} outside [{lambda_lower_bound(spec)}, {n - 1}] for every reward", "lambda_range"
        )
    f_lam, f_next = f_or_zero(lam, k, q), f_or_zero(lam + 1, k, q)
    if variant is Variant.RETRACTION:
        stay = q * f_sum(lam, k - 1, lam - 1, q)
        ride = q * f_sum(lam + 1, k, lam, q)
    else:
        stay = q * f_lam + f_sum(lam, k, lam - 1, q)
        ride = f_sum(lam + 1, k, lam, q)
    cands = {
        "r1": _infinite_if_zero(beta, f_lam, "r1"),
        "r2": _infinite_if_zero(alpha + q * beta, stay, "r2"),
        "r3": _infinite_if_zero(alpha, ride, "r3"),
    }
    r_min, name = _pick(cands)
    r_max = None if f_next == 0 else beta / f_next
    if r_max is not None and spec.numeric.gt(r_min, r_max):
        raise InfeasibleTarget(
            f"lam={lam}: r_min={r_min} exceeds beta/f(lam+1,k,q)={r_max}; "
            "free riders would rather contribute",
            "free_rider_vs_contribute",
        )
    return CalibrationReport(variant, lam, r_min, name, _expenditure(spec, r_min), cands, r_max)


@dataclass
class ExpenditureComparison:
    target: Union[str, int]
    r_min: Number
    r_min_universal: Number
    tracked_total: Number     # T  = q n r_min
    universal_total: Number   # T' = n r'_min
    universal_higher: bool    # T' >= T
    strictly_higher: bool     # T' > T


_MATCHED_FIELDS = ("n", "k", "q", "alpha", "beta", "v", "numeric")


def expenditure_compare(tracked: GameSpec, universal: GameSpec, target: Union[str, int] = "all-in") -> ExpenditureComparison:
    """Compare expected total payouts at the respective minimum rewards."""
    if tracked.variant.universal or universal.variant is not tracked.variant.universal_counterpart:
        raise ValueError(
            f"expected a tracked spec and its universal counterpart, got "
            f"{tracked.variant.value} / {universal.variant.value}"
        )
    for name in _MATCHED_FIELDS:
        if getattr(tracked, name) != getattr(universal, name):
            raise ValueError(f"mismatched base parameter {name!r}")
    if target == "all-in":
        a, b = r_min_all_in(tracked), r_min_all_in(universal)
    else:
        a, b = r_min_mixed(tracked, int(target)), r_min_mixed(universal, int(target))
    m = tracked.numeric
    return ExpenditureComparison(
        target, a.r_min, b.r_min, a.expenditure, b.expenditure,
        m.geq(b.expenditure, a.expenditure), m.gt(b.expenditure, a.expenditure),
    )

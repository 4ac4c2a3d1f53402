"""Fast equilibrium finders built on the closed-form characterizations.

Symmetric games are scanned over the number of contributors ``lam``; the
asymmetric basic game is scanned over its distinct selection-probability
levels.  Every finder works from binomial sums of :func:`f_term`, not from
the per-player utilities in :mod:`partgame.model`, so comparing the two is
a meaningful cross-check.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .model import Composition, GameSpec, Variant, profile_from_counts
from .numeric import Number
from .prob import binom_coeff, f_or_zero, poisson_binomial_tail


def f_sum(lam: int, lo: int, hi: int, q) -> Number:
    """``sum_{j=lo}^{hi} f(lam, j+1, q)``: P(between lo and hi of lam-1 users selected)."""
    total = q * 0
    for j in range(max(lo, 0), hi + 1):
        total += f_or_zero(lam, j + 1, q)
    return total


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise ValueError(msg)


def _symmetric_class(spec: GameSpec, c: int, f: int = 0) -> Composition:
    return Composition.of(profile_from_counts(c, f, spec.n - c - f))


def _ratio(x: Number, r: Number) -> Optional[Number]:
    return x / r if r != 0 else None


def genericity_issues(spec: GameSpec) -> list:
    """Parameter coincidences under which the characterizations lose strictness.

    The structural theorems assume positive cost and reward, selection
    probabilities below one, and (for ``k = 1``) no exact indifference
    between contributing and abstaining.  On these measure-zero sets
    brute-force enumeration can find additional, indifference-supported
    equilibria.
    """
    out = []
    if spec.alpha <= 0:
        out.append("alpha = 0")
    if spec.r <= 0:
        out.append("r = 0")
    if any(p >= 1 for p in spec.probs):
        out.append("some selection probability equals 1")
    if spec.k == 1:
        eq = spec.numeric.eq
        if spec.variant is Variant.BASIC and any(eq(p * spec.r, spec.alpha) for p in spec.probs):
            out.append("k = 1 with q*r = alpha")
        if spec.variant is Variant.RETRACTION and eq(spec.q * spec.r, spec.alpha + spec.q * spec.beta):
            out.append("k = 1 with q*r = alpha + q*beta")
    return out


# ---------------------------------------------------------------------------
# Basic variant, symmetric selection


def _basic_contributor_side(spec: GameSpec, lam: int) -> Number:
    """``q (r * Sigma_1 + v * f(lam, k))`` for a contributor among ``lam``."""
    q, k = spec.q, spec.k
    return q * (spec.r * f_sum(lam, k - 1, lam - 1, q) + spec.v * f_or_zero(lam, k, q))


def _basic_abstainer_side(spec: GameSpec, lam: int) -> Number:
    """Same quantity for an abstainer facing ``lam`` contributors."""
    return _basic_contributor_side(spec, lam + 1)


def _basic_lambda_ok(spec: GameSpec, lam: int) -> bool:
    m = spec.numeric
    if lam >= 1 and not m.geq(_basic_contributor_side(spec, lam), spec.alpha):
        return False
    if lam <= spec.n - 1 and not m.leq(_basic_abstainer_side(spec, lam), spec.alpha):
        return False
    return True


def _no_intermediate_gap(spec: GameSpec, lam: int) -> Number:
    """Increase of the abstainer-side sum over the contributor-side sum at ``lam``."""
    q, k = spec.q, spec.k
    return binom_coeff(lam - 1, k - 2) * q ** (k - 1) * (1 - q) ** (lam - k + 1)


def symmetric_basic_equilibria(spec: GameSpec) -> list:
    """Equilibrium composition classes of a symmetric basic game.

    With ``v = 0`` the all-out and all-in conditions are closed form and an
    interior ``lam`` is skipped whenever the tail-increment gap is positive
    (contributor and abstainer constraints then contradict each other).
    With ``v > 0`` every ``lam`` is tested against both constraints.
    """
    _require(spec.variant is Variant.BASIC, "symmetric_basic_equilibria needs the basic variant")
    _require(spec.symmetric, "asymmetric selection: use asymmetric_threshold_scan")
    m, n = spec.numeric, spec.n
    if spec.v == 0:
        lams = []
        if spec.k > 1 or m.leq(spec.q * spec.r, spec.alpha):
            lams.append(0)
        for lam in range(1, n):
            if spec.r > 0 and m.sign(_no_intermediate_gap(spec, lam)) > 0:
                continue
            if _basic_lambda_ok(spec, lam):
                lams.append(lam)
        if m.geq(_basic_contributor_side(spec, n), spec.alpha):
            lams.append(n)
    else:
        lams = [lam for lam in range(n + 1) if _basic_lambda_ok(spec, lam)]
    return [_symmetric_class(spec, lam) for lam in lams]


def min_contributors_bound(spec: GameSpec) -> Number:
    """Lower bound ``(2 - q)(k - 1)/q`` on contributors at an interior equilibrium (v <= r)."""
    _require(spec.variant is Variant.BASIC and spec.symmetric, "bound is for the symmetric basic game")
    _require(spec.v <= spec.r, "bound is only established for v <= r")
    q = spec.q
    return (2 - q) * (spec.k - 1) / q


# ---------------------------------------------------------------------------
# Basic variant, per-player selection probabilities


@dataclass
class ThresholdEquilibrium:
    q_threshold: Number
    contributors: frozenset
    contributor_lhs: Number            # q_a * P(>= k-1 of the other contributors)
    abstainer_lhs: Optional[Number]    # q_{a+1} * P(>= k-1 of the contributors); None for all-in
    alpha_over_r: Optional[Number]

    @property
    def contributor_count(self) -> int:
        return len(self.contributors)


@dataclass
class ThresholdScan:
    equilibria: list
    all_out: bool


def _levels(spec: GameSpec) -> list:
    """Distinct selection probabilities, descending; float mode merges within epsilon."""
    levels = []
    for p in sorted(set(spec.probs), reverse=True):
        if levels and spec.numeric.eq(levels[-1], p):
            continue
        levels.append(p)
    return levels


def asymmetric_threshold_scan(spec: GameSpec) -> ThresholdScan:
    """Non-trivial equilibria of a basic ``v = 0`` game with heterogeneous ``q_i``.

    For each level ``q_a`` the candidate is "everyone with ``q_i >= q_a``
    contributes"; it is an equilibrium iff the weakest contributor level
    ``q_a`` and the strongest abstainer level ``q_{a+1}`` both satisfy
    their constraint.
    """
    _require(spec.variant is Variant.BASIC, "threshold scan needs the basic variant")
    _require(spec.v == 0, "threshold scan needs v = 0")
    m, probs, k = spec.numeric, spec.probs, spec.k
    levels = _levels(spec)
    found = []
    for a, qa in enumerate(levels):
        members = frozenset(i for i, p in enumerate(probs) if m.geq(p, qa))
        weakest = next(i for i in members if m.eq(probs[i], qa))
        others = [probs[j] for j in members if j != weakest]
        c_lhs = qa * poisson_binomial_tail(others, k - 1)
        if not m.geq(spec.r * c_lhs, spec.alpha):
            continue
        a_lhs = None
        if a + 1 < len(levels):
            a_lhs = levels[a + 1] * poisson_binomial_tail([probs[j] for j in members], k - 1)
            if not m.leq(spec.r * a_lhs, spec.alpha):
                continue
        found.append(ThresholdEquilibrium(qa, members, c_lhs, a_lhs, _ratio(spec.alpha, spec.r)))
    all_out = k > 1 or m.leq(max(probs) * spec.r, spec.alpha)
    return ThresholdScan(found, all_out)


# ---------------------------------------------------------------------------
# Games with retraction


@dataclass
class Interval:
    lo: Number
    hi: Number
    empty: bool = False

    def contains(self, x: Number, mode=None) -> bool:
        if self.empty:
            return False
        if mode is None:
            return self.lo <= x <= self.hi
        return mode.geq(x, self.lo) and mode.leq(x, self.hi)


@dataclass
class LambdaWindow:
    """``lam`` values that satisfy the two task-completion constraints."""

    lambda_values: tuple
    beta_ratio_intervals: dict   # lam -> Interval [f(lam+1,k,q), f(lam,k,q)]
    alpha_ratio_upper: dict      # lam -> bound on alpha/r (None when r = 0)


@dataclass
class LambdaScan:
    window: LambdaWindow
    mixed: tuple                 # lam values for which (lam contributors, n-lam free riders) is an equilibrium
    all_in: bool
    all_out: bool
    evidence: dict = field(default_factory=dict)  # lam -> {constraint: (lhs, rhs, holds)}

    def classes(self, spec: GameSpec) -> list:
        out = []
        if self.all_out:
            out.append(_symmetric_class(spec, 0))
        out.extend(_symmetric_class(spec, lam, spec.n - lam) for lam in self.mixed)
        if self.all_in:
            out.append(_symmetric_class(spec, spec.n))
        return out


def lambda_lower_bound(spec: GameSpec) -> int:
    """Smallest admissible contributor count ``max(1, ceil((k-1)/q))``."""
    return max(1, spec.numeric.ceil((spec.k - 1) / spec.q))


def beta_ratio_feasible_range(spec: GameSpec) -> Interval:
    """Range of ``beta/r`` for which some ``lam`` meets both completion constraints."""
    _require(spec.variant.allows_retraction, "beta range applies to variants with retraction")
    _require(spec.symmetric, "beta range needs a scalar q")
    q, k, n = spec.q, spec.k, spec.n
    low_lam = spec.numeric.ceil((k - 1) / q)
    if low_lam > n - 1 or n < 2:
        return Interval(q * 0, q * 0, empty=True)
    return Interval(f_or_zero(n - 1, k, q), f_or_zero(max(low_lam, 1), k, q))


def _retraction_scan(spec: GameSpec, universal: bool) -> LambdaScan:
    _require(spec.symmetric, "lambda scan needs a scalar q")
    _require(spec.v == 0, "lambda scan needs v = 0")
    m = spec.numeric
    q, k, n, r = spec.q, spec.k, spec.n, spec.r
    alpha, beta = spec.alpha, spec.beta
    window, intervals, upper, mixed, evidence = [], {}, {}, [], {}
    for lam in range(lambda_lower_bound(spec), n):
        f_lam, f_next = f_or_zero(lam, k, q), f_or_zero(lam + 1, k, q)
        if not (m.geq(f_lam * r, beta) and m.leq(f_next * r, beta)):
            continue
        window.append(lam)
        intervals[lam] = Interval(f_next, f_lam)
        if universal:
            stay_gain = q * f_lam + f_sum(lam, k, lam - 1, q)
            rider_gain = f_sum(lam + 1, k, lam, q)
        else:
            stay_gain = q * f_sum(lam, k - 1, lam - 1, q)
            rider_gain = q * f_sum(lam + 1, k, lam, q)
        upper[lam] = None if r == 0 else min(stay_gain - q * beta / r, rider_gain)
        checks = {
            "contributor_vs_free_ride": (f_lam * r, beta, True),
            "free_rider_vs_contribute": (f_next * r, beta, True),
            "contributor_vs_abstain": (r * stay_gain, alpha + q * beta, m.geq(r * stay_gain, alpha + q * beta)),
            "free_rider_vs_abstain": (r * rider_gain, alpha, m.geq(r * rider_gain, alpha)),
        }
        evidence[lam] = checks
        if all(ok for _, _, ok in checks.values()):
            mixed.append(lam)
    f_n = f_or_zero(n, k, q)
    if universal:
        all_in_gain = f_sum(n + 1, k, n, q)
    else:
        all_in_gain = q * f_sum(n, k - 1, n - 1, q)
    all_in = m.geq(f_n * r, beta) and m.geq(r * all_in_gain, alpha + q * beta)
    # Alone, a k = 1 contributor makes progress herself.
    all_out = k > 1 or m.leq(q * r, alpha + q * beta)
    return LambdaScan(LambdaWindow(tuple(window), intervals, upper), tuple(mixed), all_in, all_out, evidence)


def retraction_lambda_scan(spec: GameSpec) -> LambdaScan:
    """Contributor / free-rider equilibria of the retraction game (v = 0)."""
    _require(spec.variant is Variant.RETRACTION, "retraction_lambda_scan needs the retraction variant")
    return _retraction_scan(spec, universal=False)


def universal_retraction_scan(spec: GameSpec) -> LambdaScan:
    """Same scan under universal payments; the alpha bound is looser."""
    _require(spec.variant is Variant.UNIVERSAL_RETRACTION, "needs the universal_retraction variant")
    return _retraction_scan(spec, universal=True)


# ---------------------------------------------------------------------------
# Universal payments without retraction


def universal_basic_characterize(spec: GameSpec) -> list:
    """All-out and/or all-in; no interior equilibria exist (v = 0)."""
    _require(spec.variant is Variant.UNIVERSAL_BASIC, "needs the universal_basic variant")
    _require(spec.symmetric, "needs a scalar q")
    _require(spec.v == 0, "characterization is for v = 0")
    m, q, k, n = spec.numeric, spec.q, spec.k, spec.n
    out = []
    if k > 1 or m.leq(q * spec.r, spec.alpha):
        out.append(_symmetric_class(spec, 0))
    if m.geq(spec.r * f_sum(n + 1, k, n, q), spec.alpha):
        out.append(_symmetric_class(spec, n))
    return out


# ---------------------------------------------------------------------------


def find_equilibrium_classes(spec: GameSpec) -> list:
    """Dispatch to the structural finder for ``spec``; returns compositions."""
    variant = spec.variant
    if variant is Variant.BASIC:
        if spec.symmetric:
            return symmetric_basic_equilibria(spec)
        scan = asymmetric_threshold_scan(spec)
        out = [Composition.of((0,) * spec.n)] if scan.all_out else []
        for eq in sorted(scan.equilibria, key=lambda e: e.contributor_count):
            prof = tuple(1 if i in eq.contributors else 0 for i in range(spec.n))
            out.append(Composition.of(prof))
        return out
    if variant is Variant.RETRACTION:
        return retraction_lambda_scan(spec).classes(spec)
    if variant is Variant.UNIVERSAL_RETRACTION:
        return universal_retraction_scan(spec).classes(spec)
    return universal_basic_characterize(spec)


def class_key(spec: GameSpec, comp: Composition):
    """Counts for symmetric games, explicit sets otherwise."""
    if spec.symmetric:
        return comp.counts
    return (comp.contributors, comp.free_riders)

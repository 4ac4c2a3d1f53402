"""Participation games: parameters, profiles and expected utilities.

Four variants share one parameter set:

* ``BASIC``: eligible contributors are paid ``r`` when progress is made.
* ``RETRACTION``: every eligible participant is paid, including those that
  skip the task (retractors); completing the task costs ``beta``.
* ``UNIVERSAL_BASIC``: every participant is paid on progress, eligible or not.
* ``UNIVERSAL_RETRACTION``: universal payments plus the retract option.

Progress in an epoch means at least ``k`` eligible contributors.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .numeric import EXACT, Number, NumericMode, to_exact
from .prob import binomial_tail, poisson_binomial_tail


class InvalidGameError(ValueError):
    """Raised when game parameters violate the model's invariants."""

    def __init__(self, violations: Sequence[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class Variant(enum.Enum):
    BASIC = "basic"
    RETRACTION = "retraction"
    UNIVERSAL_BASIC = "universal_basic"
    UNIVERSAL_RETRACTION = "universal_retraction"

    @property
    def allows_retraction(self) -> bool:
        return self in (Variant.RETRACTION, Variant.UNIVERSAL_RETRACTION)

    @property
    def universal(self) -> bool:
        return self in (Variant.UNIVERSAL_BASIC, Variant.UNIVERSAL_RETRACTION)

    @property
    def actions(self) -> tuple:
        if self.allows_retraction:
            return (Action.ABSTAIN, Action.CONTRIBUTE, Action.RETRACT)
        return (Action.ABSTAIN, Action.CONTRIBUTE)

    @property
    def tracked(self) -> Variant:
        """The eligibility-gated counterpart of a universal variant."""
        return {
            Variant.UNIVERSAL_BASIC: Variant.BASIC,
            Variant.UNIVERSAL_RETRACTION: Variant.RETRACTION,
        }.get(self, self)

    @property
    def universal_counterpart(self) -> Variant:
        return {
            Variant.BASIC: Variant.UNIVERSAL_BASIC,
            Variant.RETRACTION: Variant.UNIVERSAL_RETRACTION,
        }.get(self, self)


class Action(enum.IntEnum):
    # Ordered so that ABSTAIN < CONTRIBUTE matches the lattice order used
    # for the complementarity checks.
    ABSTAIN = 0
    CONTRIBUTE = 1
    RETRACT = 2

    @property
    def symbol(self) -> str:
        return {0: "A", 1: "C", 2: "F"}[int(self)]

    @classmethod
    def from_symbol(cls, ch: str) -> Action:
        try:
            return {"A": cls.ABSTAIN, "C": cls.CONTRIBUTE, "F": cls.RETRACT, "R": cls.RETRACT}[ch.upper()]
        except KeyError:
            raise ValueError(f"unknown action symbol {ch!r}") from None


Profile = tuple  # tuple[Action, ...], one entry per player


@dataclass(frozen=True)
class Composition:
    """Partition of the players into contributors, free riders and abstainers."""

    contributors: frozenset
    free_riders: frozenset
    abstainers: frozenset

    @classmethod
    def of(cls, profile: Sequence[Action]) -> Composition:
        c, f, a = set(), set(), set()
        for i, act in enumerate(profile):
            {Action.CONTRIBUTE: c, Action.RETRACT: f, Action.ABSTAIN: a}[Action(act)].add(i)
        return cls(frozenset(c), frozenset(f), frozenset(a))

    @property
    def lam(self) -> int:
        return len(self.contributors)

    @property
    def counts(self) -> tuple:
        return (len(self.contributors), len(self.free_riders), len(self.abstainers))

    @property
    def n(self) -> int:
        return sum(self.counts)

    def profile(self) -> Profile:
        out = [Action.ABSTAIN] * self.n
        for i in self.contributors:
            out[i] = Action.CONTRIBUTE
        for i in self.free_riders:
            out[i] = Action.RETRACT
        return tuple(out)

    def label(self) -> str:
        c, f, a = self.counts
        if c == f == 0:
            return "all-out"
        if c == self.n:
            return "all-in"
        if a == 0:
            return f"mixed(C={c},F={f})"
        return f"C={c},F={f},A={a}"


def make_profile(n: int, contributors: Iterable[int] = (), free_riders: Iterable[int] = ()) -> Profile:
    out = [Action.ABSTAIN] * n
    for i in contributors:
        out[i] = Action.CONTRIBUTE
    for i in free_riders:
        if out[i] is Action.CONTRIBUTE:
            raise ValueError(f"player {i} cannot both contribute and free ride")
        out[i] = Action.RETRACT
    return tuple(out)


def profile_from_counts(contributors: int, free_riders: int = 0, abstainers: int = 0) -> Profile:
    """Canonical representative of a symmetric composition class."""
    return (
        (Action.CONTRIBUTE,) * contributors
        + (Action.RETRACT,) * free_riders
        + (Action.ABSTAIN,) * abstainers
    )


def parse_profile(text: str) -> Profile:
    """``"CCFA"`` -> (CONTRIBUTE, CONTRIBUTE, RETRACT, ABSTAIN)."""
    return tuple(Action.from_symbol(ch) for ch in text.strip())


def profile_str(profile: Sequence[Action]) -> str:
    return "".join(Action(a).symbol for a in profile)


Selection = Union[Fraction, float, tuple]


@dataclass(frozen=True)
class GameSpec:
    """All parameters of one participation game.

    ``q`` is either one selection probability shared by everyone or a tuple
    with one entry per player.  Numeric fields accept anything
    :func:`~partgame.numeric.to_exact` understands and are stored as
    Fractions (exact mode) or floats (float mode).
    """

    n: int
    k: int
    q: Selection
    alpha: Number = Fraction(0)
    beta: Number = Fraction(0)
    r: Number = Fraction(0)
    v: Number = Fraction(0)
    variant: Variant = Variant.BASIC
    numeric: NumericMode = field(default=EXACT)

    def __post_init__(self):
        set_ = object.__setattr__
        problems = []
        if not isinstance(self.variant, Variant):
            try:
                set_(self, "variant", Variant(self.variant))
            except ValueError:
                raise InvalidGameError([f"unknown variant {self.variant!r}"]) from None
        conv = self.numeric.convert
        try:
            if isinstance(self.q, (list, tuple)):
                set_(self, "q", tuple(conv(x) for x in self.q))
            else:
                set_(self, "q", conv(self.q))
            for name in ("alpha", "beta", "r", "v"):
                set_(self, name, conv(getattr(self, name)))
        except (TypeError, ValueError) as exc:
            raise InvalidGameError([str(exc)]) from None
        problems.extend(_violations(self))
        if problems:
            raise InvalidGameError(problems)

    @property
    def symmetric(self) -> bool:
        return not isinstance(self.q, tuple)

    @property
    def probs(self) -> tuple:
        if self.symmetric:
            return (self.q,) * self.n
        return self.q

    def prob(self, i: int) -> Number:
        return self.q if self.symmetric else self.q[i]

    @property
    def actions(self) -> tuple:
        return self.variant.actions

    def with_(self, **changes) -> GameSpec:
        return replace(self, **changes)

    def as_exact(self) -> GameSpec:
        return replace(self, numeric=EXACT)

    def param_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _violations(spec: GameSpec) -> list:
    out = []
    if not isinstance(spec.n, int) or spec.n < 1:
        out.append(f"population n must be a positive integer, got {spec.n!r}")
        return out
    if not isinstance(spec.k, int) or spec.k < 1:
        out.append(f"threshold k must be a positive integer, got {spec.k!r}")
    elif spec.k > spec.n:
        out.append(f"threshold exceeds population (k={spec.k} > n={spec.n})")
    if isinstance(spec.q, tuple):
        if len(spec.q) != spec.n:
            out.append(f"selection vector has {len(spec.q)} entries for n={spec.n} players")
        if spec.variant is not Variant.BASIC:
            out.append("per-player selection probabilities are only supported for the basic variant")
        qs = spec.q
    else:
        qs = (spec.q,)
    for x in qs:
        if not 0 < x <= 1:
            out.append(f"selection probability {x} outside (0, 1]")
    for name in ("alpha", "beta", "r", "v"):
        if getattr(spec, name) < 0:
            out.append(f"{name} must be nonnegative")
    if not spec.variant.allows_retraction and spec.beta != 0:
        out.append(f"beta must be 0 for the {spec.variant.value} variant (no task cost without retraction)")
    return out


def validate_game(spec) -> GameSpec:
    """Return a validated :class:`GameSpec`; mappings are converted first.

    Raises :class:`InvalidGameError` listing every violated invariant.
    """
    if isinstance(spec, Mapping):
        known = {f.name for f in fields(GameSpec)}
        unknown = sorted(set(spec) - known)
        if unknown:
            raise InvalidGameError([f"unknown field {u!r}" for u in unknown])
        return GameSpec(**spec)
    problems = _violations(spec)
    if problems:
        raise InvalidGameError(problems)
    return spec


def check_profile(spec: GameSpec, profile: Sequence[Action]) -> None:
    if len(profile) != spec.n:
        raise ValueError(f"profile has {len(profile)} entries for n={spec.n}")
    if not spec.variant.allows_retraction and any(a == Action.RETRACT for a in profile):
        raise ValueError(f"retract is not an action in the {spec.variant.value} variant")


def _tail_over_contributors(spec: GameSpec, profile, i: int, t: int) -> Number:
    others = [j for j, a in enumerate(profile) if a == Action.CONTRIBUTE and j != i]
    if spec.symmetric:
        return binomial_tail(len(others), t, spec.q)
    return poisson_binomial_tail([spec.q[j] for j in others], t)


def progress_prob_excluding(spec: GameSpec, profile, i: int) -> Number:
    """Probability of progress from the other players alone.

    At least ``k`` eligible contributors among ``C \\ {i}``; free riders and
    abstainers never count.
    """
    return _tail_over_contributors(spec, profile, i, spec.k)


def progress_prob_given_i(spec: GameSpec, profile, i: int) -> Number:
    """Probability of progress given that ``i`` is eligible and contributes."""
    return _tail_over_contributors(spec, profile, i, spec.k - 1)


def expected_utility(spec: GameSpec, profile, i: int, action: Action | None = None) -> Number:
    """Expected one-epoch utility of player ``i``.

    ``action`` overrides ``profile[i]`` (used for unilateral deviations).
    """
    act = Action(profile[i] if action is None else action)
    if act == Action.RETRACT and not spec.variant.allows_retraction:
        raise ValueError(f"retract is not an action in the {spec.variant.value} variant")
    p_out = progress_prob_excluding(spec, profile, i)
    if act == Action.ABSTAIN:
        return p_out * spec.v
    q = spec.prob(i)
    rv = spec.r + spec.v
    variant = spec.variant
    if act == Action.RETRACT:
        if variant is Variant.RETRACTION:
            return (1 - q) * p_out * spec.v + q * p_out * rv - spec.alpha
        return p_out * rv - spec.alpha
    p_in = progress_prob_given_i(spec, profile, i)
    if variant is Variant.BASIC:
        return (1 - q) * p_out * spec.v + q * p_in * rv - spec.alpha
    if variant is Variant.RETRACTION:
        return (1 - q) * p_out * spec.v + q * (p_in * rv - spec.beta) - spec.alpha
    if variant is Variant.UNIVERSAL_BASIC:
        return (q * p_in + (1 - q) * p_out) * rv - spec.alpha
    return (1 - q) * p_out * rv + q * (p_in * rv - spec.beta) - spec.alpha

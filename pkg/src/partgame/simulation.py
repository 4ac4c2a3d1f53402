"""Monte Carlo epochs and best-response dynamics.

Random streams
--------------
All draws come from numpy's PCG64 seeded with the user seed.  Trial ``t``
of an ``n``-player game consumes uniforms ``t*n .. t*n + n - 1`` of that
stream (one per player, in player order).  A worker simulating trials
``[t0, t1)`` builds ``PCG64(seed)``, calls ``advance(t0 * n)`` and draws
its block, so any chunking of the trial range reproduces the serial run
bit for bit.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .equilibrium import is_equilibrium
from .model import Action, GameSpec, Variant, check_profile, expected_utility

CHUNK_TRIALS = 1 << 16


@dataclass
class SimulationReport:
    trials: int
    seed: int
    empirical_progress_rate: float
    progress_standard_error: float
    per_player_mean_utility: list
    standard_errors: list


def _uniform_block(seed: int, start: int, count: int, n: int) -> np.ndarray:
    bitgen = np.random.PCG64(seed)
    bitgen.advance(start * n)
    return np.random.Generator(bitgen).random((count, n))


def _payoffs(spec: GameSpec, acts: np.ndarray, eligible: np.ndarray, progress: np.ndarray) -> np.ndarray:
    """Per-trial realized payoffs, straight from the event tables."""
    alpha, beta = float(spec.alpha), float(spec.beta)
    r, v = float(spec.r), float(spec.v)
    prog = progress[:, None].astype(float)
    elig = eligible.astype(float)
    contrib = acts == Action.CONTRIBUTE
    retract = acts == Action.RETRACT
    participate = contrib | retract
    out = np.broadcast_to(v * prog, eligible.shape).copy()  # everyone enjoys v on progress
    out -= alpha * participate
    if spec.variant.allows_retraction:
        out -= beta * (elig * contrib)
    if spec.variant.universal:
        paid = participate[None, :] * prog
    elif spec.variant is Variant.RETRACTION:
        paid = elig * participate * prog
    else:
        paid = elig * contrib * prog
    return out + r * paid


def simulate_epochs(spec: GameSpec, profile: Sequence[Action], trials: int, seed: int) -> SimulationReport:
    """Estimate progress probability and per-player utilities by sampling epochs."""
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= seed < 2**64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    profile = tuple(Action(a) for a in profile)
    check_profile(spec, profile)
    n = spec.n
    acts = np.array([int(a) for a in profile])
    qs = np.array([float(p) for p in spec.probs])
    contrib = acts == Action.CONTRIBUTE
    participate = acts != Action.ABSTAIN

    progress_count = 0
    sums = np.zeros(n)
    sq_sums = np.zeros(n)
    for start in range(0, trials, CHUNK_TRIALS):
        count = min(CHUNK_TRIALS, trials - start)
        u = _uniform_block(seed, start, count, n)
        eligible = (u < qs) & participate
        progress = (eligible & contrib).sum(axis=1) >= spec.k
        pay = _payoffs(spec, acts, eligible, progress)
        progress_count += int(progress.sum())
        sums += pay.sum(axis=0)
        sq_sums += (pay**2).sum(axis=0)

    rate = progress_count / trials
    means = sums / trials
    if trials > 1:
        var = np.maximum(sq_sums - trials * means**2, 0.0) / (trials - 1)
        rate_var = rate * (1 - rate) * trials / (trials - 1)
    else:
        var = np.zeros(n)
        rate_var = 0.0
    return SimulationReport(
        trials=trials,
        seed=seed,
        empirical_progress_rate=rate,
        progress_standard_error=float(np.sqrt(rate_var / trials)),
        per_player_mean_utility=[float(x) for x in means],
        standard_errors=[float(x) for x in np.sqrt(var / trials)],
    )


# ---------------------------------------------------------------------------

# Preference among equally good alternatives once the current action is beaten.
_TIE_ORDER = (Action.CONTRIBUTE, Action.RETRACT, Action.ABSTAIN)


@dataclass
class DynamicsTrace:
    rounds: list                     # profile after each completed round, starting with the initial one
    terminal: str                    # "fixed_point" | "cycle" | "truncated"
    update_order: str                # "round_robin" | "random"
    seed: Optional[int] = None
    period: Optional[int] = None
    switches: list = field(default_factory=list)  # (round, player, old, new)

    @property
    def final(self) -> tuple:
        return self.rounds[-1]


def best_response(spec: GameSpec, profile, i: int) -> Action:
    """Player ``i``'s reply: keep the current action unless something is
    strictly better, then prefer contribute, retract, abstain among ties."""
    current = Action(profile[i])
    utils = {b: expected_utility(spec, profile, i, b) for b in spec.actions}
    best = max(utils.values())
    if spec.numeric.geq(utils[current], best):
        return current
    for b in _TIE_ORDER:
        if b in utils and spec.numeric.geq(utils[b], best):
            return b
    raise AssertionError("unreachable")


def best_response_dynamics(
    spec: GameSpec,
    initial: Sequence[Action],
    order: str = "round_robin",
    max_rounds: int = 100,
    seed: Optional[int] = None,
) -> DynamicsTrace:
    """Sequential best-response play until a fixed point, a cycle or ``max_rounds``.

    One round lets every player update once, either in index order or in a
    fresh random permutation (``random.Random(seed)``) per round.  A cycle is
    reported when an end-of-round profile repeats.
    """
    if order not in ("round_robin", "random"):
        raise ValueError(f"unknown update order {order!r}")
    profile = tuple(Action(a) for a in initial)
    check_profile(spec, profile)
    rng = random.Random(seed)
    seen = {profile: 0}
    trace = DynamicsTrace([profile], "truncated", order, seed)
    for rnd in range(1, max_rounds + 1):
        players = list(range(spec.n))
        if order == "random":
            rng.shuffle(players)
        changed = False
        for i in players:
            b = best_response(spec, profile, i)
            if b != profile[i]:
                trace.switches.append((rnd, i, profile[i], b))
                profile = profile[:i] + (b,) + profile[i + 1:]
                changed = True
        trace.rounds.append(profile)
        if not changed:
            trace.terminal = "fixed_point"
            assert is_equilibrium(spec, profile), "fixed point of best responses must be an equilibrium"
            return trace
        if profile in seen:
            trace.terminal = "cycle"
            trace.period = rnd - seen[profile]
            return trace
        seen[profile] = rnd
    return trace

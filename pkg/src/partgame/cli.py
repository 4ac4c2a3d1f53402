"""Command-line front end.

Exit codes: 0 success, 2 configuration error, 3 exhaustive-search guard
exceeded (only when brute force was the sole requested method).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Optional

import jsonschema

from . import __version__
from .calibration import InfeasibleTarget, expenditure_compare, r_min_all_in, r_min_mixed
from .equilibrium import GuardExceeded, default_guard, enumerate_equilibria, is_equilibrium, is_strong_equilibrium
from .model import Action, GameSpec, InvalidGameError, Variant, expected_utility, parse_profile, profile_str
from .numeric import NumericMode, format_decimal, format_fraction, to_exact
from .prob import poisson_binomial_tail
from .schemas import CONFIG_SCHEMA, CONFIG_SCHEMA_ID, REPORT_SCHEMA, REPORT_SCHEMA_ID
from .simulation import best_response_dynamics, simulate_epochs
from .structure import (
    asymmetric_threshold_scan,
    beta_ratio_feasible_range,
    class_key,
    find_equilibrium_classes,
    genericity_issues,
    min_contributors_bound,
    retraction_lambda_scan,
    universal_retraction_scan,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_GUARD = 3

MAX_SWEEP_ROWS = 100_000
DEFAULT_TRIALS = 100_000
DEFAULT_FLOAT_EPSILON = "1e-12"


class ConfigError(Exception):
    """Invalid configuration; the message is a field- or line-level diagnostic."""


# ---------------------------------------------------------------------------
# Serialization


def num(x):
    """Exact values become ``"p/q"`` strings, floats stay JSON numbers."""
    if isinstance(x, Fraction):
        return format_fraction(x)
    if isinstance(x, int) and not isinstance(x, bool):
        return format_fraction(Fraction(x))
    return float(x)


def num_pair(x) -> dict:
    exact = format_fraction(x) if isinstance(x, (Fraction, int)) else None
    return {"exact": exact, "decimal": format_decimal(x)}


def _composition_json(comp, margins=None, verified_by=None) -> dict:
    out = {
        "label": comp.label(),
        "profile": profile_str(comp.profile()),
        "contributors": sorted(comp.contributors),
        "free_riders": sorted(comp.free_riders),
        "abstainers": sorted(comp.abstainers),
        "counts": list(comp.counts),
    }
    if verified_by is not None:
        out["verified_by"] = verified_by
    if margins is not None:
        out["margins"] = {
            str(i): {Action(b).symbol: num(m) for b, m in per.items()} for i, per in margins.items()
        }
    return out


def game_json(spec: GameSpec) -> dict:
    return {
        "n": spec.n,
        "k": spec.k,
        "q": num(spec.q) if spec.symmetric else [num(p) for p in spec.q],
        "alpha": num(spec.alpha),
        "beta": num(spec.beta),
        "r": num(spec.r),
        "v": num(spec.v),
        "variant": spec.variant.value,
        "numeric": {"mode": spec.numeric.kind, "epsilon": spec.numeric.epsilon},
    }


def _envelope(command: str, config: dict, overrides: dict, result: dict) -> dict:
    report = {
        "schema": REPORT_SCHEMA_ID,
        "tool": {"name": "partgame", "version": __version__},
        "command": command,
        "config": config,
        "cli_overrides": overrides,
        "result": result,
    }
    jsonschema.validate(report, REPORT_SCHEMA)
    return report


# ---------------------------------------------------------------------------
# Configuration


def _field_path(error) -> str:
    parts = [str(p) for p in error.absolute_path]
    return ".".join(parts) if parts else "<root>"


def load_config(text: str, source: str = "<config>") -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{source}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        lines = [f"{source}: field {_field_path(e)}: {e.message}" for e in errors]
        raise ConfigError("\n".join(lines))
    return data


def numeric_mode(config: dict, mode: Optional[str], epsilon: Optional[str]) -> NumericMode:
    sect = config.get("numeric", {})
    kind = mode or sect.get("mode", "exact")
    eps_text = epsilon if epsilon is not None else sect.get("epsilon")
    if kind == "exact":
        if eps_text is not None and to_exact(eps_text) != 0:
            raise ConfigError("field numeric.epsilon: exact mode takes no epsilon")
        return NumericMode.exact()
    try:
        eps = to_exact(eps_text if eps_text is not None else DEFAULT_FLOAT_EPSILON)
    except ValueError as exc:
        raise ConfigError(f"field numeric.epsilon: {exc}") from None
    if eps < 0:
        raise ConfigError("field numeric.epsilon: must be nonnegative")
    return NumericMode.float_(float(eps))


def build_spec(game: dict, numeric: NumericMode) -> GameSpec:
    try:
        q = game["q"]
        return GameSpec(
            n=game["n"],
            k=game["k"],
            q=tuple(q) if isinstance(q, list) else q,
            alpha=game["alpha"],
            beta=game.get("beta", "0"),
            r=game["r"],
            v=game.get("v", "0"),
            variant=Variant(game["variant"]),
            numeric=numeric,
        )
    except InvalidGameError as exc:
        raise ConfigError("field game: " + "; ".join(exc.violations)) from None


def _section(config: dict, name: str) -> dict:
    if name not in config:
        raise ConfigError(f"field {name}: section required by the {name} command")
    return config[name]


# ---------------------------------------------------------------------------
# enumerate


def _structure_details(spec: GameSpec) -> dict:
    v = spec.variant
    if v is Variant.BASIC and not spec.symmetric:
        scan = asymmetric_threshold_scan(spec)
        return {
            "finder": "probability_threshold_scan",
            "all_out": scan.all_out,
            "thresholds": [
                {
                    "q_threshold": num(e.q_threshold),
                    "contributors": sorted(e.contributors),
                    "contributor_lhs": num(e.contributor_lhs),
                    "abstainer_lhs": None if e.abstainer_lhs is None else num(e.abstainer_lhs),
                    "alpha_over_r": None if e.alpha_over_r is None else num(e.alpha_over_r),
                }
                for e in scan.equilibria
            ],
        }
    if v is Variant.BASIC:
        out = {"finder": "symmetric_lambda_scan"}
        if spec.v <= spec.r:
            out["min_contributors_bound"] = num_pair(min_contributors_bound(spec))
        return out
    if v.allows_retraction:
        scan = retraction_lambda_scan(spec) if v is Variant.RETRACTION else universal_retraction_scan(spec)
        rng = beta_ratio_feasible_range(spec)
        win = scan.window
        return {
            "finder": "retraction_lambda_scan",
            "beta_ratio_feasible_range": None if rng.empty else [num_pair(rng.lo), num_pair(rng.hi)],
            "lambda_window": list(win.lambda_values),
            "beta_ratio_intervals": {
                str(lam): [num_pair(iv.lo), num_pair(iv.hi)] for lam, iv in win.beta_ratio_intervals.items()
            },
            "alpha_ratio_upper": {
                str(lam): None if ub is None else num_pair(ub) for lam, ub in win.alpha_ratio_upper.items()
            },
            "mixed_lambdas": list(scan.mixed),
            "all_in": scan.all_in,
            "all_out": scan.all_out,
        }
    return {"finder": "universal_basic_characterization"}


def cmd_enumerate(config: dict, spec: GameSpec, guard: int) -> dict:
    opts = config.get("enumerate", {})
    methods = opts.get("methods", ["structure", "brute_force"])
    strong = opts.get("strong_check", False)
    structure = {"status": "skipped"}
    brute = {"status": "skipped"}
    found = {}  # class key -> (composition, sources)

    if "structure" in methods:
        try:
            classes = find_equilibrium_classes(spec)
            structure = {
                "status": "ok",
                "classes": [c.label() for c in classes],
                "genericity_caveats": genericity_issues(spec),
                **_structure_details(spec),
            }
            for c in classes:
                found.setdefault(class_key(spec, c), [c, set()])[1].add("structure")
        except ValueError as exc:
            structure = {"status": "unsupported", "note": str(exc)}

    if "brute_force" in methods:
        if spec.n > guard:
            note = f"guard exceeded: n={spec.n} > guard {guard}; brute-force enumeration skipped"
            if methods == ["brute_force"]:
                raise GuardExceeded(note)
            brute = {"status": "skipped", "note": note}
        else:
            records = enumerate_equilibria(spec, guard, dedupe=spec.symmetric)
            brute = {"status": "ok", "dedupe_symmetric": spec.symmetric, "profiles_found": len(records)}
            for rec in records:
                found.setdefault(class_key(spec, rec.composition), [rec.composition, set()])[1].add("brute_force")

    agreement = None
    if structure["status"] == "ok" and brute["status"] == "ok":
        agreement = all(len(src) == 2 for _, src in found.values())

    equilibria = []
    for comp, sources in sorted(found.values(), key=lambda cs: (cs[0].counts, sorted(cs[0].contributors))):
        check = is_equilibrium(spec, comp.profile())
        verified = "both" if len(sources) == 2 else next(iter(sources))
        entry = _composition_json(comp, check.margins, verified)
        entry["deviation_check"] = bool(check)
        if strong and spec.n <= guard:
            entry["strong"] = is_strong_equilibrium(spec, comp.profile(), guard=guard)
        equilibria.append(entry)

    return {
        "game": game_json(spec),
        "guard": guard,
        "methods": methods,
        "equilibria": equilibria,
        "count": len(equilibria),
        "agreement": agreement,
        "structure": structure,
        "brute_force": brute,
    }


# ---------------------------------------------------------------------------
# calibrate


def _calibration_json(rep) -> dict:
    return {
        "r_min": num_pair(rep.r_min),
        "binding_constraint": rep.binding_constraint,
        "candidates": {k: num_pair(v) for k, v in rep.candidates.items()},
        "r_max": None if rep.r_max is None else num_pair(rep.r_max),
        "expenditure": num_pair(rep.expenditure),
    }


def cmd_calibrate(config: dict, spec: GameSpec) -> dict:
    opts = _section(config, "calibrate")
    target = opts["target"]
    run = (lambda s: r_min_all_in(s)) if target == "all-in" else (lambda s: r_min_mixed(s, target))
    result = {"game": game_json(spec), "target": target}
    try:
        rep = run(spec)
    except InfeasibleTarget as exc:
        result.update(status="infeasible", violated_constraint=exc.constraint, message=str(exc))
        return result
    except ValueError as exc:
        raise ConfigError(f"field calibrate: {exc}") from None
    result.update(status="ok", **_calibration_json(rep))
    if opts.get("pair_universal"):
        if spec.variant.universal:
            raise ConfigError("field calibrate.pair_universal: the game already uses universal payments")
        partner = spec.with_(variant=spec.variant.universal_counterpart)
        try:
            cmp_ = expenditure_compare(spec, partner, target)
        except InfeasibleTarget as exc:
            result["comparison"] = {"status": "infeasible", "violated_constraint": exc.constraint}
            return result
        result["comparison"] = {
            "status": "ok",
            "universal_variant": partner.variant.value,
            "r_min_universal": num_pair(cmp_.r_min_universal),
            "tracked_total": num_pair(cmp_.tracked_total),
            "universal_total": num_pair(cmp_.universal_total),
            "universal_higher": cmp_.universal_higher,
            "strictly_higher": cmp_.strictly_higher,
        }
    return result


# ---------------------------------------------------------------------------
# sweep

SWEEP_COLUMNS = [
    "parameter", "value", "value_exact", "equilibria", "all_out", "all_in",
    "mixed_lambdas", "window_lambdas", "nontrivial",
]


def sweep_grid(start: Fraction, stop: Fraction, step: Fraction) -> list:
    """Exact grid ``start, start+step, ...`` up to and including ``stop``."""
    if stop < start:
        raise ConfigError(f"field sweep: inverted range (start {start} > stop {stop})")
    if start == stop:
        return [start]
    if step <= 0:
        raise ConfigError("field sweep.step: empty range (step must be positive)")
    count = int((stop - start) // step) + 1
    if count > MAX_SWEEP_ROWS:
        raise ConfigError(f"field sweep: {count} grid points exceed the limit {MAX_SWEEP_ROWS}")
    return [start + i * step for i in range(count)]


def _row_spec(spec: GameSpec, param: str, value: Fraction) -> GameSpec:
    if param == "k":
        if value.denominator != 1:
            raise ConfigError(f"field sweep: k must take integer values, got {value}")
        changes = {"k": int(value)}
    elif param == "q":
        if not spec.symmetric:
            raise ConfigError("field sweep.parameter: cannot sweep q with per-player probabilities")
        changes = {"q": value}
    else:
        changes = {param: value}
    try:
        return spec.with_(**changes)
    except InvalidGameError as exc:
        raise ConfigError(f"field sweep: at {param}={value}: " + "; ".join(exc.violations)) from None


def cmd_sweep(config: dict, spec: GameSpec) -> list:
    opts = _section(config, "sweep")
    param = opts["parameter"]
    try:
        start, stop, step = (to_exact(opts[x]) for x in ("start", "stop", "step"))
    except ValueError as exc:
        raise ConfigError(f"field sweep: {exc}") from None
    rows = []
    for value in sweep_grid(start, stop, step):
        s = _row_spec(spec, param, value)
        try:
            classes = find_equilibrium_classes(s)
        except ValueError as exc:
            raise ConfigError(f"field game: {exc}") from None
        window = ""
        if s.variant.allows_retraction:
            scan = retraction_lambda_scan(s) if s.variant is Variant.RETRACTION else universal_retraction_scan(s)
            window = " ".join(map(str, scan.window.lambda_values))
        labels = [c.label() if s.symmetric else "C={" + ",".join(map(str, sorted(c.contributors))) + "}"
                  for c in classes]
        all_in = any(c.lam == s.n for c in classes)
        all_out = any(c.lam == 0 for c in classes)
        mixed = [c.lam for c in classes if c.free_riders and c.lam > 0]
        rows.append({
            "parameter": param,
            "value": format_decimal(value),
            "value_exact": format_fraction(value),
            "equilibria": ";".join(labels),
            "all_out": int(all_out),
            "all_in": int(all_in),
            "mixed_lambdas": " ".join(map(str, mixed)),
            "window_lambdas": window,
            "nontrivial": int(any(c.lam > 0 for c in classes)),
        })
    return rows


def sweep_csv(rows: list) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(config: dict, spec: GameSpec, trials: Optional[int], seed: Optional[int]) -> dict:
    opts = _section(config, "simulate")
    try:
        profile = parse_profile(opts["profile"])
        trials = trials if trials is not None else opts.get("trials", DEFAULT_TRIALS)
        seed = seed if seed is not None else opts.get("seed", 0)
        sim = simulate_epochs(spec, profile, trials, seed)
    except ValueError as exc:
        raise ConfigError(f"field simulate: {exc}") from None
    exact_spec = spec.as_exact()
    contributors = [exact_spec.probs[i] for i, a in enumerate(profile) if a == Action.CONTRIBUTE]
    p_progress = poisson_binomial_tail(contributors, spec.k)
    utils = [expected_utility(exact_spec, profile, i) for i in range(spec.n)]

    def z(emp, exact, se):
        diff = emp - float(exact)
        if se == 0:
            return 0.0 if diff == 0 else float("inf")
        return diff / se

    z_rate = z(sim.empirical_progress_rate, p_progress, sim.progress_standard_error)
    z_utils = [z(m, u, se) for m, u, se in zip(sim.per_player_mean_utility, utils, sim.standard_errors)]
    result = {
        "game": game_json(spec),
        "profile": profile_str(profile),
        "simulation": {
            "trials": sim.trials,
            "seed": sim.seed,
            "empirical_progress_rate": sim.empirical_progress_rate,
            "progress_standard_error": sim.progress_standard_error,
            "per_player_mean_utility": sim.per_player_mean_utility,
            "standard_errors": sim.standard_errors,
        },
        "analytic": {
            "progress_probability": num_pair(p_progress),
            "expected_utility": [num_pair(u) for u in utils],
        },
        "z_scores": {"progress": _finite(z_rate), "utility": [_finite(x) for x in z_utils]},
        "within_4se": abs(z_rate) <= 4 and all(abs(x) <= 4 for x in z_utils),
    }
    dyn = opts.get("dynamics")
    if dyn is not None:
        initial = parse_profile(dyn.get("initial", opts["profile"]))
        try:
            trace = best_response_dynamics(
                spec, initial, dyn.get("order", "round_robin"), dyn.get("max_rounds", 100), dyn.get("seed")
            )
        except ValueError as exc:
            raise ConfigError(f"field simulate.dynamics: {exc}") from None
        result["dynamics"] = {
            "terminal": trace.terminal,
            "update_order": trace.update_order,
            "seed": trace.seed,
            "period": trace.period,
            "final": profile_str(trace.final),
            "rounds": [profile_str(p) for p in trace.rounds],
            "switches": [[rnd, i, Action(a).symbol, Action(b).symbol] for rnd, i, a, b in trace.switches],
        }
    return result


def _finite(x: float):
    return x if x == x and abs(x) != float("inf") else str(x)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="partgame", description="Participation-game equilibrium analysis.")
    parser.add_argument("--version", action="version", version=f"partgame {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("enumerate", "list equilibria (structural finders and brute force)"),
        ("calibrate", "minimum sustaining reward for a target profile"),
        ("sweep", "CSV table of equilibrium classes over a parameter grid"),
        ("simulate", "Monte Carlo epochs and best-response dynamics"),
    ):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help="output path (default: stdout)")
        p.add_argument("--mode", choices=["exact", "float"])
        p.add_argument("--epsilon", help="float-mode comparison tolerance (decimal)")
        p.add_argument("--seed", type=int)
        p.add_argument("--trials", type=int)
        p.add_argument("--guard", type=int, help="largest n for exhaustive enumeration")
    return parser


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k: getattr(args, k) for k in ("mode", "epsilon", "seed", "trials", "guard")
                 if getattr(args, k) is not None}
    try:
        try:
            with open(args.config, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"{args.config}: {exc.strerror}") from None
        config = load_config(text, args.config)
        if config["schema"] != CONFIG_SCHEMA_ID:
            raise ConfigError(f"field schema: unsupported {config['schema']!r}")
        spec = build_spec(config["game"], numeric_mode(config, args.mode, args.epsilon))
        if args.guard is not None and args.guard < 1:
            raise ConfigError("--guard must be positive")
        if args.trials is not None and args.trials < 1:
            raise ConfigError("--trials must be positive")
        if args.seed is not None and not 0 <= args.seed < 2**64:
            raise ConfigError("--seed must be an unsigned 64-bit integer")
        guard = args.guard or config.get("guard") or default_guard(spec)

        if args.command == "sweep":
            _emit(sweep_csv(cmd_sweep(config, spec)), args.out)
            return EXIT_OK
        if args.command == "enumerate":
            result = cmd_enumerate(config, spec, guard)
        elif args.command == "calibrate":
            result = cmd_calibrate(config, spec)
        else:
            result = cmd_simulate(config, spec, args.trials, args.seed)
        report = _envelope(args.command, config, overrides, result)
        _emit(json.dumps(report, indent=2) + "\n", args.out)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except GuardExceeded as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_GUARD


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()

"""Command-line front end.

JSON goes to stdout, logs to stderr.  Exit codes: 0 ok, 2 unknown entity,
3 invalid input, 4 internal invariant violation.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import re
import sys
from typing import Any

import numpy as np

from . import __version__
from .equilibria import (
    MixedDomain,
    U2Domain,
    bimatrix_report,
    grid_nash,
    to_bimatrix,
)
from .gamelib import GAMES, PSI0, BOX_A, GvwSetup, alice_interpolated, prisoners_dilemma
from .gamemodel import GameError, MixedClassical, PureClassical, QuantumGame, QuantumUnitary, play, u2_angles
from .market import RiskOscillator, hbar_eff, min_risk_inclination, omega, risk_spectrum
from .protosim import (
    BOB_POLICIES,
    TRENT_POLICIES,
    VARIANTS,
    SimConfig,
    simulate_gvw,
    simulate_wiesner,
    sweep_csv,
    sweep_wiesner,
)
from .qcore import DimensionError, ValidationError

SCHEMA = "qgames/1"
EXIT_OK, EXIT_UNKNOWN, EXIT_INVALID, EXIT_INTERNAL = 0, 2, 3, 4

log = logging.getLogger("qgames")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


class SpecParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


# -- JSON with 17 significant digits --------------------------------------------------

def emit(obj: Any) -> str:
    """Deterministic JSON; floats printed with 17 significant digits."""
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            raise CliError(f"non-finite number {x!r} in output", EXIT_INTERNAL)
        return format(x + 0.0, ".17g")
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        return "{" + ", ".join(f"{json.dumps(str(k))}: {emit(v)}" for k, v in obj.items()) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(emit(v) for v in obj) + "]"
    raise CliError(f"cannot serialise {type(obj).__name__}", EXIT_INTERNAL)


def checksum(payload: dict) -> str:
    return hashlib.sha256(emit(payload).encode()).hexdigest()


def with_manifest(payload: dict, command: str, params: dict, seed: int | None = None) -> dict:
    body = {"schema": SCHEMA, **payload}
    body["manifest"] = {
        "command": command,
        "parameters": params,
        "seed": seed,
        "version": __version__,
        "checksum": checksum(body),
    }
    return body


def verify_manifest(text: str) -> bool:
    """Re-derive the checksum of an emitted document."""
    doc = json.loads(text)
    manifest = doc.pop("manifest")
    return checksum(doc) == manifest["checksum"]


# -- strategy mini-grammar ----------------------------------------------------------------

_NUM = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"


def _parse_numbers(text: str, offset: int) -> list[float]:
    out, pos = [], 0
    for field in text.split(","):
        stripped = field.strip()
        if not re.fullmatch(_NUM, stripped):
            raise SpecParseError(f"expected a number, got {stripped!r}", offset + pos)
        out.append(float(stripped))
        pos += len(field) + 1
    return out


def parse_strategy(spec: str, game: QuantumGame, player: str):
    """Parse ``pure:F,N``, ``mixed:0.5`` or ``u2:a,p1,p2;a,p1,p2``.

    Raises SpecParseError carrying the character offset of the bad token.
    """
    kind, sep, body = spec.partition(":")
    if not sep:
        raise SpecParseError("missing ':' after strategy kind", len(kind))
    start = len(kind) + 1
    if not body.strip():
        raise SpecParseError("empty strategy body", start)
    if kind == "pure":
        labels = game.space(player).labels()
        moves, pos = [], start
        for tok in body.split(","):
            lbl = tok.strip()
            if lbl not in labels:
                raise SpecParseError(f"unknown move {lbl!r} (expected one of {labels})", pos)
            moves.append(labels.index(lbl))
            pos += len(tok) + 1
        return PureClassical(moves)
    if kind == "mixed":
        ps = _parse_numbers(body, start)
        if any(not 0 <= p <= 1 for p in ps):
            raise SpecParseError("flip probabilities must lie in [0, 1]", start)
        if len(ps) == 1 and game.turns(player) > 1:
            ps = ps * game.turns(player)
        return MixedClassical.per_turn(ps)
    if kind == "u2":
        ops, pos = [], start
        for i, chunk in enumerate(body.split(";")):
            if i and chunk.startswith("u2:"):
                # each turn may repeat the kind prefix
                chunk, pos = chunk[3:], pos + 3
            vals = _parse_numbers(chunk, pos)
            if len(vals) != 3:
                raise SpecParseError(f"u2 needs 3 angles per turn, got {len(vals)}", pos)
            ops.append(u2_angles(*vals))
            pos += len(chunk) + 1
        return QuantumUnitary(ops)
    raise SpecParseError(f"unknown strategy kind {kind!r}", 0)


# -- commands ----------------------------------------------------------------------------

def _game(name: str) -> QuantumGame:
    if name not in GAMES:
        raise CliError(f"unknown game {name!r}; try list-games", EXIT_UNKNOWN)
    return GAMES[name]()


def cmd_play(args) -> str:
    game = _game(args.game)
    try:
        s_a = parse_strategy(args.a, game, "A")
        s_b = parse_strategy(args.b, game, "B")
    except SpecParseError as e:
        raise CliError(f"strategy parse error: {e}", EXIT_INVALID) from e
    sigma, pay = play(game, s_a, s_b)
    probs = np.real(np.diag(sigma.entries))
    payload = {
        "command": "play",
        "game": game.name,
        "strategies": {"a": args.a, "b": args.b},
        "payoff_a": pay.p_a,
        "payoff_b": pay.p_b,
        "final_probs": [float(np.clip(p, 0.0, 1.0)) for p in probs],
    }
    params = {"game": args.game, "a": args.a, "b": args.b}
    return emit(with_manifest(payload, "play", params))


def _report_json(report) -> dict:
    return {
        "profiles": [
            {"profile": p.profile, "payoffs": list(p.payoffs), "flags": p.flags()}
            for p in report.profiles if p.nash
        ],
        "grid_meta": report.grid_meta,
        "degenerate": report.degenerate,
        "mixed_profiles": [{"row": list(m.row_dist), "col": list(m.col_dist)} for m in report.mixed],
    }


def cmd_nash(args) -> str:
    if not math.isfinite(args.epsilon) or args.epsilon < 0:
        raise CliError("--epsilon must be finite and non-negative", EXIT_INVALID)
    if args.resolution < 2:
        raise CliError("--resolution must be at least 2", EXIT_INVALID)
    game = _game(args.game)
    if args.game == "pd":
        report = bimatrix_report(prisoners_dilemma(), epsilon=args.epsilon)
    elif args.game == "penny-flip":
        report = bimatrix_report(to_bimatrix(game), epsilon=args.epsilon)
    else:
        report = grid_nash(game, MixedDomain(), U2Domain(), args.resolution, args.epsilon)
    payload = {"command": "nash", "game": game.name, **_report_json(report)}
    params = {"game": args.game, "resolution": args.resolution, "epsilon": args.epsilon}
    return emit(with_manifest(payload, "nash", params))


def _parse_sweep(text: str) -> list[int]:
    m = re.fullmatch(r"\s*(\d+)\s*\.\.\s*(\d+)\s*", text)
    if not m or int(m.group(1)) < 1 or int(m.group(1)) > int(m.group(2)):
        raise CliError(f"--sweep expects N1..N2 with 1 <= N1 <= N2, got {text!r}", EXIT_INVALID)
    return list(range(int(m.group(1)), int(m.group(2)) + 1))


def _alice_state(text: str):
    if text == "honest":
        return PSI0
    if text in ("box-a", "a"):
        return BOX_A
    try:
        t = float(text)
    except ValueError:
        raise CliError(f"--alice expects honest, box-a or an interpolation in [0, 1], got {text!r}",
                       EXIT_INVALID) from None
    return alice_interpolated(t)


def cmd_simulate(args) -> str:
    if args.trials < 1 or args.rounds < 1 or not 0 <= args.seed < 2**64:
        raise CliError("--trials and --rounds must be >= 1; --seed must fit in 64 bits", EXIT_INVALID)
    relevant = {
        "wiesner": ("trials", "rounds", "seed", "sweep", "variant", "trent_policy", "bob_policy"),
        "gvw": ("trials", "seed", "alice", "v", "r"),
    }[args.protocol]
    params = {"protocol": args.protocol, **{k: getattr(args, k) for k in relevant}}
    if args.protocol == "wiesner":
        cfg = SimConfig(args.trials, args.rounds, args.seed, args.trent_policy, args.bob_policy, args.variant)
        if args.sweep:
            rows = sweep_wiesner(cfg, _parse_sweep(args.sweep), workers=args.workers)
            text = sweep_csv(rows)
            log.info("manifest %s", emit({"command": "simulate", "parameters": params, "seed": args.seed,
                                          "version": __version__,
                                          "checksum": hashlib.sha256(text.encode()).hexdigest()}))
            return text.rstrip("\n")
        res = simulate_wiesner(cfg, workers=args.workers)
    elif args.protocol == "gvw":
        setup = GvwSetup(_alice_state(args.alice), args.r, args.v)
        cfg = SimConfig(args.trials, 1, args.seed)
        res = simulate_gvw(setup, cfg, workers=args.workers)
    else:
        raise CliError(f"unknown protocol {args.protocol!r}", EXIT_UNKNOWN)
    payload = {"command": "simulate", "protocol": args.protocol, **res.to_dict()}
    return emit(with_manifest(payload, "simulate", params, seed=args.seed))


def cmd_market(args) -> str:
    if args.levels < 0:
        raise CliError("--levels must be >= 0", EXIT_INVALID)
    osc = RiskOscillator(args.m, args.theta, args.hbar_e, args.big_theta)
    payload = {
        "command": "market",
        "omega": omega(osc.theta),
        "hbar_eff": hbar_eff(osc.hbar_e, osc.big_theta),
        "e0": risk_spectrum(osc, 0),
        "h_e": min_risk_inclination(osc),
        "levels": [risk_spectrum(osc, n) for n in range(args.levels + 1)],
    }
    params = {"m": args.m, "theta": args.theta, "hbar_e": args.hbar_e,
              "big_theta": args.big_theta, "levels": args.levels}
    return emit(with_manifest(payload, "market", params))


def cmd_list_games(args) -> str:
    games = []
    for name, ctor in GAMES.items():
        g = ctor()
        games.append({"name": name, "dim": g.dim, "schedule": list(g.schedule),
                      "moves_a": g.space_a.labels(), "moves_b": g.space_b.labels(),
                      "zero_sum": g.zero_sum})
    return emit(with_manifest({"command": "list-games", "games": games}, "list-games", {}))


# -- parser ---------------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def __init__(self, *args, **kwargs):
        kwargs.setdefault("allow_abbrev", False)
        super().__init__(*args, **kwargs)

    def error(self, message):
        self.print_usage(sys.stderr)
        code = EXIT_UNKNOWN if "invalid choice" in message else EXIT_INVALID
        raise CliError(message, code)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qgames", description="Quantum game simulation and analysis.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    p.add_argument("--version", action="version", version=f"qgames {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("play", help="play one strategy profile")
    sp.add_argument("game")
    sp.add_argument("--a", required=True, help="player A strategy spec")
    sp.add_argument("--b", required=True, help="player B strategy spec")
    sp.set_defaults(func=cmd_play)

    sp = sub.add_parser("nash", help="equilibrium search")
    sp.add_argument("game")
    sp.add_argument("--resolution", type=int, default=21)
    sp.add_argument("--epsilon", type=float, default=1e-6)
    sp.set_defaults(func=cmd_nash)

    sp = sub.add_parser("simulate", help="Monte Carlo protocol simulation")
    sp.add_argument("protocol", choices=["wiesner", "gvw"])
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trials", type=int, default=100000)
    sp.add_argument("--rounds", type=int, default=1)
    sp.add_argument("--sweep", default=None, help="N1..N2: emit CSV n,rate,std_error")
    sp.add_argument("--variant", choices=VARIANTS, default="hadamard")
    sp.add_argument("--trent-policy", choices=TRENT_POLICIES, default="two_point")
    sp.add_argument("--bob-policy", choices=BOB_POLICIES, default="uniform_guess")
    sp.add_argument("--alice", default="honest")
    sp.add_argument("--v", type=float, default=0.0, help="Bob's verification probability")
    sp.add_argument("--r", type=float, default=1.0, help="reward R paid on failed verification")
    sp.add_argument("--workers", type=int, default=1)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("market", help="risk-inclination oscillator quantities")
    sp.add_argument("--m", type=float, default=1.0)
    sp.add_argument("--theta", type=float, default=2 * math.pi)
    sp.add_argument("--hbar-e", type=float, default=1.0)
    sp.add_argument("--big-theta", type=float, default=0.0)
    sp.add_argument("--levels", type=int, default=3)
    sp.set_defaults(func=cmd_market)

    sp = sub.add_parser("list-games", help="list the built-in games")
    sp.set_defaults(func=cmd_list_games)
    return p


def main(argv=None, stdout=None) -> int:
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(stream=sys.stderr, level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        out = args.func(args)
    except CliError as e:
        print(f"qgames: {e}", file=sys.stderr)
        return e.code
    except (GameError, ValidationError, DimensionError, ValueError) as e:
        print(f"qgames: invalid input: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (AssertionError, FloatingPointError) as e:
        print(f"qgames: internal invariant violated: {e}", file=sys.stderr)
        return EXIT_INTERNAL
    stdout.write(out + "\n")
    return EXIT_OK


def main_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_entry()

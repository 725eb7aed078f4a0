"""Two-player quantum games: board, turn schedule, strategies and payoffs.

A game starts from an initial density matrix, lets the players act in the
order given by its schedule, measures the board in the computational basis
and pays each player the expectation of their per-outcome payoff.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Mapping, Sequence, Union

import numpy as np

from .qcore import (
    CONSERVE_TOL,
    CONSTRUCT_TOL,
    IDENTITY2,
    PAULI_X,
    Channel,
    DensityMatrix,
    DimensionError,
    Unitary,
    ValidationError,
    apply_op,
    measure_probs,
)

PLAYERS = ("A", "B")

# Moves of the spin-flip game: index 0 = no flip, 1 = flip.
N = IDENTITY2
F = PAULI_X


class GameError(ValueError):
    pass


class StrategyKindError(GameError):
    """Strategy kind not admitted by the player's strategy space."""


class TurnCountError(GameError):
    """Strategy length differs from the player's number of turns."""


class StrategyDimensionError(GameError, DimensionError):
    """Strategy operator dimension differs from the board dimension."""


# -- strategies ---------------------------------------------------------------

@dataclass(frozen=True)
class PureClassical:
    moves: tuple[int, ...]
    kind = "pure"

    def __init__(self, moves: Sequence[int]):
        object.__setattr__(self, "moves", tuple(int(m) for m in moves))

    @property
    def turns(self) -> int:
        return len(self.moves)


@dataclass(frozen=True)
class MixedClassical:
    """Probability distribution over pure move sequences."""

    dist: tuple[tuple[tuple[int, ...], float], ...]
    kind = "mixed"

    def __init__(self, dist: Mapping[Sequence[int], float]):
        items = tuple((tuple(int(m) for m in seq), float(w)) for seq, w in dict(dist).items())
        if not items:
            raise ValidationError("empty distribution")
        weights = np.array([w for _, w in items])
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > CONSERVE_TOL:
            raise ValidationError(f"weights {weights.tolist()} do not form a distribution")
        lengths = {len(s) for s, _ in items}
        if len(lengths) != 1:
            raise ValidationError("move sequences of unequal length")
        object.__setattr__(self, "dist", items)

    @classmethod
    def per_turn(cls, flip_probs: Sequence[float]) -> MixedClassical:
        """Independent flip/no-flip choice on each turn (move 1 with probability p)."""
        for p in flip_probs:
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"flip probability {p!r} outside [0, 1]")
        dist = {}
        for seq in itertools.product((0, 1), repeat=len(flip_probs)):
            w = 1.0
            for m, p in zip(seq, flip_probs):
                w *= p if m else 1.0 - p
            if w > 0:
                dist[seq] = w
        return cls(dist)

    @property
    def turns(self) -> int:
        return len(self.dist[0][0])


@dataclass(frozen=True)
class QuantumUnitary:
    ops: tuple[Unitary, ...]
    kind = "unitary"

    def __init__(self, ops: Sequence[Unitary]):
        object.__setattr__(self, "ops", tuple(ops))

    @property
    def turns(self) -> int:
        return len(self.ops)


@dataclass(frozen=True)
class GeneralChannel:
    ops: tuple[Channel, ...]
    kind = "channel"

    def __init__(self, ops: Sequence[Channel]):
        object.__setattr__(self, "ops", tuple(ops))

    @property
    def turns(self) -> int:
        return len(self.ops)


Strategy = Union[PureClassical, MixedClassical, QuantumUnitary, GeneralChannel]
ALL_KINDS = frozenset({"pure", "mixed", "unitary", "channel"})


# -- game ---------------------------------------------------------------------

@dataclass(frozen=True)
class StrategySpace:
    """Declarative description of what a player may play."""

    moves: tuple[tuple[str, Unitary], ...]
    kinds: frozenset = ALL_KINDS

    def labels(self) -> list[str]:
        return [lbl for lbl, _ in self.moves]

    def move_index(self, label: str) -> int:
        for i, (lbl, _) in enumerate(self.moves):
            if lbl == label:
                return i
        raise KeyError(label)


@dataclass(frozen=True)
class PayoffRule:
    payoff_a: tuple[float, ...]
    payoff_b: tuple[float, ...]

    def __post_init__(self):
        a = np.asarray(self.payoff_a, dtype=float)
        b = np.asarray(self.payoff_b, dtype=float)
        if a.shape != b.shape or a.ndim != 1:
            raise ValidationError("payoff vectors must be 1-D and the same length")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValidationError("payoffs must be finite")

    @classmethod
    def zero_sum(cls, payoff_a: Sequence[float]) -> PayoffRule:
        return cls(tuple(float(x) for x in payoff_a), tuple(-float(x) for x in payoff_a))

    def is_zero_sum(self) -> bool:
        return all(a + b == 0 for a, b in zip(self.payoff_a, self.payoff_b))


@dataclass(frozen=True)
class PayoffPair:
    p_a: float
    p_b: float


@dataclass(frozen=True)
class QuantumGame:
    name: str
    initial: DensityMatrix
    schedule: tuple[str, ...]
    space_a: StrategySpace
    space_b: StrategySpace
    payoff: PayoffRule
    zero_sum: bool = False
    outcome_labels: tuple[str, ...] = field(default=())

    def __post_init__(self):
        if not self.schedule or any(p not in PLAYERS for p in self.schedule):
            raise ValidationError(f"bad schedule {self.schedule!r}")
        if len(self.payoff.payoff_a) != self.dim:
            raise ValidationError("payoff rule length must equal the board dimension")
        if self.zero_sum and not self.payoff.is_zero_sum():
            raise ValidationError("game flagged zero-sum but payoffs do not cancel")
        for space in (self.space_a, self.space_b):
            for lbl, u in space.moves:
                if u.dim != self.dim:
                    raise ValidationError(f"move {lbl!r} has dim {u.dim}, board has {self.dim}")

    @property
    def dim(self) -> int:
        return self.initial.dim

    def turns(self, player: str) -> int:
        return sum(1 for p in self.schedule if p == player)

    def space(self, player: str) -> StrategySpace:
        return self.space_a if player == "A" else self.space_b


# -- elementary strategy operators ---------------------------------------------

def u2(a: complex, b: complex) -> Unitary:
    """The 2x2 unitary ``[[a, b], [conj(b), -conj(a)]]``."""
    a, b = complex(a), complex(b)
    norm = abs(a) ** 2 + abs(b) ** 2
    if abs(norm - 1.0) > CONSTRUCT_TOL:
        raise ValidationError(f"|a|^2 + |b|^2 = {norm!r}, expected 1")
    return Unitary([[a, b], [b.conjugate(), -a.conjugate()]])


def u2_angles(alpha: float, phi1: float = 0.0, phi2: float = 0.0) -> Unitary:
    """``u2`` with ``a = cos(alpha) e^{i phi1}``, ``b = sin(alpha) e^{i phi2}``."""
    return u2(np.cos(alpha) * np.exp(1j * phi1), np.sin(alpha) * np.exp(1j * phi2))


def flip_channel(p: float) -> Channel:
    """Flip with probability ``p``: ``rho -> p F rho F + (1 - p) N rho N``."""
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"flip probability {p!r} outside [0, 1]")
    return Channel.convex([(p, F), (1.0 - p, N)])


# -- play -----------------------------------------------------------------------

def _check_strategy(game: QuantumGame, player: str, s) -> None:
    space = game.space(player)
    kind = getattr(s, "kind", None)
    if kind not in space.kinds:
        raise StrategyKindError(f"player {player} may not play a {kind!r} strategy in {game.name}")
    need = game.turns(player)
    if s.turns != need:
        raise TurnCountError(f"player {player} has {need} turn(s), strategy gives {s.turns}")
    if kind in ("pure", "mixed"):
        seqs = [s.moves] if kind == "pure" else [seq for seq, _ in s.dist]
        n_moves = len(space.moves)
        for seq in seqs:
            if any(not 0 <= m < n_moves for m in seq):
                raise StrategyKindError(f"move index out of range in {seq} (game has {n_moves} moves)")
    else:
        for op in s.ops:
            if op.dim != game.dim:
                raise StrategyDimensionError(
                    f"player {player} operator has dim {op.dim}, board has dim {game.dim}"
                )


def _branches(game: QuantumGame, player: str, s) -> list[tuple[float, tuple]]:
    """Weighted per-turn operator sequences realising a strategy."""
    moves = [u for _, u in game.space(player).moves]
    if s.kind == "pure":
        return [(1.0, tuple(moves[m] for m in s.moves))]
    if s.kind == "mixed":
        return [(w, tuple(moves[m] for m in seq)) for seq, w in s.dist]
    return [(1.0, s.ops)]


def evolve(game: QuantumGame, ops_a: Sequence, ops_b: Sequence) -> DensityMatrix:
    """Run the schedule with fixed per-turn operators for each player."""
    it = {"A": iter(ops_a), "B": iter(ops_b)}
    rho = game.initial
    for player in game.schedule:
        rho = apply_op(rho, next(it[player]))
    return rho


def final_state(game: QuantumGame, s_a, s_b) -> DensityMatrix:
    _check_strategy(game, "A", s_a)
    _check_strategy(game, "B", s_b)
    acc = None
    for (wa, ops_a), (wb, ops_b) in itertools.product(
        _branches(game, "A", s_a), _branches(game, "B", s_b)
    ):
        term = (wa * wb) * evolve(game, ops_a, ops_b).entries
        acc = term if acc is None else acc + term
    return DensityMatrix(acc, check=False)


def play(game: QuantumGame, s_a, s_b) -> tuple[DensityMatrix, PayoffPair]:
    """Play one strategy profile and return the final board and expected payoffs."""
    sigma = final_state(game, s_a, s_b)
    probs = measure_probs(sigma)
    pa = float(probs @ np.asarray(game.payoff.payoff_a))
    if game.zero_sum:
        pb = -pa
    else:
        pb = float(probs @ np.asarray(game.payoff.payoff_b))
    return sigma, PayoffPair(pa, pb)


def expected_payoff_a(game: QuantumGame, s_a, s_b) -> float:
    return play(game, s_a, s_b)[1].p_a


def expected_payoff_b(game: QuantumGame, s_a, s_b) -> float:
    return play(game, s_a, s_b)[1].p_b

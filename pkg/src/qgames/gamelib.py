"""Concrete games: spin-flip penny game, Prisoner's Dilemma, Wiesner
identification rounds and the two-box quantum gambling game."""
from __future__ import annotations

import cmath
import functools
import json
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .equilibria import BimatrixGame
from .gamemodel import (
    F,
    N,
    PayoffPair,
    PayoffRule,
    QuantumGame,
    QuantumUnitary,
    StrategySpace,
    u2,
)
from .qcore import (
    HADAMARD,
    IDENTITY2,
    KET0,
    KET1,
    PAULI_X,
    SWAP,
    DensityMatrix,
    StateVector,
    Unitary,
    ValidationError,
    apply_unitary,
    controlled_on,
    density_from_pure,
    partial_trace,
    projective_overlap,
    tensor,
    tensor_all,
)

SQRT_HALF = 1 / math.sqrt(2)
FLIP_MOVES = (("N", N), ("F", F))


# -- spin-flip penny game --------------------------------------------------------

def _penny(name: str, schedule: tuple[str, ...]) -> QuantumGame:
    # Picard is player A, Q is player B; Picard loses when the spin ends up (outcome 0)
    space = StrategySpace(FLIP_MOVES)
    return QuantumGame(
        name=name,
        initial=density_from_pure(KET0),
        schedule=schedule,
        space_a=space,
        space_b=space,
        payoff=PayoffRule.zero_sum((-1.0, 1.0)),
        zero_sum=True,
        outcome_labels=("U", "D"),
    )


def penny_flip() -> QuantumGame:
    """Q moves, Picard moves, Q moves; the spin is measured at the end."""
    return _penny("penny-flip", ("B", "A", "B"))


def penny_flip_two_move() -> QuantumGame:
    """The penny game stopped after Picard's move."""
    return _penny("penny-flip-2move", ("B", "A"))


def penny_flip_optimal_q() -> QuantumUnitary:
    h = u2(SQRT_HALF, SQRT_HALF)
    return QuantumUnitary([h, h])


# -- Prisoner's Dilemma ------------------------------------------------------------

PD_TABLE = ((3.0, 3.0), (0.0, 5.0), (5.0, 0.0), (1.0, 1.0))


def prisoners_dilemma() -> BimatrixGame:
    a = [[PD_TABLE[0][0], PD_TABLE[1][0]], [PD_TABLE[2][0], PD_TABLE[3][0]]]
    b = [[PD_TABLE[0][1], PD_TABLE[1][1]], [PD_TABLE[2][1], PD_TABLE[3][1]]]
    return BimatrixGame(np.array(a), np.array(b), ("C", "D"), ("C", "D"))


def prisoners_dilemma_game() -> QuantumGame:
    """Prisoner's Dilemma on a two-qubit board: each player may flip their own qubit.

    Both qubits start in |0> (= C); outcome ``2 * a + b`` is read off the
    measured bits and paid according to the classical table.
    """
    space_a = StrategySpace((("C", tensor(IDENTITY2, IDENTITY2)), ("D", tensor(PAULI_X, IDENTITY2))))
    space_b = StrategySpace((("C", tensor(IDENTITY2, IDENTITY2)), ("D", tensor(IDENTITY2, PAULI_X))))
    return QuantumGame(
        name="pd",
        initial=density_from_pure(tensor(KET0, KET0)),
        schedule=("A", "B"),
        space_a=space_a,
        space_b=space_b,
        payoff=PayoffRule(tuple(x for x, _ in PD_TABLE), tuple(y for _, y in PD_TABLE)),
        zero_sum=False,
        outcome_labels=("CC", "CD", "DC", "DD"),
    )


# -- Wiesner identification game ---------------------------------------------------

@dataclass(frozen=True)
class WiesnerRound:
    variant: str
    trent_state: StateVector
    ancilla_state: StateVector | None = None
    alice_bit: int = 0
    bob_bit: int = 0

    def __post_init__(self):
        if self.variant not in ("swap", "hadamard"):
            raise ValidationError(f"unknown variant {self.variant!r}")
        if (self.ancilla_state is not None) != (self.variant == "swap"):
            raise ValidationError("ancilla state is required for the swap variant and only there")
        if self.alice_bit not in (0, 1) or self.bob_bit not in (0, 1):
            raise ValidationError("control bits must be 0 or 1")
        for s in (self.trent_state, self.ancilla_state):
            if s is not None and s.dim != 2:
                raise ValidationError("Trent's qubits must be single qubits")


@functools.lru_cache(maxsize=None)
def _wiesner_circuit(variant: str) -> tuple[Unitary, Unitary, int]:
    if variant == "swap":
        # wires: Alice, T, T', Bob
        return (controlled_on(SWAP, 0, (1, 2), 4), controlled_on(SWAP, 3, (1, 2), 4), 4)
    # wires: Alice, T, Bob
    return (controlled_on(HADAMARD, 0, (1,), 3), controlled_on(HADAMARD, 2, (1,), 3), 3)


def wiesner_board(r: WiesnerRound) -> DensityMatrix:
    """Initial board: control registers in basis states, Trent's qubits as prepared."""
    alice = KET1 if r.alice_bit else KET0
    bob = KET1 if r.bob_bit else KET0
    if r.variant == "swap":
        psi = tensor_all(alice, r.trent_state, r.ancilla_state, bob)
    else:
        psi = tensor_all(alice, r.trent_state, bob)
    return density_from_pure(psi)


def wiesner_round(r: WiesnerRound) -> tuple[float, DensityMatrix]:
    """Run Alice's then Bob's controlled gate; return Trent's pass probability and the board.

    Bob wins the round when Trent's check that his qubit is still
    ``trent_state`` succeeds.
    """
    alice_gate, bob_gate, n = _wiesner_circuit(r.variant)
    board = apply_unitary(apply_unitary(wiesner_board(r), alice_gate), bob_gate)
    trent = partial_trace(board, 1, [2] * n)
    return projective_overlap(trent, r.trent_state), board


def _hadamard_fidelity(c0, c1):
    ov = (np.conj(c0) * (c0 + c1) + np.conj(c1) * (c0 - c1)) * SQRT_HALF
    return np.abs(ov) ** 2


def wiesner_pass_probability(variant: str, alice_bits, bob_bits, trent, ancilla=None) -> np.ndarray:
    """Closed-form Trent pass probabilities for batches of rounds.

    ``trent`` and ``ancilla`` are arrays of shape (..., 2) of amplitudes.
    Matching control bits always pass; on a mismatch the swap variant passes
    with ``|<T|T'>|^2`` and the Hadamard variant with ``|<T|H|T>|^2``.
    """
    alice_bits = np.asarray(alice_bits)
    match = alice_bits == np.asarray(bob_bits)
    trent = np.asarray(trent, dtype=np.complex128)
    if variant == "swap":
        anc = np.asarray(ancilla, dtype=np.complex128)
        mismatch = np.abs(np.sum(np.conj(trent) * anc, axis=-1)) ** 2
    elif variant == "hadamard":
        mismatch = _hadamard_fidelity(trent[..., 0], trent[..., 1])
    else:
        raise ValidationError(f"unknown variant {variant!r}")
    return np.where(match, 1.0, np.minimum(mismatch, 1.0))


def hadamard_mobius(z: complex) -> complex:
    """Coordinate map ``z -> (1 - z) / (1 + z)`` of |0> + z|I> under a Hadamard.

    ``math.inf`` stands for the point at infinity (the state |I>).
    """
    if z == math.inf or (isinstance(z, complex) and cmath.isinf(z)):
        return -1.0 + 0j
    z = complex(z)
    if z == -1:
        return math.inf
    return (1 - z) / (1 + z)


def state_from_coordinate(z) -> StateVector:
    if z == math.inf or (isinstance(z, complex) and cmath.isinf(z)):
        return KET1
    return StateVector([1.0, complex(z)], normalize=True)


# -- banknote records ----------------------------------------------------------------

def _amps_to_json(s: StateVector) -> list[list[float]]:
    return [[float(a.real), float(a.imag)] for a in s.amps]


def _amps_from_json(data) -> StateVector:
    return StateVector([complex(re, im) for re, im in data])


def banknote_to_json(rounds: Sequence[WiesnerRound]) -> str:
    """Serialize the issuer's record; Bob's bits are not part of it."""
    out = []
    for r in rounds:
        rec = {"variant": r.variant, "trent_state": _amps_to_json(r.trent_state)}
        if r.ancilla_state is not None:
            rec["ancilla_state"] = _amps_to_json(r.ancilla_state)
        rec["alice_bit"] = r.alice_bit
        out.append(rec)
    return json.dumps(out)


def banknote_from_json(text: str) -> list[WiesnerRound]:
    rounds = []
    for rec in json.loads(text):
        anc = rec.get("ancilla_state")
        rounds.append(WiesnerRound(
            variant=rec["variant"],
            trent_state=_amps_from_json(rec["trent_state"]),
            ancilla_state=_amps_from_json(anc) if anc is not None else None,
            alice_bit=int(rec["alice_bit"]),
        ))
    return rounds


def authenticate(rounds: Sequence[WiesnerRound], bob_bits: Iterable[int]) -> float:
    """Probability that a holder playing ``bob_bits`` passes every recorded round."""
    bob_bits = list(bob_bits)
    if len(bob_bits) != len(rounds):
        raise ValidationError("one Bob bit per recorded round is required")
    prob = 1.0
    for r, b in zip(rounds, bob_bits):
        replay = WiesnerRound(r.variant, r.trent_state, r.ancilla_state, r.alice_bit, int(b))
        prob *= wiesner_round(replay)[0]
    return prob


# -- two-box gambling ------------------------------------------------------------------

PSI0 = StateVector([SQRT_HALF, SQRT_HALF])
BOX_A = KET0
BOX_B = KET1


@dataclass(frozen=True)
class GvwSetup:
    alice_state: StateVector = PSI0
    r: float = 1.0
    bob_verify_prob: float = 0.0

    def __post_init__(self):
        if self.alice_state.dim != 2:
            raise ValidationError("Alice's state lives on the two-box space")
        if not (math.isfinite(self.r) and self.r > 0):
            raise ValidationError(f"reward R must be finite and positive, got {self.r!r}")
        if not 0.0 <= self.bob_verify_prob <= 1.0:
            raise ValidationError(f"verify probability {self.bob_verify_prob!r} outside [0, 1]")


def alice_interpolated(t: float) -> StateVector:
    """Real interpolation from the honest state (t = 0) to all-in-box-A (t = 1)."""
    if not 0.0 <= t <= 1.0:
        raise ValidationError(f"interpolation parameter {t!r} outside [0, 1]")
    return StateVector((1 - t) * PSI0.amps + t * BOX_A.amps, normalize=True)


@dataclass(frozen=True)
class GvwOdds:
    find_prob: float
    verify_pass_prob: float


def gvw_odds(rho: DensityMatrix) -> GvwOdds:
    """Chance Bob finds the particle in box B, and chance Alice passes verification."""
    return GvwOdds(projective_overlap(rho, BOX_B), projective_overlap(rho, PSI0))


def _alice_density(s: GvwSetup, alice_mixed) -> DensityMatrix:
    if alice_mixed is None:
        return density_from_pure(s.alice_state)
    items = list(alice_mixed)
    weights = np.array([w for w, _ in items], dtype=float)
    if not items or np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-12:
        raise ValidationError("Alice's mixture weights must form a distribution")
    acc = sum(w * density_from_pure(psi).entries for w, psi in items)
    return DensityMatrix(acc)


def gvw_expected_gains(s: GvwSetup, alice_mixed=None) -> PayoffPair:
    """Exact expected gains (Alice, Bob).

    Bob verifies with probability v and otherwise opens box B.  Opening: +1 if
    he finds the particle, -1 otherwise.  Verifying: +R if Alice's preparation
    fails the test for the honest state, -1 if it passes.  ``alice_mixed`` is
    an optional list of (weight, StateVector) replacing ``s.alice_state``.
    """
    odds = gvw_odds(_alice_density(s, alice_mixed))
    v, r = s.bob_verify_prob, s.r
    open_gain = odds.find_prob - (1 - odds.find_prob)
    verify_gain = (1 - odds.verify_pass_prob) * r - odds.verify_pass_prob
    bob = (1 - v) * open_gain + v * verify_gain
    return PayoffPair(-bob, bob)


GAMES = {
    "penny-flip": penny_flip,
    "penny-flip-2move": penny_flip_two_move,
    "pd": prisoners_dilemma_game,
}

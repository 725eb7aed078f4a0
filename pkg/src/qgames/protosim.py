"""Seeded Monte Carlo for repeated Wiesner forgery attempts and two-box gambling.

Random numbers come from splitmix64.  Trial ``t`` owns the stream
``key_t = mix(seed + (t + 1) * GOLDEN)`` and its ``k``-th draw is
``mix(key_t + (k + 1) * GOLDEN)``, so a trial's outcome depends only on
``(seed, t)``.  Trials are processed in chunks (optionally on a thread pool)
and merged through integer counters, which makes results independent of the
chunking and of the number of workers.
"""
from __future__ import annotations

import csv
import io
import logging
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Iterable, Sequence

import numpy as np

from .gamelib import GvwSetup, gvw_odds, wiesner_pass_probability
from .qcore import density_from_pure

log = logging.getLogger(__name__)

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1

TRENT_POLICIES = ("haar", "two_point")
BOB_POLICIES = ("uniform_guess", "fixed_bit", "copy_after_measure")
VARIANTS = ("swap", "hadamard")

# fixed draw layout per Wiesner round
_ALICE, _BOB, _T1, _T2, _A1, _A2, _VERIFY = range(7)
DRAWS_PER_ROUND = 7
CHUNK = 16384


def mix64(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer on uint64 arrays (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def trial_keys(seed: int, trial_idx: np.ndarray) -> np.ndarray:
    t = np.asarray(trial_idx, dtype=np.uint64)
    return mix64(np.uint64(seed & _MASK64) + (t + np.uint64(1)) * GOLDEN)


def uniforms(seed: int, trial_idx: np.ndarray, draws: int) -> np.ndarray:
    """Doubles in [0, 1), shape (len(trial_idx), draws)."""
    keys = trial_keys(seed, trial_idx)[:, None]
    k = np.arange(1, draws + 1, dtype=np.uint64)[None, :]
    bits = mix64(keys + k * GOLDEN)
    return (bits >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


@dataclass(frozen=True)
class SimConfig:
    trials: int
    rounds_per_trial: int = 1
    master_seed: int = 0
    trent_policy: str = "two_point"
    bob_policy: str = "uniform_guess"
    variant: str = "hadamard"

    def __post_init__(self):
        if self.trials < 1 or self.rounds_per_trial < 1:
            raise ValueError("trials and rounds_per_trial must be at least 1")
        if not 0 <= self.master_seed <= _MASK64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")
        if self.trent_policy not in TRENT_POLICIES:
            raise ValueError(f"unknown trent_policy {self.trent_policy!r}")
        if self.bob_policy not in BOB_POLICIES:
            raise ValueError(f"unknown bob_policy {self.bob_policy!r}")
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")


@dataclass(frozen=True)
class ProtocolResult:
    trials: int
    successes: int
    success_rate: float
    std_error: float
    per_round_rate: float
    mean_gain_a: float | None
    mean_gain_b: float | None
    seed_used: int
    gain_std_error: float | None = None

    def to_dict(self) -> dict:
        return asdict(self)


def _binomial(successes: int, trials: int) -> tuple[float, float]:
    p = successes / trials
    return p, math.sqrt(p * (1 - p) / trials)


def _chunks(trials: int) -> list[np.ndarray]:
    return [np.arange(s, min(s + CHUNK, trials), dtype=np.uint64) for s in range(0, trials, CHUNK)]


def _run_chunks(fn, trials: int, workers: int) -> list:
    chunks = _chunks(trials)
    if workers <= 1 or len(chunks) == 1:
        return [fn(c) for c in chunks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, chunks))


def haar_qubits(u_z: np.ndarray, u_phi: np.ndarray) -> np.ndarray:
    """Haar-random qubit amplitudes: z uniform on [-1, 1], azimuth uniform on [0, 2 pi)."""
    z = 2.0 * u_z - 1.0
    phi = 2.0 * math.pi * u_phi
    c0 = np.sqrt((1.0 + z) / 2.0)
    c1 = np.sqrt((1.0 - z) / 2.0) * np.exp(1j * phi)
    return np.stack([c0 + 0j, c1], axis=-1)


def _trent_states(policy: str, u1: np.ndarray, u2: np.ndarray) -> np.ndarray:
    if policy == "haar":
        return haar_qubits(u1, u2)
    one = u1 < 0.5
    return np.stack([np.where(one, 0.0, 1.0), np.where(one, 1.0, 0.0)], axis=-1).astype(np.complex128)


def _wiesner_chunk(cfg: SimConfig, idx: np.ndarray) -> int:
    n = cfg.rounds_per_trial
    u = uniforms(cfg.master_seed, idx, n * DRAWS_PER_ROUND).reshape(len(idx), n, DRAWS_PER_ROUND)
    alice = (u[..., _ALICE] < 0.5).astype(np.int8)
    if cfg.bob_policy == "uniform_guess":
        bob = (u[..., _BOB] < 0.5).astype(np.int8)
    elif cfg.bob_policy == "fixed_bit":
        bob = np.zeros_like(alice)
    else:
        # Alice's control register holds a basis state: reading it reveals her bit
        bob = alice.copy()
    trent = _trent_states(cfg.trent_policy, u[..., _T1], u[..., _T2])
    ancilla = _trent_states(cfg.trent_policy, u[..., _A1], u[..., _A2]) if cfg.variant == "swap" else None
    p_pass = wiesner_pass_probability(cfg.variant, alice, bob, trent, ancilla)
    passed = u[..., _VERIFY] < p_pass
    return int(np.count_nonzero(passed.all(axis=1)))


def simulate_wiesner(cfg: SimConfig, workers: int = 1) -> ProtocolResult:
    """Each trial is a banknote of ``rounds_per_trial`` rounds; it succeeds iff every round passes."""
    counts = _run_chunks(lambda idx: _wiesner_chunk(cfg, idx), cfg.trials, workers)
    successes = sum(counts)
    rate, se = _binomial(successes, cfg.trials)
    per_round = rate ** (1.0 / cfg.rounds_per_trial) if rate > 0 else 0.0
    return ProtocolResult(cfg.trials, successes, rate, se, per_round, None, None, cfg.master_seed)


def simulate_gvw(setup: GvwSetup, cfg: SimConfig, workers: int = 1) -> ProtocolResult:
    """One gamble per trial; Bob's verify/open choice and the quantum outcome are sampled.

    Outcome probabilities are the exact Born probabilities for Alice's state;
    only the classical draws are simulated.
    """
    odds = gvw_odds(density_from_pure(setup.alice_state))
    v = setup.bob_verify_prob

    def chunk(idx):
        u = uniforms(cfg.master_seed, idx, 2)
        verify = u[:, 0] < v
        hit = u[:, 1] < np.where(verify, odds.verify_pass_prob, odds.find_prob)
        # counters: open+found, open+missed, verify+failed, verify+passed
        return np.array([
            np.count_nonzero(~verify & hit),
            np.count_nonzero(~verify & ~hit),
            np.count_nonzero(verify & ~hit),
            np.count_nonzero(verify & hit),
        ], dtype=np.int64)

    counts = sum(_run_chunks(chunk, cfg.trials, workers))
    gains = np.array([1.0, -1.0, setup.r, -1.0])
    n = cfg.trials
    mean = float(counts @ gains) / n
    var = float(counts @ (gains - mean) ** 2) / (n - 1) if n > 1 else 0.0
    successes = int(counts[0] + counts[2])
    rate, se = _binomial(successes, n)
    return ProtocolResult(n, successes, rate, se, rate, -mean, mean, cfg.master_seed, math.sqrt(var / n))


def sweep_wiesner(cfg: SimConfig, rounds: Iterable[int], workers: int = 1) -> list[tuple[int, ProtocolResult]]:
    out = []
    for n in rounds:
        c = SimConfig(cfg.trials, n, cfg.master_seed, cfg.trent_policy, cfg.bob_policy, cfg.variant)
        out.append((n, simulate_wiesner(c, workers)))
        log.info("n=%d rate=%.6g", n, out[-1][1].success_rate)
    return out


def sweep_csv(rows: Sequence[tuple[int, ProtocolResult]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "rate", "std_error"])
    for n, res in rows:
        w.writerow([n, format(res.success_rate, ".17g"), format(res.std_error, ".17g")])
    return buf.getvalue()


@dataclass(frozen=True)
class ExponentFit:
    per_round: float
    r_squared: float


def exponent_fit(rates: Sequence[tuple[int, float]], trials: int | None = None) -> ExponentFit:
    """Least-squares line through ``log(rate)`` against ``n``; returns ``exp(slope)``.

    With ``trials`` given, points below the resolution floor ``1 / trials``
    are dropped with a warning.
    """
    pts = [(float(n), float(r)) for n, r in rates]
    if trials is not None:
        floor = 1.0 / trials
        kept = [(n, r) for n, r in pts if r >= floor]
        if len(kept) < len(pts):
            warnings.warn(f"dropped {len(pts) - len(kept)} point(s) below rate floor {floor:g}")
        pts = kept
    if len(pts) < 3:
        raise ValueError("exponent_fit needs at least 3 points")
    if any(r <= 0 for _, r in pts):
        raise ValueError("rates must be positive")
    x = np.array([n for n, _ in pts])
    y = np.log([r for _, r in pts])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot <= 1e-300 else 1.0 - ss_res / ss_tot
    return ExponentFit(math.exp(slope), r2)

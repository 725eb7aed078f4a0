"""Solution concepts for bimatrix games and grid-discretised quantum games.

Bimatrix routines compare payoffs exactly (weak dominance, ``>=``).  The grid
routines work on floating-point payoffs evaluated from density matrices, so
they compare against a small absolute tie tolerance instead.

``grid_nash`` only certifies equilibria relative to the grid it enumerates;
nothing is claimed about deviations that fall between grid points.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .gamemodel import (
    MixedClassical,
    PureClassical,
    QuantumGame,
    QuantumUnitary,
    _branches,
    _check_strategy,
    u2_angles,
)
from .qcore import Channel, Unitary

TIE_TOL = 1e-12
DEFAULT_EPSILON = 1e-6
DEFAULT_RESOLUTION = 21


class EmptyDomainError(ValueError):
    pass


# -- bimatrix games -------------------------------------------------------------

@dataclass(frozen=True)
class BimatrixGame:
    payoff_a: np.ndarray
    payoff_b: np.ndarray
    row_labels: tuple[str, ...] = ()
    col_labels: tuple[str, ...] = ()

    def __post_init__(self):
        a = np.array(self.payoff_a, dtype=float)
        b = np.array(self.payoff_b, dtype=float)
        if a.ndim != 2 or a.shape != b.shape:
            raise ValueError(f"payoff shapes {a.shape} and {b.shape} do not match")
        if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
            raise ValueError("payoffs must be finite")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "payoff_a", a)
        object.__setattr__(self, "payoff_b", b)
        rows, cols = a.shape
        if not self.row_labels:
            object.__setattr__(self, "row_labels", tuple(str(i) for i in range(rows)))
        if not self.col_labels:
            object.__setattr__(self, "col_labels", tuple(str(j) for j in range(cols)))
        if len(self.row_labels) != rows or len(self.col_labels) != cols:
            raise ValueError("label counts do not match the payoff shape")

    @property
    def rows(self) -> int:
        return self.payoff_a.shape[0]

    @property
    def cols(self) -> int:
        return self.payoff_a.shape[1]


def dominant_strategies(g: BimatrixGame, tol: float = 0.0) -> tuple[list[int], list[int]]:
    """Weakly dominant rows for A and columns for B."""
    a, b = g.payoff_a, g.payoff_b
    rows = [r for r in range(g.rows) if np.all(a[r, :] >= a.max(axis=0) - tol)]
    cols = [c for c in range(g.cols) if np.all(b[:, c] >= b.max(axis=1) - tol)]
    return rows, cols


def pure_nash(g: BimatrixGame, epsilon: float = 0.0) -> list[tuple[int, int]]:
    """Cells where no unilateral deviation gains the deviator more than ``epsilon``."""
    a, b = g.payoff_a, g.payoff_b
    gain_a = a.max(axis=0)[None, :] - a
    gain_b = b.max(axis=1)[:, None] - b
    ok = (gain_a <= epsilon) & (gain_b <= epsilon)
    return [(int(r), int(c)) for r, c in zip(*np.nonzero(ok))]


def _pareto_mask(pa: np.ndarray, pb: np.ndarray, candidates: np.ndarray, tol: float) -> np.ndarray:
    """True for candidates no cell beats by more than ``tol`` in one payoff while staying within ``tol`` in the other.

    A cell (x, y) is dominated iff some cell has ``pa > x + tol`` and
    ``pb >= y - tol``, or ``pa >= x - tol`` and ``pb > y + tol``.  Both reduce
    to the largest ``pb`` among cells with ``pa`` above a threshold, read off
    suffix maxima of the cells sorted by ``pa``.
    """
    order = np.argsort(pa, kind="stable")
    sorted_pa = pa[order]
    suffix_max = np.append(np.maximum.accumulate(pb[order][::-1])[::-1], -np.inf)
    x, y = pa[candidates], pb[candidates]
    beat_a = suffix_max[np.searchsorted(sorted_pa, x + tol, side="right")] >= y - tol
    beat_b = suffix_max[np.searchsorted(sorted_pa, x - tol, side="left")] > y + tol
    return ~(beat_a | beat_b)


def pareto_front(g: BimatrixGame) -> list[tuple[int, int]]:
    """Cells whose payoff pair no other cell strictly Pareto-dominates."""
    pa = g.payoff_a.ravel()
    pb = g.payoff_b.ravel()
    mask = _pareto_mask(pa, pb, np.arange(pa.size), 0.0)
    return [divmod(int(k), g.cols) for k in np.nonzero(mask)[0]]


@dataclass(frozen=True)
class MixedProfile:
    row_dist: tuple[float, ...]
    col_dist: tuple[float, ...]

    def __post_init__(self):
        for d in (self.row_dist, self.col_dist):
            if min(d) < 0 or abs(sum(d) - 1.0) > TIE_TOL:
                raise ValueError(f"{d} is not a probability vector")


def is_degenerate_2x2(g: BimatrixGame) -> bool:
    """True when some pure strategy has tied pure best responses."""
    a, b = g.payoff_a, g.payoff_b
    return bool(np.any(a[0, :] == a[1, :]) or np.any(b[:, 0] == b[:, 1]))


def _indifference(c1: float, c0: float) -> float | None:
    # root of c1 * x + c0 * (1 - x) = 0 inside [0, 1]
    denom = c1 - c0
    if denom == 0:
        return None
    x = -c0 / denom
    return x if 0.0 <= x <= 1.0 else None


def mixed_nash_2x2(g: BimatrixGame) -> list[MixedProfile]:
    """All equilibria of a 2x2 game (extreme points of each component when degenerate).

    ``p`` is the probability of row 0, ``q`` of column 0.  Every equilibrium
    component is a polytope whose vertices have ``p`` in {0, 1, p*} and ``q`` in
    {0, 1, q*}, where p*, q* are the indifference points, so checking those
    nine candidates is exhaustive.
    """
    if (g.rows, g.cols) != (2, 2):
        raise ValueError("mixed_nash_2x2 needs a 2x2 game")
    a, b = g.payoff_a, g.payoff_b
    scale = max(1.0, float(np.abs(a).max()), float(np.abs(b).max()))
    tol = TIE_TOL * scale
    # row 0 advantage over row 1 as a function of q; column 0 advantage as a function of p
    q_star = _indifference(a[0, 0] - a[1, 0], a[0, 1] - a[1, 1])
    p_star = _indifference(b[0, 0] - b[0, 1], b[1, 0] - b[1, 1])
    ps = sorted({0.0, 1.0} | ({p_star} if p_star is not None else set()), reverse=True)
    qs = sorted({0.0, 1.0} | ({q_star} if q_star is not None else set()), reverse=True)
    found = []
    for p, q in itertools.product(ps, qs):
        row = np.array([p, 1 - p])
        col = np.array([q, 1 - q])
        ua = a @ col
        ub = row @ b
        if row @ ua >= ua.max() - tol and ub @ col >= ub.max() - tol:
            found.append(MixedProfile((p, 1 - p), (q, 1 - q)))
    return found


# -- strategy domains for grid search ------------------------------------------

@dataclass(frozen=True)
class GridPoint:
    params: dict
    strategy: Any


def _axis(lo: float, hi: float, resolution: int, periodic: bool = False) -> np.ndarray:
    if lo > hi:
        raise EmptyDomainError(f"empty interval [{lo}, {hi}]")
    if lo == hi:
        return np.array([lo])
    if periodic and math.isclose(hi - lo, 2 * math.pi):
        return lo + (hi - lo) * np.arange(resolution) / resolution
    return np.linspace(lo, hi, resolution)


@dataclass(frozen=True)
class MixedDomain:
    """Per-turn flip probability ``p`` over ``[lo, hi]``."""

    lo: float = 0.0
    hi: float = 1.0

    def points(self, game: QuantumGame, player: str, resolution: int) -> list[GridPoint]:
        if not (0.0 <= self.lo and self.hi <= 1.0):
            raise EmptyDomainError(f"flip probabilities must lie in [0, 1], got [{self.lo}, {self.hi}]")
        axis = _axis(self.lo, self.hi, resolution)
        out = []
        for ps in itertools.product(axis, repeat=game.turns(player)):
            ps = [float(p) for p in ps]
            out.append(GridPoint({"kind": "mixed", "p": ps}, MixedClassical.per_turn(ps)))
        return out

    def describe(self) -> dict:
        return {"kind": "mixed", "p": [self.lo, self.hi]}


@dataclass(frozen=True)
class U2Domain:
    """SU(2)-style box: ``a = cos(alpha) e^{i phi1}``, ``b = sin(alpha) e^{i phi2}`` per turn.

    Phase intervals spanning a full period are gridded without the duplicate
    endpoint.
    """

    alpha: tuple[float, float] = (0.0, math.pi / 2)
    phi1: tuple[float, float] = (0.0, 2 * math.pi)
    phi2: tuple[float, float] = (0.0, 2 * math.pi)

    def points(self, game: QuantumGame, player: str, resolution: int) -> list[GridPoint]:
        if game.dim != 2:
            raise EmptyDomainError("u2 strategies need a single-qubit board")
        al = _axis(*self.alpha, resolution)
        p1 = _axis(*self.phi1, resolution, periodic=True)
        p2 = _axis(*self.phi2, resolution, periodic=True)
        per_turn = list(itertools.product(al, p1, p2))
        out = []
        for combo in itertools.product(per_turn, repeat=game.turns(player)):
            triples = [[float(x) for x in t] for t in combo]
            ops = [u2_angles(*t) for t in triples]
            out.append(GridPoint({"kind": "u2", "angles": triples}, QuantumUnitary(ops)))
        return out

    def describe(self) -> dict:
        return {"kind": "u2", "alpha": list(self.alpha), "phi1": list(self.phi1), "phi2": list(self.phi2)}


@dataclass(frozen=True)
class PureDomain:
    """Every pure move sequence of the player."""

    def points(self, game: QuantumGame, player: str, resolution: int) -> list[GridPoint]:
        labels = game.space(player).labels()
        if not labels:
            raise EmptyDomainError(f"player {player} has no classical moves")
        out = []
        for seq in itertools.product(range(len(labels)), repeat=game.turns(player)):
            out.append(GridPoint({"kind": "pure", "moves": [labels[m] for m in seq]}, PureClassical(seq)))
        return out

    def describe(self) -> dict:
        return {"kind": "pure"}


@dataclass(frozen=True)
class FixedDomain:
    strategy: Any
    params: dict = field(default_factory=lambda: {"kind": "fixed"})

    def points(self, game: QuantumGame, player: str, resolution: int) -> list[GridPoint]:
        return [GridPoint(dict(self.params), self.strategy)]

    def describe(self) -> dict:
        return dict(self.params)


# -- batched evaluation ----------------------------------------------------------

def _superop(op) -> np.ndarray:
    if isinstance(op, Unitary):
        u = op.entries
        return np.kron(u, u.conj())
    if isinstance(op, Channel):
        return op.superoperator()
    raise TypeError(f"cannot turn {type(op).__name__} into a superoperator")


def _branch_table(game: QuantumGame, player: str, strategies: Sequence) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-turn superoperators for every pure branch, branch weights, and each strategy's first branch.

    Branches of one strategy are contiguous, so per-strategy sums are segment sums.
    """
    ops, weights, starts = [], [], []
    for s in strategies:
        _check_strategy(game, player, s)
        starts.append(len(ops))
        for w, seq in _branches(game, player, s):
            ops.append([_superop(o) for o in seq])
            weights.append(w)
    turns = game.turns(player)
    d2 = game.dim**2
    table = np.empty((turns, len(ops), d2, d2), dtype=np.complex128)
    for k, seq in enumerate(ops):
        for t, s in enumerate(seq):
            table[t, k] = s
    return table, np.asarray(weights, dtype=float), np.asarray(starts, dtype=np.intp)


def payoff_matrices(game: QuantumGame, strategies_a: Sequence, strategies_b: Sequence) -> tuple[np.ndarray, np.ndarray]:
    """Expected payoffs of every profile, evaluated in one batched pass.

    Equivalent to calling ``play`` on each pair: each strategy is split into
    weighted deterministic branches, the branches are evolved together as
    superoperators and the branch payoffs are recombined with the weights.
    """
    ta, wa, sa = _branch_table(game, "A", strategies_a)
    tb, wb, sb = _branch_table(game, "B", strategies_b)

    def combine(branch):
        weighted = branch * wa[:, None] * wb[None, :]
        return np.add.reduceat(np.add.reduceat(weighted, sa, axis=0), sb, axis=1)

    d = game.dim
    vec0 = game.initial.entries.reshape(-1)
    states = np.broadcast_to(vec0, (ta.shape[1], tb.shape[1], d * d)).copy()
    turn = {"A": 0, "B": 0}
    for player in game.schedule:
        t = turn[player]
        turn[player] += 1
        if player == "A":
            states = np.einsum("aij,abj->abi", ta[t], states)
        else:
            states = np.einsum("bij,abj->abi", tb[t], states)
    diag = states[:, :, :: d + 1].real
    branch_a = diag @ np.asarray(game.payoff.payoff_a, dtype=float)
    ma = combine(branch_a)
    if game.zero_sum:
        mb = -ma
    else:
        branch_b = diag @ np.asarray(game.payoff.payoff_b, dtype=float)
        mb = combine(branch_b)
    return ma, mb


def to_bimatrix(game: QuantumGame) -> BimatrixGame:
    """Normal form of the game restricted to pure classical strategies."""
    pa = PureDomain().points(game, "A", 0)
    pb = PureDomain().points(game, "B", 0)
    ma, mb = payoff_matrices(game, [p.strategy for p in pa], [p.strategy for p in pb])
    return BimatrixGame(
        np.round(ma, 12) + 0.0,
        np.round(mb, 12) + 0.0,
        tuple(",".join(p.params["moves"]) for p in pa),
        tuple(",".join(p.params["moves"]) for p in pb),
    )


# -- reports ---------------------------------------------------------------------

@dataclass
class ProfileEntry:
    profile: dict
    payoffs: tuple[float, float]
    dominant_a: bool
    dominant_b: bool
    nash: bool
    pareto: bool

    def flags(self) -> dict:
        return {"dominant_a": self.dominant_a, "dominant_b": self.dominant_b,
                "nash": self.nash, "pareto": self.pareto}


@dataclass
class EquilibriumReport:
    profiles: list[ProfileEntry]
    grid_meta: dict
    degenerate: bool = False
    mixed: list[MixedProfile] = field(default_factory=list)


def _flag_profiles(ma, mb, epsilon, tol, keep_all):
    gain_a = ma.max(axis=0)[None, :] - ma
    gain_b = mb.max(axis=1)[:, None] - mb
    nash = (gain_a <= epsilon + tol) & (gain_b <= epsilon + tol) if math.isfinite(epsilon) else np.ones(ma.shape, bool)
    dom_a = np.all(gain_a <= tol, axis=1)
    dom_b = np.all(gain_b <= tol, axis=0)
    cells = np.argwhere(np.ones_like(nash) if keep_all else nash)
    flat = cells[:, 0] * ma.shape[1] + cells[:, 1]
    pareto = _pareto_mask(ma.ravel(), mb.ravel(), flat, tol)
    return [(int(i), int(j), bool(dom_a[i]), bool(dom_b[j]), bool(nash[i, j]), bool(pareto[k]))
            for k, (i, j) in enumerate(cells)]


def bimatrix_report(g: BimatrixGame, epsilon: float = 0.0, keep_all: bool = False) -> EquilibriumReport:
    profiles = []
    for i, j, da, db, ne, po in _flag_profiles(g.payoff_a, g.payoff_b, epsilon, 0.0, keep_all):
        profiles.append(ProfileEntry(
            {"a": g.row_labels[i], "b": g.col_labels[j]},
            (float(g.payoff_a[i, j]), float(g.payoff_b[i, j])),
            da, db, ne, po,
        ))
    meta = {"mode": "bimatrix", "shape": [g.rows, g.cols], "epsilon": epsilon}
    report = EquilibriumReport(profiles, meta)
    if (g.rows, g.cols) == (2, 2):
        report.mixed = mixed_nash_2x2(g)
        report.degenerate = is_degenerate_2x2(g)
    return report


def _grid(game, domain, player, resolution):
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    pts = domain.points(game, player, resolution)
    if not pts:
        raise EmptyDomainError(f"empty strategy domain for player {player}")
    return pts


def grid_nash(
    game: QuantumGame,
    domain_a,
    domain_b,
    resolution: int = DEFAULT_RESOLUTION,
    epsilon: float = DEFAULT_EPSILON,
    keep_all: bool = False,
) -> EquilibriumReport:
    """Flag epsilon-Nash profiles on the product grid of the two strategy domains."""
    pa = _grid(game, domain_a, "A", resolution)
    pb = _grid(game, domain_b, "B", resolution)
    ma, mb = payoff_matrices(game, [p.strategy for p in pa], [p.strategy for p in pb])
    profiles = []
    for i, j, da, db, ne, po in _flag_profiles(ma, mb, epsilon, TIE_TOL, keep_all):
        profiles.append(ProfileEntry(
            {"a": pa[i].params, "b": pb[j].params},
            (float(ma[i, j]), float(mb[i, j])),
            da, db, ne, po,
        ))
    meta = {
        "mode": "grid",
        "resolution": resolution,
        "epsilon": epsilon,
        "domain_a": domain_a.describe(),
        "domain_b": domain_b.describe(),
        "points_a": len(pa),
        "points_b": len(pb),
        "flagged": sum(p.nash for p in profiles),
    }
    return EquilibriumReport(profiles, meta)


def best_response_point(game: QuantumGame, opponent, domain, resolution: int = DEFAULT_RESOLUTION,
                        responder: str = "A") -> tuple[GridPoint, float]:
    pts = _grid(game, domain, responder, resolution)
    strats = [p.strategy for p in pts]
    if responder == "A":
        values = payoff_matrices(game, strats, [opponent])[0][:, 0]
    else:
        values = payoff_matrices(game, [opponent], strats)[1][0, :]
    # first grid index within the tie tolerance of the maximum
    k = int(np.argmax(values >= values.max() - TIE_TOL))
    return pts[k], float(values[k])


def best_response(game: QuantumGame, opponent, domain, resolution: int = DEFAULT_RESOLUTION,
                  responder: str = "A"):
    """Grid argmax of the responder's expected payoff against a fixed opponent."""
    point, value = best_response_point(game, opponent, domain, resolution, responder)
    return point.strategy, value


__all__ = [
    "BimatrixGame", "MixedProfile", "EquilibriumReport", "ProfileEntry", "GridPoint",
    "MixedDomain", "U2Domain", "PureDomain", "FixedDomain", "EmptyDomainError",
    "dominant_strategies", "pure_nash", "pareto_front", "mixed_nash_2x2", "is_degenerate_2x2",
    "payoff_matrices", "to_bimatrix", "bimatrix_report", "grid_nash",
    "best_response", "best_response_point",
]

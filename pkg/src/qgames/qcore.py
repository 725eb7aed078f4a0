"""Dense quantum-state primitives for small game boards.

Everything here is a thin, validated wrapper around a complex128 numpy array.
Values are immutable after construction (the backing arrays are flagged
read-only) and every operation returns a new object.

Qubit ordering: the leftmost tensor factor is the most significant index, so
``tensor(ket0, ket1)`` is basis vector 1 of a 4-dimensional space.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

CONSTRUCT_TOL = 1e-9
CONSERVE_TOL = 1e-12
MAX_DIM = 2**10


class ValidationError(ValueError):
    """Raised when a matrix or vector violates its type invariants."""


class DimensionError(ValueError):
    """Raised when operand dimensions do not agree."""


def _frozen(arr) -> np.ndarray:
    a = np.array(arr, dtype=np.complex128, copy=True)
    if not np.all(np.isfinite(a)):
        raise ValidationError("non-finite entries")
    a.setflags(write=False)
    return a


def _check_square(a: np.ndarray) -> int:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"expected a square matrix, got shape {a.shape}")
    dim = a.shape[0]
    if not 1 <= dim <= MAX_DIM:
        raise ValidationError(f"dimension {dim} outside [1, {MAX_DIM}]")
    return dim


@dataclass(frozen=True, eq=False)
class StateVector:
    amps: np.ndarray

    def __init__(self, amps, *, normalize: bool = False):
        a = np.array(amps, dtype=np.complex128).reshape(-1)
        if normalize:
            n = np.linalg.norm(a)
            if n == 0:
                raise ValidationError("cannot normalize the zero vector")
            a = a / n
        a = _frozen(a)
        if not 1 <= a.size <= MAX_DIM:
            raise ValidationError(f"dimension {a.size} outside [1, {MAX_DIM}]")
        norm2 = float(np.vdot(a, a).real)
        if abs(norm2 - 1.0) > CONSTRUCT_TOL:
            raise ValidationError(f"state not normalized (|psi|^2 = {norm2!r})")
        object.__setattr__(self, "amps", a)

    @property
    def dim(self) -> int:
        return self.amps.size

    @classmethod
    def basis(cls, index: int, dim: int = 2) -> StateVector:
        a = np.zeros(dim, dtype=np.complex128)
        a[index] = 1.0
        return cls(a)

    def __repr__(self):
        return f"StateVector({self.amps!r})"


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    entries: np.ndarray

    def __init__(self, entries, *, check: bool = True):
        a = _frozen(entries)
        _check_square(a)
        if check:
            _check_density(a)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def maximally_mixed(cls, dim: int) -> DensityMatrix:
        return cls(np.eye(dim) / dim)

    def trace(self) -> complex:
        return complex(np.trace(self.entries))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries).min())

    def allclose(self, other: DensityMatrix, atol: float = CONSERVE_TOL) -> bool:
        return self.dim == other.dim and np.allclose(
            self.entries, other.entries, rtol=0, atol=atol
        )

    def __repr__(self):
        return f"DensityMatrix({self.entries!r})"


def _check_density(a: np.ndarray) -> None:
    if np.max(np.abs(a - a.conj().T)) > CONSTRUCT_TOL:
        raise ValidationError("density matrix is not Hermitian")
    tr = np.trace(a)
    if abs(tr - 1.0) > CONSTRUCT_TOL:
        raise ValidationError(f"density matrix trace {tr!r} != 1")
    herm = (a + a.conj().T) / 2
    lam = np.linalg.eigvalsh(herm).min()
    if lam < -CONSTRUCT_TOL:
        raise ValidationError(f"density matrix has negative eigenvalue {lam!r}")


@dataclass(frozen=True, eq=False)
class Unitary:
    entries: np.ndarray

    def __init__(self, entries):
        a = _frozen(entries)
        dim = _check_square(a)
        dev = np.max(np.abs(a.conj().T @ a - np.eye(dim)))
        if dev > CONSTRUCT_TOL:
            raise ValidationError(f"matrix is not unitary (max |U^dag U - I| = {dev:.3g})")
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def dagger(self) -> Unitary:
        return Unitary(self.entries.conj().T)

    def __matmul__(self, other: Unitary) -> Unitary:
        if not isinstance(other, Unitary):
            return NotImplemented
        if other.dim != self.dim:
            raise DimensionError(f"cannot compose dims {self.dim} and {other.dim}")
        return Unitary(self.entries @ other.entries)

    @classmethod
    def identity(cls, dim: int) -> Unitary:
        return cls(np.eye(dim))

    def __repr__(self):
        return f"Unitary({self.entries!r})"


class Channel:
    """A CPTP map given by Kraus operators.

    Build from a Kraus list directly, or with :meth:`convex` from a mixture of
    unitaries; the mixture form is kept and used when applying the channel so
    that ``p F rho F^dag + (1 - p) N rho N^dag`` is evaluated literally.
    """

    __slots__ = ("kraus", "mixture")

    def __init__(self, kraus: Sequence, *, _mixture=None):
        ops = [_frozen(k) for k in kraus]
        if not ops:
            raise ValidationError("a channel needs at least one Kraus operator")
        dim = _check_square(ops[0])
        for k in ops:
            if k.shape != (dim, dim):
                raise ValidationError("Kraus operators have mismatched shapes")
        completeness = sum(k.conj().T @ k for k in ops)
        dev = np.max(np.abs(completeness - np.eye(dim)))
        if dev > CONSTRUCT_TOL:
            raise ValidationError(f"Kraus completeness violated (max dev {dev:.3g})")
        object.__setattr__(self, "kraus", tuple(ops))
        object.__setattr__(self, "mixture", _mixture)

    def __setattr__(self, name, value):
        raise AttributeError("Channel is immutable")

    @classmethod
    def convex(cls, terms: Sequence[tuple[float, Unitary]]) -> Channel:
        """Channel ``rho -> sum_i w_i U_i rho U_i^dag``."""
        terms = [(float(w), u) for w, u in terms]
        if not terms:
            raise ValidationError("empty mixture")
        weights = np.array([w for w, _ in terms])
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > CONSERVE_TOL:
            raise ValidationError(f"mixture weights {weights.tolist()} are not a distribution")
        dims = {u.dim for _, u in terms}
        if len(dims) != 1:
            raise ValidationError("mixture unitaries have mismatched dimensions")
        kraus = [np.sqrt(w) * u.entries for w, u in terms]
        return cls(kraus, _mixture=tuple(terms))

    @classmethod
    def from_unitary(cls, u: Unitary) -> Channel:
        return cls.convex([(1.0, u)])

    @property
    def dim(self) -> int:
        return self.kraus[0].shape[0]

    def superoperator(self) -> np.ndarray:
        """Matrix S with vec(E(rho)) = S vec(rho) for row-major vec."""
        return sum(np.kron(k, k.conj()) for k in self.kraus)

    def __repr__(self):
        if self.mixture is not None:
            return f"Channel.convex({[(w, u.entries.tolist()) for w, u in self.mixture]})"
        return f"Channel({len(self.kraus)} Kraus ops, dim={self.dim})"


def density_from_pure(psi: StateVector) -> DensityMatrix:
    """Return the projector ``|psi><psi|``."""
    if not isinstance(psi, StateVector):
        psi = StateVector(psi)
    a = psi.amps
    return DensityMatrix(np.outer(a, a.conj()))


def _match(rho: DensityMatrix, dim: int, what: str) -> None:
    if rho.dim != dim:
        raise DimensionError(f"state has dim {rho.dim} but {what} has dim {dim}")


def apply_unitary(rho: DensityMatrix, u: Unitary) -> DensityMatrix:
    _match(rho, u.dim, "unitary")
    m = u.entries
    out = m @ rho.entries @ m.conj().T
    return DensityMatrix(out, check=False)


def apply_channel(rho: DensityMatrix, ch: Channel) -> DensityMatrix:
    if not isinstance(ch, Channel):
        raise ValidationError(f"expected a Channel, got {type(ch).__name__}")
    _match(rho, ch.dim, "channel")
    r = rho.entries
    if ch.mixture is not None:
        out = sum(w * (u.entries @ r @ u.entries.conj().T) for w, u in ch.mixture)
    else:
        out = sum(k @ r @ k.conj().T for k in ch.kraus)
    return DensityMatrix(out, check=False)


def apply_op(rho: DensityMatrix, op) -> DensityMatrix:
    """Apply either a Unitary (by conjugation) or a Channel."""
    if isinstance(op, Unitary):
        return apply_unitary(rho, op)
    return apply_channel(rho, op)


def tensor(a, b):
    """Kronecker product of two states, density matrices or unitaries.

    Both arguments must be of the same kind; ``a`` becomes the most significant
    subsystem.
    """
    if type(a) is not type(b):
        raise TypeError(f"cannot tensor {type(a).__name__} with {type(b).__name__}")
    if isinstance(a, StateVector):
        return StateVector(np.kron(a.amps, b.amps))
    if isinstance(a, DensityMatrix):
        return DensityMatrix(np.kron(a.entries, b.entries), check=False)
    if isinstance(a, Unitary):
        return Unitary(np.kron(a.entries, b.entries))
    raise TypeError(f"tensor not defined for {type(a).__name__}")


def tensor_all(*factors):
    out = factors[0]
    for f in factors[1:]:
        out = tensor(out, f)
    return out


def partial_trace(rho: DensityMatrix, keep: int, dims: Sequence[int]) -> DensityMatrix:
    """Reduced state of subsystem ``keep``; ``dims`` lists subsystem sizes, most significant first."""
    dims = [int(d) for d in dims]
    if any(d < 1 for d in dims) or int(np.prod(dims)) != rho.dim:
        raise DimensionError(f"subsystem dims {dims} do not factor dim {rho.dim}")
    if not 0 <= keep < len(dims):
        raise DimensionError(f"keep index {keep} out of range for {len(dims)} subsystems")
    n = len(dims)
    t = rho.entries.reshape(dims + dims)
    # contract every row index with its column partner except the kept one
    letters = "abcdefghijklmnopqrstuvwxyz"
    rows = list(letters[:n])
    cols = list(letters[:n])
    cols[keep] = letters[n]
    spec = "".join(rows) + "".join(cols) + "->" + rows[keep] + cols[keep]
    red = np.einsum(spec, t)
    return DensityMatrix(red, check=False)


def measure_probs(rho: DensityMatrix) -> np.ndarray:
    """Computational-basis outcome probabilities (the real diagonal)."""
    d = rho.entries.diagonal()
    if np.max(np.abs(d.imag)) > CONSTRUCT_TOL:
        raise ValidationError("diagonal has non-negligible imaginary part")
    p = d.real.copy()
    if np.any(p < -CONSTRUCT_TOL) or np.any(p > 1 + CONSTRUCT_TOL):
        raise ValidationError(f"probabilities out of range: {p.tolist()}")
    np.clip(p, 0.0, 1.0, out=p)
    if abs(p.sum() - 1.0) > CONSTRUCT_TOL:
        raise ValidationError(f"probabilities sum to {p.sum()!r}")
    return p


def clamp_probability(x: float) -> float:
    if x < -CONSTRUCT_TOL or x > 1 + CONSTRUCT_TOL:
        raise ValidationError(f"probability {x!r} out of [0, 1]")
    return min(1.0, max(0.0, x))


def projective_overlap(rho: DensityMatrix, psi: StateVector) -> float:
    """Probability ``<psi|rho|psi>`` that ``rho`` passes a test for ``psi``."""
    _match(rho, psi.dim, "test state")
    v = psi.amps
    val = np.vdot(v, rho.entries @ v)
    if abs(val.imag) > CONSTRUCT_TOL:
        raise ValidationError("overlap has non-negligible imaginary part")
    return clamp_probability(float(val.real))


def controlled_gate(target: Unitary, control_count: int = 1) -> Unitary:
    """Block-diagonal ``diag(I, target)`` with the control as most significant qubit."""
    if control_count != 1:
        raise ValueError("only a single control qubit is supported")
    if not isinstance(target, Unitary):
        target = Unitary(target)
    d = target.dim
    m = np.zeros((2 * d, 2 * d), dtype=np.complex128)
    m[:d, :d] = np.eye(d)
    m[d:, d:] = target.entries
    return Unitary(m)


def embed(op: Unitary, first: int, n_qubits: int) -> Unitary:
    """Place an operator on qubits ``first .. first + k - 1`` of an ``n_qubits`` register."""
    k = int(round(np.log2(op.dim)))
    if 2**k != op.dim or first < 0 or first + k > n_qubits:
        raise DimensionError(f"cannot embed a dim-{op.dim} operator at qubit {first} of {n_qubits}")
    left = np.eye(2**first)
    right = np.eye(2 ** (n_qubits - first - k))
    return Unitary(np.kron(np.kron(left, op.entries), right))


def controlled_on(target: Unitary, control: int, targets: Sequence[int], n_qubits: int) -> Unitary:
    """Controlled ``target`` acting on arbitrary wires of an ``n_qubits`` register.

    ``targets`` lists the wires the target acts on, most significant first.
    """
    targets = [int(t) for t in targets]
    k = len(targets)
    wires = [control, *targets]
    if 2**k != target.dim or len(set(wires)) != len(wires) or not all(0 <= w < n_qubits for w in wires):
        raise DimensionError(f"bad wires control={control} targets={targets} for {n_qubits} qubits")
    dim = 2**n_qubits
    m = np.zeros((dim, dim), dtype=np.complex128)
    t = target.entries
    for col in range(dim):
        bits = [(col >> (n_qubits - 1 - q)) & 1 for q in range(n_qubits)]
        if not bits[control]:
            m[col, col] = 1.0
            continue
        sub = 0
        for w in targets:
            sub = (sub << 1) | bits[w]
        for out_sub in range(target.dim):
            amp = t[out_sub, sub]
            if amp == 0:
                continue
            out_bits = list(bits)
            for j, w in enumerate(targets):
                out_bits[w] = (out_sub >> (k - 1 - j)) & 1
            row = 0
            for b in out_bits:
                row = (row << 1) | b
            m[row, col] += amp
    return Unitary(m)


KET0 = StateVector([1, 0])
KET1 = StateVector([0, 1])
PAULI_X = Unitary([[0, 1], [1, 0]])
IDENTITY2 = Unitary(np.eye(2))
HADAMARD = Unitary(np.array([[1, 1], [1, -1]]) / np.sqrt(2))
SWAP = Unitary([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])

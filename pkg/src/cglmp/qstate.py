"""State representations for bipartite systems built from N qubit pairs.

Conventions
-----------
- A qudit of dimension d = 2**N is carried by N qubits; the global index is
  j = sum_m j_m * 2**(N - m), i.e. qubit 1 is the most significant bit.
- Dense bipartite vectors are stored party-blocked: index = j_A * d + j_B.
- Products of pair states are naturally interleaved (A1, B1, A2, B2, ...);
  ``interleaved_to_blocked`` is the single place that converts between the two.
- |0> is identified with |H> and |1> with |V>.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import reduce

import numpy as np

TOL = 1e-12
PSD_TOL = 1e-10

# Largest per-party dimension for which d**2-dim dense objects are built.
DENSE_CAP = 64


def _is_power_of_two(d: int) -> bool:
    return isinstance(d, (int, np.integer)) and d >= 2 and (d & (d - 1)) == 0


def n_pairs(d: int) -> int:
    """Number of qubit pairs N with d = 2**N."""
    if not _is_power_of_two(d):
        raise ValueError(f"dimension must be a power of two >= 2, got {d!r}")
    return int(d).bit_length() - 1


def _check_dense(d: int) -> None:
    if d > DENSE_CAP:
        raise ValueError(f"dense objects are limited to d <= {DENSE_CAP}, got {d}")


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    dims: tuple[int, ...] = ()

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        dims = tuple(self.dims) or (amps.size,)
        if int(np.prod(dims)) != amps.size:
            raise ValueError(f"dims {dims} do not match {amps.size} amplitudes")
        norm = float(np.vdot(amps, amps).real)
        if abs(norm - 1.0) > TOL:
            raise ValueError(f"state is not normalized (norm^2 = {norm})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def projector(self) -> DensityOperator:
        return DensityOperator(np.outer(self.amplitudes, self.amplitudes.conj()), self.dims)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    matrix: np.ndarray
    dims: tuple[int, ...] = ()

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"density operator must be square, got shape {m.shape}")
        dims = tuple(self.dims) or (m.shape[0],)
        if int(np.prod(dims)) != m.shape[0]:
            raise ValueError(f"dims {dims} do not match matrix size {m.shape[0]}")
        if np.max(np.abs(m - m.conj().T)) > TOL:
            raise ValueError("density operator is not Hermitian")
        tr = np.trace(m)
        if abs(tr - 1.0) > TOL:
            raise ValueError(f"density operator trace is {tr.real}, expected 1")
        lo = float(np.linalg.eigvalsh(m).min())
        if lo < -PSD_TOL:
            raise ValueError(f"density operator is not PSD (min eigenvalue {lo:.3e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


class PairState(DensityOperator):
    """Two-qubit state of one A qubit and one B qubit, basis |00>,|01>,|10>,|11>."""

    def __init__(self, matrix, dims=(2, 2)):
        super().__init__(matrix, dims)
        if self.matrix.shape != (4, 4):
            raise ValueError("a pair state must be 4x4")


class NoiseKind(str, Enum):
    IDEAL = "ideal"
    WERNER = "werner"
    CUSTOM = "custom"


@dataclass(frozen=True)
class NoiseModel:
    """Per-pair noise; the same pair state is assumed for every pair."""

    kind: NoiseKind = NoiseKind.IDEAL
    visibility: float = 1.0
    custom: PairState | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError(f"visibility must lie in [0, 1], got {self.visibility}")
        if self.kind is NoiseKind.CUSTOM and not isinstance(self.custom, PairState):
            raise ValueError("custom noise model needs a PairState")

    @classmethod
    def werner(cls, visibility: float) -> NoiseModel:
        return cls(NoiseKind.WERNER, visibility)

    @classmethod
    def from_fidelity(cls, fidelity: float) -> NoiseModel:
        return cls.werner(werner_visibility(fidelity))

    def pair_state(self) -> PairState:
        if self.kind is NoiseKind.IDEAL:
            return werner_state(1.0)
        if self.kind is NoiseKind.WERNER:
            return werner_state(self.visibility)
        return self.custom


def bell_pair() -> StateVector:
    """(|00> + |11>)/sqrt(2)."""
    return StateVector(np.array([1, 0, 0, 1]) / np.sqrt(2), (2, 2))


def tensor(*vectors: np.ndarray) -> np.ndarray:
    return reduce(np.kron, vectors)


def interleaved_to_blocked(x: np.ndarray, N: int) -> np.ndarray:
    """Reorder a 4**N vector or matrix from (A1,B1,...,AN,BN) to (A1..AN, B1..BN)."""
    perm = [2 * m for m in range(N)] + [2 * m + 1 for m in range(N)]
    x = np.asarray(x)
    if x.ndim == 1:
        return x.reshape((2,) * (2 * N)).transpose(perm).reshape(-1)
    d2 = 4**N
    t = x.reshape((2,) * (4 * N))
    return t.transpose(perm + [2 * N + p for p in perm]).reshape(d2, d2)


def blocked_to_interleaved(x: np.ndarray, N: int) -> np.ndarray:
    inv = [None] * (2 * N)
    for i, p in enumerate([2 * m for m in range(N)] + [2 * m + 1 for m in range(N)]):
        inv[p] = i
    x = np.asarray(x)
    if x.ndim == 1:
        return x.reshape((2,) * (2 * N)).transpose(inv).reshape(-1)
    d2 = 4**N
    return x.reshape((2,) * (4 * N)).transpose(inv + [2 * N + p for p in inv]).reshape(d2, d2)


def max_entangled(d: int) -> StateVector:
    """(1/sqrt d) sum_j |j>_A |j>_B in party-blocked order."""
    n_pairs(d)
    _check_dense(d)
    amps = np.zeros(d * d, dtype=complex)
    amps[np.arange(d) * (d + 1)] = 1 / np.sqrt(d)
    return StateVector(amps, (d, d))


def pair_product(pair: DensityOperator, N: int) -> DensityOperator:
    """The N-fold tensor power of a pair state, returned party-blocked."""
    d = 2**N
    _check_dense(d)
    rho = reduce(np.kron, [pair.matrix] * N)
    rho = interleaved_to_blocked(rho, N)
    # Hermiticity can drift by one ulp through kron; symmetrize.
    return DensityOperator((rho + rho.conj().T) / 2, (d, d))


def werner_visibility(fidelity: float) -> float:
    if not 0.25 <= fidelity <= 1.0:
        raise ValueError(f"Werner fidelity must lie in [1/4, 1], got {fidelity}")
    return (4 * fidelity - 1) / 3


def werner_state(visibility: float) -> PairState:
    phi = bell_pair().amplitudes
    rho = visibility * np.outer(phi, phi.conj()) + (1 - visibility) * np.eye(4) / 4
    return PairState(rho)


def werner_from_fidelity(fidelity: float) -> PairState:
    return werner_state(werner_visibility(fidelity))


def fidelity(rho: DensityOperator, psi: StateVector) -> float:
    """<psi|rho|psi>."""
    if rho.dim != psi.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {psi.dim}")
    val = np.vdot(psi.amplitudes, rho.matrix @ psi.amplitudes)
    if abs(val.imag) > TOL:
        raise ValueError(f"fidelity has imaginary residue {val.imag}")
    return float(min(max(val.real, 0.0), 1.0))


def state_fidelity(rho: DensityOperator, sigma: DensityOperator) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))**2 between mixed states."""
    if rho.dim != sigma.dim:
        raise ValueError(f"dimension mismatch: {rho.dim} vs {sigma.dim}")
    w, v = np.linalg.eigh(rho.matrix)
    sq = (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T
    inner = np.linalg.eigvalsh(sq @ sigma.matrix @ sq)
    return float(min(np.sum(np.sqrt(np.clip(inner, 0, None))) ** 2, 1.0))


def ensemble_fidelity(pair_fidelity: float, N: int) -> float:
    """Fidelity of N identical pairs with the N-pair target, F_pair**N."""
    if not 0.0 <= pair_fidelity <= 1.0:
        raise ValueError(f"fidelity must lie in [0, 1], got {pair_fidelity}")
    if N < 1:
        raise ValueError("need at least one pair")
    return pair_fidelity**N


def partial_trace(rho: DensityOperator, keep: int) -> np.ndarray:
    """Reduced matrix of a bipartite operator; keep=0 keeps A, keep=1 keeps B."""
    if len(rho.dims) != 2:
        raise ValueError("partial_trace needs a bipartite operator")
    da, db = rho.dims
    t = rho.matrix.reshape(da, db, da, db)
    return np.einsum("ijkj->ik", t) if keep == 0 else np.einsum("ijil->jl", t)

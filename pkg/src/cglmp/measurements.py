"""CGLMP measurement bases and their waveplate compilation.

Alice's setting a has eigenvectors
    |k>_a = d**-1/2 sum_j exp(2 pi i j (k + alpha_a) / d) |j>
and Bob's setting b
    |l>_b = d**-1/2 sum_j exp(2 pi i j (-l + beta_b) / d) |j>
with alpha = (0, 1/2), beta = (1/4, -1/4).  Because qubit m carries the bit
of weight 2**(N - m), each eigenvector is a product over qubits whose m-th
factor is (|0> + exp(2 pi i x / 2**m) |1>)/sqrt 2, x = k + alpha_a (or
-l + beta_b).  The factor therefore only depends on the outcome mod 2**m.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .qstate import DENSE_CAP, StateVector, n_pairs, tensor

PHASES = {
    ("A", 1): Fraction(0),
    ("A", 2): Fraction(1, 2),
    ("B", 1): Fraction(1, 4),
    ("B", 2): Fraction(-1, 4),
}
QWP_ANGLE = -np.pi / 4


@dataclass(frozen=True)
class SettingSpec:
    party: str
    setting: int

    def __post_init__(self):
        if (self.party, self.setting) not in PHASES:
            raise ValueError(f"unknown setting {self.party}{self.setting}")

    @property
    def phase(self) -> Fraction:
        return PHASES[self.party, self.setting]

    @property
    def sign(self) -> int:
        """Sign with which the outcome enters the phase argument."""
        return 1 if self.party == "A" else -1

    def shift(self, outcome) -> np.ndarray | float:
        """Phase argument outcome + alpha_a (A) or -outcome + beta_b (B)."""
        return self.sign * np.asarray(outcome, dtype=float) + float(self.phase)


A1, A2 = SettingSpec("A", 1), SettingSpec("A", 2)
B1, B2 = SettingSpec("B", 1), SettingSpec("B", 2)
ALICE = {1: A1, 2: A2}
BOB = {1: B1, 2: B2}


@dataclass(frozen=True, eq=False)
class ProductBasisVector:
    spec: SettingSpec
    outcome: int
    d: int
    factors: tuple[np.ndarray, ...]

    def full(self) -> np.ndarray:
        return tensor(*self.factors)


@dataclass(frozen=True)
class WaveplateSetting:
    qubit: int
    theta_hwp: float
    gamma_qwp: float = QWP_ANGLE


def _check_outcome(outcome: int, d: int) -> None:
    if not 0 <= outcome < d:
        raise ValueError(f"outcome {outcome} out of range for d={d}")


def eigenvector_full(spec: SettingSpec, outcome: int, d: int) -> StateVector:
    n_pairs(d)
    if d > DENSE_CAP:
        raise ValueError(f"dense eigenvectors are limited to d <= {DENSE_CAP}")
    _check_outcome(outcome, d)
    j = np.arange(d)
    amps = np.exp(2j * np.pi * j * spec.shift(outcome) / d) / np.sqrt(d)
    return StateVector(amps)


def basis_matrix(spec: SettingSpec, d: int) -> np.ndarray:
    """d x d matrix whose column k is eigenvector_full(spec, k, d)."""
    n_pairs(d)
    if d > DENSE_CAP:
        raise ValueError(f"dense eigenvectors are limited to d <= {DENSE_CAP}")
    j = np.arange(d)[:, None]
    return np.exp(2j * np.pi * j * spec.shift(np.arange(d))[None, :] / d) / np.sqrt(d)


def factor_phases(spec: SettingSpec, m: int) -> np.ndarray:
    """Relative |1> phase of the qubit-m factor for every residue r in [0, 2**m)."""
    return 2 * np.pi * spec.shift(np.arange(2**m)) / 2**m


def qubit_factor(phase: float) -> np.ndarray:
    return np.array([1.0, np.exp(1j * phase)]) / np.sqrt(2)


def eigenvector_product(spec: SettingSpec, outcome: int, d: int) -> ProductBasisVector:
    N = n_pairs(d)
    _check_outcome(outcome, d)
    factors = tuple(
        qubit_factor(2 * np.pi * float(spec.shift(outcome)) / 2**m) for m in range(1, N + 1)
    )
    return ProductBasisVector(spec, outcome, d, factors)


def hwp_matrix(theta: float) -> np.ndarray:
    """Half-wave plate at angle theta in the (H, V) basis."""
    c, s = np.cos(2 * theta), np.sin(2 * theta)
    return np.array([[c, -s], [-s, -c]], dtype=complex)


def qwp_matrix(gamma: float) -> np.ndarray:
    """Quarter-wave plate as printed; divide by sqrt 2 for a unitary."""
    c, s = np.cos(2 * gamma), np.sin(2 * gamma)
    return np.array([[1j - c, s], [s, 1j + c]], dtype=complex)


def analyzer_unitary(theta: float) -> np.ndarray:
    """U(theta) = H(theta) Q(-pi/4), normalized to be unitary."""
    return hwp_matrix(theta) @ qwp_matrix(QWP_ANGLE) / np.sqrt(2)


def hwp_angle(spec: SettingSpec, outcome, m: int):
    """HWP angle that rotates the qubit-m factor onto |H>.

    The phase of the factor is 2 pi x / 2**m, so the modulus per qubit is
    4 * 2**m rather than 4 * d.
    """
    return -np.pi / 8 - 2 * np.pi * spec.shift(outcome) / (4 * 2**m)


def compile_angles(spec: SettingSpec, outcome: int, m: int, d: int | None = None) -> WaveplateSetting:
    if m < 1:
        raise ValueError(f"qubit index must be >= 1, got {m}")
    if d is not None:
        if m > n_pairs(d):
            raise ValueError(f"qubit index {m} exceeds N={n_pairs(d)}")
        _check_outcome(outcome, d)
    elif outcome < 0:
        raise ValueError(f"outcome must be nonnegative, got {outcome}")
    return WaveplateSetting(m, float(hwp_angle(spec, outcome, m)))


def angle_schedule(d: int) -> list[tuple[str, int, int, int, float, float]]:
    """Every (party, setting, outcome, qubit, theta, gamma) needed for dimension d."""
    N = n_pairs(d)
    rows = []
    for spec in (A1, A2, B1, B2):
        for outcome in range(d):
            for m in range(1, N + 1):
                w = compile_angles(spec, outcome, m, d)
                rows.append((spec.party, spec.setting, outcome, m, w.theta_hwp, w.gamma_qwp))
    return rows


def settings_count(d: int) -> int:
    """Distinct waveplate settings per operator pair (A_a, B_b).

    Qubit m needs 2**(m-1) settings per party (the H/V outputs resolve the
    top bit of the residue), summing to d - 1 over m = 1..N.
    """
    return sum(2 ** (m - 1) for m in range(1, n_pairs(d) + 1))

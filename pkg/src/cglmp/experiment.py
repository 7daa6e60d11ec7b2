"""Monte-Carlo model of the photon-counting experiment.

Two measurement routes are simulated:

* direct Bell measurements: for each setting pair (a, b) a fixed number of
  events is distributed multinomially over the d x d outcome cells;
* pair tomography: the 16 two-qubit projectors of James et al. are measured
  with binomial counts, the pair state is rebuilt by linear inversion and the
  Bell value of N copies follows from the factorized engine.

All randomness flows from numpy Generators seeded explicitly, so every
function here is a pure function of its inputs and seed.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from . import engine
from .engine import SETTING_PAIRS, BellReport, ProbabilityTable
from .measurements import ALICE, BOB, factor_phases
from .qstate import DensityOperator, NoiseModel, PairState


@dataclass(frozen=True, eq=False)
class CountRecord:
    a: int
    b: int
    counts: np.ndarray

    def __post_init__(self):
        c = np.array(self.counts, dtype=np.int64)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError(f"counts must be d x d, got {c.shape}")
        if (c < 0).any():
            raise ValueError("counts must be nonnegative")
        c.setflags(write=False)
        object.__setattr__(self, "counts", c)

    @property
    def d(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def frequencies(self) -> ProbabilityTable:
        if self.total == 0:
            raise ValueError(f"record ({self.a},{self.b}) has no events")
        return ProbabilityTable(self.a, self.b, self.counts / self.total)


@dataclass(frozen=True)
class ExperimentConfig:
    noise: NoiseModel = field(default_factory=NoiseModel)
    events: int = 100_000
    seed: int = 0
    jitter: float = 0.0
    resamples: int = 200

    def __post_init__(self):
        if self.events < 1:
            raise ValueError("events per setting must be >= 1")
        if self.jitter < 0:
            raise ValueError("angle jitter must be >= 0")
        if self.resamples < 2:
            raise ValueError("need at least two bootstrap resamples")

    def to_dict(self) -> dict:
        return {
            "noise": self.noise.kind.value,
            "visibility": self.noise.visibility,
            "events": self.events,
            "seed": self.seed,
            "jitter": self.jitter,
            "resamples": self.resamples,
        }


def sample_counts(table: ProbabilityTable, total: int, seed) -> CountRecord:
    """Multinomial draw of ``total`` events over the d**2 cells."""
    if total < 1:
        raise ValueError("total must be >= 1")
    rng = np.random.default_rng(seed)
    p = table.entries.ravel()
    counts = rng.multinomial(total, p / p.sum())
    return CountRecord(table.a, table.b, counts.reshape(table.entries.shape))


def _bell_values(d: int, diffs: dict[tuple[int, int], np.ndarray]) -> np.ndarray:
    """I_d for stacks of difference distributions (last axis = delta)."""
    c = engine.bell_coefficients(d)
    return sum(diffs[ab] @ c[ab] for ab in SETTING_PAIRS)


def estimate_bell_from_counts(records: dict[tuple[int, int], CountRecord], resamples: int = 200, seed=0) -> BellReport:
    """Bell value from empirical frequencies, with a bootstrap error bar.

    Each record is resampled multinomially from its own frequencies.  Only
    the aggregate P(A - B = delta) enters I_d, and lumping multinomial cells
    gives a multinomial, so resampling is done directly on the d differences.
    """
    if set(records) != set(SETTING_PAIRS):
        raise ValueError(f"need records for {SETTING_PAIRS}, got {sorted(records)}")
    dims = {r.d for r in records.values()}
    if len(dims) != 1:
        raise ValueError(f"records disagree on d: {sorted(dims)}")
    d = dims.pop()
    tables = {ab: r.frequencies() for ab, r in records.items()}
    point = engine.bell_expression(tables)
    rng = np.random.default_rng(seed)
    boot = {}
    for ab in SETTING_PAIRS:
        rec = records[ab]
        diffs = tables[ab].diffs()
        boot[ab] = rng.multinomial(rec.total, diffs / diffs.sum(), size=resamples) / rec.total
    stderr = float(np.std(_bell_values(d, boot), ddof=1))
    return BellReport(d, point.value, point.terms, stderr)


def jittered_phases(sigma: float, N: int, rng: np.random.Generator):
    """Factor phases with Gaussian HWP angle errors of width ``sigma``.

    One error is drawn per physical waveplate setting, i.e. per residue
    r mod 2**(m-1) for each party setting and qubit; an HWP error eps
    shifts the analysed factor phase by -4 eps.  Both outputs of a setting
    share the error, so the per-setting outcomes stay orthogonal, and a
    party's settings do not depend on the other party's choice.
    """
    shifted = {}
    for spec in (*ALICE.values(), *BOB.values()):
        for m in range(1, N + 1):
            eps = rng.normal(0.0, sigma, 2 ** (m - 1))
            shifted[spec, m] = factor_phases(spec, m) - 4 * np.tile(eps, 2)
    table = {(a, b, m): (shifted[ALICE[a], m], shifted[BOB[b], m])
             for a, b in SETTING_PAIRS for m in range(1, N + 1)}
    return lambda a, b, m: table[a, b, m]


def _seed_sequence(seed) -> np.random.SeedSequence:
    return seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)


def simulate_bell_counts(config: ExperimentConfig, N: int, seed=None) -> dict[tuple[int, int], CountRecord]:
    """Four count records for d = 2**N drawn from the configured pair state."""
    ss = _seed_sequence(config.seed if seed is None else seed)
    jitter_ss, *count_ss, _ = ss.spawn(6)
    pair = config.noise.pair_state()
    phases = jittered_phases(config.jitter, N, np.random.default_rng(jitter_ss)) if config.jitter > 0 else None
    return {
        ab: sample_counts(engine.joint_table_factorized(pair, N, *ab, phases=phases), config.events, s)
        for ab, s in zip(SETTING_PAIRS, count_ss)
    }


def simulate_bell_test(config: ExperimentConfig, N: int, seed=None) -> BellReport:
    ss = _seed_sequence(config.seed if seed is None else seed)
    records = simulate_bell_counts(config, N, ss)
    # spawn() advances the parent, so derive the bootstrap stream afresh.
    boot_seed = np.random.SeedSequence(ss.entropy, spawn_key=ss.spawn_key + (5,))
    return estimate_bell_from_counts(records, config.resamples, boot_seed)


def measured_scan(config: ExperimentConfig, N_max: int) -> list[BellReport]:
    """Direct-measurement Bell values for d = 2 .. 2**N_max."""
    seeds = np.random.SeedSequence(config.seed).spawn(N_max)
    return [simulate_bell_test(config, N, s) for N, s in zip(range(1, N_max + 1), seeds)]


# ---------------------------------------------------------------------------
# tomography

_POL = {
    "H": np.array([1, 0], dtype=complex),
    "V": np.array([0, 1], dtype=complex),
    "D": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "R": np.array([1, -1j], dtype=complex) / np.sqrt(2),
    "L": np.array([1, 1j], dtype=complex) / np.sqrt(2),
}
TOMOGRAPHY_SETTINGS = (
    "HH", "HV", "VV", "VH", "RH", "RV", "DV", "DH",
    "DR", "DD", "RD", "HD", "VD", "VL", "HL", "RL",
)
_NORMALIZERS = ("HH", "HV", "VH", "VV")


def projector_state(label: str) -> np.ndarray:
    return np.kron(_POL[label[0]], _POL[label[1]])


@dataclass(frozen=True)
class TomographyRecord:
    entries: tuple[tuple[str, float], ...]

    def __post_init__(self):
        labels = [lab for lab, _ in self.entries]
        if sorted(labels) != sorted(TOMOGRAPHY_SETTINGS):
            raise ValueError(f"tomography record must hold the 16 settings, got {labels}")
        if any(c < 0 for _, c in self.entries):
            raise ValueError("tomography counts must be nonnegative")

    def counts(self) -> dict[str, float]:
        return dict(self.entries)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["setting_label", "count"])
        for lab, c in self.entries:
            w.writerow([lab, repr(c) if isinstance(c, float) else c])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> TomographyRecord:
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
        if rows and rows[0][0] == "setting_label":
            rows = rows[1:]
        return cls(tuple((lab, int(c) if c.isdigit() else float(c)) for lab, c in rows))


def tomography_probabilities(pair: DensityOperator) -> dict[str, float]:
    out = {}
    for lab in TOMOGRAPHY_SETTINGS:
        v = projector_state(lab)
        out[lab] = float(np.clip(np.vdot(v, pair.matrix @ v).real, 0.0, 1.0))
    return out


def simulate_tomography(pair: DensityOperator, events: int, seed) -> TomographyRecord:
    """Binomial coincidence counts for each of the 16 projector settings."""
    if events < 1:
        raise ValueError("events per setting must be >= 1")
    rng = np.random.default_rng(seed)
    probs = tomography_probabilities(pair)
    return TomographyRecord(tuple((lab, int(rng.binomial(events, probs[lab]))) for lab in TOMOGRAPHY_SETTINGS))


def expected_tomography(pair: DensityOperator, events: float = 1.0) -> TomographyRecord:
    """Noiseless record: every count equals its expectation."""
    probs = tomography_probabilities(pair)
    return TomographyRecord(tuple((lab, events * probs[lab]) for lab in TOMOGRAPHY_SETTINGS))


_PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)
_PAULI2 = [np.kron(s, t) for s in _PAULI for t in _PAULI]


def _design_matrix() -> np.ndarray:
    """B[i, mu] = <psi_i| sigma_mu |psi_i> / 4, so p_i = B @ r for rho = sum r_mu sigma_mu / 4."""
    rows = []
    for lab in TOMOGRAPHY_SETTINGS:
        v = projector_state(lab)
        rows.append([np.vdot(v, s @ v).real / 4 for s in _PAULI2])
    return np.array(rows)


def project_to_physical(matrix: np.ndarray) -> np.ndarray:
    """Closest unit-trace PSD matrix by eigenvalue clipping.

    Negative eigenvalues are zeroed and their weight is taken uniformly
    from the remaining ones, repeating until all are nonnegative
    (Smolin, Gambetta & Smith 2012).
    """
    h = (matrix + matrix.conj().T) / 2
    h = h / np.trace(h).real
    w, v = np.linalg.eigh(h)
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    n = w.size
    acc = 0.0
    for i in range(n - 1, -1, -1):
        if w[i] + acc / (i + 1) >= 0:
            w[: i + 1] += acc / (i + 1)
            break
        acc += w[i]
        w[i] = 0.0
    rho = (v * w) @ v.conj().T
    return (rho + rho.conj().T) / 2


def reconstruct_state(record: TomographyRecord) -> PairState:
    counts = record.counts()
    norm = sum(counts[lab] for lab in _NORMALIZERS)
    if norm <= 0:
        raise ValueError("tomography record has no counts in the H/V settings")
    f = np.array([counts[lab] / norm for lab in TOMOGRAPHY_SETTINGS])
    design = _design_matrix()
    if np.linalg.cond(design) > 1e12:
        raise ValueError("tomography design matrix is singular")
    r = np.linalg.solve(design, f)
    rho = sum(c * s for c, s in zip(r, _PAULI2)) / 4
    return PairState(project_to_physical(rho))


def _tomography_seeds(config: ExperimentConfig):
    return np.random.SeedSequence(config.seed).spawn(config.resamples + 1)


def simulated_tomography_record(config: ExperimentConfig) -> TomographyRecord:
    """The tomography record behind the central value of ``tomography_scan``."""
    return simulate_tomography(config.noise.pair_state(), config.events, _tomography_seeds(config)[0])


def tomography_scan(config: ExperimentConfig, N_max: int, noiseless: bool = False, stream_above: int = engine.STREAM_ABOVE) -> list[BellReport]:
    """Bell values of N reconstructed pairs, d = 2 .. 2**N_max.

    The error bar is the sample deviation of I_d over ``config.resamples``
    independent repetitions of tomography and reconstruction.
    """
    if not 1 <= N_max <= 12:
        raise ValueError("N_max must lie in [1, 12]")
    pair = config.noise.pair_state()
    if noiseless:
        rebuilt = reconstruct_state(expected_tomography(pair, config.events))
        return engine.scan_dimensions(rebuilt, N_max, stream_above=stream_above)
    first, *rest = _tomography_seeds(config)
    base = engine.scan_dimensions(
        reconstruct_state(simulate_tomography(pair, config.events, first)), N_max, stream_above=stream_above
    )
    reps = np.array([
        [r.value for r in engine.scan_dimensions(
            reconstruct_state(simulate_tomography(pair, config.events, s)), N_max, stream_above=stream_above
        )]
        for s in rest
    ])
    spread = reps.std(axis=0, ddof=1)
    return [BellReport(r.d, r.value, r.terms, float(e)) for r, e in zip(base, spread)]

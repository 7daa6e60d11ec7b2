"""Joint probability tables and the CGLMP Bell expression.

Every term of I_d is an "aligned" probability P(A_a - B_b = delta mod d), so
the expression only depends on the four difference distributions
D_ab[delta].  Three routes produce them:

* dense:       <k,l| rho |k,l> on a d**2-dim state (d <= 64),
* factorized:  the table is the product over pairs m of a qubit-pair factor
               p_m(k mod 2**m, l mod 2**m), built level by level,
* streaming:   the same product evaluated in row blocks of the skewed table
               U[delta, l] = T[(l + delta) mod d, l], so only D is kept.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .measurements import ALICE, BOB, basis_matrix, factor_phases
from .qstate import DENSE_CAP, DensityOperator, PairState, StateVector, n_pairs

CLASSICAL_BOUND = 2.0
NORM_TOL = 1e-9
NEG_TOL = 1e-12
SETTING_PAIRS = ((1, 1), (1, 2), (2, 1), (2, 2))

# Largest d whose full d x d table may be materialized.
TABLE_CAP = 2**12
# Above this d the difference distribution is accumulated in row blocks.
STREAM_ABOVE = 2**10
LRT_CAP = 16
_BLOCK_ENTRIES = 2**20


@dataclass(frozen=True, eq=False)
class ProbabilityTable:
    """P(A_a = k, B_b = l) as a d x d array indexed [k, l]."""

    a: int
    b: int
    entries: np.ndarray

    def __post_init__(self):
        t = np.array(self.entries, dtype=float)
        if t.ndim != 2 or t.shape[0] != t.shape[1] or t.shape[0] < 2:
            raise ValueError(f"table must be d x d with d >= 2, got {t.shape}")
        lo = t.min()
        if lo < -NEG_TOL:
            raise ValueError(f"negative probability {lo:.3e} in table")
        t[t < 0] = 0.0
        total = t.sum()
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"table sums to {total}, expected 1")
        t.setflags(write=False)
        object.__setattr__(self, "entries", t)

    @property
    def d(self) -> int:
        return self.entries.shape[0]

    def diffs(self) -> np.ndarray:
        return diff_distribution(self.entries)


@dataclass(frozen=True)
class BellTerm:
    k: int
    weight: float
    positive: tuple[float, float, float, float]
    negative: tuple[float, float, float, float]

    @property
    def contribution(self) -> float:
        return self.weight * (sum(self.positive) - sum(self.negative))


@dataclass(frozen=True)
class BellReport:
    d: int
    value: float
    terms: tuple[BellTerm, ...] = field(repr=False)
    stderr: float | None = None
    classical_bound: float = CLASSICAL_BOUND

    @property
    def violation(self) -> bool:
        return self.value > self.classical_bound

    @property
    def margin(self) -> float | None:
        """(I_d - 2) in units of stderr, when an error bar is known."""
        if not self.stderr:
            return None
        return (self.value - self.classical_bound) / self.stderr

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "value": self.value,
            "terms": [
                {"k": t.k, "weight": t.weight, "positive": list(t.positive), "negative": list(t.negative)}
                for t in self.terms
            ],
            "classical_bound": self.classical_bound,
            "violation": self.violation,
            "stderr": self.stderr,
        }


@dataclass(frozen=True)
class DeterministicStrategy:
    A1: int
    A2: int
    B1: int
    B2: int

    def tables(self, d: int) -> dict[tuple[int, int], ProbabilityTable]:
        out = {}
        alice = {1: self.A1, 2: self.A2}
        bob = {1: self.B1, 2: self.B2}
        for a, b in SETTING_PAIRS:
            t = np.zeros((d, d))
            t[alice[a], bob[b]] = 1.0
            out[a, b] = ProbabilityTable(a, b, t)
        return out


def _skewed_view(entries: np.ndarray) -> np.ndarray:
    """Read-only view V[delta, l] = T[(l + delta) mod d, l]."""
    d = entries.shape[0]
    doubled = np.concatenate([entries, entries[:-1]])
    rs, cs = doubled.strides
    return np.lib.stride_tricks.as_strided(doubled, shape=(d, d), strides=(rs, rs + cs), writeable=False)


def diff_distribution(entries: np.ndarray) -> np.ndarray:
    """D[delta] = sum_l T[(l + delta) mod d, l]."""
    return _skewed_view(entries).sum(axis=1)


def aligned_prob(table: ProbabilityTable, k: int) -> float:
    """P(A_a = B_b + k): outcomes that differ by k modulo d."""
    d = table.d
    l = np.arange(d)
    return float(table.entries[(l + k) % d, l].sum())


# ---------------------------------------------------------------------------
# Bell expression


def _terms(d: int, diffs: dict[tuple[int, int], np.ndarray]) -> tuple[BellTerm, ...]:
    D11, D12, D21, D22 = (diffs[ab] for ab in SETTING_PAIRS)
    terms = []
    for k in range(d // 2):
        pos = (D11[k % d], D21[(-k - 1) % d], D22[k % d], D12[(-k) % d])
        neg = (D11[(-k - 1) % d], D21[k % d], D22[(-k - 1) % d], D12[(k + 1) % d])
        terms.append(
            BellTerm(k, 1 - 2 * k / (d - 1), tuple(map(float, pos)), tuple(map(float, neg)))
        )
    return tuple(terms)


def report_from_diffs(d: int, diffs: dict[tuple[int, int], np.ndarray], stderr=None) -> BellReport:
    terms = _terms(d, diffs)
    return BellReport(d, float(sum(t.contribution for t in terms)), terms, stderr)


def bell_expression(tables: dict[tuple[int, int], ProbabilityTable]) -> BellReport:
    if set(tables) != set(SETTING_PAIRS):
        raise ValueError(f"need tables for {SETTING_PAIRS}, got {sorted(tables)}")
    dims = {t.d for t in tables.values()}
    if len(dims) != 1:
        raise ValueError(f"tables disagree on d: {sorted(dims)}")
    d = dims.pop()
    return report_from_diffs(d, {ab: t.diffs() for ab, t in tables.items()})


def bell_coefficients(d: int, scaled: bool = False) -> dict[tuple[int, int], np.ndarray]:
    """c_ab[delta] such that I_d = sum_ab sum_delta c_ab[delta] D_ab[delta].

    With ``scaled`` the coefficients are multiplied by d - 1, which makes
    them exact integers.
    """
    c = {ab: np.zeros(d, dtype=np.int64 if scaled else float) for ab in SETTING_PAIRS}
    for k in range(d // 2):
        w = d - 1 - 2 * k if scaled else 1 - 2 * k / (d - 1)
        c[1, 1][k % d] += w
        c[2, 1][(-k - 1) % d] += w
        c[2, 2][k % d] += w
        c[1, 2][(-k) % d] += w
        c[1, 1][(-k - 1) % d] -= w
        c[2, 1][k % d] -= w
        c[2, 2][(-k - 1) % d] -= w
        c[1, 2][(k + 1) % d] -= w
    return c


def coefficient_matrix(coeffs: np.ndarray) -> np.ndarray:
    """Expand c[delta] to C[k, l] = c[(k - l) mod d]."""
    d = coeffs.size
    k = np.arange(d)
    return coeffs[(k[:, None] - k[None, :]) % d]


# ---------------------------------------------------------------------------
# dense route


def joint_table_dense(state: DensityOperator | StateVector, a: int, b: int) -> ProbabilityTable:
    d = int(round(np.sqrt(state.dim)))
    if d * d != state.dim:
        raise ValueError(f"state of dimension {state.dim} is not bipartite d x d")
    n_pairs(d)
    if d > DENSE_CAP:
        raise ValueError(f"dense tables are limited to d <= {DENSE_CAP}")
    ea, eb = basis_matrix(ALICE[a], d), basis_matrix(BOB[b], d)
    if isinstance(state, StateVector):
        psi = state.amplitudes.reshape(d, d)
        t = np.abs(ea.conj().T @ psi @ eb.conj()) ** 2
    else:
        rho = state.matrix.reshape(d, d, d, d)
        t = np.einsum(
            "ik,jl,ijmn,mk,nl->kl", ea.conj(), eb.conj(), rho, ea, eb, optimize=True
        ).real
    return ProbabilityTable(a, b, t)


def dense_tables(state) -> dict[tuple[int, int], ProbabilityTable]:
    return {ab: joint_table_dense(state, *ab) for ab in SETTING_PAIRS}


def bell_operator(d: int) -> np.ndarray:
    """The d**2 x d**2 Bell operator sum_ab sum_kl C_ab[k,l] |k><k| x |l><l|."""
    if d > 16:
        raise ValueError("the dense Bell operator is only built for d <= 16")
    coeffs = bell_coefficients(d)
    op = np.zeros((d * d, d * d), dtype=complex)
    for a, b in SETTING_PAIRS:
        w = np.kron(basis_matrix(ALICE[a], d), basis_matrix(BOB[b], d))
        op += (w * coefficient_matrix(coeffs[a, b]).reshape(-1)) @ w.conj().T
    return op


def bell_trace_dense(state: DensityOperator) -> float:
    """Tr[I_d rho] with the operator built explicitly."""
    d = int(round(np.sqrt(state.dim)))
    return float(np.trace(bell_operator(d) @ state.matrix).real)


# ---------------------------------------------------------------------------
# factorized route


def level_table(pair: DensityOperator, m: int, a: int, b: int, phases_a=None, phases_b=None) -> np.ndarray:
    """p_m[r, s]: probability that pair m projects onto the factors for residues r, s."""
    x = factor_phases(ALICE[a], m) if phases_a is None else np.asarray(phases_a)
    y = factor_phases(BOB[b], m) if phases_b is None else np.asarray(phases_b)
    fa = np.stack([np.ones_like(x), np.exp(1j * x)], -1) / np.sqrt(2)
    fb = np.stack([np.ones_like(y), np.exp(1j * y)], -1) / np.sqrt(2)
    rho = pair.matrix.reshape(2, 2, 2, 2)
    # sum over Alice's indices first; what remains is rank 4 in Bob's indices.
    g = np.einsum("ra,rc,abcd->rbd", fa.conj(), fa, rho).reshape(x.size, 4)
    h = np.einsum("sb,sd->bds", fb.conj(), fb).reshape(4, y.size)
    p = (g @ h).real
    if p.min() < -NEG_TOL:
        raise ValueError(f"negative factor probability {p.min():.3e}")
    return np.clip(p, 0.0, None)


def _levels(pair, N, a, b, phases=None):
    """Factor tables for m = 1..N; ``phases`` optionally maps (a, b, m) -> (x, y)."""
    out = []
    for m in range(1, N + 1):
        x, y = phases(a, b, m) if phases else (None, None)
        out.append(level_table(pair, m, a, b, x, y))
    return out


def joint_table_factorized(pair: DensityOperator, N: int, a: int, b: int, phases=None) -> ProbabilityTable:
    if N < 1:
        raise ValueError("need at least one pair")
    if 2**N > TABLE_CAP:
        raise ValueError(f"full tables are limited to d <= {TABLE_CAP}; use the streaming route")
    t = np.ones((1, 1))
    for p in _levels(pair, N, a, b, phases):
        t = np.tile(t, (2, 2)) * p
    return ProbabilityTable(a, b, t)


def factorized_tables(pair, N, phases=None) -> dict[tuple[int, int], ProbabilityTable]:
    return {ab: joint_table_factorized(pair, N, *ab, phases=phases) for ab in SETTING_PAIRS}


def _skew(p: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(_skewed_view(p))


def level_diffs(pair, N: int, a: int, b: int, phases=None, stream_above: int = STREAM_ABOVE):
    """Difference distributions D for d = 2, 4, ..., 2**N in one pass.

    Skewed tables satisfy U_m[delta, l] = U_{m-1}[delta mod h, l mod h] * S_m[delta, l]
    with S_m the skewed level factor.  Levels up to ``stream_above`` are
    materialized; beyond that rows are generated in blocks.
    """
    if N < 1:
        raise ValueError("need at least one pair")
    skews = [_skew(p) for p in _levels(pair, N, a, b, phases)]
    out = []
    u = np.ones((1, 1))
    m0 = 0
    for m, s in enumerate(skews, start=1):
        if 2**m > stream_above:
            break
        u = np.tile(u, (2, 2)) * s
        m0 = m
        out.append(u.sum(axis=1))
    M0 = 2**m0
    for top in range(m0 + 1, N + 1):
        d = 2**top
        D = np.empty(d)
        rows_per_block = max(1, _BLOCK_ENTRIES // d)
        for start in range(0, d, rows_per_block):
            rows = np.arange(start, min(d, start + rows_per_block))
            acc = np.tile(u[rows % M0], (1, d // M0))
            for m in range(m0 + 1, top + 1):
                M = 2**m
                acc *= np.tile(skews[m - 1][rows % M], (1, d // M))
            D[rows] = acc.sum(axis=1)
        out.append(D)
    return out


def _check_pair(pair):
    if pair.dim != 4:
        raise ValueError(f"expected a two-qubit pair state, got dimension {pair.dim}")


def scan_dimensions(pair: PairState, N_max: int, phases=None, stream_above: int = STREAM_ABOVE) -> list[BellReport]:
    """I_d for d = 2, 4, ..., 2**N_max through the factorized route."""
    _check_pair(pair)
    per_ab = {ab: level_diffs(pair, N_max, *ab, phases=phases, stream_above=stream_above) for ab in SETTING_PAIRS}
    return [
        report_from_diffs(2 ** (i + 1), {ab: per_ab[ab][i] for ab in SETTING_PAIRS})
        for i in range(N_max)
    ]


def bell_operator_trace(pair: PairState, N: int, stream_above: int = STREAM_ABOVE) -> BellReport:
    """Tr[I_d rho_pair^(x)N] evaluated through the probability factorization."""
    _check_pair(pair)
    diffs = {ab: level_diffs(pair, N, *ab, stream_above=stream_above)[-1] for ab in SETTING_PAIRS}
    return report_from_diffs(2**N, diffs)


# ---------------------------------------------------------------------------
# local realistic bound


def lrt_max(d: int) -> tuple[float, DeterministicStrategy]:
    """Maximum of I_d over all d**4 deterministic local strategies."""
    if d < 2 or d > LRT_CAP:
        raise ValueError(f"enumeration is limited to 2 <= d <= {LRT_CAP}, got {d}")
    # integer arithmetic keeps the maximum exact
    c = bell_coefficients(d, scaled=True)
    o = np.arange(d)
    A1, A2, B1, B2 = np.ix_(o, o, o, o)
    vals = (
        c[1, 1][(A1 - B1) % d]
        + c[1, 2][(A1 - B2) % d]
        + c[2, 1][(A2 - B1) % d]
        + c[2, 2][(A2 - B2) % d]
    )
    idx = int(np.argmax(vals))
    best = DeterministicStrategy(*(int(i) for i in np.unravel_index(idx, vals.shape)))
    return int(vals.flat[idx]) / (d - 1), best


def strategies(d: int):
    for s in itertools.product(range(d), repeat=4):
        yield DeterministicStrategy(*s)


# ---------------------------------------------------------------------------
# checks


def no_signaling_violation(tables: dict[tuple[int, int], ProbabilityTable]) -> float:
    """Largest change of a party's marginal under the other party's setting."""
    worst = 0.0
    for a in (1, 2):
        r1, r2 = tables[a, 1].entries.sum(axis=1), tables[a, 2].entries.sum(axis=1)
        worst = max(worst, float(np.abs(r1 - r2).max()))
    for b in (1, 2):
        c1, c2 = tables[1, b].entries.sum(axis=0), tables[2, b].entries.sum(axis=0)
        worst = max(worst, float(np.abs(c1 - c2).max()))
    return worst

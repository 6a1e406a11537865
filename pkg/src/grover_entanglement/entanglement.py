"""Schmidt ranks, maximum Schmidt number and finest tensor factorization.

A bipartition is a qubit bitmask ``mask`` for side A, bit ``i`` standing for
qubit ``i``.  Canonical bipartitions contain qubit 0 on side A, so an
``n``-qubit register has ``2**(n-1) - 1`` of them and canonical ``mask`` maps
to the dense index ``mask >> 1``.

Everything is driven by a *rank table*: the numerical Schmidt rank of every
canonical bipartition.  Finest factorization, separable degree and the
maximum Schmidt number are all read off that table, because for a product
state the rank of a cut that keeps each other factor on one side equals the
rank of the cut restricted to the factor it splits.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import (
    InternalConsistencyError,
    InvalidArgumentError,
    ResourceLimitError,
)
from .exactrank import exact_sign_rank
from .statecore import PureState, TwoValueSpec

__all__ = [
    "Bipartition",
    "RankPolicy",
    "DEFAULT_POLICY",
    "EntanglementReport",
    "Factorization",
    "TwoValueClass",
    "RankTable",
    "default_max_n",
    "canonical_bipartitions",
    "reshape_for_split",
    "reduced_rank",
    "rank_table",
    "max_schmidt_number",
    "schmidt_measure",
    "finest_factorization",
    "separable_degree",
    "analyze",
    "measure_batch",
    "classify_two_value",
    "exact_sign_rank",
    "sign_matrix",
]

DEFAULT_MAX_N = 16
# stacked SVD input is chunked to roughly this many float64 entries
_CHUNK_ENTRIES = 1 << 22
_GATHER_CACHE_MAX_N = 10


def default_max_n() -> int:
    env = os.environ.get("GROVER_ENT_MAX_N")
    if env:
        try:
            return int(env)
        except ValueError:
            raise InvalidArgumentError(f"GROVER_ENT_MAX_N must be an integer, got {env!r}") from None
    return DEFAULT_MAX_N


def _check_cap(n: int, max_n: int | None):
    cap = default_max_n() if max_n is None else max_n
    if n > cap:
        raise ResourceLimitError(
            f"entanglement analysis of n={n} qubits exceeds the cap of {cap}; "
            "raise max_n (or GROVER_ENT_MAX_N) to override"
        )


@lru_cache(maxsize=None)
def _qubits(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


def _mask(qubits) -> int:
    m = 0
    for q in qubits:
        m |= 1 << q
    return m


@dataclass(frozen=True)
class Bipartition:
    n: int
    maskA: int

    def __post_init__(self):
        full = (1 << self.n) - 1
        if not 0 < self.maskA < full:
            raise InvalidArgumentError(
                f"side A must be a nonempty proper subset of {self.n} qubits, got mask {self.maskA:#b}"
            )

    @classmethod
    def from_qubits(cls, n: int, qubits) -> "Bipartition":
        return cls(n, _mask(qubits))

    @property
    def side_a(self) -> tuple[int, ...]:
        return _qubits(self.maskA)

    @property
    def side_b(self) -> tuple[int, ...]:
        return _qubits(((1 << self.n) - 1) ^ self.maskA)

    def canonical(self) -> "Bipartition":
        if self.maskA & 1:
            return self
        return Bipartition(self.n, ((1 << self.n) - 1) ^ self.maskA)


def canonical_bipartitions(n: int) -> list[Bipartition]:
    full = (1 << n) - 1
    return [Bipartition(n, m) for m in range(1, full, 2)]


@dataclass(frozen=True)
class RankPolicy:
    """Numerical rank threshold ``rel_tol * sigma_1 * max(rows, cols)``.

    Singular values within a factor ``ambiguity_factor`` of the threshold
    (on either side) flag the decision as ambiguous.
    """

    rel_tol: float = 1e-10
    ambiguity_factor: float = 32.0

    def __post_init__(self):
        if not 0 < self.rel_tol < 1:
            raise InvalidArgumentError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if not self.ambiguity_factor > 1:
            raise InvalidArgumentError(f"ambiguity_factor must exceed 1, got {self.ambiguity_factor}")

    def ranks(self, sv: np.ndarray, shape: tuple[int, int]) -> tuple[np.ndarray, np.ndarray]:
        """Ranks and ambiguity flags for stacked singular values, shape ``(..., k)``."""
        top = sv[..., :1]
        if np.any(top <= 0):
            raise InvalidArgumentError("the zero vector has no Schmidt decomposition")
        tau = self.rel_tol * top * max(shape)
        f = self.ambiguity_factor
        # sigma_1 always counts: a nonzero vector has Schmidt rank >= 1
        rank = np.maximum(np.count_nonzero(sv > tau, axis=-1), 1)
        amb = np.any((sv > tau) & (sv < f * tau), axis=-1) | np.any(
            (sv > tau / f) & (sv <= tau), axis=-1
        )
        return rank, amb


DEFAULT_POLICY = RankPolicy()


def reshape_for_split(amps: np.ndarray, n: int, mask: int) -> np.ndarray:
    """Matrix with rows indexed by side-A bits and columns by side-B bits.

    ``amps`` may carry leading batch axes; the result then has shape
    ``batch + (2**|A|, 2**|B|)``.
    """
    amps = np.asarray(amps)
    batch = amps.shape[:-1]
    a = [i for i in range(n) if mask >> i & 1]
    b = [i for i in range(n) if not mask >> i & 1]
    lead = len(batch)
    t = amps.reshape(batch + (2,) * n).transpose(
        list(range(lead)) + [lead + i for i in a] + [lead + i for i in b]
    )
    return t.reshape(batch + (1 << len(a), 1 << len(b)))


def reduced_rank(state: PureState, split: Bipartition, policy: RankPolicy = DEFAULT_POLICY):
    """Schmidt rank across ``split`` and whether the decision was borderline."""
    if split.n != state.n:
        raise InvalidArgumentError(f"bipartition is for n={split.n}, state has n={state.n}")
    mat = reshape_for_split(state.amps, state.n, split.maskA)
    sv = np.linalg.svd(mat, compute_uv=False)
    rank, amb = policy.ranks(sv, mat.shape)
    return int(rank), bool(amb)


@dataclass(frozen=True)
class RankTable:
    """Schmidt ranks of every canonical bipartition for a batch of states.

    ``ranks[s, mask >> 1]`` is the rank of state ``s`` across canonical ``mask``.
    """

    n: int
    ranks: np.ndarray
    ambiguous: np.ndarray

    def index(self, mask: int) -> int:
        if not mask & 1:
            mask ^= (1 << self.n) - 1
        return mask >> 1

    def rank(self, s: int, mask: int) -> int:
        return int(self.ranks[s, self.index(mask)])


def _split_gather(n: int, mask: int) -> np.ndarray:
    """Flat indices placing amplitudes into the A-rows x B-columns matrix of ``mask``."""
    if n <= _GATHER_CACHE_MAX_N:
        return _cached_gather(n, mask)
    return reshape_for_split(np.arange(1 << n), n, mask).reshape(-1)


@lru_cache(maxsize=None)
def _cached_gather(n: int, mask: int) -> np.ndarray:
    return reshape_for_split(np.arange(1 << n), n, mask).reshape(-1)


@lru_cache(maxsize=None)
def _size_groups(n: int) -> tuple:
    groups: dict[int, list[int]] = {}
    for mask in range(1, (1 << n) - 1, 2):
        groups.setdefault(bin(mask).count("1"), []).append(mask)
    return tuple((size, tuple(masks)) for size, masks in sorted(groups.items()))


def rank_table(amps, n: int, policy: RankPolicy = DEFAULT_POLICY) -> RankTable:
    """Rank table for ``amps`` of shape ``(2**n,)`` or ``(S, 2**n)``."""
    amps = np.atleast_2d(np.asarray(amps, dtype=np.float64))
    n_states = amps.shape[0]
    n_cuts = (1 << (n - 1)) - 1
    ranks = np.ones((n_states, n_cuts), dtype=np.int64)
    amb = np.zeros((n_states, n_cuts), dtype=bool)
    if not np.all(np.any(amps != 0, axis=1)):
        raise InvalidArgumentError("the zero vector has no Schmidt decomposition")
    for size, masks in _size_groups(n):
        shape = (1 << size, 1 << (n - size))
        step = max(1, _CHUNK_ENTRIES // (n_states << n))
        for start in range(0, len(masks), step):
            chunk = masks[start:start + step]
            gather = np.stack([_split_gather(n, m) for m in chunk])
            mats = amps[:, gather].reshape((n_states, len(chunk)) + shape)
            sv = np.linalg.svd(mats, compute_uv=False)
            r, f = policy.ranks(sv, shape)
            cols = [m >> 1 for m in chunk]
            ranks[:, cols] = r
            amb[:, cols] = f
    return RankTable(n, ranks, amb)


@lru_cache(maxsize=None)
def _subsets_containing(lead: int, others: tuple) -> tuple:
    """Masks ``{lead} | S`` for S over ``others``, by size then by mask value."""
    base = 1 << lead
    out = []
    for size in range(len(others) + 1):
        out.extend(base | m for m in sorted(_mask(c) for c in combinations(others, size)))
    return tuple(out)


def _partition(table: RankTable, s: int) -> list[int]:
    """Greedy minimal-factor extraction over the rank table of state ``s``."""
    n = table.n
    unassigned = (1 << n) - 1
    blocks = []
    while unassigned:
        qs = _qubits(unassigned)
        chosen = unassigned
        for sub in _subsets_containing(qs[0], qs[1:]):
            if sub == unassigned:
                break
            if table.rank(s, sub) == 1:
                chosen = sub
                break
        blocks.append(chosen)
        unassigned ^= chosen
    return blocks


def _block_chi(table: RankTable, s: int, block: int) -> int:
    qs = _qubits(block)
    best = 1
    for sub in _subsets_containing(qs[0], qs[1:]):
        if sub == block:
            break
        best = max(best, table.rank(s, sub))
    return best


@lru_cache(maxsize=1 << 16)
def _degree_and_chi(n: int, row: bytes) -> tuple[int, int]:
    # memoized on the rank pattern: many states share one
    table = RankTable(n, np.frombuffer(row, dtype=np.int64).reshape(1, -1), np.zeros((1, 0), bool))
    blocks = _partition(table, 0)
    return len(blocks), math.prod(_block_chi(table, 0, b) for b in blocks)


@dataclass(frozen=True)
class Factorization:
    """Ordered factors ``(qubits, state)`` of a finest tensor factorization."""

    factors: tuple
    ambiguous: bool = False

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)

    def __getitem__(self, i):
        return self.factors[i]

    @property
    def partition(self) -> list[tuple[int, ...]]:
        return [qs for qs, _ in self.factors]


def _extract_factors(state: PureState, blocks: list[int]) -> tuple:
    n = state.n
    factors = []
    for block in sorted(blocks, key=lambda m: _qubits(m)[0]):
        qs = _qubits(block)
        if block == (1 << n) - 1:
            vec = state.amps.copy()
        else:
            mat = reshape_for_split(state.amps, n, block)
            col = np.argmax(np.einsum("ij,ij->j", mat, mat))
            vec = mat[:, col] / np.linalg.norm(mat[:, col])
        lead = np.argmax(np.abs(vec))
        if vec[lead] < 0:
            vec = -vec
        factors.append([qs, vec])
    # reassemble in qubit order and push the residual sign onto the first factor
    recon = _assemble(n, factors)
    sign = 1.0 if float(recon @ state.amps) >= 0 else -1.0
    factors[0][1] = sign * factors[0][1]
    err = float(np.max(np.abs(sign * recon - state.amps)))
    if err > 1e-9:
        raise InternalConsistencyError(
            f"factor reconstruction deviates from the input by {err:.3e}"
        )
    return tuple((qs, PureState(len(qs), vec)) for qs, vec in factors)


def _assemble(n: int, factors) -> np.ndarray:
    t = np.ones(())
    order: list[int] = []
    for qs, vec in factors:
        t = np.multiply.outer(t, np.asarray(vec).reshape((2,) * len(qs)))
        order.extend(qs)
    # axis j of t holds qubit order[j]; move qubit q to axis q
    return np.moveaxis(t, list(range(n)), order).reshape(-1) if n else t.reshape(-1)


@dataclass(frozen=True)
class EntanglementReport:
    delta: int
    factors: tuple
    chi: int
    e_chi: float
    per_factor_chi: tuple
    ambiguous: bool = False

    def to_dict(self) -> dict:
        return {
            "delta": self.delta,
            "chi": self.chi,
            "e_chi": self.e_chi,
            "factors": [
                {"qubits": list(qs), "amplitudes": [float(v) for v in st.amps]}
                for qs, st in self.factors
            ],
            "ambiguous": self.ambiguous,
        }


def analyze(
    state: PureState,
    policy: RankPolicy = DEFAULT_POLICY,
    *,
    max_n: int | None = None,
    cross_check: bool = False,
) -> EntanglementReport:
    """Full entanglement report: finest factorization, delta, chi and log2(chi)."""
    _check_cap(state.n, max_n)
    table = rank_table(state.amps, state.n, policy)
    blocks = _partition(table, 0)
    per_factor = tuple(_block_chi(table, 0, b) for b in sorted(blocks, key=lambda m: _qubits(m)[0]))
    chi = math.prod(per_factor)
    if cross_check:
        direct = int(table.ranks[0].max()) if table.ranks.shape[1] else 1
        if direct != chi:
            raise InternalConsistencyError(
                f"factorized chi {chi} disagrees with direct bipartition scan {direct}"
            )
    factors = _extract_factors(state, blocks)
    return EntanglementReport(
        delta=len(blocks),
        factors=factors,
        chi=chi,
        e_chi=math.log2(chi),
        per_factor_chi=per_factor,
        ambiguous=bool(table.ambiguous[0].any()),
    )


def finest_factorization(
    state: PureState, policy: RankPolicy = DEFAULT_POLICY, *, max_n: int | None = None
) -> Factorization:
    _check_cap(state.n, max_n)
    table = rank_table(state.amps, state.n, policy)
    blocks = _partition(table, 0)
    return Factorization(_extract_factors(state, blocks), bool(table.ambiguous[0].any()))


def separable_degree(
    state: PureState, policy: RankPolicy = DEFAULT_POLICY, *, max_n: int | None = None
) -> int:
    _check_cap(state.n, max_n)
    return len(_partition(rank_table(state.amps, state.n, policy), 0))


def max_schmidt_number(
    state: PureState,
    policy: RankPolicy = DEFAULT_POLICY,
    *,
    method: str = "factorized",
    max_n: int | None = None,
) -> tuple[int, bool]:
    """Largest Schmidt rank over all bipartitions.

    ``method="factorized"`` multiplies per-factor maxima over the finest
    factorization; ``method="direct"`` scans every bipartition of the register.
    """
    _check_cap(state.n, max_n)
    table = rank_table(state.amps, state.n, policy)
    amb = bool(table.ambiguous[0].any())
    if method == "direct":
        return (int(table.ranks[0].max()) if table.ranks.shape[1] else 1), amb
    if method != "factorized":
        raise InvalidArgumentError(f"unknown method {method!r}")
    chi = math.prod(_block_chi(table, 0, b) for b in _partition(table, 0))
    return chi, amb


def schmidt_measure(
    state: PureState, policy: RankPolicy = DEFAULT_POLICY, *, max_n: int | None = None
) -> float:
    chi, _ = max_schmidt_number(state, policy, max_n=max_n)
    return math.log2(chi)


def measure_batch(
    amps, n: int, policy: RankPolicy = DEFAULT_POLICY, *, max_n: int | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Separable degree, chi and ambiguity for a stack of states, no factor states built."""
    _check_cap(n, max_n)
    table = rank_table(amps, n, policy)
    count = table.ranks.shape[0]
    delta = np.empty(count, dtype=np.int64)
    chi = np.empty(count, dtype=np.int64)
    for s in range(count):
        delta[s], chi[s] = _degree_and_chi(n, table.ranks[s].tobytes())
    return delta, chi, table.ambiguous.any(axis=1)


# --- combinatorial classification of two-value states ----------------------

@dataclass(frozen=True)
class TwoValueClass:
    category: str
    free_qubits: tuple
    residual_marked: frozenset
    predicted_delta_lower_bound: int
    fixed_qubits: tuple = field(default=())


def _flip_invariant(members: frozenset, pos: int) -> bool:
    bit = 1 << pos
    return all((x ^ bit) in members for x in members)


def _project(members, positions: Sequence[int]) -> frozenset:
    out = set()
    for x in members:
        y = 0
        for pos in positions:
            y = (y << 1) | (x >> pos & 1)
        out.add(y)
    return frozenset(out)


def classify_two_value(spec: TwoValueSpec, atol: float = 1e-12) -> TwoValueClass:
    """Structure of ``a`` on unmarked / ``b`` on marked states, from the marked set alone.

    A qubit is a uniform ``(|0> + |1>)/sqrt(2)`` factor exactly when the
    marked set is invariant under flipping that qubit's bit.  For ``a = 0``
    (or ``b = 0``) the state is fully separable exactly when its support is
    a subcube: a set of free qubits taking all values and fixed qubits
    taking one value each.
    """
    n = spec.n
    N = 1 << n
    members = spec.marked.members
    M = len(members)
    a, b = spec.a, spec.b
    pos = {i: n - 1 - i for i in range(n)}
    if M in (0, N) or abs(a - b) <= atol:
        return TwoValueClass("uniform", tuple(range(n)), frozenset(), n)

    free = tuple(i for i in range(n) if _flip_invariant(members, pos[i]))
    rest = [pos[i] for i in range(n) if i not in free]
    residual = _project(members, rest)

    if abs(a) <= atol or abs(b) <= atol:
        support = members if abs(a) <= atol else frozenset(range(N)) - members
        if len(support) == 1:
            return TwoValueClass("lemma1-single", (), residual, n, tuple(range(n)))
        fixed = tuple(
            i for i in range(n)
            if i not in free and len({x >> pos[i] & 1 for x in support}) == 1
        )
        if len(support) == 1 << len(free):
            return TwoValueClass("lemma1-subcube", free, residual, n, fixed)
        return TwoValueClass("lemma1-entangled", free, residual, len(free) + len(fixed) + 1, fixed)

    category = "rews" if abs(a + b) <= atol else "generic"
    return TwoValueClass(category, free, residual, len(free) + 1)


def sign_matrix(state: PureState, split: Bipartition) -> np.ndarray:
    """Integer sign pattern of a real equally weighted state reshaped across ``split``."""
    scaled = state.amps * math.sqrt(state.dim)
    if not np.allclose(np.abs(scaled), 1.0, atol=1e-9):
        raise InvalidArgumentError("state is not equally weighted")
    return reshape_for_split(np.sign(scaled).astype(np.int64), state.n, split.maskA)

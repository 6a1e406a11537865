"""Grover-search states built in closed form and by operator application.

Amplitudes are real float64 vectors indexed by the basis integer ``x``.
Qubit ``i`` of an ``n``-qubit register sits at bit position ``n - 1 - i``
of ``x``, so qubit 0 is the most significant bit and ``amps.reshape((2,) * n)``
has one axis per qubit in qubit order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import InvalidArgumentError, OutOfRangeError

NORM_ATOL = 1e-9

__all__ = [
    "PureState",
    "MarkedSet",
    "TwoValueSpec",
    "GroverParams",
    "make_uniform",
    "basis_state",
    "two_value_state",
    "grover_params",
    "closed_form_amplitudes",
    "iteration_state",
    "oracle_state",
    "apply_oracle",
    "apply_diffusion",
    "success_probability",
    "parse_marked_tokens",
    "parse_oracle_text",
    "read_oracle_file",
    "state_to_json",
    "state_from_json",
    "read_state_file",
    "write_state_file",
]


@dataclass(frozen=True, eq=False)
class PureState:
    """Real pure state of ``n`` qubits."""

    n: int
    amps: np.ndarray

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InvalidArgumentError(f"qubit count must be a positive integer, got {self.n!r}")
        amps = np.array(self.amps, dtype=np.float64, copy=True).ravel()
        if amps.shape[0] != 1 << int(self.n):
            raise InvalidArgumentError(
                f"expected {1 << int(self.n)} amplitudes for n={self.n}, got {amps.shape[0]}"
            )
        if not np.all(np.isfinite(amps)):
            raise InvalidArgumentError("amplitudes must be finite")
        norm2 = float(amps @ amps)
        if abs(norm2 - 1.0) > NORM_ATOL:
            raise InvalidArgumentError(f"state is not normalized (sum of squares = {norm2!r})")
        amps.setflags(write=False)
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "amps", amps)

    @classmethod
    def from_amplitudes(cls, amps, *, atol: float = NORM_ATOL) -> "PureState":
        """Build a state from a vector whose norm is within ``atol`` of one, renormalizing it."""
        amps = np.asarray(amps, dtype=np.float64).ravel()
        size = amps.shape[0]
        n = size.bit_length() - 1
        if size < 2 or 1 << n != size:
            raise InvalidArgumentError(f"amplitude count {size} is not a power of two >= 2")
        norm2 = float(amps @ amps)
        if not math.isfinite(norm2) or abs(norm2 - 1.0) > atol:
            raise InvalidArgumentError(f"state is not normalized (sum of squares = {norm2!r})")
        return cls(n, amps / math.sqrt(norm2))

    @property
    def dim(self) -> int:
        return 1 << self.n

    def tensor(self) -> np.ndarray:
        """Amplitudes as an ``n``-axis array, axis ``i`` being qubit ``i``."""
        return self.amps.reshape((2,) * self.n)

    def kron(self, other: "PureState") -> "PureState":
        """Tensor product with ``other`` placed on the higher-numbered qubits."""
        return PureState(self.n + other.n, np.kron(self.amps, other.amps))

    def allclose(self, other: "PureState", atol: float = 1e-12) -> bool:
        return self.n == other.n and bool(np.max(np.abs(self.amps - other.amps)) <= atol)

    def __repr__(self):
        return f"PureState(n={self.n}, amps={np.array2string(self.amps, precision=6)})"


def _two_adic(m: int) -> tuple[int, int]:
    q = (m & -m).bit_length() - 1
    return q, ((m >> q) - 1) // 2


@dataclass(frozen=True)
class MarkedSet:
    """Solution set of the Boolean oracle, as basis integers."""

    n: int
    members: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgumentError(f"qubit count must be >= 1, got {self.n}")
        members = frozenset(int(x) for x in self.members)
        bad = [x for x in members if not 0 <= x < 1 << self.n]
        if bad:
            raise InvalidArgumentError(f"basis indices out of range for n={self.n}: {sorted(bad)}")
        object.__setattr__(self, "members", members)

    @property
    def M(self) -> int:
        return len(self.members)

    @property
    def q(self) -> int:
        """2-adic valuation of M (M >= 1 only)."""
        if self.M == 0:
            raise InvalidArgumentError("2-adic split is undefined for an empty marked set")
        return _two_adic(self.M)[0]

    @property
    def p(self) -> int:
        """Odd part index: M = 2**q * (2p + 1)."""
        if self.M == 0:
            raise InvalidArgumentError("2-adic split is undefined for an empty marked set")
        return _two_adic(self.M)[1]

    def sorted(self) -> list[int]:
        return sorted(self.members)

    def indicator(self) -> np.ndarray:
        mask = np.zeros(1 << self.n, dtype=bool)
        if self.members:
            mask[np.fromiter(self.members, dtype=np.int64)] = True
        return mask

    def complement(self) -> "MarkedSet":
        return MarkedSet(self.n, frozenset(range(1 << self.n)) - self.members)


@dataclass(frozen=True)
class TwoValueSpec:
    """Amplitude ``a`` on unmarked and ``b`` on marked basis states."""

    marked: MarkedSet
    a: float
    b: float

    @property
    def n(self) -> int:
        return self.marked.n

    def norm_defect(self) -> float:
        m = self.marked.M
        return self.a * self.a * ((1 << self.n) - m) + self.b * self.b * m - 1.0


@dataclass(frozen=True)
class GroverParams:
    n: int
    M: int
    theta: float
    R: int


def make_uniform(n: int) -> PureState:
    """The state produced by Hadamards on every qubit of ``|0...0>``."""
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgumentError(f"qubit count must be >= 1, got {n!r}")
    return PureState(n, np.full(1 << n, 2.0 ** (-n / 2)))


def basis_state(n: int, x: int = 0) -> PureState:
    if not 0 <= x < 1 << n:
        raise InvalidArgumentError(f"basis index {x} out of range for n={n}")
    amps = np.zeros(1 << n)
    amps[x] = 1.0
    return PureState(n, amps)


def two_value_state(spec: TwoValueSpec) -> PureState:
    if abs(spec.norm_defect()) > NORM_ATOL:
        raise InvalidArgumentError(
            f"a^2 (2^n - M) + b^2 M deviates from 1 by {spec.norm_defect():.3e}"
        )
    amps = np.where(spec.marked.indicator(), spec.b, spec.a).astype(np.float64)
    return PureState(spec.n, amps)


def _round_half_down(x: float, snap: float = 1e-9) -> int:
    # ceil(x - 1/2) with near-integer arguments snapped first
    y = x - 0.5
    r = round(y)
    if abs(y - r) <= snap:
        return int(r)
    return int(math.ceil(y))


def grover_params(n: int, M: int) -> GroverParams:
    """Rotation angle and optimal iteration count for ``M`` solutions among ``2**n``."""
    if n < 1:
        raise InvalidArgumentError(f"qubit count must be >= 1, got {n}")
    N = 1 << n
    if not 1 <= M <= N // 2:
        raise OutOfRangeError(f"need 1 <= M <= 2^(n-1) = {N // 2}, got M={M}")
    theta = 2.0 * math.asin(math.sqrt(M / N))
    R = _round_half_down((math.pi - theta) / (2.0 * theta))
    return GroverParams(n=n, M=M, theta=theta, R=max(R, 0))


def closed_form_amplitudes(params: GroverParams, k: int, *, oracle: bool = False) -> tuple[float, float]:
    """Unmarked/marked amplitudes after ``k`` iterations, or at the ``k``-th oracle call."""
    if oracle:
        if k < 1:
            raise InvalidArgumentError(f"oracle states are indexed from k=1, got k={k}")
        a, b = closed_form_amplitudes(params, k - 1)
        return a, -b
    if k < 0:
        raise InvalidArgumentError(f"iteration count must be >= 0, got k={k}")
    half = params.theta / 2.0
    angle = (2 * k + 1) * half
    root = math.sqrt(1 << params.n)
    return math.cos(angle) / (root * math.cos(half)), math.sin(angle) / (root * math.sin(half))


def _check_marked(params: GroverParams, marked: MarkedSet):
    if marked.n != params.n or marked.M != params.M:
        raise InvalidArgumentError(
            f"marked set (n={marked.n}, M={marked.M}) does not match parameters "
            f"(n={params.n}, M={params.M})"
        )


def _normalized_two_value(marked: MarkedSet, a: float, b: float) -> PureState:
    amps = np.where(marked.indicator(), b, a)
    return PureState(marked.n, amps / math.sqrt(float(amps @ amps)))


def iteration_state(params: GroverParams, marked: MarkedSet, k: int) -> PureState:
    _check_marked(params, marked)
    a, b = closed_form_amplitudes(params, k)
    return _normalized_two_value(marked, a, b)


def oracle_state(params: GroverParams, marked: MarkedSet, k: int) -> PureState:
    _check_marked(params, marked)
    a, b = closed_form_amplitudes(params, k, oracle=True)
    return _normalized_two_value(marked, a, b)


def apply_oracle(state: PureState, marked: MarkedSet) -> PureState:
    if marked.n != state.n:
        raise InvalidArgumentError(f"marked set is for n={marked.n}, state has n={state.n}")
    amps = state.amps.copy()
    mask = marked.indicator()
    amps[mask] = -amps[mask]
    return PureState(state.n, amps)


def apply_diffusion(state: PureState) -> PureState:
    """Inversion about the mean, ``2|u><u| - I`` with ``u`` uniform."""
    amps = 2.0 * state.amps.mean() - state.amps
    return PureState(state.n, amps)


def success_probability(state: PureState, marked: MarkedSet) -> float:
    if marked.n != state.n:
        raise InvalidArgumentError(f"marked set is for n={marked.n}, state has n={state.n}")
    sel = state.amps[marked.indicator()]
    return float(sel @ sel)


# --- file formats ---------------------------------------------------------

def _parse_token(token: str, n: int) -> int:
    if len(token) == n and set(token) <= {"0", "1"}:
        return int(token, 2)
    if not token.isdigit():
        raise InvalidArgumentError(f"not a basis index or {n}-bit string: {token!r}")
    x = int(token)
    if x >= 1 << n:
        raise InvalidArgumentError(f"basis index {x} >= 2^{n}")
    return x


def parse_marked_tokens(tokens: Iterable[str], n: int) -> MarkedSet:
    """Marked set from decimal indices or ``n``-bit strings; duplicates are rejected."""
    seen: set[int] = set()
    for token in tokens:
        x = _parse_token(token.strip(), n)
        if x in seen:
            raise InvalidArgumentError(f"duplicate marked entry {token.strip()!r}")
        seen.add(x)
    return MarkedSet(n, frozenset(seen))


def parse_oracle_text(text: str, n: int) -> MarkedSet:
    lines = (line.strip() for line in text.splitlines())
    return parse_marked_tokens((s for s in lines if s and not s.startswith("#")), n)


def read_oracle_file(path, n: int) -> MarkedSet:
    return parse_oracle_text(Path(path).read_text(encoding="utf-8"), n)


def state_to_json(state: PureState) -> dict:
    return {"n": state.n, "amplitudes": [float(v) for v in state.amps]}


def state_from_json(obj, *, atol: float = 1e-6) -> PureState:
    if not isinstance(obj, dict) or "n" not in obj or "amplitudes" not in obj:
        raise InvalidArgumentError('state JSON must be an object with "n" and "amplitudes"')
    n = obj["n"]
    amps = obj["amplitudes"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise InvalidArgumentError(f'"n" must be a positive integer, got {n!r}')
    if not isinstance(amps, list) or len(amps) != 1 << n:
        raise InvalidArgumentError(f'"amplitudes" must be a list of {1 << n} numbers')
    if not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in amps):
        raise InvalidArgumentError('"amplitudes" must contain only real numbers')
    return PureState.from_amplitudes(amps, atol=atol)


def read_state_file(path, *, atol: float = 1e-6) -> PureState:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"malformed state file {path}: {exc}") from exc
    return state_from_json(obj, atol=atol)


def write_state_file(state: PureState, path):
    Path(path).write_text(json.dumps(state_to_json(state)) + "\n", encoding="utf-8")

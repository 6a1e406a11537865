"""Finite-model checks of the structural results on Grover-search entanglement.

Each check enumerates marked sets (all of them, or a seeded sample), builds
the relevant states, measures separable degree and maximum Schmidt number,
and compares them with the predicted values or ranges.  Work is split into
units of marked sets sharing one size ``M``; units may run in worker
processes, and results are always merged in unit order so the outcome does
not depend on the worker count.
"""

from __future__ import annotations

import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable

import numpy as np

from .dynamics import classify_trace, run_dynamics_batch
from .entanglement import DEFAULT_POLICY, RankPolicy, classify_two_value, measure_batch
from .errors import InvalidArgumentError, ResourceLimitError
from .statecore import MarkedSet, TwoValueSpec, closed_form_amplitudes, grover_params

__all__ = [
    "CHECK_IDS",
    "CheckSpec",
    "CheckResult",
    "Violation",
    "FractionReport",
    "check",
    "count_2separable",
    "fraction_report",
    "generic_amplitudes",
    "is_subcube",
    "sweep",
    "SWEEP_COLUMNS",
]

CHECK_IDS = (
    "lemma1", "lemma2_count", "thm3", "thm4", "thm5", "thm6", "thm7",
    "lemma8", "thm9", "thm10", "thm11", "thm12", "table1",
)
EXHAUSTIVE_MAX_N = 5
DEFAULT_MAX_INSTANCES = 200_000
MAX_STORED_VIOLATIONS = 1000
_UNIT_SIZE = 512
_AMP_ATOL = 1e-12


@dataclass(frozen=True)
class CheckSpec:
    check_id: str
    n: int
    m_filter: int | None = None
    mode: str = "exhaustive"
    samples: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.check_id not in CHECK_IDS:
            raise InvalidArgumentError(f"unknown check id {self.check_id!r}")
        if self.mode not in ("exhaustive", "sampled"):
            raise InvalidArgumentError(f"mode must be 'exhaustive' or 'sampled', got {self.mode!r}")
        if self.n < 1:
            raise InvalidArgumentError(f"n must be >= 1, got {self.n}")
        if self.mode == "sampled" and self.samples < 1:
            raise InvalidArgumentError("sampled mode needs at least one sample")


@dataclass(frozen=True)
class Violation:
    marked: tuple
    step: str
    observed: object
    predicted: str

    def to_dict(self) -> dict:
        return {
            "marked": list(self.marked),
            "step": self.step,
            "observed": self.observed,
            "predicted": self.predicted,
        }


@dataclass
class CheckResult:
    check_id: str
    n: int
    mode: str
    instances_tested: int = 0
    violations: list = field(default_factory=list)
    violation_count: int = 0
    ambiguous_count: int = 0
    details: dict = field(default_factory=dict)

    @property
    def verdict(self) -> str:
        if self.violation_count:
            return "fail"
        if self.ambiguous_count:
            return "pass-with-ambiguity"
        return "pass"

    def to_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "n": self.n,
            "mode": self.mode,
            "instances_tested": self.instances_tested,
            "violation_count": self.violation_count,
            "violations": [v.to_dict() for v in self.violations],
            "ambiguous_count": self.ambiguous_count,
            "verdict": self.verdict,
            "details": self.details,
        }


# --- helpers ---------------------------------------------------------------

def generic_amplitudes(n: int, M: int) -> tuple[float, float]:
    """Amplitudes with ``a != +-b`` and ``ab != 0`` for ``0 < M < 2**n``.

    The first-iteration Grover amplitudes are used when they qualify; they
    fail at ``M = 2**(n-2)`` (unmarked amplitude vanishes) and at
    ``M >= 2**(n-1)``, where a fixed-angle split of the norm is used instead.
    """
    N = 1 << n
    if not 0 < M < N:
        raise InvalidArgumentError(f"generic amplitudes need 0 < M < 2^n, got M={M}")

    def ok(a, b):
        return min(abs(a), abs(b), abs(a - b), abs(a + b)) > 1e-9

    if 2 * M < N:
        a, b = closed_form_amplitudes(grover_params(n, M), 1)
        if ok(a, b):
            return a, b
    for phi in (1.0, 0.5, 1.3):
        a, b = math.cos(phi) / math.sqrt(N - M), math.sin(phi) / math.sqrt(M)
        if ok(a, b):
            return a, b
    raise AssertionError("no generic amplitude pair found")  # pragma: no cover


def is_subcube(n: int, support: Iterable[int]) -> bool:
    """Whether ``support`` is all strings agreeing on a fixed set of bit positions."""
    support = frozenset(support)
    if not support:
        return False
    free = [pos for pos in range(n) if all((x ^ (1 << pos)) in support for x in support)]
    return len(support) == 1 << len(free)


def _dictator(n: int, members: frozenset) -> bool:
    N = 1 << n
    for pos in range(n):
        ones = frozenset(x for x in range(N) if x >> pos & 1)
        if members == ones or members == frozenset(range(N)) - ones:
            return True
    return False


def _two_adic(M: int) -> tuple[int, int]:
    q = (M & -M).bit_length() - 1
    return q, ((M >> q) - 1) // 2


def _span(lo: int, hi: int) -> range:
    return range(lo, hi + 1)


def _fmt_range(r: range) -> str:
    if not len(r):
        return "{}"
    if len(r) == 1:
        return str(r.start)
    return f"{{{r.start}..{r.stop - 1}}}"


def _states(n: int, sets: list[tuple], a: float, b: float) -> np.ndarray:
    out = np.full((len(sets), 1 << n), a)
    for i, members in enumerate(sets):
        out[i, list(members)] = b
    return out


# --- domains ---------------------------------------------------------------

def _domain(check_id: str, n: int) -> list[int]:
    N = 1 << n
    half = N // 2
    if check_id == "lemma1":
        return list(range(1, N + 1))
    if check_id in ("lemma2_count", "thm3", "thm5", "thm6", "thm7"):
        return list(range(1, N))
    if check_id == "thm4":
        return [0, N]
    if check_id in ("thm9", "thm11"):
        return [m for m in range(1, half) if m % 2]
    if check_id == "thm10":
        return [m for m in range(2, half) if m % 2 == 0]
    if check_id == "thm12":
        return [m for m in range(2, half) if m % 2 == 0 and m * m < N]
    if check_id in ("lemma8", "table1"):
        return list(range(1, half))
    raise InvalidArgumentError(f"unknown check id {check_id!r}")  # pragma: no cover


def _m_values(spec: CheckSpec) -> list[int]:
    dom = _domain(spec.check_id, spec.n)
    if spec.m_filter is None:
        return dom
    if spec.m_filter not in dom:
        raise InvalidArgumentError(
            f"M={spec.m_filter} is outside the domain of {spec.check_id} at n={spec.n}"
        )
    return [spec.m_filter]


def _units(spec: CheckSpec, m_values: list[int], max_instances: int) -> list[tuple[int, list[tuple]]]:
    N = 1 << spec.n
    if spec.mode == "exhaustive":
        if spec.n > EXHAUSTIVE_MAX_N:
            raise ResourceLimitError(
                f"exhaustive enumeration is limited to n <= {EXHAUSTIVE_MAX_N}; use sampled mode"
            )
        total = sum(math.comb(N, m) for m in m_values)
        if total > max_instances:
            raise ResourceLimitError(
                f"exhaustive {spec.check_id} at n={spec.n} needs {total} instances "
                f"(cap {max_instances}); restrict M or use sampled mode"
            )
        units = []
        for m in m_values:
            sets = list(combinations(range(N), m))
            units.extend((m, sets[i:i + _UNIT_SIZE]) for i in range(0, len(sets), _UNIT_SIZE))
        return units
    if spec.samples > max_instances:
        raise ResourceLimitError(f"{spec.samples} samples exceed the cap of {max_instances}")
    rng = np.random.default_rng(spec.seed)
    drawn: dict[int, list[tuple]] = {}
    for _ in range(spec.samples):
        m = m_values[int(rng.integers(len(m_values)))]
        members = rng.choice(N, size=m, replace=False) if m else np.array([], dtype=np.int64)
        drawn.setdefault(m, []).append(tuple(sorted(int(x) for x in members)))
    units = []
    for m in sorted(drawn):
        sets = drawn[m]
        units.extend((m, sets[i:i + _UNIT_SIZE]) for i in range(0, len(sets), _UNIT_SIZE))
    return units


# --- per-unit evaluators ---------------------------------------------------
# Each returns (instances, violations, ambiguous_count, detail_counter).

def _eval_lemma1(n, M, sets, policy):
    N = 1 << n
    viol, details = [], Counter()
    variants = [("a=0", 0.0, 1 / math.sqrt(M), False)]
    if M < N:
        variants.append(("b=0", 1 / math.sqrt(N - M), 0.0, True))
    amb_total = 0
    for name, a, b, complement in variants:
        deltas, _, amb = measure_batch(_states(n, sets, a, b), n, policy)
        amb_total += int(amb.sum())
        for members, d in zip(sets, deltas):
            fs = frozenset(members)
            support = frozenset(range(N)) - fs if complement else fs
            cube = is_subcube(n, support)
            details[f"{name}:{'subcube' if cube else 'non-subcube'}"] += 1
            if cube != (d == n):
                viol.append(Violation(members, name, int(d),
                                      "delta = n" if cube else f"delta < {n}"))
            cls = classify_two_value(TwoValueSpec(MarkedSet(n, fs), a, b))
            if d < cls.predicted_delta_lower_bound:
                viol.append(Violation(members, name, int(d),
                                      f"delta >= {cls.predicted_delta_lower_bound} ({cls.category})"))
    return len(sets), viol, amb_total, details


def _eval_lemma2(n, M, sets, policy):
    a, b = generic_amplitudes(n, M)
    deltas, _, amb = measure_batch(_states(n, sets, a, b), n, policy)
    viol, details = [], Counter()
    for members, d in zip(sets, deltas):
        if d >= 2:
            details[f"M={M}:2-separable"] += 1
            cls = classify_two_value(TwoValueSpec(MarkedSet(n, frozenset(members)), a, b))
            if not cls.free_qubits:
                viol.append(Violation(members, "state", int(d), "a uniform single-qubit factor"))
    return len(sets), viol, int(amb.sum()), details


def _eval_thm3(n, M, sets, policy):
    N = 1 << n
    q, _ = _two_adic(M)
    a, b = generic_amplitudes(n, M)
    deltas, _, amb = measure_batch(_states(n, sets, a, b), n, policy)
    viol, details = [], Counter()
    for members, d in zip(sets, deltas):
        fs = frozenset(members)
        if d == n:
            details["fully-separable"] += 1
        listed = 2 * M == N and _dictator(n, fs)
        if (d == n) != listed:
            viol.append(Violation(members, "state", int(d),
                                  "(i) fully separable iff M = 2^(n-1) with one non-uniform qubit"))
        if M % 2 and d != 1:
            viol.append(Violation(members, "state", int(d), "(ii) delta = 1 for odd M"))
        if M % 2 == 0:
            cls = classify_two_value(TwoValueSpec(MarkedSet(n, fs), a, b))
            if d > q + 1:
                viol.append(Violation(members, "state", int(d), f"(iii) delta <= q+1 = {q + 1}"))
            if d != len(cls.free_qubits) + 1:
                viol.append(Violation(members, "state", int(d),
                                      f"(iii) uniform^(k-1) form: delta = {len(cls.free_qubits) + 1}"))
    return len(sets), viol, int(amb.sum()), details


def _eval_thm4(n, M, sets, policy):
    N = 1 << n
    amps = 1 / math.sqrt(N)
    viol, amb_total = [], 0
    for sign in (1.0, -1.0):
        value = sign * amps
        a, b = (value, 0.0) if M == 0 else (0.0, value)
        deltas, chis, amb = measure_batch(_states(n, sets, a, b), n, policy)
        amb_total += int(amb.sum())
        for members, d, c in zip(sets, deltas, chis):
            if c != 1 or d != n:
                viol.append(Violation(members, f"sign={sign:+.0f}", [int(d), int(c)], "chi = 1"))
    return len(sets), viol, amb_total, Counter()


def _eval_thm5(n, M, sets, policy):
    N = 1 << n
    half_cap = 1 << (n // 2)
    viol, amb_total = [], 0
    for name, complement in (("a=0", False), ("b=0", True)):
        size = N - M if complement else M
        a, b = (1 / math.sqrt(size), 0.0) if complement else (0.0, 1 / math.sqrt(size))
        _, chis, amb = measure_batch(_states(n, sets, a, b), n, policy)
        amb_total += int(amb.sum())
        power = size & (size - 1) == 0
        for members, c in zip(sets, chis):
            c = int(c)
            if c == 1 and not power:
                viol.append(Violation(members, name, c, "(i) chi = 1 only for |support| = 2^m"))
            if size == 1:
                allowed = _span(1, 1)
                tag = "(ii)"
            elif power:
                allowed = _span(1, min(size, half_cap))
                tag = "(iii)"
            else:
                allowed = _span(2, min(size, half_cap))
                tag = "(iv)"
            if c not in allowed:
                viol.append(Violation(members, name, c, f"{tag} chi in {_fmt_range(allowed)}"))
    return len(sets), viol, amb_total, Counter()


def _chi_range_checks(n, M, sets, chis, step, viol):
    N = 1 << n
    half_cap = 1 << (n // 2)
    for members, c in zip(sets, chis):
        c = int(c)
        if c == 1 and 2 * M != N:
            viol.append(Violation(members, step, c, "(i) chi = 1 only if M = 2^(n-1)"))
        if 2 * M == N:
            allowed, tag = _span(1, half_cap), "(ii)"
        else:
            allowed, tag = _span(2, min(M + 1, half_cap)), "(iii)"
        if c not in allowed:
            viol.append(Violation(members, step, c, f"{tag} chi in {_fmt_range(allowed)}"))
        if M == 1 and c != 2:
            viol.append(Violation(members, step, c, "(iv) chi = 2 for M = 1"))


def _eval_thm6(n, M, sets, policy):
    amp = 1 / math.sqrt(1 << n)
    _, chis, amb = measure_batch(_states(n, sets, amp, -amp), n, policy)
    viol = []
    _chi_range_checks(n, M, sets, chis, "rews", viol)
    return len(sets), viol, int(amb.sum()), Counter()


def _eval_thm7(n, M, sets, policy):
    a, b = generic_amplitudes(n, M)
    _, chis, amb = measure_batch(_states(n, sets, a, b), n, policy)
    viol = []
    _chi_range_checks(n, M, sets, chis, "generic", viol)
    return len(sets), viol, int(amb.sum()), Counter()


def _traces(n, M, sets, policy):
    marked = [MarkedSet(n, frozenset(s)) for s in sets]
    return run_dynamics_batch(n, marked, policy, measure_closed_form=True)


def _representation_check(tr, members, viol):
    for step, cf in zip(tr.steps, tr.closed_form_measures):
        if (step.delta, step.chi) != cf:
            viol.append(Violation(members, step.label, [step.delta, step.chi],
                                  f"closed-form measurement {list(cf)}"))


def _trace_ambiguous(tr) -> int:
    return int(tr.ambiguous)


def _eval_thm9(n, M, sets, policy):
    viol, amb = [], 0
    for members, tr in zip(sets, _traces(n, M, sets, policy)):
        amb += _trace_ambiguous(tr)
        _representation_check(tr, members, viol)
        for s in tr.steps[2:-1]:
            if s.delta != 1:
                viol.append(Violation(members, s.label, s.delta, "(i) delta = 1"))
        last = tr.final
        allowed = _span(1, n - 1) if tr.final_cos_zero else _span(1, 1)
        if last.delta not in allowed:
            viol.append(Violation(members, last.label, last.delta, f"(ii) delta in {_fmt_range(allowed)}"))
    return len(sets), viol, amb, Counter()


def _first_oracle_shape(n, tr, members):
    """(k1, split_form) where k1 is delta of the first oracle state and split_form says it has
    the uniform^(k1-1) (x) fully-entangled-residual form."""
    k1 = tr.steps[2].delta
    b = tr.steps[2].b
    cls = classify_two_value(TwoValueSpec(MarkedSet(n, frozenset(members)), tr.steps[2].a, b))
    return k1, k1 >= 2 and k1 == len(cls.free_qubits) + 1


def _eval_thm10(n, M, sets, policy):
    q, p = _two_adic(M)
    viol, amb, details = [], 0, Counter()
    for members, tr in zip(sets, _traces(n, M, sets, policy)):
        amb += _trace_ambiguous(tr)
        _representation_check(tr, members, viol)
        k1, split_form = _first_oracle_shape(n, tr, members)
        inter, last = tr.steps[2:-1], tr.final
        cz = tr.final_cos_zero
        if k1 == 1:
            details["first-oracle-fully-entangled"] += 1
            for s in inter:
                if s.delta != 1:
                    viol.append(Violation(members, s.label, s.delta, "(i) delta = 1"))
            if not cz and last.delta != 1:
                viol.append(Violation(members, last.label, last.delta, "(i) delta = 1"))
        elif split_form and k1 <= q + 1:
            details[f"first-oracle-form-k={k1}"] += 1
            for s in inter:
                if s.delta != k1:
                    viol.append(Violation(members, s.label, s.delta, f"(ii) delta = {k1}"))
            if (last.delta != k1) if not cz else (last.delta < k1):
                viol.append(Violation(members, last.label, last.delta,
                                      f"(ii) delta {'>=' if cz else '='} {k1}"))
        else:
            details["first-oracle-other-form"] += 1
        predicted = cz and p == 0 and k1 == q + 1
        if (last.delta == n) != predicted:
            viol.append(Violation(members, last.label, last.delta,
                                  f"(iii) fully separable {'required' if predicted else 'excluded'}"))
    return len(sets), viol, amb, details


def _eval_thm11(n, M, sets, policy):
    half_cap = 1 << (n // 2)
    A = _span(2, min(M + 1, half_cap))
    viol, amb = [], 0
    for members, tr in zip(sets, _traces(n, M, sets, policy)):
        amb += _trace_ambiguous(tr)
        _representation_check(tr, members, viol)
        for s in tr.steps[2:-1]:
            if s.chi not in A:
                viol.append(Violation(members, s.label, s.chi, f"(i) chi in {_fmt_range(A)}"))
            if M == 1 and (s.chi != 2 or s.delta != 1):
                viol.append(Violation(members, s.label, [s.delta, s.chi], "(i) delta = 1, chi = 2"))
        last = tr.final
        predicted = tr.final_cos_zero and M == 1
        if (last.chi == 1) != predicted:
            viol.append(Violation(members, last.label, last.chi,
                                  f"(ii) chi = 1 {'required' if predicted else 'excluded'}"))
    return len(sets), viol, amb, Counter()


def _eval_thm12(n, M, sets, policy):
    q, p = _two_adic(M)
    half_cap = 1 << (n // 2)
    viol, amb, details = [], 0, Counter()
    for members, tr in zip(sets, _traces(n, M, sets, policy)):
        amb += _trace_ambiguous(tr)
        _representation_check(tr, members, viol)
        k1, split_form = _first_oracle_shape(n, tr, members)
        inter, last = tr.steps[2:-1], tr.final
        cz = tr.final_cos_zero
        special = cz and p == 0 and k1 == q + 1
        if k1 == 1:
            details["first-oracle-fully-entangled"] += 1
            A = _span(2, min(M + 1, half_cap))
            fin = _span(2, min(M, half_cap)) if cz else A
            checks = [(s, A, "(i)") for s in inter] + [(last, fin, "(i)")]
        elif split_form and k1 <= q + 1:
            details[f"first-oracle-form-k={k1}"] += 1
            t = M >> (k1 - 1)
            cap = 1 << ((n - k1 + 1) // 2)
            B = _span(2, 2) if special else _span(2, min(t + 1, cap))
            fin = _span(1, min(t, cap)) if cz else _span(2, min(t + 1, cap))
            checks = [(s, B, "(ii)") for s in inter] + [(last, fin, "(ii)")]
        else:
            details["first-oracle-other-form"] += 1
            checks = []
        for s, allowed, tag in checks:
            if s.chi not in allowed:
                viol.append(Violation(members, s.label, s.chi, f"{tag} chi in {_fmt_range(allowed)}"))
        if (last.chi == 1) != special:
            viol.append(Violation(members, last.label, last.chi,
                                  f"(iii) chi = 1 {'required' if special else 'excluded'}"))
    return len(sets), viol, amb, details


def _eval_table1(n, M, sets, policy):
    viol, amb, details = [], 0, Counter()
    for members, tr in zip(sets, _traces(n, M, sets, policy)):
        amb += _trace_ambiguous(tr)
        _representation_check(tr, members, viol)
        cls = classify_trace(tr)
        key = cls.row if cls.sub_row is None else f"{cls.row}:k={cls.sub_row}"
        details[f"{key}:{cls.final_column}"] += 1
        for cell in cls.violations:
            viol.append(Violation(members, cell.label, [cell.delta, cell.chi],
                                  f"delta in {_fmt_range(cell.delta_allowed)}, "
                                  f"chi in {_fmt_range(cell.chi_allowed)} (row {cls.row})"))
    return len(sets), viol, amb, details


_EVALUATORS = {
    "lemma1": _eval_lemma1,
    "lemma2_count": _eval_lemma2,
    "thm3": _eval_thm3,
    "thm4": _eval_thm4,
    "thm5": _eval_thm5,
    "thm6": _eval_thm6,
    "thm7": _eval_thm7,
    "thm9": _eval_thm9,
    "thm10": _eval_thm10,
    "thm11": _eval_thm11,
    "thm12": _eval_thm12,
    "table1": _eval_table1,
}


def _run_unit(args):
    check_id, n, M, sets, policy = args
    return _EVALUATORS[check_id](n, M, sets, policy)


def _check_lemma8(spec: CheckSpec, m_values: list[int]) -> CheckResult:
    result = CheckResult("lemma8", spec.n, "exhaustive")
    for M in m_values:
        params = grover_params(spec.n, M)
        for k in range(1, params.R + 1):
            a, b = closed_form_amplitudes(params, k)
            result.instances_tested += 1
            if abs(a - b) <= _AMP_ATOL:
                result.violation_count += 1
                if len(result.violations) < MAX_STORED_VIOLATIONS:
                    result.violations.append(
                        Violation((), f"M={M},k={k}", [a, b], "unmarked != marked amplitude")
                    )
    return result


def check(
    spec: CheckSpec,
    policy: RankPolicy = DEFAULT_POLICY,
    *,
    jobs: int = 1,
    max_instances: int = DEFAULT_MAX_INSTANCES,
) -> CheckResult:
    """Run one check and collect every violation in deterministic order."""
    m_values = _m_values(spec)
    if spec.check_id == "lemma8":
        return _check_lemma8(spec, m_values)
    units = _units(spec, m_values, max_instances)
    args = [(spec.check_id, spec.n, m, sets, policy) for m, sets in units]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outputs = list(pool.map(_run_unit, args))
    else:
        outputs = [_run_unit(a) for a in args]

    result = CheckResult(spec.check_id, spec.n, spec.mode)
    counts: Counter = Counter()
    for instances, viol, amb, details in outputs:
        result.instances_tested += instances
        result.violation_count += len(viol)
        room = MAX_STORED_VIOLATIONS - len(result.violations)
        result.violations.extend(viol[:max(room, 0)])
        result.ambiguous_count += amb
        counts.update(details)
    result.details = {key: counts[key] for key in sorted(counts)}
    if spec.check_id == "lemma2_count":
        result.details["counts"] = {
            str(m): list(count_2separable(spec.n, m, policy, max_instances=max_instances))
            for m in m_values if m % 2 == 0 and spec.mode == "exhaustive"
        }
    if spec.mode == "sampled":
        result.details["seed"] = spec.seed
        result.details["samples"] = spec.samples
    return result


# --- 2-separable counting --------------------------------------------------

def count_2separable(
    n: int,
    M: int,
    policy: RankPolicy = DEFAULT_POLICY,
    *,
    max_instances: int = DEFAULT_MAX_INSTANCES,
) -> tuple[int, int]:
    """Brute-force number of marked sets giving a 2-separable generic state, and ``n * C(2**(n-1), M/2)``."""
    N = 1 << n
    if M % 2:
        raise InvalidArgumentError(f"M must be even (odd M is always fully entangled), got M={M}")
    if not 0 < M < N:
        raise InvalidArgumentError(f"need 0 < M < 2^n, got M={M}")
    if math.comb(N, M) > max_instances:
        raise ResourceLimitError(f"C({N}, {M}) marked sets exceed the cap of {max_instances}")
    a, b = generic_amplitudes(n, M)
    brute = 0
    sets = list(combinations(range(N), M))
    for i in range(0, len(sets), _UNIT_SIZE):
        chunk = sets[i:i + _UNIT_SIZE]
        deltas, _, _ = measure_batch(_states(n, chunk, a, b), n, policy)
        brute += int(np.count_nonzero(deltas >= 2))
    return brute, n * math.comb(N // 2, M // 2)


@dataclass(frozen=True)
class FractionReport:
    M: int
    rows: tuple  # (n, brute_count, total, fraction)

    @property
    def strictly_decreasing(self) -> bool:
        fr = [r[3] for r in self.rows if self.M * self.M < 1 << r[0]]
        return all(x > y for x, y in zip(fr, fr[1:]))

    def to_dict(self) -> dict:
        return {
            "M": self.M,
            "rows": [{"n": n, "brute_count": c, "total": t, "fraction": f} for n, c, t, f in self.rows],
            "strictly_decreasing": self.strictly_decreasing,
        }


def fraction_report(n_range: Iterable[int], M: int, policy: RankPolicy = DEFAULT_POLICY) -> FractionReport:
    """Fraction of marked sets of size ``M`` whose generic state is 2-separable, per ``n``."""
    rows = []
    for n in n_range:
        if not 3 <= n <= 5:
            raise InvalidArgumentError(f"fraction report covers n in [3, 5], got n={n}")
        brute, _ = count_2separable(n, M, policy)
        total = math.comb(1 << n, M)
        rows.append((n, brute, total, brute / total))
    return FractionReport(M, tuple(rows))


# --- conformance-table sweeps --------------------------------------------------------

SWEEP_COLUMNS = (
    "n", "M", "marked", "row", "sub_row", "final_column",
    "first_delta", "first_chi", "intermediate_delta", "intermediate_chi",
    "final_delta", "final_chi", "ambiguous", "conformance",
)


def _joined(values) -> str:
    return "|".join(str(v) for v in sorted(set(values)))


def _sweep_unit(args):
    n, M, sets, policy = args
    rows = []
    for members, tr in zip(sets, _traces(n, M, sets, policy)):
        cls = classify_trace(tr)
        first, inter, last = tr.steps[2], tr.steps[3:-1], tr.final
        if cls.out_of_table:
            conformance = "out-of-table" if cls.conforms else "no"
        else:
            conformance = "yes" if cls.conforms else "no"
        rows.append({
            "n": n,
            "M": M,
            "marked": " ".join(str(x) for x in members),
            "row": cls.row,
            "sub_row": "" if cls.sub_row is None else cls.sub_row,
            "final_column": cls.final_column,
            "first_delta": first.delta,
            "first_chi": first.chi,
            "intermediate_delta": _joined(s.delta for s in inter),
            "intermediate_chi": _joined(s.chi for s in inter),
            "final_delta": last.delta,
            "final_chi": last.chi,
            "ambiguous": tr.ambiguous,
            "conformance": conformance,
        })
    return rows


def sweep(
    n: int,
    m_values: Iterable[int],
    policy: RankPolicy = DEFAULT_POLICY,
    *,
    mode: str = "exhaustive",
    samples: int = 20,
    seed: int = 0,
    jobs: int = 1,
    max_instances: int = DEFAULT_MAX_INSTANCES,
) -> list[dict]:
    """One conformance-table row per marked set; sampled mode draws ``samples`` sets per ``M``."""
    m_values = list(m_values)
    half = 1 << (n - 1)
    bad = [m for m in m_values if not 1 <= m <= half - 1]
    if bad:
        raise InvalidArgumentError(f"M must lie in [1, {half - 1}] for n={n}, got {bad}")
    units = []
    if mode == "exhaustive":
        for m in m_values:
            spec = CheckSpec("table1", n, m, "exhaustive")
            units.extend(_units(spec, [m], max_instances))
    elif mode == "sampled":
        if samples * len(m_values) > max_instances:
            raise ResourceLimitError(f"{samples * len(m_values)} samples exceed the cap of {max_instances}")
        rng = np.random.default_rng(seed)
        for m in m_values:
            sets = [tuple(sorted(int(x) for x in rng.choice(1 << n, size=m, replace=False)))
                    for _ in range(samples)]
            units.extend((m, sets[i:i + _UNIT_SIZE]) for i in range(0, len(sets), _UNIT_SIZE))
    else:
        raise InvalidArgumentError(f"mode must be 'exhaustive' or 'sampled', got {mode!r}")
    args = [(n, m, sets, policy) for m, sets in units]
    if jobs > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            outputs = list(pool.map(_sweep_unit, args))
    else:
        outputs = [_sweep_unit(a) for a in args]
    return [row for chunk in outputs for row in chunk]

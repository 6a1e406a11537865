"""The Grover state sequence with entanglement measurements at every step.

The sequence is ``|0...0>``, the uniform state, then alternating oracle and
diffusion applications up to the optimal iteration count ``R``.  Each state
is produced by operator application and compared against its closed form;
entanglement is always measured on the operator-built state.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .entanglement import (
    DEFAULT_POLICY,
    EntanglementReport,
    RankPolicy,
    analyze,
    measure_batch,
)
from .errors import InvalidArgumentError
from .statecore import (
    GroverParams,
    MarkedSet,
    PureState,
    apply_diffusion,
    apply_oracle,
    basis_state,
    closed_form_amplitudes,
    grover_params,
    iteration_state,
    make_uniform,
    oracle_state,
    success_probability,
)

__all__ = [
    "StepRecord",
    "DynamicsTrace",
    "CellCheck",
    "TableClassification",
    "COS_ZERO_ATOL",
    "run_dynamics",
    "run_dynamics_batch",
    "classify_trace",
    "trace_csv",
    "trace_json",
    "CSV_COLUMNS",
]

COS_ZERO_ATOL = 1e-12
CSV_COLUMNS = (
    "step_index", "label", "k", "a", "b", "success_probability",
    "delta", "chi", "e_chi", "ambiguous", "closed_form_deviation",
)


@dataclass(frozen=True)
class StepRecord:
    label: str
    k: int
    a: float | None
    b: float | None
    success_probability: float
    report: EntanglementReport
    closed_form_deviation: float
    state: PureState | None = field(default=None, repr=False, compare=False)

    @property
    def delta(self) -> int:
        return self.report.delta

    @property
    def chi(self) -> int:
        return self.report.chi


@dataclass(frozen=True)
class DynamicsTrace:
    params: GroverParams
    marked: MarkedSet
    steps: tuple
    final_cos_zero: bool
    # (delta, chi) per step measured on the closed-form states, when requested
    closed_form_measures: tuple | None = None

    @property
    def ambiguous(self) -> bool:
        return any(s.report.ambiguous for s in self.steps)

    @property
    def labels(self) -> list[str]:
        return [s.label for s in self.steps]

    @property
    def final(self) -> StepRecord:
        return self.steps[-1]

    def header(self) -> dict:
        return {
            "n": self.params.n,
            "M": self.params.M,
            "theta": self.params.theta,
            "R": self.params.R,
            "final_cos_zero": self.final_cos_zero,
        }


def _sequence(params: GroverParams, marked: MarkedSet):
    """Yield ``(label, k, operator_state, closed_form_state)`` along the run."""
    n = params.n
    yield "initial", 0, basis_state(n, 0), basis_state(n, 0)
    state = make_uniform(n)
    yield "hadamard", 0, state, iteration_state(params, marked, 0)
    for k in range(1, params.R + 1):
        state = apply_oracle(state, marked)
        yield f"oracle({k})", k, state, oracle_state(params, marked, k)
        state = apply_diffusion(state)
        yield f"diffusion({k})", k, state, iteration_state(params, marked, k)


def final_cos_is_zero(params: GroverParams) -> bool:
    return abs(math.cos((2 * params.R + 1) * params.theta / 2)) <= COS_ZERO_ATOL


def _check_range(n: int, marked: MarkedSet):
    if marked.n != n:
        raise InvalidArgumentError(f"marked set is for n={marked.n}, expected n={n}")
    M = marked.M
    if not 1 <= M <= (1 << (n - 1)) - 1:
        raise InvalidArgumentError(
            f"dynamics needs 1 <= M <= 2^(n-1) - 1 = {(1 << (n - 1)) - 1}, got M={M}"
        )


def _two_value_index(mask: np.ndarray) -> tuple[int, int]:
    return int(np.argmin(mask)), int(np.argmax(mask))


def run_dynamics(
    n: int,
    marked: MarkedSet,
    policy: RankPolicy = DEFAULT_POLICY,
    *,
    factors: bool = True,
    max_n: int | None = None,
) -> DynamicsTrace:
    """Simulate the full oracle/diffusion sequence and measure every state.

    With ``factors=False`` the per-step reports omit factor states and
    per-factor ranks; delta, chi and the ambiguity flag are unaffected.
    """
    _check_range(n, marked)
    if not factors:
        return run_dynamics_batch(n, [marked], policy, max_n=max_n)[0]
    params = grover_params(n, marked.M)
    unmarked_x, marked_x = _two_value_index(marked.indicator())
    steps = []
    for label, k, st, closed in _sequence(params, marked):
        two_value = label != "initial"
        steps.append(
            StepRecord(
                label=label,
                k=k,
                a=float(st.amps[unmarked_x]) if two_value else None,
                b=float(st.amps[marked_x]) if two_value else None,
                success_probability=success_probability(st, marked),
                report=analyze(st, policy, max_n=max_n),
                closed_form_deviation=float(np.max(np.abs(st.amps - closed.amps))),
                state=st,
            )
        )
    return DynamicsTrace(params, marked, tuple(steps), final_cos_is_zero(params))


def run_dynamics_batch(
    n: int,
    marked_sets,
    policy: RankPolicy = DEFAULT_POLICY,
    *,
    max_n: int | None = None,
    measure_closed_form: bool = False,
) -> list[DynamicsTrace]:
    """Vectorized ``run_dynamics(factors=False)`` over marked sets sharing one ``M``.

    Steps carry no ``state`` and reports carry no factor states.  With
    ``measure_closed_form`` each trace also records delta and chi of the
    closed-form states, for representation-independence checks.
    """
    marked_sets = list(marked_sets)
    if not marked_sets:
        return []
    for m in marked_sets:
        _check_range(n, m)
    M = marked_sets[0].M
    if any(m.M != M for m in marked_sets):
        raise InvalidArgumentError("run_dynamics_batch needs marked sets of equal size")
    params = grover_params(n, M)
    N = 1 << n
    ind = np.stack([m.indicator() for m in marked_sets])
    count = ind.shape[0]

    labels = ["initial", "hadamard"]
    ks = [0, 0]
    initial = np.zeros((count, N))
    initial[:, 0] = 1.0
    state = np.full((count, N), 2.0 ** (-n / 2))
    ops = [initial, state]
    closed = [initial, _closed(params, ind, 0, False)]
    for k in range(1, params.R + 1):
        state = np.where(ind, -state, state)
        ops.append(state)
        closed.append(_closed(params, ind, k, True))
        labels.append(f"oracle({k})")
        ks.append(k)
        state = 2.0 * state.mean(axis=1, keepdims=True) - state
        ops.append(state)
        closed.append(_closed(params, ind, k, False))
        labels.append(f"diffusion({k})")
        ks.append(k)

    ops_arr = np.stack(ops, axis=1)
    closed_arr = np.stack(closed, axis=1)
    steps_per = ops_arr.shape[1]
    deviation = np.max(np.abs(ops_arr - closed_arr), axis=2)
    success = np.einsum("stx,sx->st", ops_arr * ops_arr, ind.astype(np.float64))
    deltas, chis, amb = measure_batch(ops_arr.reshape(-1, N), n, policy, max_n=max_n)
    deltas = deltas.reshape(count, steps_per)
    chis = chis.reshape(count, steps_per)
    amb = amb.reshape(count, steps_per)
    if measure_closed_form:
        cf_d, cf_c, _ = measure_batch(closed_arr.reshape(-1, N), n, policy, max_n=max_n)
        cf_d = cf_d.reshape(count, steps_per)
        cf_c = cf_c.reshape(count, steps_per)
    unmarked_x = np.argmin(ind, axis=1)
    marked_x = np.argmax(ind, axis=1)
    cos_zero = final_cos_is_zero(params)

    traces = []
    for i, marked in enumerate(marked_sets):
        steps = []
        for t in range(steps_per):
            two_value = t > 0
            c = int(chis[i, t])
            steps.append(
                StepRecord(
                    label=labels[t],
                    k=ks[t],
                    a=float(ops_arr[i, t, unmarked_x[i]]) if two_value else None,
                    b=float(ops_arr[i, t, marked_x[i]]) if two_value else None,
                    success_probability=float(success[i, t]),
                    report=EntanglementReport(int(deltas[i, t]), (), c, math.log2(c), (), bool(amb[i, t])),
                    closed_form_deviation=float(deviation[i, t]),
                    state=None,
                )
            )
        cf = None
        if measure_closed_form:
            cf = tuple((int(d), int(c)) for d, c in zip(cf_d[i], cf_c[i]))
        traces.append(DynamicsTrace(params, marked, tuple(steps), cos_zero, cf))
    return traces


def _closed(params: GroverParams, ind: np.ndarray, k: int, oracle: bool) -> np.ndarray:
    a, b = closed_form_amplitudes(params, k, oracle=oracle)
    M = params.M
    scale = math.sqrt(a * a * ((1 << params.n) - M) + b * b * M)
    return np.where(ind, b / scale, a / scale)


# --- conformance table ---------------------------------------------------

@dataclass(frozen=True)
class CellCheck:
    label: str
    delta: int
    chi: int
    delta_allowed: range
    chi_allowed: range

    @property
    def ok(self) -> bool:
        return self.delta in self.delta_allowed and self.chi in self.chi_allowed

    def to_dict(self) -> dict:
        def span(r):
            return [r.start, r.stop - 1] if len(r) else []

        return {
            "label": self.label,
            "delta": self.delta,
            "chi": self.chi,
            "delta_allowed": span(self.delta_allowed),
            "chi_allowed": span(self.chi_allowed),
            "ok": self.ok,
        }


@dataclass(frozen=True)
class TableClassification:
    row: str
    sub_row: int | None
    final_column: str
    cells: tuple
    out_of_table: bool

    @property
    def conforms(self) -> bool:
        return all(c.ok for c in self.cells)

    @property
    def violations(self) -> list[CellCheck]:
        return [c for c in self.cells if not c.ok]


def _span(lo: int, hi: int) -> range:
    return range(lo, hi + 1)


def table_row(n: int, M: int) -> str:
    q = (M & -M).bit_length() - 1
    p = ((M >> q) - 1) // 2
    if M == 1:
        return "1"
    if q == 0:
        return "2p+1"
    if p == 0:
        return "2^q"
    if M * M < 1 << n:
        return "2^q(2p+1)"
    return "out-of-table"


def _cell_sets(n: int, M: int, row: str, k1: int, cos_zero: bool):
    """Allowed (delta, chi) for intermediate cells and the final cell."""
    half = 1 << (n // 2)
    q = (M & -M).bit_length() - 1
    A = _span(2, min(M + 1, half))
    A_fin = _span(2, min(M, half))
    if row == "1":
        inter = (_span(1, 1), _span(2, 2))
        final = (_span(n, n), _span(1, 1)) if cos_zero else inter
        return inter, final
    if row == "2p+1" or k1 == 1:
        inter = (_span(1, 1), A)
        final = (_span(1, n - 1), A_fin) if cos_zero else inter
        return inter, final
    top_k = q + 1
    if row == "2^q" and k1 == q + 1:
        inter = (_span(q + 1, q + 1), _span(2, 2))
        final = (_span(n, n), _span(1, 1)) if cos_zero else inter
        return inter, final
    if 2 <= k1 <= top_k:
        t = M >> (k1 - 1)
        cap = 1 << ((n - k1 + 1) // 2)
        inter = (_span(k1, k1), _span(2, min(t + 1, cap)))
        final = (_span(k1, n - 1), _span(2, min(t, cap))) if cos_zero else inter
        return inter, final
    empty = (range(0), range(0))
    return empty, empty


def classify_trace(trace) -> TableClassification:
    """Place a trace in its conformance-table row and test every step against the row's cells.

    The row is chosen by the shape of ``M``; rows ``2^q`` and ``2^q(2p+1)``
    are split further by the separable degree of the first oracle state.
    ``initial`` and ``hadamard`` steps must be fully separable with chi 1.
    """
    n, M = trace.params.n, trace.params.M
    steps = trace.steps
    row = table_row(n, M)
    cos_zero = trace.final_cos_zero
    column = "cos=0" if cos_zero else "cos!=0"
    product = (_span(n, n), _span(1, 1))
    cells = [CellCheck(s.label, s.delta, s.chi, *product) for s in steps[:2]]
    if row == "out-of-table":
        return TableClassification(row, None, column, tuple(cells), True)
    k1 = steps[2].delta
    inter, final = _cell_sets(n, M, row, k1, cos_zero)
    for s in steps[2:-1]:
        cells.append(CellCheck(s.label, s.delta, s.chi, *inter))
    last = steps[-1]
    cells.append(CellCheck(last.label, last.delta, last.chi, *final))
    sub_row = k1 if row in ("2^q", "2^q(2p+1)") else None
    return TableClassification(row, sub_row, column, tuple(cells), False)


# --- serialization ---------------------------------------------------------

def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, str):
        return x
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _row(index: int, s: StepRecord) -> list:
    return [
        index, s.label, s.k, s.a, s.b, s.success_probability,
        s.report.delta, s.report.chi, s.report.e_chi, s.report.ambiguous,
        s.closed_form_deviation,
    ]


def trace_csv(trace: DynamicsTrace) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for i, s in enumerate(trace.steps):
        writer.writerow([_fmt(v) for v in _row(i, s)])
    return buf.getvalue()


def trace_json(trace: DynamicsTrace) -> str:
    steps = []
    for i, s in enumerate(trace.steps):
        rec = dict(zip(CSV_COLUMNS, _row(i, s)))
        for key in ("a", "b", "success_probability", "e_chi", "closed_form_deviation"):
            if rec[key] is not None:
                rec[key] = float(_fmt(rec[key]))
        steps.append(rec)
    header = trace.header()
    header["marked"] = trace.marked.sorted()
    return json.dumps({"header": header, "steps": steps}, indent=2) + "\n"

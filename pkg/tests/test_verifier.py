import math
from itertools import combinations

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from grover_entanglement.entanglement import RankPolicy
from grover_entanglement.errors import InvalidArgumentError, ResourceLimitError
from grover_entanglement.verifier import (
    CHECK_IDS,
    SWEEP_COLUMNS,
    CheckSpec,
    check,
    count_2separable,
    fraction_report,
    generic_amplitudes,
    is_subcube,
    sweep,
)


@pytest.mark.parametrize("check_id", CHECK_IDS)
def test_every_check_passes_at_n3(check_id):
    res = check(CheckSpec(check_id, 3))
    assert res.verdict == "pass", res.to_dict()["violations"][:3]
    assert res.instances_tested > 0


@pytest.mark.parametrize("check_id", ["thm9", "thm12", "table1", "thm5"])
def test_checks_pass_at_n4(check_id):
    assert check(CheckSpec(check_id, 4)).verdict == "pass"


def test_lemma8_counts_every_iteration():
    res = check(CheckSpec("lemma8", 6))
    # one instance per (M, k) with 1 <= k <= R
    from grover_entanglement.statecore import grover_params

    expected = sum(grover_params(6, M).R for M in range(1, 32))
    assert res.instances_tested == expected and res.verdict == "pass"


def test_coarse_policy_produces_violations():
    # a threshold this loose calls every Grover state a product state
    res = check(CheckSpec("thm9", 4, 3), RankPolicy(rel_tol=0.4))
    assert res.verdict == "fail"
    assert res.violation_count >= len(res.violations) > 0
    v = res.violations[0].to_dict()
    assert set(v) == {"marked", "step", "observed", "predicted"}


def test_sampled_mode_is_seeded():
    a = check(CheckSpec("thm11", 6, None, "sampled", 40, seed=5)).to_dict()
    b = check(CheckSpec("thm11", 6, None, "sampled", 40, seed=5)).to_dict()
    assert a == b and a["instances_tested"] == 40 and a["details"]["seed"] == 5


def test_jobs_do_not_change_results():
    spec = CheckSpec("table1", 4, 3)
    assert check(spec, jobs=1).to_dict() == check(spec, jobs=2).to_dict()


class TestLimits:
    def test_exhaustive_cap(self):
        with pytest.raises(ResourceLimitError):
            check(CheckSpec("thm3", 5))
        with pytest.raises(ResourceLimitError):
            check(CheckSpec("thm9", 6))

    def test_m_outside_domain(self):
        with pytest.raises(InvalidArgumentError):
            check(CheckSpec("thm9", 4, 2))

    @pytest.mark.parametrize("kw", [{"check_id": "thm99"}, {"mode": "random"}, {"n": 0}])
    def test_spec_validation(self, kw):
        args = {"check_id": "thm9", "n": 3, **kw}
        with pytest.raises(InvalidArgumentError):
            CheckSpec(**args)


class TestCounting:
    # n * C(2^(n-1), M/2)
    @pytest.mark.parametrize("n, M, brute, formula", [(3, 2, 12, 12), (4, 2, 32, 32), (3, 6, 12, 12)])
    def test_frozen_counts(self, n, M, brute, formula):
        assert count_2separable(n, M) == (brute, formula)

    def test_odd_m_rejected(self):
        with pytest.raises(InvalidArgumentError):
            count_2separable(3, 3)

    def test_fraction_report(self):
        rep = fraction_report(range(3, 5), 2)
        assert [r[:3] for r in rep.rows] == [(3, 12, 28), (4, 32, 120)]
        assert rep.strictly_decreasing
        assert rep.to_dict()["rows"][0]["fraction"] == 12 / 28
        with pytest.raises(InvalidArgumentError):
            fraction_report([6], 2)


class TestHelpers:
    @given(st.integers(2, 10).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, (1 << n) - 1))))
    def test_generic_amplitudes(self, nm):
        n, M = nm
        a, b = generic_amplitudes(n, M)
        assert min(abs(a), abs(b), abs(a - b), abs(a + b)) > 1e-9
        assert math.isclose(a * a * ((1 << n) - M) + b * b * M, 1.0, abs_tol=1e-12)

    def test_subcube_matches_enumeration(self):
        for n in (2, 3):
            cubes = oracles.all_subcubes(n)
            for size in range(1, (1 << n) + 1):
                for s in combinations(range(1 << n), size):
                    assert is_subcube(n, s) == (frozenset(s) in cubes)
        assert not is_subcube(3, [])


class TestSweep:
    def test_rows_and_columns(self):
        rows = sweep(4, [4, 6])
        assert len(rows) == math.comb(16, 4) + math.comb(16, 6)
        assert list(rows[0]) == list(SWEEP_COLUMNS)
        assert {r["conformance"] for r in rows if r["M"] == 6} == {"out-of-table"}
        assert {r["conformance"] for r in rows if r["M"] == 4} == {"yes"}

    def test_sampled_seeded(self):
        assert sweep(6, [5, 10], mode="sampled", samples=7, seed=2) == \
            sweep(6, [5, 10], mode="sampled", samples=7, seed=2)

    @pytest.mark.parametrize("m", [[0], [8], [3, 9]])
    def test_range(self, m):
        with pytest.raises(InvalidArgumentError):
            sweep(4, m)

    def test_mode(self):
        with pytest.raises(InvalidArgumentError):
            sweep(4, [1], mode="all")

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from grover_entanglement.errors import InvalidArgumentError, OutOfRangeError
from grover_entanglement.statecore import (
    MarkedSet,
    PureState,
    TwoValueSpec,
    apply_diffusion,
    apply_oracle,
    basis_state,
    closed_form_amplitudes,
    grover_params,
    iteration_state,
    make_uniform,
    oracle_state,
    parse_marked_tokens,
    parse_oracle_text,
    read_state_file,
    state_from_json,
    state_to_json,
    success_probability,
    two_value_state,
    write_state_file,
)


@st.composite
def grover_cases(draw, max_n=8):
    n = draw(st.integers(2, max_n))
    M = draw(st.integers(1, (1 << (n - 1))))
    members = draw(st.lists(st.integers(0, (1 << n) - 1), min_size=M, max_size=M, unique=True))
    return n, MarkedSet(n, frozenset(members))


class TestPureState:
    def test_rejects_bad_length_and_norm(self):
        with pytest.raises(InvalidArgumentError):
            PureState(2, np.ones(3) / math.sqrt(3))
        with pytest.raises(InvalidArgumentError):
            PureState(1, np.array([1.0, 1.0]))
        with pytest.raises(InvalidArgumentError):
            PureState(1, np.array([np.nan, 1.0]))

    def test_immutable(self):
        s = make_uniform(2)
        with pytest.raises(ValueError):
            s.amps[0] = 0.0

    def test_from_amplitudes_renormalizes_within_tolerance(self):
        s = PureState.from_amplitudes([1.0, 1e-8], atol=1e-6)
        assert math.isclose(float(s.amps @ s.amps), 1.0, abs_tol=1e-15)
        with pytest.raises(InvalidArgumentError):
            PureState.from_amplitudes([1.0, 0.1], atol=1e-6)
        with pytest.raises(InvalidArgumentError):
            PureState.from_amplitudes([1.0, 0.0, 0.0])

    def test_kron_places_other_on_higher_qubits(self):
        s = basis_state(1, 1).kron(basis_state(2, 0))
        assert s.n == 3 and s.amps[0b100] == 1.0
        assert s.tensor()[1, 0, 0] == 1.0

    def test_basis_state_range(self):
        with pytest.raises(InvalidArgumentError):
            basis_state(2, 4)


class TestMarkedSet:
    def test_two_adic_parts(self):
        m = MarkedSet(4, frozenset(range(12)))
        assert (m.M, m.q, m.p) == (12, 2, 1)
        assert MarkedSet(3, frozenset({5})).q == 0

    def test_out_of_range(self):
        with pytest.raises(InvalidArgumentError):
            MarkedSet(2, frozenset({4}))

    def test_complement_and_indicator(self):
        m = MarkedSet(2, frozenset({1, 2}))
        assert m.complement().sorted() == [0, 3]
        assert m.indicator().tolist() == [False, True, True, False]


class TestGroverParams:
    # frozen from theta = 2 asin(sqrt(M/N)) and R = ceil((pi - theta)/(2 theta) - 1/2)
    @pytest.mark.parametrize(
        "n, M, theta, R",
        [
            (3, 1, 2 * math.asin(1 / math.sqrt(8)), 2),
            (4, 4, math.pi / 3, 1),
            (2, 1, math.pi / 3, 1),
            (10, 1, 2 * math.asin(1 / 32), 25),
            (4, 8, math.pi / 2, 0),
        ],
    )
    def test_frozen_values(self, n, M, theta, R):
        p = grover_params(n, M)
        assert math.isclose(p.theta, theta, rel_tol=1e-15)
        assert p.R == R

    @pytest.mark.parametrize("M", [0, 9, -1])
    def test_out_of_range(self, M):
        with pytest.raises(OutOfRangeError):
            grover_params(4, M)

    def test_out_of_range_is_a_value_error(self):
        with pytest.raises(ValueError):
            grover_params(3, 5)

    @given(st.integers(2, 14).flatmap(lambda n: st.tuples(st.just(n), st.integers(1, 1 << (n - 1)))))
    def test_R_puts_angle_nearest_right_angle(self, nm):
        n, M = nm
        p = grover_params(n, M)
        dist = lambda k: abs((2 * k + 1) * p.theta / 2 - math.pi / 2)  # noqa: E731
        assert dist(p.R) <= dist(p.R + 1) + 1e-9
        if p.R:
            assert dist(p.R) <= dist(p.R - 1) + 1e-9


class TestClosedForm:
    @given(grover_cases(), st.integers(0, 6))
    @settings(max_examples=80, deadline=None)
    def test_matches_operator_application(self, case, k):
        n, marked = case
        p = grover_params(n, marked.M)
        ind = marked.indicator()[None, :]
        a, b = closed_form_amplitudes(p, k)
        sim = oracles.grover_run(n, ind, k)[0]
        assert np.allclose(sim, np.where(marked.indicator(), b, a), atol=1e-12)
        if k:
            a, b = closed_form_amplitudes(p, k, oracle=True)
            sim = oracles.grover_run(n, ind, k, stop_after_oracle=True)[0]
            assert np.allclose(sim, np.where(marked.indicator(), b, a), atol=1e-12)

    @given(grover_cases(), st.integers(0, 30))
    @settings(max_examples=60, deadline=None)
    def test_norm_preserved(self, case, k):
        n, marked = case
        a, b = closed_form_amplitudes(grover_params(n, marked.M), k)
        N, M = 1 << n, marked.M
        assert math.isclose(a * a * (N - M) + b * b * M, 1.0, abs_tol=1e-12)

    def test_oracle_index_starts_at_one(self):
        with pytest.raises(InvalidArgumentError):
            closed_form_amplitudes(grover_params(3, 1), 0, oracle=True)

    def test_state_builders_check_marked_set(self):
        p = grover_params(3, 1)
        with pytest.raises(InvalidArgumentError):
            iteration_state(p, MarkedSet(3, frozenset({0, 1})), 1)
        s = oracle_state(p, MarkedSet(3, frozenset({0})), 1)
        assert s.amps[0] < 0 < s.amps[1]


class TestOperators:
    def test_oracle_and_diffusion_reproduce_hand_values(self):
        marked = MarkedSet(3, frozenset({0}))
        s = apply_diffusion(apply_oracle(make_uniform(3), marked))
        assert np.allclose(s.amps * math.sqrt(8), [2.5] + [0.5] * 7)
        assert math.isclose(success_probability(s, marked), 25 / 32, abs_tol=1e-15)

    @given(grover_cases(max_n=6))
    @settings(max_examples=40, deadline=None)
    def test_operators_are_involutions(self, case):
        n, marked = case
        s = make_uniform(n)
        s = apply_diffusion(apply_oracle(s, marked))
        assert apply_oracle(apply_oracle(s, marked), marked).allclose(s)
        assert apply_diffusion(apply_diffusion(s)).allclose(s, atol=1e-12)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            apply_oracle(make_uniform(2), MarkedSet(3, frozenset({0})))


class TestTwoValue:
    def test_builds_and_checks_norm(self):
        m = MarkedSet(2, frozenset({3}))
        s = two_value_state(TwoValueSpec(m, 0.0, 1.0))
        assert s.amps.tolist() == [0.0, 0.0, 0.0, 1.0]
        with pytest.raises(InvalidArgumentError):
            two_value_state(TwoValueSpec(m, 0.5, 0.9))


class TestParsing:
    def test_decimal_and_bitstrings(self):
        assert parse_marked_tokens(["0", "101", "7"], 3).sorted() == [0, 5, 7]

    def test_bitstring_only_at_full_length(self):
        # "10" is decimal ten at n = 4
        assert parse_marked_tokens(["10"], 4).sorted() == [10]

    @pytest.mark.parametrize("tokens", [["3", "3"], ["8"], ["x"], ["-1"], ["011", "3"]])
    def test_rejections(self, tokens):
        with pytest.raises(InvalidArgumentError):
            parse_marked_tokens(tokens, 3)

    def test_oracle_text_skips_comments(self):
        text = "# marked\n\n001\n  6 \n"
        assert parse_oracle_text(text, 3).sorted() == [1, 6]


class TestStateJson:
    def test_round_trip(self, tmp_path):
        s = oracle_state(grover_params(3, 2), MarkedSet(3, frozenset({1, 4})), 1)
        path = tmp_path / "s.json"
        write_state_file(s, path)
        assert read_state_file(path).allclose(s, atol=0.0)
        assert state_from_json(json.loads(json.dumps(state_to_json(s)))).allclose(s, atol=0.0)

    @pytest.mark.parametrize(
        "obj",
        [
            [],
            {"n": 2},
            {"n": 0, "amplitudes": [1.0]},
            {"n": True, "amplitudes": [1.0, 0.0]},
            {"n": 1, "amplitudes": [1.0]},
            {"n": 1, "amplitudes": ["1", 0]},
            {"n": 1, "amplitudes": [1.0, 1.0]},
        ],
    )
    def test_malformed(self, obj):
        with pytest.raises(InvalidArgumentError):
            state_from_json(obj)

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(InvalidArgumentError):
            read_state_file(path)

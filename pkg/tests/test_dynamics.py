import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from jacobi_bc import (
    BoundaryControl,
    CoefficientUnderrunError,
    JacobiCoefficients,
    PrecisionMode,
    apply_response,
    control_operator,
    response_vector,
    solve_finite,
    solve_semi_infinite,
)

from conftest import random_coefficients

FREE = JacobiCoefficients.free()
B1 = JacobiCoefficients.from_rules(lambda n: 1, lambda n: 1 if n == 1 else 0)


coeff_lists = st.integers(min_value=2, max_value=9).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(0.5, 2.0), min_size=n - 1, max_size=n - 1),
        st.lists(st.floats(-1.0, 1.0), min_size=n, max_size=n),
    ))


class TestSolvers:
    def test_free_impulse_hand_iterated(self):
        field = solve_semi_infinite(FREE, BoundaryControl.impulse(3))
        assert field.value(1, 1) == 1.0
        assert field.value(2, 2) == 1.0
        assert field.value(1, 2) == 0.0
        assert field.value(1, 3) == 0.0

    def test_zero_control_zero_field(self):
        field = solve_semi_infinite(FREE, [0.0, 0.0, 0.0])
        assert not np.any(field.values)
        field = solve_finite(B1, 2, [0.0, 0.0, 0.0])
        assert not np.any(field.values)

    def test_b1_impulse_hand_iterated(self):
        field = solve_semi_infinite(B1, BoundaryControl.impulse(3))
        assert [field.value(1, t) for t in (1, 2, 3)] == [1.0, 1.0, 1.0]

    def test_finite_size_one_alternates(self):
        field = solve_finite(JacobiCoefficients.from_arrays([1.0], [0.0]), 1,
                             BoundaryControl.impulse(4))
        assert [field.value(1, t) for t in (1, 2, 3, 4)] == [1.0, 0.0, -1.0, 0.0]

    def test_initial_data_zero(self):
        field = solve_semi_infinite(B1, BoundaryControl.impulse(4))
        assert not np.any(field.values[1:, 0])  # t = -1
        assert not np.any(field.values[1:, 1])  # t = 0

    def test_underrun(self):
        short = JacobiCoefficients.from_arrays([1.0], [0.0])
        with pytest.raises(CoefficientUnderrunError):
            solve_semi_infinite(short, BoundaryControl.impulse(3))

    @settings(max_examples=20, deadline=None)
    @given(coeff_lists)
    def test_remark_agreement_finite_vs_semi(self, data):
        a_tail, b = data
        co = JacobiCoefficients.from_arrays([1.0] + a_tail, b)
        size = co.size
        ctrl = BoundaryControl.impulse(size)
        semi = solve_semi_infinite(co, ctrl, size)
        fin = solve_finite(co, size, ctrl, size)
        for n in range(1, size + 1):
            for t in range(n, size + 1):
                assert semi.value(n, t) == fin.value(n, t)

    @settings(max_examples=20, deadline=None)
    @given(coeff_lists)
    def test_finite_speed(self, data):
        a_tail, b = data
        co = JacobiCoefficients.from_arrays([1.0] + a_tail, b)
        size = co.size
        field = solve_semi_infinite(co, BoundaryControl.impulse(size), size)
        for n in range(1, size + 1):
            for t in range(-1, n):
                assert field.value(n, t) == 0.0

    def test_linearity_complex_controls(self, rng):
        co = random_coefficients(rng, 8)
        f = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        g = rng.standard_normal(8) + 1j * rng.standard_normal(8)
        alpha, beta = 0.7 - 0.2j, -1.3 + 0.4j
        combo = solve_semi_infinite(co, alpha * f + beta * g, 8)
        parts = (alpha * solve_semi_infinite(co, f, 8).values
                 + beta * solve_semi_infinite(co, g, 8).values)
        assert np.max(np.abs(combo.values - parts)) < 1e-12 * max(
            1.0, np.max(np.abs(parts)))

    def test_convolution_structure(self, rng):
        co = random_coefficients(rng, 10)
        f = rng.standard_normal(10)
        r = response_vector(co, 10)
        field = solve_semi_infinite(co, f, 10)
        outputs = np.array([field.value(1, t) for t in range(1, 11)])
        assert np.max(np.abs(outputs - apply_response(r, f))) < 1e-9


class TestResponse:
    def test_free_response(self):
        assert np.array_equal(response_vector(FREE, 5).as_array(),
                              [1.0, 0.0, 0.0, 0.0, 0.0])

    def test_b1_response(self):
        assert np.array_equal(response_vector(B1, 3).as_array(), [1.0, 1.0, 1.0])

    def test_first_entry_is_one(self, rng):
        co = random_coefficients(rng, 6)
        assert response_vector(co, 6)[0] == 1.0

    def test_finite_system_reflects_wall(self):
        # depth-1 system: r = (1, 0, -1, 0, ...) once the wall echoes
        co = JacobiCoefficients.from_arrays([1.0], [0.0])
        assert np.array_equal(response_vector(co, 4).as_array(), [1, 0, -1, 0])

    def test_rational_mode_is_exact(self):
        # frozen from the independent oracle: s_m = <A^m e_1, e_1> in
        # integer arithmetic, pushed through the Chebyshev transform
        r = response_vector(JacobiCoefficients.geometric(2), 9,
                            PrecisionMode.RATIONAL)
        assert [int(v) for v in r] == [1, 0, 3, 0, 69, 0, 5319, 0, 1467849]


class TestControlOperator:
    def test_free_identity(self):
        assert np.array_equal(control_operator(FREE, 3).matrix, np.eye(3))

    def test_b1_two_by_two(self):
        assert np.array_equal(control_operator(B1, 2).matrix, [[1, 1], [0, 1]])

    def test_trivial_horizon(self):
        assert np.array_equal(control_operator(FREE, 1).matrix, [[1.0]])

    def test_upper_triangular_diag_products(self, rng):
        co = random_coefficients(rng, 9)
        w = control_operator(co, 9).matrix
        assert np.array_equal(np.tril(w, -1), np.zeros((9, 9)))
        expected = np.cumprod(co.a_head(9))
        assert np.max(np.abs(np.diagonal(w) - expected)) < 1e-12

    def test_columns_match_unit_control_simulation(self, rng):
        # oracle: drive the system with each canonical basis control
        co = random_coefficients(rng, 7)
        horizon = 7
        op = control_operator(co, horizon)
        w_full = op.flipped()
        for j in range(horizon):
            unit = np.zeros(horizon)
            unit[j] = 1.0
            state = solve_semi_infinite(co, unit, horizon).state(horizon)
            assert np.max(np.abs(w_full[:, j] - state)) < 1e-10

    def test_superdiagonal_b_sum_identity(self, rng):
        # first superdiagonal entry (k, k+1), 1-based, carries
        # (prod_{j<k} a_j) * (b_1 + ... + b_k); simulation is the oracle
        co = random_coefficients(rng, 10)
        w = control_operator(co, 10).matrix
        prods = np.cumprod(co.a_head(10))
        bsums = np.cumsum(co.b_head(10))
        for k in range(1, 10):
            expected = prods[k - 1] * bsums[k - 1]
            assert abs(w[k - 1, k] - expected) < 1e-9 * max(1.0, abs(expected))

    def test_apply_matches_simulation(self, rng):
        co = random_coefficients(rng, 6)
        f = rng.standard_normal(6)
        op = control_operator(co, 6)
        state = solve_semi_infinite(co, f, 6).state(6)
        assert np.max(np.abs(op.apply(f) - state)) < 1e-12


class TestExports:
    def test_csv_and_json(self):
        field = solve_semi_infinite(FREE, BoundaryControl.impulse(2))
        text = field.to_csv()
        assert text.splitlines()[0].startswith("n\\t,-1,0,1,2")
        doc = field.to_json_dict()
        assert doc["horizon"] == 2 and len(doc["rows"]) == 3

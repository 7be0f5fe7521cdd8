import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bifract.core import (
    AddressPoint,
    InterpolationProblem,
    SampledFunction,
    chord,
    is_collinear,
    load_problem_csv,
    locate,
    map_scaling,
    piecewise_linear,
    scaling,
    subinterval_map,
    sup_distance,
    validate,
    validation_errors,
    write_problem_csv,
)
from bifract.errors import (
    IndexOutOfRange,
    InvalidProblem,
    PointOutsideDomain,
)

from conftest import random_problem


# ---------------------------------------------------------------------------
# validation


def test_minimal_single_interval_is_valid():
    p = InterpolationProblem([0.0, 1.0], [0.0, 0.0], [0.0, 0.0])
    assert validate(p) is p
    assert validation_errors(p) == []


def test_unordered_knots_rejected():
    p = InterpolationProblem([0.0, 1.0, 0.5], [0, 0, 0], [0, 0, 0])
    errs = validation_errors(p)
    assert any(e.startswith("NonIncreasingKnots") for e in errs)
    with pytest.raises(InvalidProblem):
        validate(p)


def test_scaling_magnitude_one_rejected():
    # the scaling interval is open: |s| must be strictly below 1
    p = InterpolationProblem([0.0, 1.0], [0, 0], [0.5, 1.0])
    errs = validation_errors(p)
    assert any(e.startswith("ScalingOutOfRange") for e in errs)


def test_too_few_knots_rejected():
    p = InterpolationProblem([0.0], [0.0], [0.0])
    assert any(e.startswith("TooFewKnots") for e in validation_errors(p))


def test_every_violation_reported_at_once():
    p = InterpolationProblem([1.0, 0.0], [0, 0], [1.5, 0])
    errs = validation_errors(p)
    assert len(errs) == 2


def test_problem_arrays_are_immutable(tent):
    with pytest.raises(ValueError):
        tent.knots[0] = 7.0


# ---------------------------------------------------------------------------
# subinterval maps


def test_subinterval_map_hand_value():
    p = InterpolationProblem([0.0, 0.5, 1.0], [0, 0, 0], [0, 0, 0])
    assert subinterval_map(p, 1, 1.0) == 0.5
    assert subinterval_map(p, 2, 0.5) == 0.75


def test_subinterval_map_endpoints_exact():
    rng = np.random.default_rng(5)
    for _ in range(20):
        p = random_problem(rng)
        lo, hi = p.domain()
        for n in range(1, p.n_maps + 1):
            assert subinterval_map(p, n, lo) == p.knots[n - 1]
            assert subinterval_map(p, n, hi) == p.knots[n]


def test_subinterval_map_bad_index(tent):
    with pytest.raises(IndexOutOfRange):
        subinterval_map(tent, 3, 0.5)
    with pytest.raises(IndexOutOfRange):
        subinterval_map(tent, 0, 0.5)


def test_outside_domain_raises(tent):
    with pytest.raises(PointOutsideDomain):
        subinterval_map(tent, 1, 1.5)
    with pytest.raises(PointOutsideDomain):
        locate(tent, -0.1)


def test_locate_hand_values():
    p = InterpolationProblem([0.0, 0.5, 1.0], [0, 0, 0], [0, 0, 0])
    assert locate(p, 0.5) == (2, 0.0)  # interior knot belongs to the right interval
    assert locate(p, 1.0) == (2, 1.0)  # the last interval is closed
    assert locate(p, 0.25) == (1, 0.5)


def test_locate_inverts_subinterval_map():
    rng = np.random.default_rng(11)
    for _ in range(20):
        p = random_problem(rng)
        xs = rng.uniform(*p.domain(), size=50)
        for n in range(1, p.n_maps + 1):
            m, back = locate(p, subinterval_map(p, n, xs))
            ulp = 4 * np.spacing(np.maximum(np.abs(xs), 1.0))
            assert np.all(np.abs(back - xs) <= ulp)
            assert np.all(m == n) or np.all(
                subinterval_map(p, n, xs)[m != n] == p.knots[np.asarray(m)[m != n] - 1]
            )  # boundary hits may land in the neighbour by the half-open rule


# ---------------------------------------------------------------------------
# scaling function


def test_scaling_constant():
    p = InterpolationProblem([0, 0.25, 1], [0, 0, 0], [0.3, 0.3, 0.3])
    xs = np.linspace(0, 1, 77)
    assert np.all(scaling(p, xs) == 0.3)


def test_scaling_hand_value():
    p = InterpolationProblem([0.0, 0.5, 1.0], [0, 0, 0], [0.0, 0.5, 0.0])
    assert scaling(p, 0.25) == 0.25


def test_scaling_exact_at_knots():
    rng = np.random.default_rng(7)
    for _ in range(20):
        p = random_problem(rng)
        assert np.array_equal(scaling(p, p.knots), p.scalings)


def test_scaling_continuous_across_knots(tent):
    for j in (1,):
        x = tent.knots[j]
        d = 1e-9
        assert abs(scaling(tent, x - d) - tent.scalings[j]) < 1e-8
        assert abs(scaling(tent, x + d) - tent.scalings[j]) < 1e-8


def test_scaling_bounded_by_max(tent):
    xs = np.linspace(0, 1, 5001)
    assert np.max(np.abs(scaling(tent, xs))) <= tent.s_max + 1e-15


def test_map_scaling_endpoints(tent):
    assert map_scaling(tent, 1, 0.0) == 0.6
    assert map_scaling(tent, 1, 1.0) == 0.8
    assert map_scaling(tent, 2, 1.0) == 0.6


# ---------------------------------------------------------------------------
# chord and polyline


def test_zero_data_gives_zero_functions():
    p = InterpolationProblem([0, 0.3, 1], [0, 0, 0], [0.5, 0.5, 0.5])
    xs = np.linspace(0, 1, 101)
    assert np.all(chord(p, xs) == 0.0)
    assert np.all(piecewise_linear(p, xs) == 0.0)


def test_hand_values_tent(tent):
    assert piecewise_linear(tent, 0.25) == 0.5
    assert chord(tent, 0.25) == 0.0


def test_polyline_exact_at_knots_and_chord_at_ends():
    rng = np.random.default_rng(13)
    for _ in range(30):
        p = random_problem(rng)
        assert np.array_equal(piecewise_linear(p, p.knots), p.values)
        lo, hi = p.domain()
        assert chord(p, lo) == p.values[0]
        assert chord(p, hi) == p.values[-1]


# ---------------------------------------------------------------------------
# collinearity


def test_collinear_diagonal(diagonal):
    assert is_collinear(diagonal)


def test_triangle_not_collinear(tent):
    assert not is_collinear(tent)


def test_collinear_within_tolerance():
    p = InterpolationProblem([0, 0.5, 1], [0.0, 1e-18, 0.0], [0, 0, 0])
    assert is_collinear(p, tol=1e-12)
    assert not is_collinear(p, tol=1e-20)


# ---------------------------------------------------------------------------
# sampled functions and addresses


def test_sampled_function_interpolates_between_samples():
    f = SampledFunction([0.0, 1.0, 2.0], [0.0, 2.0, 0.0])
    assert f(0.5) == 1.0
    assert f(1.0) == 2.0


def test_sampled_function_rejects_bad_input():
    with pytest.raises(ValueError):
        SampledFunction([0.0, 0.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        SampledFunction([0.0, 1.0], [np.nan, 0.0])


def test_sup_distance_union_grid():
    f = SampledFunction([0.0, 1.0], [0.0, 1.0])
    g = SampledFunction([0.0, 0.5, 1.0], [0.0, 1.0, 1.0])
    assert sup_distance(f, g) == 0.5


def test_address_round_trip():
    a = AddressPoint((2, 1, 1), 3)
    assert a.to_string() == "2.1.1@3"
    assert AddressPoint.from_string("2.1.1@3") == a
    assert AddressPoint.from_string("@0") == AddressPoint((), 0)
    with pytest.raises(ValueError):
        AddressPoint.from_string("2.1.1")


# ---------------------------------------------------------------------------
# CSV


def test_csv_round_trip(tmp_path, tent):
    path = tmp_path / "p.csv"
    write_problem_csv(path, tent)
    back = load_problem_csv(path)
    assert np.array_equal(back.knots, tent.knots)
    assert np.array_equal(back.values, tent.values)
    assert np.array_equal(back.scalings, tent.scalings)


def test_csv_reports_line_numbers(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,y,s\n0,0,0\n1,0,abc\n")
    with pytest.raises(InvalidProblem) as err:
        load_problem_csv(path)
    assert "line 3" in str(err.value)


def test_csv_reports_knot_order_rows(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,y,s\n0,0,0\n1,0,0\n0.5,0,0\n")
    with pytest.raises(InvalidProblem) as err:
        load_problem_csv(path)
    assert "NonIncreasingKnots" in str(err.value)
    assert "lines 3-4" in str(err.value)


def test_csv_wrong_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b,c\n0,0,0\n")
    with pytest.raises(InvalidProblem):
        load_problem_csv(path)


# ---------------------------------------------------------------------------
# property tests


@st.composite
def problems(draw):
    n = draw(st.integers(min_value=1, max_value=6))
    gaps = draw(
        st.lists(st.floats(0.05, 10.0, allow_nan=False), min_size=n, max_size=n)
    )
    start = draw(st.floats(-100, 100, allow_nan=False))
    knots = start + np.concatenate([[0.0], np.cumsum(gaps)])
    values = draw(
        st.lists(st.floats(-50, 50, allow_nan=False), min_size=n + 1, max_size=n + 1)
    )
    scalings = draw(
        st.lists(st.floats(-0.95, 0.95, allow_nan=False), min_size=n + 1, max_size=n + 1)
    )
    return InterpolationProblem(knots, values, scalings)


@settings(max_examples=80, deadline=None)
@given(problems(), st.floats(0.0, 1.0))
def test_round_trip_property(problem, t):
    lo, hi = problem.domain()
    x = lo + t * (hi - lo)
    n, y = locate(problem, min(x, hi))
    fwd = subinterval_map(problem, n, y)
    assert abs(fwd - min(x, hi)) <= 8 * np.spacing(max(abs(x), 1.0))


@settings(max_examples=80, deadline=None)
@given(problems(), st.floats(0.0, 1.0))
def test_scaling_bound_property(problem, t):
    lo, hi = problem.domain()
    x = lo + t * (hi - lo)
    assert abs(scaling(problem, min(x, hi))) <= problem.s_max + 1e-12

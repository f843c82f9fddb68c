import math

import pytest

from src.roots import bracket_by_scaling, find_root, solve_bracketed


# --- bracket_by_scaling tests ---

def test_bracket_contains_root():
    lo, hi = bracket_by_scaling(lambda x: x - 1e20, 1.0, factor=10.0)
    assert lo <= 1e20 <= hi


def test_bracket_accepts_root_at_edge():
    assert bracket_by_scaling(lambda x: x - 2.0, 1.0) == (0.5, 2.0)


def test_bracket_fails_without_sign_change():
    with pytest.raises(RuntimeError, match="no sign change"):
        bracket_by_scaling(lambda x: 1.0, 1.0, max_steps=5)


def test_bracket_rejects_non_positive_guess():
    with pytest.raises(ValueError, match="positive"):
        bracket_by_scaling(lambda x: x, 0.0)


# --- solve_bracketed tests ---

def test_solve_relative_tolerance_over_many_decades():
    root = solve_bracketed(lambda x: math.log(x / 3.2321e23), 1.0, 1e40, rtol=1e-12)
    assert root == pytest.approx(3.2321e23, rel=1e-11)


def test_solve_rejects_same_sign():
    with pytest.raises(RuntimeError, match="does not change sign"):
        solve_bracketed(lambda x: x + 1.0, 1.0, 2.0)


def test_solve_rejects_bad_bracket():
    with pytest.raises(ValueError, match="0 < lo < hi"):
        solve_bracketed(lambda x: x - 1.0, 2.0, 1.0)


def test_find_root_from_guess():
    assert find_root(lambda x: x * x - 2.0, 100.0) == pytest.approx(math.sqrt(2.0), rel=1e-9)

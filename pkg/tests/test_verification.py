"""Tests for the verify suites."""

import numpy as np
import pytest

from app.services.verification import (
    SuiteResult,
    all_suites,
    format_table,
    grid_covering_value,
    verify_bregman_identity,
    verify_formulas,
    verify_knapsack_grid,
    verify_knapsack_penalty,
    verify_monitors,
    verify_prox,
    verify_window_sums,
)


class TestGridCoveringValue:

    def test_two_items(self):
        """Test two items."""
        value = grid_covering_value(np.array([1.0, 2.0]), np.array([1.0, 1.0]), 1.5)
        assert value == pytest.approx(2.0)

    def test_single_item(self):
        """Test one item."""
        assert grid_covering_value(np.array([2.0]), np.array([1.0]), 0.3) == pytest.approx(0.6)

    def test_uncoverable_demand(self):
        """Uncoverable demand has infinite cost."""
        assert grid_covering_value(np.array([1.0]), np.array([1.0]), 1.5) == float("inf")


class TestSuites:
    """Each suite on a reduced instance count."""

    def test_window_sums(self):
        """Test the window sum suite."""
        result = verify_window_sums()
        assert result.passed
        assert result.worst <= 3.0

    def test_bregman_identity(self):
        """Test the Bregman identity suite."""
        result = verify_bregman_identity(np.random.default_rng(0), triples=200)
        assert result.passed
        assert result.checked == 600

    def test_prox(self):
        """Test the prox suite."""
        assert verify_prox(np.random.default_rng(1), instances=20).passed

    def test_knapsack_grid(self):
        """Test the knapsack grid suite."""
        assert verify_knapsack_grid(np.random.default_rng(2), instances=20).passed

    def test_knapsack_penalty(self):
        """Test the penalty solver suite."""
        result = verify_knapsack_penalty(np.random.default_rng(3), instances=10)
        assert result.passed
        assert result.detail == ""

    def test_formulas(self):
        """Test the formula suite."""
        assert verify_formulas(np.random.default_rng(4), instances=20).passed

    def test_monitors(self):
        """Test the monitor suite."""
        result = verify_monitors(7, T=500)
        assert result.passed
        assert result.detail.startswith("max ||y||")

    def test_every_suite_is_registered(self):
        """Test all seven suites are registered."""
        assert len(all_suites(0)) == 7


class TestFormatTable:

    def test_rows_follow_header(self):
        """Test table rows follow the header."""
        results = [
            SuiteResult("prox", True, 20, 1.5e-12),
            SuiteResult("monitors", False, 500, -0.25, "max ||y|| 3"),
        ]
        lines = format_table(results).splitlines()
        assert lines[0].startswith("suite")
        assert lines[1].startswith("prox")
        assert "pass" in lines[1]
        assert "FAIL" in lines[2]
        assert lines[2].endswith("max ||y|| 3")

    def test_trailing_space_trimmed(self):
        """Test trailing spaces are trimmed."""
        table = format_table([SuiteResult("formulas", True, 50, 0.0)])
        assert not table.splitlines()[1].endswith(" ")

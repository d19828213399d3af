"""Tests for the ordered sweep worker pool."""

from __future__ import annotations

import time

import pytest

from cavity_memory.services.sweep import default_threads, parallel_map


class TestParallelMap:
    """Test suite for parallel_map."""

    def test_preserves_order(self) -> None:
        """Slow early points still come back first."""

        def slow_square(x: int) -> int:
            time.sleep(0.01 * (5 - x))
            return x * x

        assert parallel_map(slow_square, range(5), threads=4) == [0, 1, 4, 9, 16]

    def test_inline(self) -> None:
        """threads=1 runs in the calling thread."""
        assert parallel_map(lambda x: x + 1, [1, 2, 3], threads=1) == [2, 3, 4]

    def test_empty(self) -> None:
        """No points, no results."""
        assert parallel_map(lambda x: x, [], threads=4) == []

    def test_first_error_propagates(self) -> None:
        """A failing point raises to the caller."""

        def fail_on_two(x: int) -> int:
            if x == 2:
                raise ValueError("bad point")
            return x

        with pytest.raises(ValueError, match="bad point"):
            parallel_map(fail_on_two, [1, 2, 3], threads=2)


class TestDefaultThreads:
    """Test suite for the worker count setting."""

    def test_from_environment(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """CAVITY_MEMORY_THREADS sets the pool size."""
        monkeypatch.setenv("CAVITY_MEMORY_THREADS", "3")
        assert default_threads() == 3

    def test_invalid_environment(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """An unparsable value falls back to the CPU count."""
        monkeypatch.setenv("CAVITY_MEMORY_THREADS", "many")
        assert default_threads() >= 1

    def test_at_least_one(self, monkeypatch: pytest.MonkeyPatch) -> None:
        """Zero is raised to one worker."""
        monkeypatch.setenv("CAVITY_MEMORY_THREADS", "0")
        assert default_threads() == 1

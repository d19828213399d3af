"""Tests for utils module (logger)."""

import io
import logging
import sys
from pathlib import Path

import pytest

from cavity_memory.utils import get_logger, setup_logger


class TestSetupLogger:
    """Test logger setup functionality."""

    def test_setup_logger_default_creates_logger(self, monkeypatch: pytest.MonkeyPatch):
        """Test that setup_logger creates the package logger at INFO."""
        monkeypatch.delenv("CAVITY_MEMORY_DEBUG", raising=False)
        logger = setup_logger()

        assert isinstance(logger, logging.Logger)
        assert logger.name == "cavity_memory"
        assert logger.level == logging.INFO

    def test_setup_logger_debug_from_environment(self, monkeypatch: pytest.MonkeyPatch):
        """Test CAVITY_MEMORY_DEBUG raises the default level to DEBUG."""
        monkeypatch.setenv("CAVITY_MEMORY_DEBUG", "1")
        logger = setup_logger(name="test_env_debug")
        assert logger.level == logging.DEBUG

    def test_explicit_level_beats_environment(self, monkeypatch: pytest.MonkeyPatch):
        """Test an explicit level wins over the environment."""
        monkeypatch.setenv("CAVITY_MEMORY_DEBUG", "1")
        logger = setup_logger(name="test_env_explicit", level="WARNING")
        assert logger.level == logging.WARNING

    def test_setup_logger_level_case_insensitive(self):
        """Test that log level is case-insensitive."""
        logger = setup_logger(name="test_case", level="debug")
        assert logger.level == logging.DEBUG

        logger = setup_logger(name="test_case", level="WaRnInG")
        assert logger.level == logging.WARNING

    def test_setup_logger_unknown_level(self):
        """Test that unknown level names are rejected."""
        with pytest.raises(ValueError, match="Unknown log level"):
            setup_logger(name="test_bad_level", level="LOUD")

    def test_setup_logger_clears_existing_handlers(self):
        """Test repeated setup does not stack handlers."""
        setup_logger(name="test_clear", level="INFO")
        logger = setup_logger(name="test_clear", level="INFO")

        assert len(logger.handlers) == 1
        assert isinstance(logger.handlers[0], logging.StreamHandler)

    def test_console_handler_uses_stderr(self):
        """Test records stay off stdout by default."""
        logger = setup_logger(name="test_stderr", level="INFO")
        handler = logger.handlers[0]
        assert isinstance(handler, logging.StreamHandler)
        assert handler.stream is sys.stderr

    def test_records_carry_thread_name(self):
        """Test the format names the emitting thread."""
        stream = io.StringIO()
        logger = setup_logger(name="test_thread", level="INFO", stream=stream)

        logger.info("sweep point done")

        line = stream.getvalue()
        assert "[MainThread]" in line
        assert "test_thread" in line
        assert "sweep point done" in line

    def test_setup_logger_with_file_handler(self, tmp_path: Path):
        """Test records reach the log file."""
        log_file = tmp_path / "run.log"
        logger = setup_logger(name="test_file", level="INFO", log_file=str(log_file))

        logger.info("integrator steps: 42")
        for handler in logger.handlers:
            handler.flush()

        assert len(logger.handlers) == 2
        assert "integrator steps: 42" in log_file.read_text()
        for handler in logger.handlers:
            handler.close()


class TestGetLogger:
    """Test get_logger functionality."""

    def test_get_logger_default_name(self):
        """Test default logger name."""
        assert get_logger().name == "cavity_memory"

    def test_get_logger_returns_same_instance(self):
        """Test the same name returns the same logger."""
        assert get_logger("cavity_memory.services") is get_logger("cavity_memory.services")

"""Tests for worker fan-out and terminal helpers."""

import logging

from utils.colors import ColorFormatter, Colors, print_progress_bar, setup_logging
from utils.workers import map_ordered, worker_count


def square(x):
    return x * x


class TestWorkers:

    def test_default_is_one(self, monkeypatch):
        monkeypatch.delenv("BYZAGG_THREADS", raising=False)
        assert worker_count() == 1

    def test_reads_environment(self, monkeypatch):
        monkeypatch.setenv("BYZAGG_THREADS", "3")
        assert worker_count() == 3

    def test_invalid_values_fall_back(self, monkeypatch):
        for raw in ("zero", "0", "-2"):
            monkeypatch.setenv("BYZAGG_THREADS", raw)
            assert worker_count() == 1

    def test_inline_map_keeps_order(self):
        assert map_ordered(square, [3, 1, 2], workers=1) == [9, 1, 4]

    def test_pool_map_keeps_order(self):
        assert map_ordered(square, list(range(6)), workers=2) == [0, 1, 4, 9, 16, 25]

    def test_empty(self):
        assert map_ordered(square, [], workers=4) == []


class TestTerminal:

    def test_progress_bar_ends_line(self, capsys):
        print_progress_bar(2, 2, width=4, label="Run")
        out = capsys.readouterr().out
        assert "2/2" in out and out.endswith("\n")

    def test_formatter_colors_by_level(self):
        record = logging.LogRecord("x", logging.ERROR, __file__, 1, "boom", None, None)
        text = ColorFormatter("%(message)s").format(record)
        assert text == f"{Colors.RED}boom{Colors.END}"

    def test_setup_logging_levels(self):
        setup_logging(quiet=True)
        assert logging.getLogger().level == logging.WARNING
        setup_logging(verbose=True)
        assert logging.getLogger().level == logging.DEBUG
        setup_logging()
        assert logging.getLogger().level == logging.INFO

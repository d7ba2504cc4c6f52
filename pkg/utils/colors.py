"""Terminal color utilities and output formatting."""

import logging
import sys
from typing import Optional, TextIO


class Colors:
    """ANSI color codes for terminal output"""
    BLUE = '\033[94m'
    GREEN = '\033[92m'
    YELLOW = '\033[93m'
    RED = '\033[91m'
    BOLD = '\033[1m'
    END = '\033[0m'


def print_colored(text: str, color: str = Colors.END, file: Optional[TextIO] = None) -> None:
    """Print colored text to terminal"""
    print(f"{color}{text}{Colors.END}", file=file or sys.stdout)


def print_progress_bar(current: int, total: int, width: int = 50, label: str = "Progress") -> None:
    """Print a progress bar"""
    percent = current / total
    filled = int(width * percent)
    bar = '█' * filled + '░' * (width - filled)
    print(f"\r{Colors.BLUE}{label}: [{bar}] {current}/{total} ({percent:.1%}){Colors.END}", end='', flush=True)
    if current >= total:
        print()


class ColorFormatter(logging.Formatter):
    """Log records colored by level."""

    LEVEL_COLORS = {
        logging.DEBUG: Colors.BLUE,
        logging.INFO: Colors.END,
        logging.WARNING: Colors.YELLOW,
        logging.ERROR: Colors.RED,
        logging.CRITICAL: Colors.RED + Colors.BOLD,
    }

    def format(self, record: logging.LogRecord) -> str:
        color = self.LEVEL_COLORS.get(record.levelno, Colors.END)
        return f"{color}{super().format(record)}{Colors.END}"


def setup_logging(quiet: bool = False, verbose: bool = False) -> None:
    level = logging.WARNING if quiet else logging.DEBUG if verbose else logging.INFO
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(ColorFormatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger()
    for old in list(root.handlers):
        root.removeHandler(old)
    root.addHandler(handler)
    root.setLevel(level)

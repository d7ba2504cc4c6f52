"""Command-line interface for the Byzantine aggregation simulator."""

import argparse
import logging
import sys
from typing import List, Optional

from cli.config import load_config
from core.errors import ByzAggError, ConfigError, ReproductionFailure
from experiments.processor import cmd_agree, cmd_eval, cmd_learn
from experiments.repro import REPRODUCTIONS, cmd_repro
from utils.colors import Colors, print_colored, setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


def create_parser() -> argparse.ArgumentParser:
    """Create and configure the argument parser"""
    parser = argparse.ArgumentParser(
        description="🛡️  byzagg - Byzantine-tolerant gradient aggregation and approximate agreement simulator",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=f"""
Examples:
  %(prog)s agree --config config.example.ini          # Simulate agreement rounds
  %(prog)s eval --config config.example.ini --seed 7  # Approximation-ratio sweep
  %(prog)s repro md-oscillation                       # Check one construction
  %(prog)s repro all --out results                    # Check every construction
  %(prog)s learn --config config.example.ini --quiet  # Collaborative learning run

Reproductions:
  {', '.join(REPRODUCTIONS)}

Environment:
  BYZAGG_THREADS caps the number of worker processes (also read from .env)

Exit codes:
  0 success, 1 failed check or reproduction, 2 configuration error
        """
    )
    parser.add_argument('--version', action='version', version='byzagg 1.0.0')

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=int, default=None, help='Override run.seed from the config')
    common.add_argument('--out', default=None, help='Output directory (default: run.out or results)')
    common.add_argument('--quiet', '-q', action='store_true', help='Only print warnings and errors')
    common.add_argument('--verbose', '-v', action='store_true', help='Show debug logging')

    sub = parser.add_subparsers(dest='command', required=True)
    for name, text in (
        ('agree', 'Run an approximate-agreement simulation and write its round trace'),
        ('eval', 'Sweep seeded instances and report approximation ratios'),
        ('learn', 'Run centralized or decentralized learning under attack'),
    ):
        cmd = sub.add_parser(name, parents=[common], help=text, description=text)
        cmd.add_argument('--config', '-c', required=True, help='INI experiment configuration')

    repro = sub.add_parser('repro', parents=[common], help='Check a named construction',
                           description='Run a construction and check its stated outcome')
    repro.add_argument('name', help="Reproduction name, or 'all'")
    return parser


def run(args: argparse.Namespace) -> int:
    if args.seed is not None and args.seed < 0:
        raise ConfigError([f"--seed: must be an unsigned integer (got {args.seed})"])
    if args.command == 'repro':
        return cmd_repro(args.name, seed=args.seed or 0, out_dir=args.out, quiet=args.quiet)

    cfg = load_config(args.config, args.command, {("run", "seed"): args.seed, ("run", "out"): args.out})
    commands = {'agree': cmd_agree, 'eval': cmd_eval, 'learn': cmd_learn}
    return commands[args.command](cfg, quiet=args.quiet)


def main(argv: Optional[List[str]] = None) -> int:
    """Main CLI entry point"""
    parser = create_parser()
    args = parser.parse_args(argv)
    setup_logging(quiet=args.quiet, verbose=args.verbose)

    try:
        return run(args)
    except ConfigError as e:
        print_colored(f"❌ {e}", Colors.RED, file=sys.stderr)
        return EXIT_CONFIG
    except (ReproductionFailure, AssertionError) as e:
        print_colored(f"❌ Check failed: {e}", Colors.RED, file=sys.stderr)
        return EXIT_FAILURE
    except ByzAggError as e:
        print_colored(f"❌ Error: {e}", Colors.RED, file=sys.stderr)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        print_colored(f"\n⚠️  Operation cancelled by user.", Colors.YELLOW, file=sys.stderr)
        return EXIT_FAILURE

#!/usr/bin/env python3
"""
byzagg CLI Tool

Simulates Byzantine-tolerant gradient aggregation: approximate agreement,
approximation-ratio sweeps, worst-case constructions and learning runs.
"""

import sys

from cli.main import main

if __name__ == "__main__":
    sys.exit(main())

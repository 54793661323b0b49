"""Residuals of the analytic probe signal against the brute-force
master-equation integrator on randomized configurations."""

import sys

from chiprobe.cli import execute, parse_config

CONFIG = """
command = oracle-check
omega = 1Hz*2pi
oracle_dim = 30
tuples = 50
seed = 424242
output = out/oracle_check
"""


def main() -> int:
    overrides = {}
    if len(sys.argv) > 1:
        overrides["tuples"] = sys.argv[1]
    return execute(parse_config(CONFIG, overrides))


if __name__ == "__main__":
    raise SystemExit(main())

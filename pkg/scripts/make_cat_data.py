"""Produce the superposition-state comparison dataset: ideal versus prepared
characteristic function for alpha = 1 (four drive periods at r = 0.5) at the
flux-qubit operating point."""

import sys

from chiprobe.cli import execute, parse_config

CONFIG = """
command = cat
omega = 100MHz*2pi
kappa = 50kHz*2pi
gamma1 = 0.4MHz*2pi
gamma2 = 0.4MHz*2pi
n_m = 19.5
n_q = 0
r = 0.5
periods = 4
varphi = pi/2
cat_sign = +
grid_extent = 3.2
grid_points = 41
output = out/cat_compare
"""


def main() -> int:
    overrides = {}
    if len(sys.argv) > 1:
        overrides["output"] = sys.argv[1]
    return execute(parse_config(CONFIG, overrides))


if __name__ == "__main__":
    raise SystemExit(main())

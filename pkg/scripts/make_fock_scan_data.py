"""Produce the Fock-5 scan datasets at the flux-qubit operating point:
ideal characteristic function, damped signal as seen by the probe, and the
run-cost surface e^{2f}.  Output feeds the figure renderer in frontend/."""

import sys

from chiprobe.cli import execute, parse_config

CONFIG = """
command = scan
state = fock:5
omega = 100MHz*2pi
kappa = 50kHz*2pi
gamma1 = 0.4MHz*2pi
gamma2 = 0.4MHz*2pi
n_m = 19.5
n_q = 0
r0 = 0
r_max = 0.5
n_max = 12
grid_extent = 3.8
grid_points = 41
shots = infinite
f_mode = approx
seed = 1
output = out/fock_scan
"""


def main() -> int:
    overrides = {}
    if len(sys.argv) > 1:
        overrides["output"] = sys.argv[1]
    return execute(parse_config(CONFIG, overrides))


if __name__ == "__main__":
    raise SystemExit(main())

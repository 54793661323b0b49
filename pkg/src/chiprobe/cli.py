"""Command-line front end: configuration parsing, scenario execution, dataset
emission.

Configs are flat ``key = value`` text files ('#' starts a comment).  Commands:

  scan          measure a state over a square grid; writes records.csv (full
                per-point schema), ideal.csv (exact chi on the grid) and
                damping.csv (attenuation exponent and e^{2f})
  reconstruct   re-apply the decoherence correction to an existing records
                CSV; writes corrected.csv and, when a reference state is
                given, residuals.csv
  moments       measure along one ray and fit quadrature moments; writes
                moment_records.csv and moments.csv
  cat           compare the prepared superposition state against the ideal
                one on a grid; writes cat.csv
  oracle-check  residuals of the analytic signal against the brute-force
                integrator on randomized configurations; writes residuals.csv
  budget        shot-count table for a list of attenuation exponents

Frequencies and rates require a unit suffix (Hz, kHz, MHz, GHz or rad/s +
optional SI prefix is not supported beyond these).  A trailing ``*2pi`` marks
an ordinary frequency to be converted to angular units, e.g.
``omega = 100MHz*2pi``; without it the number is taken as already angular.
All internal storage is angular.

Exit codes: 0 ok, 1 config error, 2 computation error, 3 I/O error.  A flat
key=value run manifest is always written, even on partial failure.
"""

from __future__ import annotations

import argparse
import math
import os
import re
import sys
import time
from dataclasses import dataclass, field, fields

import numpy as np

from . import __version__
from .catprep import chi_prepared_cat, write_cat_csv
from .functionals import f_harmonic_approx, run_budget
from .model import DecoherenceParams, HarmonicCoupling, ModelError, TWO_PI
from .moments import fit_moments, geometric_radii, write_moment_csv
from .oracle import (
    OracleConfig,
    random_validation_tuples,
    signal_residual,
)
from .reconstruction import (
    ShotPolicy,
    correct_decoherence,
    read_records_csv,
    scan_grid,
    square_grid,
    write_records_csv,
)
from .states import StateError, chi_analytic, parse_angle, parse_state_spec


class ConfigError(ValueError):
    """Carries every validation problem found in a config."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


COMMANDS = ("scan", "reconstruct", "moments", "cat", "oracle-check", "budget")

_FREQ_RE = re.compile(
    r"^\s*([-+0-9.eE]+)\s*(GHz|MHz|kHz|Hz|rad/s)\s*(\*2pi)?\s*$"
)
_UNIT_SCALE = {"Hz": 1.0, "kHz": 1e3, "MHz": 1e6, "GHz": 1e9, "rad/s": 1.0}


def parse_frequency(text: str, key: str, problems: list[str]) -> float:
    m = _FREQ_RE.match(text)
    if not m:
        if re.match(r"^\s*[-+0-9.eE]+\s*$", text):
            problems.append(
                f"{key}: missing unit suffix (use Hz/kHz/MHz/GHz/rad/s, "
                f"optionally '*2pi')"
            )
        else:
            problems.append(f"{key}: cannot parse frequency {text!r}")
        return math.nan
    value = float(m.group(1))
    unit = m.group(2)
    if m.group(3) and unit == "rad/s":
        problems.append(f"{key}: 'rad/s' is already angular; '*2pi' not allowed")
        return math.nan
    scale = _UNIT_SCALE[unit]
    angular = value * scale * (TWO_PI if m.group(3) else 1.0)
    if not math.isfinite(angular):
        problems.append(f"{key}: non-finite value")
        return math.nan
    return angular


@dataclass
class RunConfig:
    command: str = ""
    state: str = "fock:0"
    omega: float = TWO_PI
    kappa: float = 0.0
    gamma1: float = 0.0
    gamma2: float = 0.0
    n_m: float = 0.0
    n_q: float = 0.0
    r0: float = 0.0
    r_max: float = 0.5
    n_max: int = 64
    grid_extent: float = 3.5
    grid_points: int = 41
    shots: str = "infinite"
    seed: int = 0
    output: str = "out"
    engine: str = "analytic"
    oracle_dim: int = 30
    f_mode: str = "exact"
    threads: int = 0
    input: str = ""
    ray_phi: float = 0.0
    fit_r_max: float = 0.5
    fit_points: int = 12
    max_order: int = 4
    r: float = 0.5
    periods: int = 4
    varphi: float = math.pi / 2.0
    cat_sign: int = +1
    f_values: tuple[float, ...] = field(default_factory=tuple)
    eps: float = 0.2
    tuples: int = 50

    @property
    def params(self) -> DecoherenceParams:
        return DecoherenceParams(kappa=self.kappa, gamma1=self.gamma1,
                                 gamma2=self.gamma2, n_m=self.n_m, n_q=self.n_q)

    @property
    def policy(self) -> ShotPolicy:
        if self.shots == "infinite":
            return ShotPolicy.infinite()
        return ShotPolicy.budgeted(float(self.shots.split(":", 1)[1]))


_FREQ_KEYS = ("omega", "kappa", "gamma1", "gamma2")
_FLOAT_KEYS = ("n_m", "n_q", "r0", "r_max", "grid_extent", "fit_r_max",
               "eps", "r")
_INT_KEYS = ("n_max", "grid_points", "seed", "oracle_dim", "threads",
             "fit_points", "max_order", "periods", "tuples")
_ANGLE_KEYS = ("ray_phi", "varphi")
_STR_KEYS = ("command", "state", "shots", "output", "engine", "f_mode", "input")


def _parse_kv(text: str, problems: list[str]) -> dict[str, str]:
    pairs: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            problems.append(f"line {lineno}: expected 'key = value', got {raw!r}")
            continue
        key, value = (part.strip() for part in line.split("=", 1))
        if key in pairs:
            problems.append(f"line {lineno}: duplicate key {key!r}")
        pairs[key] = value
    return pairs


def parse_config(text: str, overrides: dict[str, str] | None = None) -> RunConfig:
    """Parse and validate a config; raises ConfigError listing every problem."""
    problems: list[str] = []
    pairs = _parse_kv(text, problems)
    if overrides:
        pairs.update(overrides)

    known = {f.name for f in fields(RunConfig)}
    cfg = RunConfig()
    for key, value in pairs.items():
        if key not in known:
            problems.append(f"unknown key {key!r}")
            continue
        try:
            if key in _FREQ_KEYS:
                setattr(cfg, key, parse_frequency(value, key, problems))
            elif key in _FLOAT_KEYS:
                parsed = float(value)
                if not math.isfinite(parsed):
                    problems.append(f"{key}: must be finite, got {value!r}")
                else:
                    setattr(cfg, key, parsed)
            elif key in _INT_KEYS:
                setattr(cfg, key, int(value))
            elif key in _ANGLE_KEYS:
                setattr(cfg, key, parse_angle(value))
            elif key == "cat_sign":
                if value.strip() not in ("+", "-"):
                    problems.append("cat_sign must be '+' or '-'")
                else:
                    cfg.cat_sign = +1 if value.strip() == "+" else -1
            elif key == "f_values":
                cfg.f_values = tuple(float(v) for v in value.split(",") if v.strip())
            else:
                setattr(cfg, key, value)
        except (ValueError, StateError) as exc:
            problems.append(f"{key}: {exc}")

    if cfg.command not in COMMANDS:
        problems.append(f"command must be one of {COMMANDS}, got {cfg.command!r}")
    if cfg.shots != "infinite":
        m = re.match(r"^eps:([0-9.eE+-]+)$", cfg.shots)
        if not m:
            problems.append("shots must be 'infinite' or 'eps:<value>'")
        else:
            eps = float(m.group(1))
            if not (0.0 < eps < 1.0):
                problems.append("shots eps must be in (0, 1)")
    if cfg.engine not in ("analytic", "oracle"):
        problems.append(f"engine must be 'analytic' or 'oracle', got {cfg.engine!r}")
    if cfg.f_mode not in ("exact", "approx"):
        problems.append(f"f_mode must be 'exact' or 'approx', got {cfg.f_mode!r}")
    try:
        parse_state_spec(cfg.state)
    except StateError as exc:
        problems.append(f"state: {exc}")
    for key in ("omega", "grid_extent", "r_max", "fit_r_max"):
        v = getattr(cfg, key)
        if not (math.isfinite(v) and v > 0):
            problems.append(f"{key} must be finite and > 0")
    if cfg.command == "scan" and math.isfinite(cfg.grid_extent):
        reach = cfg.n_max * cfg.r_max
        needed = cfg.grid_extent * math.sqrt(2.0)
        if needed > reach:
            problems.append(
                f"grid exceeds reach: corner |beta|={needed:.3g} but "
                f"n_max*r_max={reach:.3g}"
            )
    if cfg.command == "reconstruct" and not cfg.input:
        problems.append("reconstruct requires 'input = <records.csv>'")
    if cfg.command == "budget" and not cfg.f_values:
        problems.append("budget requires 'f_values = f1,f2,...'")
    if problems:
        raise ConfigError(problems)
    return cfg


def _write_manifest(path: str, cfg: RunConfig, status: str, detail: str,
                    elapsed: float) -> None:
    import scipy

    lines = [f"status = {status}"]
    if detail:
        lines.append(f"detail = {detail}")
    lines.append(f"package_version = {__version__}")
    lines.append(f"numpy_version = {np.__version__}")
    lines.append(f"scipy_version = {scipy.__version__}")
    lines.append(f"wall_time_s = {elapsed:.3f}")
    for f in fields(RunConfig):
        lines.append(f"config.{f.name} = {getattr(cfg, f.name)}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _run_scan(cfg: RunConfig, outdir: str) -> str:
    state = parse_state_spec(cfg.state)
    grid = square_grid(cfg.grid_extent, cfg.grid_points)
    oracle_cfg = OracleConfig(dim=cfg.oracle_dim)
    result = scan_grid(
        state, grid, cfg.r_max, cfg.params, cfg.omega,
        policy=cfg.policy, seed=cfg.seed, engine=cfg.engine,
        oracle_cfg=oracle_cfg, n_max=cfg.n_max, r0=cfg.r0, f_mode=cfg.f_mode,
        threads=cfg.threads or None,
    )
    write_records_csv(result.records, os.path.join(outdir, "records.csv"))
    with open(os.path.join(outdir, "ideal.csv"), "w", encoding="utf-8") as fh:
        fh.write("beta_re,beta_im,chi_re,chi_im\n")
        for b in grid:
            c = chi_analytic(state, b)
            fh.write(f"{b.real:.17g},{b.imag:.17g},{c.real:.17g},{c.imag:.17g}\n")
    with open(os.path.join(outdir, "damping.csv"), "w", encoding="utf-8") as fh:
        fh.write("beta_re,beta_im,f,e2f\n")
        for rec in result.records:
            p = rec.point
            fh.write(f"{p.beta.real:.17g},{p.beta.imag:.17g},"
                     f"{p.f:.17g},{math.exp(2.0 * p.f):.17g}\n")
    overshoots = sum(rec.overshoot for rec in result.records)
    detail = (f"points={len(result.records)} failures={len(result.failures)} "
              f"overshoots={overshoots}")
    if result.failures:
        sample = "; ".join(msg for _, _, msg in result.failures[:3])
        detail += f" first_failures=[{sample}]"
    return detail


def _run_reconstruct(cfg: RunConfig, outdir: str) -> str:
    rows = read_records_csv(cfg.input)
    with open(os.path.join(outdir, "corrected.csv"), "w", encoding="utf-8") as fh:
        fh.write("beta_re,beta_im,chi_re,chi_im,stderr\n")
        for row in rows:
            chi_hat, stderr = correct_decoherence(
                row["sx_hat"], row["sy_hat"], row["f"],
                row["m_x"] or None, row["m_y"] or None,
            )
            fh.write(f"{row['beta_re']:.17g},{row['beta_im']:.17g},"
                     f"{chi_hat.real:.17g},{chi_hat.imag:.17g},{stderr:.17g}\n")
    detail = f"points={len(rows)}"
    if cfg.state:
        state = parse_state_spec(cfg.state)
        max_resid = 0.0
        with open(os.path.join(outdir, "residuals.csv"), "w", encoding="utf-8") as fh:
            fh.write("beta_re,beta_im,residual\n")
            for row in rows:
                b = complex(row["beta_re"], row["beta_im"])
                resid = abs(complex(row["chi_re"], row["chi_im"]) - chi_analytic(state, b))
                max_resid = max(max_resid, resid)
                fh.write(f"{b.real:.17g},{b.imag:.17g},{resid:.17g}\n")
        detail += f" max_residual={max_resid:.3e}"
    return detail


def _run_moments(cfg: RunConfig, outdir: str) -> str:
    state = parse_state_spec(cfg.state)
    radii = geometric_radii(cfg.fit_r_max, cfg.fit_points)
    ray = np.exp(1.0j * cfg.ray_phi)
    grid = [complex(r * ray) for r in radii]
    result = scan_grid(
        state, grid, cfg.r_max, cfg.params, cfg.omega,
        policy=cfg.policy, seed=cfg.seed, engine=cfg.engine,
        oracle_cfg=OracleConfig(dim=cfg.oracle_dim), n_max=cfg.n_max,
        r0=cfg.r0, f_mode=cfg.f_mode, threads=cfg.threads or None,
    )
    if result.failures:
        raise RuntimeError(f"{len(result.failures)} ray points failed")
    write_records_csv(result.records, os.path.join(outdir, "moment_records.csv"))
    fit = fit_moments(result.records, max_order=cfg.max_order)
    write_moment_csv(fit, os.path.join(outdir, "moments.csv"))
    return (f"theta={fit.theta:.6g} orders={cfg.max_order} "
            f"squeezed={int(fit.squeezed)} non_gaussian={int(fit.non_gaussian)}")


def _run_cat(cfg: RunConfig, outdir: str) -> str:
    t = cfg.periods * TWO_PI / cfg.omega
    g = HarmonicCoupling(r0=cfg.r0, r=cfg.r, phi=0.0, omega=cfg.omega,
                         kappa=cfg.kappa)
    prepared = chi_prepared_cat(t, g, cfg.params, cfg.omega, cfg.varphi,
                                cfg.cat_sign)
    grid = square_grid(cfg.grid_extent, cfg.grid_points)
    arr = np.array(grid)
    ideal_vals = prepared.ideal(arr)
    prepared_vals = prepared(arr)
    write_cat_csv(grid, ideal_vals, prepared_vals, os.path.join(outdir, "cat.csv"))
    return (f"alpha={prepared.alpha:.6g} probability={prepared.probability:.6g} "
            f"points={len(grid)}")


def _run_oracle_check(cfg: RunConfig, outdir: str) -> str:
    tuples = random_validation_tuples(cfg.tuples, cfg.seed, cfg.omega)
    oracle_cfg = OracleConfig(dim=cfg.oracle_dim)
    max_resid = 0.0
    with open(os.path.join(outdir, "residuals.csv"), "w", encoding="utf-8") as fh:
        fh.write("index,state,r0,r,phi,n_m,n_q,kappa,gamma1,gamma2,t,residual\n")
        for i, (state, g, params, t) in enumerate(tuples):
            resid = signal_residual(state, g, t, params, cfg.omega, oracle_cfg)
            max_resid = max(max_resid, resid)
            fh.write(f"{i},{type(state).__name__},{g.r0:.6g},{g.r:.6g},"
                     f"{g.phi:.6g},{params.n_m:.6g},{params.n_q:.6g},"
                     f"{params.kappa:.6g},{params.gamma1:.6g},"
                     f"{params.gamma2:.6g},{t:.6g},{resid:.17g}\n")
            print(f"tuple {i:3d} {type(state).__name__:13s} residual {resid:.3e}")
    print(f"max residual over {len(tuples)} configurations: {max_resid:.3e}")
    return f"tuples={len(tuples)} max_residual={max_resid:.3e}"


def _run_budget(cfg: RunConfig, outdir: str) -> str:
    with open(os.path.join(outdir, "budget.csv"), "w", encoding="utf-8") as fh:
        fh.write("f,e2f,shots\n")
        for f_val in cfg.f_values:
            shots = run_budget(f_val, cfg.eps)
            fh.write(f"{f_val:.17g},{math.exp(2.0 * f_val):.17g},{shots}\n")
            print(f"f={f_val:g}  e^2f={math.exp(2.0 * f_val):.4g}  shots={shots}")
    return f"entries={len(cfg.f_values)} eps={cfg.eps}"


_RUNNERS = {
    "scan": _run_scan,
    "reconstruct": _run_reconstruct,
    "moments": _run_moments,
    "cat": _run_cat,
    "oracle-check": _run_oracle_check,
    "budget": _run_budget,
}


def execute(cfg: RunConfig) -> int:
    """Run one validated config; returns the process exit code."""
    started = time.monotonic()
    outdir = cfg.output
    try:
        os.makedirs(outdir, exist_ok=True)
    except OSError as exc:
        print(f"cannot create output directory: {exc}", file=sys.stderr)
        return 3
    manifest = os.path.join(outdir, "run_manifest.txt")
    status, detail, code = "ok", "", 0
    try:
        detail = _RUNNERS[cfg.command](cfg, outdir)
    except OSError as exc:
        status, detail, code = "io-error", str(exc), 3
    except Exception as exc:
        status, detail, code = "computation-error", f"{type(exc).__name__}: {exc}", 2
    finally:
        try:
            _write_manifest(manifest, cfg, status, detail,
                            time.monotonic() - started)
        except OSError as exc:
            print(f"cannot write manifest: {exc}", file=sys.stderr)
            code = code or 3
    if code:
        print(f"{status}: {detail}", file=sys.stderr)
    return code


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chiprobe",
        description="Qubit-probe characteristic-function measurement toolkit.",
        epilog=(
            "Frequencies and rates need a unit suffix; append '*2pi' to "
            "convert an ordinary frequency to the angular value used "
            "internally (example: omega = 100MHz*2pi)."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="path to a key=value config file")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
        p.add_argument("--output", help="output directory")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--threads", type=int, help="worker cap for grid scans")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    text = ""
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            print(f"cannot read config: {exc}", file=sys.stderr)
            return 3
    overrides = {"command": args.command}
    for item in args.set:
        if "=" not in item:
            print(f"--set expects KEY=VALUE, got {item!r}", file=sys.stderr)
            return 1
        key, value = item.split("=", 1)
        overrides[key.strip()] = value.strip()
    if args.output is not None:
        overrides["output"] = args.output
    if args.seed is not None:
        overrides["seed"] = str(args.seed)
    if args.threads is not None:
        overrides["threads"] = str(args.threads)
    try:
        cfg = parse_config(text, overrides)
    except ConfigError as exc:
        for problem in exc.problems:
            print(f"config error: {problem}", file=sys.stderr)
        return 1
    return execute(cfg)


if __name__ == "__main__":
    raise SystemExit(main())

"""Batch front-end: parse a YAML config, run one study, write CSV artifacts.

Every CSV starts with comment lines recording the tool version and the full
resolved configuration, so a rerun with the same config and seed is
byte-identical. Frequencies in config and CSV are omega/2pi in GHz, couplings
in MHz, times in ns.

Exit codes: 0 success, 2 config parse error, 3 design validation failure,
4 study failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .capalgebra import invert_spd, verify_direct_cancellation
from .dynamics import DEFAULT_DT, build_schedule, decoherence_error, optimize_hold_time
from .effective import aux_band, sweep_jeff
from .montecarlo import VarianceConfig, variance_study
from .params import BusDesign, ghz_to_angular, validate_design
from .synthesis import (
    assemble_capacitance_matrix,
    ground_to_coupling_ratio,
    synthesize_capacitances,
)

STUDIES = ("design-report", "spectrum", "jeff-sweep", "gate", "variance")


class ConfigError(ValueError):
    pass


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


def write_csv(path: Path, config: dict, columns: list, rows: list) -> None:
    lines = [
        f"# qbus {__version__}",
        "# config: " + json.dumps(config, sort_keys=True, separators=(",", ":")),
        ",".join(columns),
    ]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def load_design(cfg: dict) -> BusDesign:
    try:
        block = cfg["design"]
        return BusDesign(
            xi=float(block["xi"]),
            kappa_a=float(block["kappa_a"]),
            kappa_b=float(block["kappa_b"]),
            eps=float(block["eps"]),
            omega_q_idle=ghz_to_angular(float(block["omega_q_idle_ghz"])),
            omega_a=ghz_to_angular(float(block["omega_a_ghz"])),
            omega_b=ghz_to_angular(float(block["omega_b_ghz"])),
            n_qubits=int(block["n_qubits"]),
            boundary=str(block.get("boundary", "periodic")),
        )
    except KeyError as exc:
        raise ConfigError(f"missing design key {exc}") from exc


def _mhz(omega: float) -> float:
    return omega / (2.0 * np.pi) * 1e3


def _ghz(omega: float) -> float:
    return omega / (2.0 * np.pi)


def run_design_report(design: BusDesign, cfg: dict, out_dir: Path) -> None:
    block = cfg.get("design_report", {}) or {}
    c_bar = float(block.get("c_bar_ff", 100.0))
    c_ground_q = float(block.get("c_ground_q_ff", 10.0))
    realization = synthesize_capacitances(design, c_bar=c_bar, c_ground_q=c_ground_q)
    check = verify_direct_cancellation(invert_spd(assemble_capacitance_matrix(realization)))
    rows = []
    for x in ("q", "a", "b"):
        rows.append((f"c_shunt_{x}", realization.c_shunt[x][0], "fF"))
        rows.append((f"c_ground_{x}", realization.c_ground[x][0, 0], "fF"))
        rows.append((f"e_j_{x}", realization.e_j[x][0], "rad/ns"))
    for bus in ("a", "b"):
        rows.append((f"c_coupling_q{bus}", realization.c_coupling[bus][0, 0], "fF"))
        if realization.c_link[bus].size:
            rows.append((f"c_link_{bus}", realization.c_link[bus][0], "fF"))
        if design.xi > 0.0:
            rows.append(
                (f"ground_to_coupling_ratio_{bus}", ground_to_coupling_ratio(design, bus), "")
            )
    rows.append(("cancellation_max_offdiag_qq", check.max_offdiag_qq, "1/fF"))
    rows.append(("cancellation_ratio_to_diag", check.ratio_to_diag, ""))
    write_csv(out_dir / "design_report.csv", cfg, ["quantity", "value", "unit"], rows)


def run_spectrum(design: BusDesign, cfg: dict, out_dir: Path) -> None:
    block = cfg.get("spectrum", {}) or {}
    n_k = int(block.get("n_k", 101))
    ks = np.linspace(0.0, np.pi, n_k)
    rows = []
    for bus in ("a", "b"):
        energies = aux_band(design, bus, ks)
        for k, e in zip(ks, energies):
            rows.append((bus, k, _ghz(e)))
    write_csv(out_dir / "spectrum.csv", cfg, ["bus", "k_rad", "energy_ghz"], rows)


def run_jeff_sweep(design: BusDesign, cfg: dict, out_dir: Path) -> None:
    block = cfg.get("jeff_sweep", {}) or {}
    lo = float(block.get("omega_q_min_ghz", 3.2))
    hi = float(block.get("omega_q_max_ghz", 4.8))
    n = int(block.get("n_points", 81))
    max_distance = int(block.get("max_distance", 4))
    grid = ghz_to_angular(np.linspace(lo, hi, n))
    rows = [
        (
            _ghz(r.omega_q),
            r.distance,
            _mhz(r.jeff_analytic),
            _mhz(r.jeff_numeric),
            r.zeta_a,
            r.zeta_b,
            r.hybridized,
        )
        for r in sweep_jeff(design, grid, max_distance)
    ]
    write_csv(
        out_dir / "jeff_sweep.csv",
        cfg,
        ["omega_q_ghz", "distance", "jeff_analytic_mhz", "jeff_numeric_mhz", "zeta_a", "zeta_b", "hybridized"],
        rows,
    )


T1_REFERENCE_NS = (10_000.0, 100_000.0, 1_000_000.0)  # 10 us, 100 us, 1 ms


def run_gate(design: BusDesign, cfg: dict, out_dir: Path, threads: int = 1) -> None:
    block = cfg.get("gate", {}) or {}
    pairs = [tuple(p) for p in block.get("pairs", [[0, 1], [0, 2], [0, 3]])]
    omegas_on = [ghz_to_angular(float(f)) for f in block.get("omega_on_ghz", [4.70, 4.72])]
    ramps = [float(r) for r in block.get("ramp_ns", [10.0, 50.0])]
    hold_max = float(block.get("hold_max_ns", 400.0))
    dt = float(block.get("dt_ns", DEFAULT_DT))
    convergence = bool(block.get("convergence", True))

    points = [(pair, w_on, ramp) for pair in pairs for w_on in omegas_on for ramp in ramps]

    def solve(point):
        pair, w_on, ramp = point
        template = build_schedule(
            pair, w_on, design.omega_q_idle, ramp, 0.0, design.n_qubits
        )
        hold, result = optimize_hold_time(
            design, template, hold_max, dt=dt, convergence_check=convergence
        )
        return pair, w_on, ramp, hold, result

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            solved = list(pool.map(solve, points))
    else:
        solved = [solve(p) for p in points]

    rows = []
    for pair, w_on, ramp, hold, result in solved:
        total = 2.0 * ramp + hold
        dist = abs(pair[1] - pair[0])
        rows.append(
            (
                pair[0],
                pair[1],
                dist,
                _ghz(w_on),
                ramp,
                hold,
                total,
                result.error,
                result.leakage,
                result.convergence if result.convergence is not None else float("nan"),
                result.boundary_warning,
                decoherence_error(total, T1_REFERENCE_NS[0]),
                decoherence_error(total, T1_REFERENCE_NS[1]),
                decoherence_error(total, T1_REFERENCE_NS[2]),
            )
        )
    write_csv(
        out_dir / "gate.csv",
        cfg,
        [
            "pair_i",
            "pair_j",
            "distance",
            "omega_on_ghz",
            "ramp_ns",
            "hold_ns",
            "total_ns",
            "error",
            "leakage",
            "convergence",
            "boundary_warning",
            "decoherence_err_t1_10us",
            "decoherence_err_t1_100us",
            "decoherence_err_t1_1ms",
        ],
        rows,
    )


def run_variance(design: BusDesign, cfg: dict, out_dir: Path, seed: int, threads: int = 1) -> None:
    block = cfg.get("variance", {}) or {}
    sigma = float(block.get("sigma_rel", 0.02))
    n_real = int(block.get("n_realizations", 100))
    lo = float(block.get("omega_q_min_ghz", 3.8))
    hi = float(block.get("omega_q_max_ghz", 4.2))
    n = int(block.get("n_points", 9))
    max_distance = int(block.get("max_distance", 1))
    dump_raw = bool(block.get("dump_raw", False))
    grid = ghz_to_angular(np.linspace(lo, hi, n))
    table = variance_study(
        design,
        VarianceConfig(sigma_rel=sigma, n_realizations=n_real, seed=seed, omega_q_grid=grid),
        max_distance=max_distance,
        threads=threads,
    )
    rows = [
        (_ghz(r.omega_q), r.distance, _mhz(r.q10), _mhz(r.q50), _mhz(r.q90), _mhz(r.nominal), r.n_failed)
        for r in table.rows
    ]
    write_csv(
        out_dir / "variance_quantiles.csv",
        cfg,
        ["omega_q_ghz", "distance", "q10_mhz", "q50_mhz", "q90_mhz", "nominal_mhz", "n_failed"],
        rows,
    )
    if dump_raw:
        raw_rows = []
        for gi, omega_q in enumerate(table.omega_q_grid):
            for di, dist in enumerate(table.distances):
                for r in range(table.raw.shape[2]):
                    raw_rows.append((_ghz(omega_q), dist, r, _mhz(table.raw[gi, di, r])))
        write_csv(
            out_dir / "variance_raw.csv",
            cfg,
            ["omega_q_ghz", "distance", "realization", "jeff_mhz"],
            raw_rows,
        )


def run(argv: list) -> int:
    parser = argparse.ArgumentParser(prog="qbus", description=__doc__)
    parser.add_argument("study", choices=STUDIES)
    parser.add_argument("config", type=Path)
    parser.add_argument("--output-dir", type=Path, default=None)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args(argv)

    try:
        if not args.config.exists():
            raise ConfigError(f"config file not found: {args.config}")
        cfg = yaml.safe_load(args.config.read_text())
        if not isinstance(cfg, dict) or "design" not in cfg:
            raise ConfigError("config must be a mapping with a 'design' block")
        declared = cfg.get("study")
        if declared is not None and declared != args.study:
            raise ConfigError(f"config declares study {declared!r}, invoked {args.study!r}")
        if args.seed is not None:
            cfg["seed"] = int(args.seed)
        if args.output_dir is not None:
            cfg["output_dir"] = str(args.output_dir)
        design = load_design(cfg)
    except (ConfigError, yaml.YAMLError, TypeError, ValueError) as exc:
        print(f"qbus: config error: {exc}", file=sys.stderr)
        return 2

    report = validate_design(design)
    if not report.ok:
        for name, actual, bound in report.violations:
            print(f"qbus: design violation: {name}: {actual} (bound {bound})", file=sys.stderr)
        return 3

    out_dir = Path(cfg.get("output_dir", "."))
    seed = int(cfg.get("seed", 0))
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.study == "design-report":
            run_design_report(design, cfg, out_dir)
        elif args.study == "spectrum":
            run_spectrum(design, cfg, out_dir)
        elif args.study == "jeff-sweep":
            run_jeff_sweep(design, cfg, out_dir)
        elif args.study == "gate":
            run_gate(design, cfg, out_dir, threads=args.threads)
        elif args.study == "variance":
            run_variance(design, cfg, out_dir, seed, threads=args.threads)
    except Exception as exc:  # noqa: BLE001 - studies report any failure uniformly
        print(f"qbus: study error: {exc}", file=sys.stderr)
        return 4
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))

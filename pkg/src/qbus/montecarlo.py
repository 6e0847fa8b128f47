"""Fabrication-variance study: perturb every element, rebuild exactly.

Each realization multiplies every individual capacitor and Josephson energy
by an independent normal factor N(1, sigma). Realizations are generated from
counter-based streams keyed on (seed, realization index), so results do not
depend on execution order. The circuit-level model is reassembled and
inverted exactly for every realization; data qubits are retuned to each grid
frequency through their (tunable) Josephson energies, while bus energies
keep their perturbed values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .capalgebra import invert_spd
from .effective import HybridizationError, numeric_effective_hamiltonian
from .params import BusDesign
from .spinmodel import hamiltonian_from_circuit
from .synthesis import (
    CircuitRealization,
    assemble_capacitance_matrix,
    solve_josephson_energies,
    synthesize_capacitances,
)

# Element groups in fixed draw order; determinism depends on this list.
_GROUPS = (
    ("c_shunt", "q"),
    ("c_shunt", "a"),
    ("c_shunt", "b"),
    ("c_ground", "q"),
    ("c_ground", "a"),
    ("c_ground", "b"),
    ("c_coupling", "a"),
    ("c_coupling", "b"),
    ("c_link", "a"),
    ("c_link", "b"),
    ("e_j", "q"),
    ("e_j", "a"),
    ("e_j", "b"),
)

SUBSETS = ("all", "ej_only", "caps_only")


@dataclass(frozen=True)
class VarianceConfig:
    sigma_rel: float
    n_realizations: int
    seed: int
    omega_q_grid: np.ndarray

    def __post_init__(self):
        if self.sigma_rel < 0.0:
            raise ValueError("sigma_rel must be >= 0")
        if self.n_realizations < 1:
            raise ValueError("need at least one realization")
        self.omega_q_grid.setflags(write=False)


@dataclass(frozen=True)
class QuantileRow:
    omega_q: float
    distance: int
    q10: float
    q50: float
    q90: float
    nominal: float
    n_failed: int


@dataclass(frozen=True)
class QuantileTable:
    rows: tuple
    omega_q_grid: np.ndarray
    distances: tuple
    raw: np.ndarray  # (n_grid, n_distances, n_realizations), NaN where failed
    nominal: np.ndarray  # (n_grid, n_distances)


def sample_realization(
    nominal: CircuitRealization,
    sigma_rel: float,
    realization_index: int,
    seed: int,
    subset: str = "all",
) -> CircuitRealization:
    """One perturbed realization, deterministic in (seed, realization_index).

    Draw factors are generated for every element group in a fixed order,
    regardless of `subset`, so restricted studies (ej_only / caps_only) stay
    draw-aligned with the full one. Non-positive draws are resampled and the
    resample count is carried on the returned realization.
    """
    if not 0.0 <= sigma_rel < 0.2:
        raise ValueError("sigma_rel must be in [0, 0.2)")
    if subset not in SUBSETS:
        raise ValueError(f"subset must be one of {SUBSETS}")
    bitgen = np.random.Philox(key=np.array([seed, realization_index], dtype=np.uint64))
    rng = np.random.Generator(bitgen)
    resampled = 0
    new_groups: dict[str, dict] = {"c_shunt": {}, "c_ground": {}, "c_coupling": {}, "c_link": {}, "e_j": {}}
    for group, key in _GROUPS:
        values = getattr(nominal, group)[key]
        factors = rng.normal(1.0, sigma_rel, size=values.shape)
        while np.any(factors <= 0.0):
            bad = factors <= 0.0
            resampled += int(bad.sum())
            factors[bad] = rng.normal(1.0, sigma_rel, size=int(bad.sum()))
        apply = (
            subset == "all"
            or (subset == "ej_only" and group == "e_j")
            or (subset == "caps_only" and group != "e_j")
        )
        new_groups[group][key] = values * factors if apply else values.copy()
    return nominal.replace_elements(resampled_draws=resampled, **new_groups)


def _couplings_on_grid(
    realization: CircuitRealization, omega_q_grid: np.ndarray, max_distance: int
) -> np.ndarray:
    """Signed J^eff at distances 1..max_distance for each grid frequency.

    The circuit is assembled and inverted once; each grid point retunes the
    data-qubit Josephson energies onto the exact perturbed inverse so the
    data array sits at omega_q while the buses keep their perturbed spectra.
    Hybridized points come back NaN.
    """
    L = realization.n_sites
    net = assemble_capacitance_matrix(realization)
    cinv = invert_spd(net)
    diag_q = np.diag(cinv.minus_block())[:L]
    data_sites = np.arange(L)
    out = np.full((omega_q_grid.size, max_distance), np.nan)
    for gi, omega_q in enumerate(omega_q_grid):
        e_j = {
            "q": solve_josephson_energies(np.full(L, omega_q), diag_q),
            "a": realization.e_j["a"],
            "b": realization.e_j["b"],
        }
        model = hamiltonian_from_circuit(cinv, e_j)
        try:
            eff = numeric_effective_hamiltonian(model, data_sites)
        except HybridizationError:
            continue
        upto = min(max_distance, eff.j_by_distance.size - 1)
        out[gi, :upto] = eff.j_by_distance[1 : upto + 1]
    return out


def variance_study(
    d: BusDesign,
    cfg: VarianceConfig,
    max_distance: int = 1,
    subset: str = "all",
    nominal: CircuitRealization | None = None,
    threads: int = 1,
) -> QuantileTable:
    """Empirical 10/50/90% quantiles of J^eff_d across perturbed realizations.

    Realizations are independent tasks; with threads > 1 they run on a pool,
    and the result is identical because each writes its own slot.
    """
    if nominal is None:
        nominal = synthesize_capacitances(d)
    grid = np.asarray(cfg.omega_q_grid, dtype=float)
    nominal_j = _couplings_on_grid(nominal, grid, max_distance)
    raw = np.full((grid.size, max_distance, cfg.n_realizations), np.nan)

    def one(r: int):
        perturbed = sample_realization(nominal, cfg.sigma_rel, r, cfg.seed, subset=subset)
        raw[:, :, r] = _couplings_on_grid(perturbed, grid, max_distance)

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(one, range(cfg.n_realizations)))
    else:
        for r in range(cfg.n_realizations):
            one(r)

    rows = []
    for gi, omega_q in enumerate(grid):
        for di in range(max_distance):
            vals = raw[gi, di, :]
            ok = vals[~np.isnan(vals)]
            if ok.size:
                q10, q50, q90 = np.quantile(ok, [0.1, 0.5, 0.9], method="linear")
            else:
                q10 = q50 = q90 = float("nan")
            rows.append(
                QuantileRow(
                    omega_q=float(omega_q),
                    distance=di + 1,
                    q10=float(q10),
                    q50=float(q50),
                    q90=float(q90),
                    nominal=float(nominal_j[gi, di]),
                    n_failed=int(np.isnan(vals).sum()),
                )
            )
    return QuantileTable(
        rows=tuple(rows),
        omega_q_grid=grid,
        distances=tuple(range(1, max_distance + 1)),
        raw=raw,
        nominal=nominal_j,
    )

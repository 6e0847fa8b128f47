"""Two-level excitation-conserving spin models and fixed-excitation sectors.

A SpinModel is a set of site frequencies plus a symmetric flip-flop coupling
matrix J_mn multiplying (sigma+_m sigma-_n + h.c.). It can be built either
from an exactly inverted capacitance network or directly from the design
parameters; agreement of the two paths is a key consistency check.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .capalgebra import InverseCapacitance
from .params import E2_OVER_HBAR_PER_FF, PERIODIC, BusDesign, validate_design

ARRAY_ORDER = ("q", "a", "b")


@dataclass(frozen=True)
class SpinModel:
    """Site frequencies (rad/ns) and ranged flip-flop couplings (rad/ns)."""

    omega: np.ndarray
    coupling: np.ndarray
    site_labels: tuple
    boundary: str

    def __post_init__(self):
        self.omega.setflags(write=False)
        self.coupling.setflags(write=False)

    @property
    def n_sites(self) -> int:
        return self.omega.size

    def sites_of(self, array: str) -> np.ndarray:
        return np.array([i for i, (x, _) in enumerate(self.site_labels) if x == array])


@dataclass(frozen=True)
class SectorBasis:
    """Ordered basis of all k-excitation occupation states over n sites."""

    n_sites: int
    n_excitations: int
    states: tuple
    index: dict

    def __len__(self) -> int:
        return len(self.states)


def sector_basis(n_sites: int, k: int) -> SectorBasis:
    if not 0 <= k <= n_sites:
        raise ValueError(f"k = {k} outside [0, {n_sites}]")
    states = tuple(combinations(range(n_sites), k))
    assert len(states) == comb(n_sites, k)
    return SectorBasis(
        n_sites=n_sites,
        n_excitations=k,
        states=states,
        index={s: i for i, s in enumerate(states)},
    )


def sector_matrix(model: SpinModel, basis: SectorBasis) -> np.ndarray:
    if basis.n_sites != model.n_sites:
        raise ValueError("basis and model site counts differ")
    return sector_matrix_from_arrays(model.omega, model.coupling, basis)


def sector_matrix_from_arrays(omega: np.ndarray, coupling: np.ndarray, basis: SectorBasis) -> np.ndarray:
    """Real symmetric sector Hamiltonian, energies relative to the vacuum.

    Diagonal entries sum the frequencies of the excited sites; off-diagonal
    entries connect states differing by one excitation hop. Double occupancy
    is excluded by the basis itself (hard-core constraint).
    """
    dim = len(basis.states)
    H = np.zeros((dim, dim))
    n = basis.n_sites
    for i, state in enumerate(basis.states):
        H[i, i] = sum(omega[m] for m in state)
        occupied = set(state)
        for m in state:
            row = coupling[m]
            for target in range(n):
                if target in occupied or row[target] == 0.0:
                    continue
                dest = tuple(sorted(occupied - {m} | {target}))
                H[i, basis.index[dest]] += row[target]
    return H


def hamiltonian_from_circuit(cinv: InverseCapacitance, e_j) -> SpinModel:
    """Spin model from an exact inverse capacitance matrix and E_J values.

    omega_m = sqrt(4 e^2 [C^-1]_mm E_J,m) over the junction (-) coordinates;
    J_mn = sqrt(omega_m omega_n)/2 * [C^-1]_mn / sqrt([C^-1]_mm [C^-1]_nn).
    Only the rotating (flip-flop) part of the resulting coupling is kept.
    """
    L = cinv.n_sites
    if isinstance(e_j, dict):
        e_j = np.concatenate([np.asarray(e_j[x], dtype=float) for x in ARRAY_ORDER])
    else:
        e_j = np.asarray(e_j, dtype=float)
    if e_j.size != 3 * L:
        raise ValueError(f"need {3*L} Josephson energies, got {e_j.size}")
    if np.any(e_j < 0.0):
        raise ValueError("negative Josephson energy")
    mm = cinv.minus_block()
    diag = np.diag(mm)
    if np.any(diag <= 0.0):
        raise ValueError("non-positive inverse-capacitance diagonal")
    omega = np.sqrt(4.0 * E2_OVER_HBAR_PER_FF * diag * e_j)
    coupling = np.sqrt(np.outer(omega, omega)) / 2.0 * mm / np.sqrt(np.outer(diag, diag))
    np.fill_diagonal(coupling, 0.0)
    coupling = 0.5 * (coupling + coupling.T)
    labels = tuple((x, m) for x in ARRAY_ORDER for m in range(L))
    return SpinModel(omega=omega, coupling=coupling, site_labels=labels, boundary=cinv.boundary)


def dropoff_profile(xi: float, L: int, boundary: str) -> np.ndarray:
    """L x L matrix of xi^|m-n|; periodic chains sum all wrapped images."""
    idx = np.arange(L)
    dist = np.abs(idx[:, None] - idx[None, :])
    if boundary == PERIODIC:
        if xi == 0.0:
            return (dist == 0).astype(float)
        return (xi**dist + xi ** (L - dist)) / (1.0 - xi**L)
    return xi ** dist.astype(float)


def hamiltonian_from_design(d: BusDesign, omega_q_per_site: np.ndarray | None = None) -> SpinModel:
    """Spin model straight from the design parameters (no circuit in between).

    Intra-bus couplings kappa omega_alpha xi^|m-n| / (2 (1+kappa)); data-bus
    couplings eps sqrt(omega_q omega_alpha) |kappa_other/kappa|^(1/4)
    / (2 sqrt(1+kappa)) * (delta_mn + kappa xi^|m-n|). Data qubits carry no
    direct mutual coupling. Per-site omega_q overrides support detuned idling
    and gate schedules; the couplings scale with sqrt(omega_q,m) accordingly.
    """
    report = validate_design(d)
    if not report.ok:
        raise ValueError(f"invalid design: {report.violations}")
    L = d.n_qubits
    if d.eps > 0.0 and (d.kappa_a == 0.0 or d.kappa_b == 0.0):
        raise ValueError("eps > 0 requires both kappas nonzero")
    if omega_q_per_site is None:
        omega_q = np.full(L, d.omega_q_idle, dtype=float)
    else:
        omega_q = np.asarray(omega_q_per_site, dtype=float)
        if omega_q.shape != (L,):
            raise ValueError(f"omega_q_per_site must have shape ({L},)")

    omega = np.concatenate([omega_q, np.full(L, d.omega_a), np.full(L, d.omega_b)])
    coupling = np.zeros((3 * L, 3 * L))
    profile = dropoff_profile(d.xi, L, d.boundary)
    for offset, bus, other in ((L, "a", "b"), (2 * L, "b", "a")):
        kap, w_bus = d.bus(bus)
        kap_other, _ = d.bus(other)
        blk = slice(offset, offset + L)
        intra = kap * w_bus * profile / (2.0 * (1.0 + kap))
        np.fill_diagonal(intra, 0.0)
        coupling[blk, blk] = intra
        if d.eps > 0.0:
            pref = (
                d.eps
                * np.sqrt(omega_q * w_bus)
                * abs(kap_other / kap) ** 0.25
                / (2.0 * np.sqrt(1.0 + kap))
            )
            qbus = pref[:, None] * (np.eye(L) + kap * profile)
            coupling[:L, blk] = qbus
            coupling[blk, :L] = qbus.T
    labels = tuple((x, m) for x in ARRAY_ORDER for m in range(L))
    return SpinModel(omega=omega, coupling=coupling, site_labels=labels, boundary=d.boundary)

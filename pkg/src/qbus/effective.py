"""Effective data-qubit theory: analytic band/coupling formulas and an
independent numeric extraction from exact diagonalization.

The analytic side evaluates the auxiliary-array band, the effective
detunings, drop-off rates zeta, and coupling scales J per bus. The numeric
side diagonalizes the single-excitation sector, selects the L eigenvectors
with dominant data-subspace weight, and reconstructs the effective
Hamiltonian through a symmetric (Loewdin) orthogonalization of their
data-site projections.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import cos, pi, sqrt

import numpy as np

from .params import PERIODIC, BusDesign
from .spinmodel import SpinModel, hamiltonian_from_design


class BandEdgeError(ValueError):
    """omega_q sits exactly on a band edge or band center; detuning vanishes."""


class HybridizationError(RuntimeError):
    """Data modes cannot be separated from the bus band."""


def aux_band(d: BusDesign, bus: str, k) -> np.ndarray | float:
    """Single-excitation dispersion of one auxiliary array at wavenumber k."""
    kap, w_bus = d.bus(bus)
    ck = np.cos(k)
    return w_bus * (
        1.0 + kap / (1.0 + kap) * d.xi * (ck - d.xi) / (1.0 + d.xi**2 - 2.0 * d.xi * ck)
    )


def band_edges(d: BusDesign, bus: str) -> tuple[float, float]:
    """(min, max) of the bus band; extremes always sit at k = 0 and k = pi."""
    e0 = float(aux_band(d, bus, 0.0))
    epi = float(aux_band(d, bus, pi))
    return (min(e0, epi), max(e0, epi))


@dataclass(frozen=True)
class BusEffective:
    """Per-bus effective quantities at a given omega_q (rad/ns)."""

    delta_0: float
    delta_pi: float
    delta_half: float
    delta_half_tilde: float
    zeta: float
    j: float
    hybridized: bool


@dataclass(frozen=True)
class EffectiveParams:
    omega_q: float
    omega_q_bar: float
    a: BusEffective
    b: BusEffective

    def bus(self, which: str) -> BusEffective:
        return self.a if which == "a" else self.b

    @property
    def hybridized(self) -> bool:
        return self.a.hybridized or self.b.hybridized


def _bus_effective(d: BusDesign, bus: str, omega_q: float) -> BusEffective:
    kap, _ = d.bus(bus)
    d0 = omega_q - float(aux_band(d, bus, 0.0))
    dpi = omega_q - float(aux_band(d, bus, pi))
    dh = omega_q - float(aux_band(d, bus, pi / 2.0))
    if d0 == 0.0 or dpi == 0.0 or dh == 0.0:
        raise BandEdgeError(f"omega_q coincides with a {bus}-band point")
    hybridized = d0 * dpi < 0.0
    rt = sqrt(d0 * dpi) if not hybridized else float("nan")
    xisq = d.xi**2
    dt = dh * ((1.0 + xisq) / 2.0 + (1.0 - xisq) / 2.0 * rt / abs(dh))
    num = d.xi * (dpi + d0) + (1.0 + xisq) / 2.0 * (dpi - d0)
    den = d.xi * (dpi - d0) + (1.0 + xisq) / 2.0 * (dpi + d0)
    zeta = num / den * ((1.0 + xisq) / 2.0 * abs(dh)) / abs(dt)
    j = (
        0.5
        * d.eps**2
        * sqrt(abs(d.kappa_a * d.kappa_b))
        * omega_q
        * (d.xi / zeta)
        * (omega_q - d.bus(bus)[1] / 2.0) ** 2
        / (abs(dt) * rt)
    )
    return BusEffective(
        delta_0=d0,
        delta_pi=dpi,
        delta_half=dh,
        delta_half_tilde=dt,
        zeta=zeta,
        j=j,
        hybridized=hybridized,
    )


def effective_params(d: BusDesign, omega_q: float) -> EffectiveParams:
    """Evaluate the effective-theory parameters at a data-qubit frequency.

    Values are still returned when omega_q sits inside a band, but the
    affected quantities are NaN and the bus is flagged hybridized.
    """
    a = _bus_effective(d, "a", omega_q)
    b = _bus_effective(d, "b", omega_q)
    shift = 0.0
    for bus, p in (("a", a), ("b", b)):
        kap, w_bus = d.bus(bus)
        shift += (
            d.eps**2
            * omega_q
            * sqrt(abs(d.kappa_a * d.kappa_b))
            / (4.0 * abs(kap) * (1.0 + kap))
            * (d.xi / p.zeta)
            * (w_bus / p.delta_half_tilde)
        )
    return EffectiveParams(omega_q=omega_q, omega_q_bar=omega_q + shift, a=a, b=b)


def analytic_jeff(d: BusDesign, omega_q: float, dist: int) -> float:
    """Effective data-data coupling at site distance dist >= 1 (rad/ns)."""
    if dist < 1:
        raise ValueError("distance must be >= 1")
    p = effective_params(d, omega_q)
    return p.a.j * p.a.zeta**dist - p.b.j * p.b.zeta**dist


def analytic_diagonal(p: EffectiveParams) -> float:
    """Effective on-site energy: dressed frequency plus the distance-zero
    coupling term of the two geometric series."""
    return p.omega_q_bar + (p.a.j - p.b.j)


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """Data-qubit-only Hermitian coupling matrix with per-distance averages."""

    matrix: np.ndarray
    provenance: str
    j_by_distance: np.ndarray
    mode_weights: np.ndarray | None = None
    eigenvalues: np.ndarray | None = None

    def __post_init__(self):
        self.matrix.setflags(write=False)
        self.j_by_distance.setflags(write=False)


def _average_by_distance(matrix: np.ndarray, periodic: bool) -> np.ndarray:
    L = matrix.shape[0]
    dmax = L // 2
    sums = np.zeros(dmax + 1)
    counts = np.zeros(dmax + 1)
    for m in range(L):
        for n in range(L):
            dd = abs(m - n)
            if periodic:
                dd = min(dd, L - dd)
            if dd <= dmax:
                sums[dd] += matrix[m, n]
                counts[dd] += 1
    return sums / counts


def analytic_effective_hamiltonian(d: BusDesign, omega_q: float) -> EffectiveHamiltonian:
    p = effective_params(d, omega_q)
    L = d.n_qubits
    idx = np.arange(L)
    dist = np.abs(idx[:, None] - idx[None, :])
    if d.boundary == PERIODIC:
        dist = np.minimum(dist, L - dist)
    matrix = p.a.j * p.a.zeta**dist - p.b.j * p.b.zeta**dist
    np.fill_diagonal(matrix, analytic_diagonal(p))
    return EffectiveHamiltonian(
        matrix=matrix,
        provenance="analytic",
        j_by_distance=_average_by_distance(matrix, d.boundary == PERIODIC),
    )


def numeric_effective_hamiltonian(model: SpinModel, data_sites: np.ndarray) -> EffectiveHamiltonian:
    """Extract the data-qubit effective Hamiltonian from exact diagonalization.

    The single-excitation sector is diagonalized; the len(data_sites)
    eigenvectors with the largest data-subspace weight are selected (every
    selected weight must exceed 0.5, and near-degenerate selection at the cut
    is rejected). Their data-site projections are symmetrically
    orthonormalized and the effective matrix is rebuilt from the exact
    eigenvalues, which preserves their mean on the diagonal.
    """
    data_sites = np.asarray(data_sites, dtype=int)
    L = data_sites.size
    h1 = np.diag(model.omega) + model.coupling
    evals, evecs = np.linalg.eigh(h1)
    weights = np.sum(evecs[data_sites, :] ** 2, axis=0)
    order = np.argsort(-weights)
    chosen = order[:L]
    w_min = weights[order[L - 1]]
    if w_min <= 0.5:
        raise HybridizationError(f"data-subspace weight {w_min:.3f} <= 0.5")
    if weights.size > L and abs(weights[order[L - 1]] - weights[order[L]]) < 1e-6:
        raise HybridizationError("ambiguous eigenvector selection at the weight cut")
    chosen = np.sort(chosen)
    W = evecs[np.ix_(data_sites, chosen)]
    overlap = W.T @ W
    se, sv = np.linalg.eigh(overlap)
    if se.min() <= 0.0:
        raise HybridizationError("singular data-projection overlap")
    W_orth = W @ (sv * se**-0.5) @ sv.T
    matrix = W_orth @ np.diag(evals[chosen]) @ W_orth.T
    matrix = 0.5 * (matrix + matrix.T)
    return EffectiveHamiltonian(
        matrix=matrix,
        provenance="numeric",
        j_by_distance=_average_by_distance(matrix, model.boundary == PERIODIC),
        mode_weights=weights[chosen],
        eigenvalues=evals[chosen],
    )


@dataclass(frozen=True)
class SweepRow:
    omega_q: float
    distance: int
    jeff_analytic: float
    jeff_numeric: float
    zeta_a: float
    zeta_b: float
    hybridized: bool


def sweep_jeff(d: BusDesign, omega_q_grid, max_distance: int) -> list[SweepRow]:
    """Tabulate analytic and numeric effective couplings over a frequency grid.

    Grid points inside a bus band are marked hybridized and skipped on the
    numeric side; numeric extraction failures at nominally detuned points are
    likewise marked, and the sweep continues.
    """
    rows = []
    data_sites = np.arange(d.n_qubits)
    nan_bus = BusEffective(*(float("nan"),) * 6, hybridized=True)
    for omega_q in np.asarray(omega_q_grid, dtype=float):
        try:
            p = effective_params(d, omega_q)
        except BandEdgeError:
            p = EffectiveParams(omega_q=omega_q, omega_q_bar=float("nan"), a=nan_bus, b=nan_bus)
        numeric = np.full(max_distance + 1, np.nan)
        hybridized = p.hybridized
        if not hybridized:
            try:
                model = hamiltonian_from_design(d, omega_q_per_site=np.full(d.n_qubits, omega_q))
                eff = numeric_effective_hamiltonian(model, data_sites)
                upto = min(max_distance, eff.j_by_distance.size - 1)
                numeric[: upto + 1] = eff.j_by_distance[: upto + 1]
            except HybridizationError:
                hybridized = True
        for dist in range(1, max_distance + 1):
            ja = p.a.j * p.a.zeta**dist - p.b.j * p.b.zeta**dist
            rows.append(
                SweepRow(
                    omega_q=omega_q,
                    distance=dist,
                    jeff_analytic=ja,
                    jeff_numeric=numeric[dist] if dist < numeric.size else float("nan"),
                    zeta_a=p.a.zeta,
                    zeta_b=p.b.zeta,
                    hybridized=hybridized,
                )
            )
    return rows

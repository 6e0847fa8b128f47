"""Inverse-capacitance computations.

Exact SPD inversion, Schur-complement reduction, geometric drop-off fitting,
and the direct-coupling cancellation check on the data-qubit block. The
production path always inverts exactly; perturbative forms are used only as
test oracles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.optimize import least_squares

from .params import PERIODIC
from .synthesis import CapacitanceNetwork


@dataclass(frozen=True)
class InverseCapacitance:
    """Inverse of a CapacitanceNetwork, same coordinate labels (units 1/fF)."""

    matrix: np.ndarray
    labels: tuple
    boundary: str

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def n_sites(self) -> int:
        return len(self.labels) // 6

    def block(self, array_row: str, sign_row: str, array_col: str, sign_col: str) -> np.ndarray:
        order = {("q", "-"): 0, ("q", "+"): 1, ("a", "-"): 2, ("a", "+"): 3, ("b", "-"): 4, ("b", "+"): 5}
        L = self.n_sites
        i = order[(array_row, sign_row)]
        j = order[(array_col, sign_col)]
        return self.matrix[i * L : (i + 1) * L, j * L : (j + 1) * L]

    def minus_block(self) -> np.ndarray:
        """3L x 3L junction-mode block in q, a, b order."""
        L = self.n_sites
        idx = np.concatenate([np.arange(0, L), np.arange(2 * L, 3 * L), np.arange(4 * L, 5 * L)])
        return self.matrix[np.ix_(idx, idx)]


@dataclass(frozen=True)
class DropoffFit:
    c_scale: float
    kappa_fit: float
    xi_fit: float
    max_residual: float


@dataclass(frozen=True)
class CancellationCheck:
    max_offdiag_qq: float
    ratio_to_diag: float


def invert_spd(net: CapacitanceNetwork) -> InverseCapacitance:
    """Exact inverse via Cholesky; raises scipy LinAlgError for non-SPD input."""
    C = net.matrix
    cf = cho_factor(C)
    inv = cho_solve(cf, np.eye(C.shape[0]))
    inv = 0.5 * (inv + inv.T)
    resid = np.max(np.abs(C @ inv - np.eye(C.shape[0])))
    if resid > 1e-10:
        raise RuntimeError(f"inversion residual {resid:.3e} exceeds 1e-10")
    return InverseCapacitance(matrix=inv, labels=net.labels, boundary=net.boundary)


def effective_capacitance(net: CapacitanceNetwork, kept: np.ndarray) -> np.ndarray:
    """Schur complement onto the kept coordinates: C_kk - C_kx C_xx^-1 C_xk."""
    C = net.matrix
    n = C.shape[0]
    kept = np.asarray(kept, dtype=int)
    mask = np.ones(n, dtype=bool)
    mask[kept] = False
    rest = np.arange(n)[mask]
    if rest.size == 0:
        return C[np.ix_(kept, kept)].copy()
    cf = cho_factor(C[np.ix_(rest, rest)])
    cross = cho_solve(cf, C[np.ix_(rest, kept)])
    out = C[np.ix_(kept, kept)] - C[np.ix_(kept, rest)] @ cross
    return 0.5 * (out + out.T)


def distance_profile(block: np.ndarray, periodic: bool) -> np.ndarray:
    """Reduce a (circulant-like) block to entries by site distance d = 0..L-1.

    Periodic blocks are averaged over all pairs at wrapped offset d; open
    blocks over all pairs at |m - n| = d (length L, trailing entries from
    fewer pairs).
    """
    L = block.shape[0]
    out = np.empty(L)
    if periodic:
        for d in range(L):
            out[d] = np.mean([block[m, (m + d) % L] for m in range(L)])
    else:
        for d in range(L):
            vals = [block[m, m + d] for m in range(L - d)]
            out[d] = np.mean(vals)
    return out


def _dropoff_weights(xi: float, L: int, dists: np.ndarray, periodic: bool) -> np.ndarray:
    """Geometric profile by distance; periodic chains sum all wrapped images."""
    if periodic:
        if xi == 0.0:
            return np.where(dists == 0, 1.0, 0.0)
        return (xi**dists + xi ** (L - dists)) / (1.0 - xi**L)
    return xi ** dists.astype(float)


def fit_dropoff(row: np.ndarray, periodic: bool) -> DropoffFit:
    """Fit (1/C_A)(delta_d0 + kappa * xi^d) to a by-distance inverse row.

    `row` holds entries at distances 0..L-1 from a reference site (a full
    circulant row for periodic chains). The seed takes xi from the ratio of
    the distance-2 to distance-1 entries and kappa from distance 1, then a
    bounded least-squares refinement over distances <= L/2 polishes all three
    parameters. Residuals are reported relative to the diagonal entry.
    """
    row = np.asarray(row, dtype=float)
    L = row.size
    if L < 6:
        raise ValueError("need at least 6 distances to fit")
    diag = row[0]
    if diag <= 0.0:
        raise ValueError("diagonal entry must be positive")
    if np.max(np.abs(row[1:])) < 1e-15 * diag:
        return DropoffFit(c_scale=1.0 / diag, kappa_fit=0.0, xi_fit=0.0, max_residual=0.0)

    dmax = L // 2
    dists = np.arange(dmax + 1)
    data = row[: dmax + 1]

    xi0 = abs(row[2] / row[1]) if row[1] != 0.0 else 0.5
    xi0 = min(max(xi0, 1e-6), 0.99)
    w1 = _dropoff_weights(xi0, L, np.array([1]), periodic)[0]
    v0 = row[1] / w1  # kappa / C_A
    u0 = diag - v0 * _dropoff_weights(xi0, L, np.array([0]), periodic)[0]  # 1 / C_A

    def residuals(p):
        u, v, xi = p
        w = _dropoff_weights(xi, L, dists, periodic)
        model = v * w
        model[0] += u
        return (model - data) / diag

    sol = least_squares(
        residuals,
        x0=[u0, v0, xi0],
        bounds=([-np.inf, -np.inf, 0.0], [np.inf, np.inf, 1.0 - 1e-12]),
        xtol=1e-15,
        ftol=1e-15,
        gtol=1e-15,
    )
    u, v, xi = sol.x
    return DropoffFit(
        c_scale=1.0 / u,
        kappa_fit=v / u,
        xi_fit=xi,
        max_residual=float(np.max(np.abs(residuals(sol.x)))),
    )


def verify_direct_cancellation(cinv: InverseCapacitance) -> CancellationCheck:
    """Largest residual data-data inverse entry and its ratio to the diagonal."""
    qq = cinv.block("q", "-", "q", "-")
    off = np.abs(qq - np.diag(np.diag(qq)))
    max_off = float(off.max()) if qq.shape[0] > 1 else 0.0
    return CancellationCheck(
        max_offdiag_qq=max_off, ratio_to_diag=max_off / float(np.mean(np.diag(qq)))
    )

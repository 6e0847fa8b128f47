"""Concrete circuit synthesis: capacitor values and Josephson energies.

Turns a BusDesign into the element values of the three-array circuit
(junction-shunt, pad-ground, intra-bus link, and data-bus coupling
capacitors) and assembles the full partitioned capacitance matrix over the
+/- pad combinations of every floating transmon.

Element values are stored per individual capacitor (two pad-ground and two
data-bus coupling capacitors per site) so that fabrication-variance studies
can perturb each one independently; the nominal synthesis fills them
symmetrically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .params import (
    E2_OVER_HBAR_PER_FF,
    OPEN,
    PERIODIC,
    BusDesign,
    kappa_max,
    validate_design,
)

ARRAYS = ("q", "a", "b")
SIGNS = ("-", "+")


class SynthesisError(ValueError):
    """A design maps to an unphysical element value."""


@dataclass(frozen=True)
class CircuitRealization:
    """Element values for every capacitor and junction in the circuit.

    c_shunt[x][m]      junction-shunt capacitance C_Q of site m, array x (fF)
    c_ground[x][p, m]  pad-ground capacitance C_G, pad p in (lower, upper)
    c_coupling[a][p, m]  data-bus coupling capacitor between pad p of data
                         qubit m and pad p of bus qubit m (fF)
    c_link[a][m]       intra-bus coupling capacitor on link m -> m+1 (fF)
    e_j[x][m]          Josephson energy E_J/hbar (rad/ns)
    """

    n_sites: int
    boundary: str
    c_shunt: dict
    c_ground: dict
    c_coupling: dict
    c_link: dict
    e_j: dict
    resampled_draws: int = 0

    def __post_init__(self):
        for group in (self.c_shunt, self.c_ground, self.c_coupling, self.c_link, self.e_j):
            for arr in group.values():
                arr.setflags(write=False)

    @property
    def n_links(self) -> int:
        return self.n_sites if self.boundary == PERIODIC else self.n_sites - 1

    def replace_elements(self, **groups) -> "CircuitRealization":
        """Copy with some element groups replaced (used by perturbation sampling)."""
        data = dict(
            n_sites=self.n_sites,
            boundary=self.boundary,
            c_shunt=self.c_shunt,
            c_ground=self.c_ground,
            c_coupling=self.c_coupling,
            c_link=self.c_link,
            e_j=self.e_j,
            resampled_draws=self.resampled_draws,
        )
        data.update(groups)
        return CircuitRealization(**data)


@dataclass(frozen=True)
class CapacitanceNetwork:
    """Symmetric positive-definite capacitance matrix over the +/- node basis.

    Coordinates are ordered in six blocks of length L:
    [q-, q+, a-, a+, b-, b+]; labels[i] = (array, sign, site).
    """

    matrix: np.ndarray
    labels: tuple
    boundary: str

    def __post_init__(self):
        self.matrix.setflags(write=False)

    @property
    def n_sites(self) -> int:
        return len(self.labels) // 6

    def block_slice(self, array: str, sign: str) -> slice:
        L = self.n_sites
        i = ARRAYS.index(array) * 2 + SIGNS.index(sign)
        return slice(i * L, (i + 1) * L)

    def minus_indices(self) -> np.ndarray:
        """Indices of the junction (-) coordinates in q, a, b order."""
        L = self.n_sites
        return np.concatenate([np.arange(0, L), np.arange(2 * L, 3 * L), np.arange(4 * L, 5 * L)])


def _check_positive(value: float, element: str) -> float:
    if not np.isfinite(value) or value < 0.0:
        raise SynthesisError(f"synthesized {element} = {value:.6g} fF is not a valid capacitance")
    return value


def synthesize_capacitances(
    d: BusDesign, c_bar: float = 100.0, c_ground_q: float = 10.0
) -> CircuitRealization:
    """Solve the bus design rules for concrete element values.

    All three arrays are normalized to the same target C-bar (default 100 fF),
    which leaves eps as the single coupling knob:
    C_qa = 2 eps C (|kappa_b|/kappa_a)^(1/4) and C_qb with the inverse ratio,
    satisfying the balance condition kappa_a C_qa^2 = |kappa_b| C_qb^2 exactly.
    Per-site E_J is solved from the assembled inverse matrix so that every
    site lands on its target frequency.
    """
    report = validate_design(d)
    if not report.ok:
        raise ValueError(f"invalid design: {report.violations}")
    L = d.n_qubits
    if d.boundary == PERIODIC and L < 3:
        raise SynthesisError("periodic chains need at least 3 sites")
    xi, ka, kb, eps = d.xi, d.kappa_a, d.kappa_b, d.eps
    km = kappa_max(xi)

    if eps > 0.0 and (ka == 0.0 or kb == 0.0):
        raise SynthesisError(
            "c_qa/c_qb: eps > 0 requires both kappas nonzero (balance condition infeasible)"
        )
    if eps > 0.0:
        cqa = 2.0 * eps * c_bar * (abs(kb) / ka) ** 0.25
        cqb = 2.0 * eps * c_bar * (ka / abs(kb)) ** 0.25
    else:
        cqa = cqb = 0.0

    # A-A bus (kappa_a >= 0)
    r = ka / km
    c_shunt_a = _check_positive((1.0 - r) / (1.0 + r) * c_bar - cqa / 2.0, "c_shunt_a")
    c_ground_a = _check_positive(2.0 * r / (1.0 + r) * c_bar, "c_ground_a")
    if xi > 0.0:
        c_link_a = _check_positive(
            4.0 * xi / (1.0 - xi) ** 2 * r / (1.0 + r) ** 2 * c_bar, "c_link_a"
        )
    else:
        c_link_a = 0.0

    # A-B bus (kappa_b <= 0)
    s = km * abs(kb)
    c_shunt_b = _check_positive(c_bar - cqb / 2.0, "c_shunt_b")
    c_ground_b = _check_positive(2.0 * s / (1.0 - s) * c_bar, "c_ground_b")
    if xi > 0.0 and kb != 0.0:
        denom = (1.0 - s) * (1.0 - abs(kb) / km)
        if denom <= 0.0:
            raise SynthesisError("c_link_b: |kappa_b| at the drop-off bound is not realizable")
        c_link_b = _check_positive(
            4.0 * xi / (1.0 - xi) ** 2 * abs(kb) * km / denom * c_bar, "c_link_b"
        )
    else:
        c_link_b = 0.0

    # Data array: only C-bar_q enters the Hamiltonian; the internal split is free.
    c_shunt_q = _check_positive(
        c_bar - c_ground_q / 2.0 - cqa / 2.0 - cqb / 2.0, "c_shunt_q"
    )

    n_links = L if d.boundary == PERIODIC else L - 1
    realization = CircuitRealization(
        n_sites=L,
        boundary=d.boundary,
        c_shunt={
            "q": np.full(L, c_shunt_q),
            "a": np.full(L, c_shunt_a),
            "b": np.full(L, c_shunt_b),
        },
        c_ground={
            "q": np.full((2, L), c_ground_q),
            "a": np.full((2, L), c_ground_a),
            "b": np.full((2, L), c_ground_b),
        },
        c_coupling={"a": np.full((2, L), cqa), "b": np.full((2, L), cqb)},
        c_link={"a": np.full(n_links, c_link_a), "b": np.full(n_links, c_link_b)},
        e_j={x: np.zeros(L) for x in ARRAYS},
    )

    net = assemble_capacitance_matrix(realization)
    diag_inv = _minus_diagonal_of_inverse(net)
    targets = np.concatenate(
        [np.full(L, d.omega_q_idle), np.full(L, d.omega_a), np.full(L, d.omega_b)]
    )
    e_j_all = solve_josephson_energies(targets, diag_inv)
    return realization.replace_elements(
        e_j={"q": e_j_all[:L], "a": e_j_all[L : 2 * L], "b": e_j_all[2 * L :]}
    )


def solve_josephson_energies(omega_targets: np.ndarray, cinv_diag: np.ndarray) -> np.ndarray:
    """E_J per site so that omega = sqrt(4 e^2 Cinv_mm E_J) hits each target."""
    if np.any(cinv_diag <= 0.0):
        raise SynthesisError("inverse-capacitance diagonal must be positive")
    return omega_targets**2 / (4.0 * E2_OVER_HBAR_PER_FF * cinv_diag)


def _minus_diagonal_of_inverse(net: CapacitanceNetwork) -> np.ndarray:
    """Diagonal of the junction-mode block of the inverse matrix.

    Computed through the Schur complement onto the junction (-) coordinates.
    Pad (+) coordinates whose rows vanish identically (unloaded floating pads
    in fully decoupled kappa = 0 corners) are exact zero modes with no weight
    in the junction sector and are dropped rather than inverted.
    """
    M = net.matrix
    n = M.shape[0]
    minus = net.minus_indices()
    mask = np.ones(n, dtype=bool)
    mask[minus] = False
    plus = np.arange(n)[mask]
    live = plus[np.any(M[plus, :] != 0.0, axis=1)]
    eff = M[np.ix_(minus, minus)]
    if live.size:
        cf = cho_factor(M[np.ix_(live, live)])
        eff = eff - M[np.ix_(minus, live)] @ cho_solve(cf, M[np.ix_(live, minus)])
    cf_eff = cho_factor(eff)
    inv = cho_solve(cf_eff, np.eye(minus.size))
    return np.diag(inv)


def assemble_capacitance_matrix(r: CircuitRealization) -> CapacitanceNetwork:
    """Stamp every element into the node basis and fold to the +/- basis.

    Nodes are the individual pads; the congruence transform to
    (phi_upper - phi_lower, phi_upper + phi_lower) per site keeps the matrix
    exactly symmetric. For symmetric element values the result reproduces the
    analytic block structure (delta-diagonal data couplings, tri-diagonal bus
    links with the alternating-pad sign pattern); asymmetric values simply
    stamp where they physically sit.
    """
    L = r.n_sites
    periodic = r.boundary == PERIODIC
    n = 6 * L
    node = np.zeros((n, n))

    def up(x, m):
        return ARRAYS.index(x) * 2 * L + 2 * m

    def lo(x, m):
        return ARRAYS.index(x) * 2 * L + 2 * m + 1

    def stamp(c, u, v):
        node[u, u] += c
        node[v, v] += c
        node[u, v] -= c
        node[v, u] -= c

    for x in ARRAYS:
        for m in range(L):
            stamp(r.c_shunt[x][m], up(x, m), lo(x, m))
            node[lo(x, m), lo(x, m)] += r.c_ground[x][0, m]
            node[up(x, m), up(x, m)] += r.c_ground[x][1, m]
    for bus in ("a", "b"):
        for m in range(L):
            stamp(r.c_coupling[bus][0, m], lo("q", m), lo(bus, m))
            stamp(r.c_coupling[bus][1, m], up("q", m), up(bus, m))
    n_links = L if periodic else L - 1
    for m in range(n_links):
        mp = (m + 1) % L
        # A-A wiring joins like pads; A-B alternates pads along the chain.
        stamp(r.c_link["a"][m], lo("a", m), lo("a", mp))
        stamp(r.c_link["b"][m], up("b", m), lo("b", mp))

    # x = T y with y = [q-, q+, a-, a+, b-, b+] blocks
    T = np.zeros((n, n))
    for x in range(3):
        for m in range(L):
            minus, plus = 2 * x * L + m, (2 * x + 1) * L + m
            u, v = x * 2 * L + 2 * m, x * 2 * L + 2 * m + 1
            T[u, minus] = 0.5
            T[u, plus] = 0.5
            T[v, minus] = -0.5
            T[v, plus] = 0.5
    matrix = T.T @ node @ T
    matrix = 0.5 * (matrix + matrix.T)

    labels = tuple(
        (x, sign, m) for x in ARRAYS for sign in SIGNS for m in range(L)
    )
    return CapacitanceNetwork(matrix=matrix, labels=labels, boundary=r.boundary)


def ground_to_coupling_ratio(d: BusDesign, bus: str) -> float:
    """Fabrication feasibility ratio C_G / C_c of one bus.

    Equals (1-xi)^2 (1 + kappa/kappa_max) / (2 xi) with the signed kappa of
    the chosen bus, which is exactly the ratio of the synthesized values.
    """
    if d.xi <= 0.0:
        raise ValueError("ratio diverges at xi = 0")
    kap, _ = d.bus(bus)
    km = kappa_max(d.xi)
    if abs(kap) > km:
        raise ValueError(f"kappa_{bus} = {kap} exceeds the bound {km}")
    return (1.0 - d.xi) ** 2 * (1.0 + kap / km) / (2.0 * d.xi)

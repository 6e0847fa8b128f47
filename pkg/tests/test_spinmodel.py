from dataclasses import replace
from math import comb

import numpy as np
import pytest

import qbus
from qbus.capalgebra import invert_spd
from qbus.params import angular_to_mhz, ghz_to_angular
from qbus.spinmodel import (
    SpinModel,
    hamiltonian_from_circuit,
    hamiltonian_from_design,
    sector_basis,
    sector_matrix,
)
from qbus.synthesis import assemble_capacitance_matrix, synthesize_capacitances

from conftest import fig3_design


def test_sector_basis_counts():
    assert len(sector_basis(21, 1)) == 21
    assert len(sector_basis(21, 2)) == 210
    assert len(sector_basis(7, 0)) == 1
    assert len(sector_basis(33, 2)) == comb(33, 2)


def test_sector_basis_lookup_roundtrip():
    basis = sector_basis(9, 2)
    for i, state in enumerate(basis.states):
        assert basis.index[state] == i


def test_sector_matrix_single_excitation_form(design_fig3):
    model = hamiltonian_from_design(design_fig3)
    basis = sector_basis(model.n_sites, 1)
    H = sector_matrix(model, basis)
    assert np.allclose(H, np.diag(model.omega) + model.coupling, atol=1e-15)
    assert np.array_equal(H, H.T)


def test_sector_matrix_vacuum(design_fig3):
    model = hamiltonian_from_design(design_fig3)
    H = sector_matrix(model, sector_basis(model.n_sites, 0))
    assert H.shape == (1, 1)
    assert H[0, 0] == 0.0


def test_sector_matrix_two_excitations_diagonal():
    omega = np.array([1.0, 2.0, 4.0])
    coupling = np.zeros((3, 3))
    model = SpinModel(omega=omega, coupling=coupling, site_labels=(("q", 0), ("q", 1), ("q", 2)), boundary="open")
    H = sector_matrix(model, sector_basis(3, 2))
    assert np.allclose(np.diag(H), [3.0, 5.0, 6.0])  # (0,1), (0,2), (1,2)
    assert np.allclose(H - np.diag(np.diag(H)), 0.0)


def test_sector_matrix_hop_placement():
    omega = np.zeros(3)
    coupling = np.zeros((3, 3))
    coupling[0, 1] = coupling[1, 0] = 0.5
    model = SpinModel(omega=omega, coupling=coupling, site_labels=(("q", 0), ("q", 1), ("q", 2)), boundary="open")
    basis = sector_basis(3, 2)
    H = sector_matrix(model, basis)
    i, j = basis.index[(0, 2)], basis.index[(1, 2)]
    assert H[i, j] == 0.5  # excitation hops 0 -> 1 while 2 stays put
    assert H[basis.index[(0, 1)], basis.index[(0, 2)]] == 0.0  # would need a 1->2 hop


def test_design_couplings_match_quoted_values(design_fig3):
    model = hamiltonian_from_design(design_fig3)
    L = design_fig3.n_qubits
    # nearest-neighbor coupling within the lower bus
    j_aa = angular_to_mhz(model.coupling[L, L + 1])
    assert j_aa == pytest.approx(40.909, abs=0.05)
    # on-site data-bus coupling to the lower bus
    j_qa = angular_to_mhz(model.coupling[0, L])
    assert j_qa == pytest.approx(18.166, abs=0.05)


def test_design_has_no_direct_data_coupling(design_fig3):
    model = hamiltonian_from_design(design_fig3)
    L = design_fig3.n_qubits
    assert np.all(model.coupling[:L, :L] == 0.0)


def test_eps_zero_decouples_arrays():
    model = hamiltonian_from_design(fig3_design(eps=0.0))
    L = 11
    assert np.all(model.coupling[:L, L:] == 0.0)


def test_translation_invariance(design_fig3):
    model = hamiltonian_from_design(design_fig3)
    L = design_fig3.n_qubits
    for off in (L, 2 * L):
        blk = model.coupling[off : off + L, off : off + L]
        for shift in range(1, L):
            rolled = np.roll(np.roll(blk, shift, axis=0), shift, axis=1)
            assert np.max(np.abs(rolled - blk)) < 1e-15


def test_per_site_override_scales_couplings(design_fig3):
    L = design_fig3.n_qubits
    w = np.full(L, design_fig3.omega_q_idle)
    w[3] = ghz_to_angular(4.5)
    model = hamiltonian_from_design(design_fig3, omega_q_per_site=w)
    base = hamiltonian_from_design(design_fig3)
    assert model.omega[3] == w[3]
    ratio = model.coupling[3, L] / base.coupling[3, L]
    assert ratio == pytest.approx(np.sqrt(4.5 / 4.0), rel=1e-12)


def test_circuit_path_agrees_with_design_path(design_fig3):
    """The two construction routes agree on the dominant couplings; the ranged
    entries inherit the O(eps) profile distortion of the printed design rules
    (the same distortion that makes the direct-coupling residual cubic)."""
    L = design_fig3.n_qubits
    deviations = {}
    for eps in (0.005, 0.01, 0.02):
        d = replace(design_fig3, eps=eps)
        r = synthesize_capacitances(d)
        circuit = hamiltonian_from_circuit(invert_spd(assemble_capacitance_matrix(r)), r.e_j)
        design = hamiltonian_from_design(d)
        mask = design.coupling != 0.0
        rel = np.abs(circuit.coupling - design.coupling)[mask] / np.abs(design.coupling[mask])
        deviations[eps] = rel.max()
        # on-site data-bus couplings: the dominant interaction terms
        for m in range(L):
            for off in (L, 2 * L):
                a, b = circuit.coupling[m, off + m], design.coupling[m, off + m]
                assert abs(a - b) / abs(b) < 25.0 * eps**2
        # short-range couplings stay within a few percent at eps = 0.01
        if eps == 0.01:
            for i, j in ((L, L + 1), (L, L + 2), (2 * L, 2 * L + 1), (0, L + 1), (0, 2 * L + 1)):
                assert abs(circuit.coupling[i, j] - design.coupling[i, j]) / abs(design.coupling[i, j]) < 0.05
        # residual direct data-data coupling is far below every physical coupling
        q_block = np.abs(circuit.coupling[:L, :L])
        assert q_block.max() < 1e-3 * np.abs(design.coupling[0, L])
    # the distortion shrinks with eps
    assert deviations[0.005] < deviations[0.01] < deviations[0.02]


def test_circuit_frequencies_and_negative_ej(design_fig3):
    r = synthesize_capacitances(design_fig3)
    cinv = invert_spd(assemble_capacitance_matrix(r))
    bad = dict(r.e_j)
    bad["q"] = -np.abs(r.e_j["q"])
    with pytest.raises(ValueError):
        hamiltonian_from_circuit(cinv, bad)


def test_isolated_bus_band(design_fig3):
    """Dense single-excitation eigenvalues of one bus reproduce the analytic
    dispersion sampled at the ring momenta."""
    L = 31
    d = fig3_design(n_qubits=L, eps=0.0)
    model = hamiltonian_from_design(d)
    blk = slice(L, 2 * L)
    h_bus = np.diag(model.omega[blk]) + model.coupling[blk, blk]
    evals = np.sort(np.linalg.eigh(h_bus)[0])
    ks = 2.0 * np.pi * np.arange(L) / L
    predicted = np.sort(np.asarray(qbus.aux_band(d, "a", ks)))
    assert np.max(np.abs(evals - predicted) / np.abs(predicted)) < 1e-10

from dataclasses import replace
from math import pi

import numpy as np
import pytest

import qbus
from qbus.effective import (
    BandEdgeError,
    HybridizationError,
    analytic_diagonal,
    analytic_effective_hamiltonian,
    analytic_jeff,
    aux_band,
    band_edges,
    effective_params,
    numeric_effective_hamiltonian,
    sweep_jeff,
)
from qbus.params import angular_to_mhz, ghz_to_angular
from qbus.spinmodel import hamiltonian_from_design

from conftest import fig3_design

GHZ = ghz_to_angular


def test_band_at_special_momentum(design_fig3):
    # cos k = xi zeroes the dispersive correction exactly
    k = np.arccos(design_fig3.xi)
    assert aux_band(design_fig3, "a", k) == pytest.approx(design_fig3.omega_a, rel=1e-14)
    assert aux_band(design_fig3, "b", k) == pytest.approx(design_fig3.omega_b, rel=1e-14)


def test_band_edges_fig3(design_fig3):
    # exact rational values: 420/143, 240/77, 100/21, 200/39 GHz
    lo_a, hi_a = band_edges(design_fig3, "a")
    lo_b, hi_b = band_edges(design_fig3, "b")
    assert lo_a == pytest.approx(GHZ(420.0 / 143.0), rel=1e-14)
    assert hi_a == pytest.approx(GHZ(240.0 / 77.0), rel=1e-14)
    assert lo_b == pytest.approx(GHZ(100.0 / 21.0), rel=1e-14)
    assert hi_b == pytest.approx(GHZ(200.0 / 39.0), rel=1e-14)
    # four-decimal GHz values
    for got, expect in ((lo_a, 2.9371), (hi_a, 3.1169), (lo_b, 4.7619), (hi_b, 5.1282)):
        assert abs(got / (2 * pi) - expect) < 5e-5


def test_effective_params_reference_point(design_fig3):
    p = effective_params(design_fig3, GHZ(4.0))
    assert p.a.zeta == pytest.approx(0.341556, abs=1e-4)
    assert not p.hybridized
    # construction identity Delta_k = omega_q - E_k
    assert p.a.delta_0 == pytest.approx(GHZ(4.0) - aux_band(design_fig3, "a", 0.0), rel=1e-14)
    assert p.b.delta_pi == pytest.approx(GHZ(4.0) - aux_band(design_fig3, "b", pi), rel=1e-14)


def test_zeta_approaches_design_dropoff_far_detuned(design_fig3):
    p = effective_params(design_fig3, GHZ(100.0))
    assert abs(p.a.zeta - 0.3) < 1e-3
    assert abs(p.b.zeta - 0.3) < 1e-3


def test_zeta_band_edge_enhancement(design_fig3):
    lo_b, hi_b = band_edges(design_fig3, "b")
    # approaching the lower edge from below drives zeta_b toward +1
    zetas_lo = [effective_params(design_fig3, lo_b - GHZ(f * 1e-3)).b.zeta for f in (2.0, 1.0, 0.5, 0.25)]
    assert all(b > a for a, b in zip(zetas_lo, zetas_lo[1:]))
    assert zetas_lo[-1] > 0.95
    # approaching the upper edge from above drives zeta_b toward -1
    zetas_hi = [effective_params(design_fig3, hi_b + GHZ(f * 1e-3)).b.zeta for f in (2.0, 0.05)]
    assert zetas_hi[-1] < -0.95


def test_band_edge_error(design_fig3):
    lo_b, _ = band_edges(design_fig3, "b")
    with pytest.raises(BandEdgeError):
        effective_params(design_fig3, lo_b)


def test_hybridized_flag_inside_band(design_fig3):
    p = effective_params(design_fig3, GHZ(4.9))
    assert p.b.hybridized and not p.a.hybridized
    assert np.isnan(p.b.j)


def test_jeff_cancellation_far_detuned(design_fig3):
    # the two bus contributions cancel as omega_q grows
    ratios = []
    for f in (100.0, 1000.0):
        p = effective_params(design_fig3, GHZ(f))
        j1 = analytic_jeff(design_fig3, GHZ(f), 1)
        ratios.append(abs(j1) / abs(p.a.j * p.a.zeta))
    assert ratios[0] < 5e-2
    assert ratios[1] < ratios[0] / 5.0


def test_jeff_scale_near_band(design_fig3):
    # §IV scale claim: couplings reach the MHz decade approaching the upper bus
    assert 0.5 <= abs(analytic_jeff(design_fig3, GHZ(4.7), 1)) / (2 * pi) * 1e3 <= 10.0
    peak = max(
        abs(analytic_jeff(design_fig3, GHZ(f), 1)) / (2 * pi) * 1e3 for f in (4.70, 4.72, 4.74, 4.75)
    )
    assert 1.0 <= peak <= 10.0


def test_jeff_sign_dominated_by_nearer_bus(design_fig3):
    p = effective_params(design_fig3, GHZ(4.74))
    for dist in range(1, 5):
        jd = analytic_jeff(design_fig3, GHZ(4.74), dist)
        assert abs(p.b.j * p.b.zeta**dist) > abs(p.a.j * p.a.zeta**dist)
        assert np.sign(jd) == np.sign(-p.b.j * p.b.zeta**dist)


def test_jeff_distance_validation(design_fig3):
    with pytest.raises(ValueError):
        analytic_jeff(design_fig3, GHZ(4.0), 0)


def test_numeric_extraction_decoupled():
    d = fig3_design(eps=0.0)
    model = hamiltonian_from_design(d)
    eff = numeric_effective_hamiltonian(model, np.arange(11))
    assert np.allclose(eff.matrix, np.diag(np.full(11, d.omega_q_idle)), atol=1e-12)
    assert np.allclose(eff.j_by_distance[1:], 0.0, atol=1e-12)


def test_numeric_extraction_properties(design_fig3):
    model = hamiltonian_from_design(design_fig3)
    eff = numeric_effective_hamiltonian(model, np.arange(11))
    assert eff.provenance == "numeric"
    assert np.array_equal(eff.matrix, eff.matrix.T)
    # spectral sum rule: projection preserves the trace exactly
    assert np.mean(eff.eigenvalues) == pytest.approx(np.mean(np.diag(eff.matrix)), rel=1e-13)
    # circulant to high accuracy for the uniform periodic system
    rolled = np.roll(np.roll(eff.matrix, 1, axis=0), 1, axis=1)
    scale = np.max(np.abs(eff.matrix))
    assert np.max(np.abs(rolled - eff.matrix)) < 1e-8 * scale
    assert np.all(eff.mode_weights > 0.5)


def test_numeric_extraction_hybridization_error():
    # a data site exactly resonant with a strongly coupled bus site splits
    # 50/50; neither mixed eigenvector clears the weight threshold
    from qbus.spinmodel import SpinModel

    omega = np.array([GHZ(4.0), GHZ(4.0)])
    coupling = np.array([[0.0, GHZ(0.1)], [GHZ(0.1), 0.0]])
    model = SpinModel(
        omega=omega, coupling=coupling, site_labels=(("q", 0), ("a", 0)), boundary="open"
    )
    with pytest.raises(HybridizationError):
        numeric_effective_hamiltonian(model, np.array([0]))


def test_numeric_extraction_marginal_on_resonance(design_fig3):
    # exactly on a discrete bus level the mixing saturates at ~50/50 and the
    # selection is marginal but still defined
    on_level = float(aux_band(design_fig3, "b", 2 * pi / 11))
    model = hamiltonian_from_design(design_fig3, omega_q_per_site=np.full(11, on_level))
    eff = numeric_effective_hamiltonian(model, np.arange(11))
    assert eff.mode_weights.min() == pytest.approx(0.5, abs=0.05)


def test_numeric_matches_analytic_detuned(design_fig3):
    """Where the operating constraint holds (coupling below a tenth of both
    band detunings), the two routes to J^eff agree within 5%."""
    for f in (3.6, 3.8, 4.0, 4.2, 4.4):
        omega_q = GHZ(f)
        p = effective_params(design_fig3, omega_q)
        detuned = all(
            design_fig3.eps * np.sqrt(omega_q * w) < min(abs(b.delta_0), abs(b.delta_pi)) / 10.0
            for w, b in ((design_fig3.omega_a, p.a), (design_fig3.omega_b, p.b))
        )
        if not detuned:
            continue
        model = hamiltonian_from_design(design_fig3, omega_q_per_site=np.full(11, omega_q))
        eff = numeric_effective_hamiltonian(model, np.arange(11))
        j1_analytic = analytic_jeff(design_fig3, omega_q, 1)
        if abs(angular_to_mhz(j1_analytic)) > 0.01:
            assert abs(eff.j_by_distance[1] - j1_analytic) / abs(j1_analytic) < 0.05


def test_numeric_lamb_shift(design_fig3):
    omega_q = GHZ(4.0)
    model = hamiltonian_from_design(design_fig3, omega_q_per_site=np.full(11, omega_q))
    eff = numeric_effective_hamiltonian(model, np.arange(11))
    numeric_shift = np.mean(np.diag(eff.matrix)) - omega_q
    analytic_shift = analytic_diagonal(effective_params(design_fig3, omega_q)) - omega_q
    assert abs(numeric_shift - analytic_shift) / abs(analytic_shift) < 0.10


def test_analytic_effective_hamiltonian_consistency(design_fig3):
    omega_q = GHZ(3.8)
    ana = analytic_effective_hamiltonian(design_fig3, omega_q)
    model = hamiltonian_from_design(design_fig3, omega_q_per_site=np.full(11, omega_q))
    num = numeric_effective_hamiltonian(model, np.arange(11))
    assert ana.provenance == "analytic"
    assert abs(ana.j_by_distance[1] - num.j_by_distance[1]) / abs(num.j_by_distance[1]) < 0.05


def test_sweep_single_point(design_fig3):
    rows = sweep_jeff(design_fig3, [GHZ(4.0)], max_distance=4)
    assert len(rows) == 4
    for row in rows:
        assert not row.hybridized
        assert np.isfinite(row.jeff_analytic)
        assert np.isfinite(row.jeff_numeric)
        assert row.zeta_a == pytest.approx(0.341556, abs=1e-4)


def test_sweep_shape(design_fig3):
    grid = GHZ(np.linspace(3.2, 4.8, 33))
    rows = sweep_jeff(design_fig3, grid, max_distance=4)
    by_freq = {}
    for r in rows:
        by_freq.setdefault(round(r.omega_q / GHZ(1.0), 6), {})[r.distance] = r
    # coupling magnitude grows toward both band edges (largest clear points)
    j1 = {f: abs(d[1].jeff_analytic) for f, d in by_freq.items() if not d[1].hybridized}
    freqs = sorted(j1)
    assert j1[freqs[0]] > j1[3.8]
    assert j1[freqs[-1]] > j1[4.2]
    # a sign change exists between the bands
    signed = [by_freq[f][1].jeff_analytic for f in freqs]
    assert any(a * b < 0 for a, b in zip(signed, signed[1:]))
    # in-band points are flagged
    assert by_freq[4.8][1].hybridized
    # geometric decay with distance in the detuned region
    row36 = by_freq[3.6]
    mags = [abs(row36[dd].jeff_analytic) for dd in range(1, 5)]
    assert all(a > b for a, b in zip(mags, mags[1:]))


def test_band_edge_enhancement_from_numeric_ratios(design_fig3):
    """The drop-off rate fitted from numeric J2/J1 ratios grows toward 1 as
    the data qubits approach the upper bus band."""
    fitted = []
    for f in (4.55, 4.60, 4.65, 4.70):
        model = hamiltonian_from_design(design_fig3, omega_q_per_site=np.full(11, GHZ(f)))
        try:
            eff = numeric_effective_hamiltonian(model, np.arange(11))
        except HybridizationError:
            continue
        fitted.append(abs(eff.j_by_distance[2] / eff.j_by_distance[1]))
    assert len(fitted) >= 3
    assert all(b > a for a, b in zip(fitted, fitted[1:]))
    assert fitted[-1] < 1.0

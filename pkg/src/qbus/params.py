"""Design parameters, unit conventions, physical constants, and validation.

Unit system: hbar = 1. All energies and angular frequencies are stored in
rad/ns; user-facing I/O reports omega/2pi in GHz (couplings in MHz).
Capacitances are in femtofarads, Josephson energies as E_J/hbar in rad/ns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

TWO_PI = 2.0 * math.pi

# CODATA 2018 exact values
ELEMENTARY_CHARGE = 1.602176634e-19  # C
PLANCK_H = 6.62607015e-34  # J s
FLUX_QUANTUM = PLANCK_H / (2.0 * ELEMENTARY_CHARGE)  # Wb

# Charging energy E_C/h of a 1 fF capacitor, in GHz: e^2 / (2 C h).
CHARGING_ENERGY_1FF_GHZ = ELEMENTARY_CHARGE**2 / (2.0 * 1e-15 * PLANCK_H) / 1e9

# e^2/hbar for a 1 fF capacitor, in rad/ns (= 2 E_C/hbar). Multiplying an
# inverse capacitance in 1/fF by this constant gives e^2 C^-1 in rad/ns.
E2_OVER_HBAR_PER_FF = 2.0 * TWO_PI * CHARGING_ENERGY_1FF_GHZ

PERIODIC = "periodic"
OPEN = "open"


def ghz_to_angular(f_ghz: float) -> float:
    """Convert a frequency reported as omega/2pi in GHz to rad/ns."""
    return TWO_PI * f_ghz


def angular_to_ghz(omega: float) -> float:
    """Inverse of ghz_to_angular."""
    return omega / TWO_PI


def angular_to_mhz(omega: float) -> float:
    return omega / TWO_PI * 1e3


def kappa_max(xi: float) -> float:
    """Largest coupling magnitude compatible with drop-off rate xi: (1-xi)/(1+xi)."""
    if not 0.0 <= xi < 1.0:
        raise ValueError(f"xi must be in [0, 1), got {xi}")
    return (1.0 - xi) / (1.0 + xi)


@dataclass(frozen=True)
class PhysicalConstants:
    e_charge: float = ELEMENTARY_CHARGE
    flux_quantum: float = FLUX_QUANTUM
    charging_energy_1ff_ghz: float = CHARGING_ENERGY_1FF_GHZ


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of design validation; violations are (name, actual, bound) tuples."""

    violations: tuple = ()

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass(frozen=True)
class BusDesign:
    """Dimensionless and frequency design parameters of the two-bus layout.

    xi: geometric drop-off rate of the engineered inverse capacitance.
    kappa_a / kappa_b: coupling strengths of the two auxiliary arrays; the
        convention is kappa_b <= 0 <= kappa_a.
    eps: overall data-bus coupling scale.
    omega_q_idle, omega_a, omega_b: angular frequencies in rad/ns.
    n_qubits: number of data qubits (each bus has the same length).
    boundary: "periodic" or "open".
    """

    xi: float
    kappa_a: float
    kappa_b: float
    eps: float
    omega_q_idle: float
    omega_a: float
    omega_b: float
    n_qubits: int
    boundary: str = PERIODIC

    def bus(self, which: str) -> tuple[float, float]:
        """(kappa, omega) of bus 'a' or 'b'."""
        if which == "a":
            return self.kappa_a, self.omega_a
        if which == "b":
            return self.kappa_b, self.omega_b
        raise ValueError(f"unknown bus {which!r}")


def validate_design(d: BusDesign) -> ValidationReport:
    """Check every BusDesign invariant; all violations are reported, none raise."""
    v = []
    if not 0.0 <= d.xi < 1.0:
        v.append(("xi range", d.xi, "[0, 1)"))
        return ValidationReport(tuple(v))  # kappa bound undefined outside
    km = kappa_max(d.xi)
    if abs(d.kappa_a) > km:
        v.append(("kappa bound (a)", d.kappa_a, km))
    if abs(d.kappa_b) > km:
        v.append(("kappa bound (b)", d.kappa_b, km))
    if d.kappa_a < 0.0:
        v.append(("kappa sign (a)", d.kappa_a, ">= 0"))
    if d.kappa_b > 0.0:
        v.append(("kappa sign (b)", d.kappa_b, "<= 0"))
    if d.eps < 0.0:
        v.append(("eps sign", d.eps, ">= 0"))
    if d.n_qubits < 1:
        v.append(("n_qubits", d.n_qubits, ">= 1"))
    if d.boundary not in (PERIODIC, OPEN):
        v.append(("boundary", d.boundary, f"{PERIODIC}|{OPEN}"))
    freqs = (d.omega_a, d.omega_q_idle, d.omega_b)
    if all(f != 0.0 for f in freqs):
        if not d.omega_a < d.omega_q_idle < d.omega_b:
            v.append(("frequency ordering", freqs, "omega_a < omega_q < omega_b"))
        if min(freqs) < 0.0:
            v.append(("frequency sign", min(freqs), ">= 0"))
    return ValidationReport(tuple(v))

"""Frequency-comb realization of the amplifier: parameter translation.

A single comb source supplies both kitten arms.  Weak phase modulation by an
EOM acts as a tap beam splitter between the carrier and the +/-Omega
sidebands with transmittance T^2 = 1 - beta_mod^2 / 2, and the two
double-sideband quadrature components

    cos:  (a_{+O} + a_{-O}) / sqrt(2)
    sin:  (a_{+O} - a_{-O}) / (sqrt(2) i)

(selected by modulation phases 0 and -pi/2) carry the two independent
squeezed modes.  The final frequency splitter plus a shifted local
oscillator realizes the output beam splitter; here it is reduced to a single
effective reflectivity.  Translation only: the resulting SchemeConfig runs
through the ordinary pipelines unchanged.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

from .fock import ConfigurationError, TruncationPolicy
from .optics import BeamSplitter
from .scheme import SchemeConfig

# Above this modulation depth the single-sideband tap picture degrades.
WEAK_MODULATION = 0.1

_SQRT2 = math.sqrt(2.0)
_PHASE_TOL = 1e-12


class ModulationDepthWarning(UserWarning):
    """Modulation depth outside the weak-modulation regime."""


class SidebandMode(Enum):
    """Named combinations of the +/-Omega mode operators."""

    PLUS = "plus"      # a_{+Omega}
    MINUS = "minus"    # a_{-Omega}
    COS = "cos"        # (a_+ + a_-)/sqrt(2)
    SIN = "sin"        # (a_+ - a_-)/(sqrt(2) i)


@dataclass(frozen=True)
class EomSpec:
    """Phase modulator: depth beta_mod and modulation phase theta."""

    beta_mod: float
    theta: float

    def __post_init__(self):
        if not 0.0 <= self.beta_mod <= 1.0:
            raise ConfigurationError(
                f"modulation depth must be in [0, 1], got {self.beta_mod}"
            )
        if self.beta_mod > WEAK_MODULATION:
            warnings.warn(
                f"modulation depth {self.beta_mod} exceeds the weak-modulation"
                f" regime (<= {WEAK_MODULATION}); the tap equivalence is first order",
                ModulationDepthWarning,
                stacklevel=3,
            )


@dataclass(frozen=True)
class CombConfig:
    """Comb-based realization: sideband offset, two EOMs, output splitter."""

    omega: float
    eom1: EomSpec
    eom2: EomSpec
    fbs3_r2: float

    def __post_init__(self):
        if self.omega <= 0:
            raise ConfigurationError(f"sideband offset must be > 0, got {self.omega}")
        if not 0.0 <= self.fbs3_r2 <= 1.0:
            raise ConfigurationError(f"fbs3_r2 must be in [0, 1], got {self.fbs3_r2}")


def eom_to_bs(eom: EomSpec) -> BeamSplitter:
    """Tap equivalent of a phase modulator: R^2 = beta_mod^2 / 2."""
    return BeamSplitter(r2=eom.beta_mod**2 / 2.0)


def comb_to_scheme(comb: CombConfig, xi: float, k1: int = 1, k2: int = 1,
                   k: int = 1,
                   policy: TruncationPolicy | None = None) -> SchemeConfig:
    """SchemeConfig equivalent of the comb configuration.

    Requires the quadrature-selecting phase pair theta1 = 0, theta2 = -pi/2;
    photon addition is not available in this realization (l1 = l2 = 0).
    """
    if abs(comb.eom1.theta) > _PHASE_TOL or abs(comb.eom2.theta + math.pi / 2) > _PHASE_TOL:
        raise ConfigurationError(
            "unsupported phase pair: quadrature selection needs theta1 = 0 and"
            f" theta2 = -pi/2, got ({comb.eom1.theta}, {comb.eom2.theta})"
        )
    pol = policy if policy is not None else TruncationPolicy()
    return SchemeConfig(
        xi1=xi, xi2=xi,
        r2_1=eom_to_bs(comb.eom1).r2,
        r2_2=eom_to_bs(comb.eom2).r2,
        r2_3=comb.fbs3_r2,
        l1=0, k1=k1, l2=0, k2=k2, k=k,
        policy=pol,
    )


def pm_to_quadrature(c_plus: complex, c_minus: complex) -> tuple[complex, complex]:
    """(+Omega, -Omega) amplitudes -> (cos, sin) quadrature amplitudes."""
    c_cos = (c_plus + c_minus) / _SQRT2
    c_sin = (c_plus - c_minus) / (_SQRT2 * 1j)
    return c_cos, c_sin


def quadrature_to_pm(c_cos: complex, c_sin: complex) -> tuple[complex, complex]:
    """(cos, sin) quadrature amplitudes -> (+Omega, -Omega) amplitudes."""
    c_plus = (c_cos + 1j * c_sin) / _SQRT2
    c_minus = (c_cos - 1j * c_sin) / _SQRT2
    return c_plus, c_minus


def basis_roundtrip(c_plus: complex, c_minus: complex
                    ) -> tuple[tuple[complex, complex], tuple[complex, complex]]:
    """Apply the quadrature decomposition and its inverse.

    Returns ((cos, sin), (plus, minus)); the second pair reproduces the
    input exactly (the transformation is unitary).
    """
    quad = pm_to_quadrature(c_plus, c_minus)
    return quad, quadrature_to_pm(*quad)

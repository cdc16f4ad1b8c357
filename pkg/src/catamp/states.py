"""Reference single-mode states: Fock, coherent, squeezed vacuum, cat states.

Conventions used throughout the package:

* Coherent amplitudes are real and non-negative, so cat-state lobes lie on
  the x (position) quadrature axis.
* Squeezing level in dB is ``10*log10(exp(-2*xi))``; e.g. xi = 0.346 is
  -3.0 dB and xi = 0.68 is -5.91 dB.  Negative dB means noise reduction.
* The squeeze generator is ``(xi/2)(adag^2 - a^2)`` with xi >= 0, which
  squeezes p and stretches x; the closed-form squeezed vacuum produced by it
  has positive even-photon amplitudes.
* A cat "squeezed by d dB" (``squeezing_db = -d``) is compressed along the
  lobe axis x, i.e. built with the generator at ``-xi_cat``.  This is the
  direction under which the amplified states reproduce their squeezed-cat
  equivalents; the opposite sign stretches the lobes apart and does not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from .fock import (
    DEFAULT_TAIL_TOL,
    ConfigurationError,
    PureState,
    TruncationPolicy,
)

_LOG10 = math.log(10.0)


def xi_to_db(xi: float) -> float:
    """Squeezing level in dB for squeezing parameter xi."""
    return 10.0 * (-2.0 * xi) / _LOG10


def db_to_xi(db: float) -> float:
    """Squeezing parameter for a (signed) squeezing level in dB."""
    return -db * _LOG10 / 20.0


@dataclass(frozen=True)
class SqueezeSpec:
    """Squeezing parameter with its derived dB level."""

    xi: float

    def __post_init__(self):
        if self.xi < 0:
            raise ConfigurationError(f"squeezing parameter must be >= 0, got {self.xi}")

    @property
    def db(self) -> float:
        return xi_to_db(self.xi)

    @classmethod
    def from_db(cls, db: float) -> "SqueezeSpec":
        if db > 0:
            raise ConfigurationError(f"squeezing level must be <= 0 dB, got {db}")
        return cls(xi=db_to_xi(db))


@dataclass(frozen=True)
class CatSpec:
    """Target cat state: amplitude, photon-number parity, optional squeezing.

    ``squeezing_db <= 0``; the magnitude is the lobe-axis compression level
    (see the module docstring for the sign convention).
    """

    beta: float
    parity: str
    squeezing_db: float = 0.0

    def __post_init__(self):
        if self.beta < 0:
            raise ConfigurationError(f"beta must be >= 0, got {self.beta}")
        if self.parity not in ("even", "odd"):
            raise ConfigurationError(f"parity must be 'even' or 'odd', got {self.parity!r}")
        if self.squeezing_db > 0:
            raise ConfigurationError(
                f"squeezing_db is signed and must be <= 0, got {self.squeezing_db}"
            )


def _policy(policy: TruncationPolicy | None) -> TruncationPolicy:
    return policy if policy is not None else TruncationPolicy()


@lru_cache(maxsize=None)
def _log_fact(n_max: int) -> np.ndarray:
    return gammaln(np.arange(n_max + 1) + 1.0)


def fock_state(n: int, policy: TruncationPolicy | None = None) -> PureState:
    """Fock state |n>."""
    pol = _policy(policy)
    if not 0 <= n <= pol.n_max:
        raise ConfigurationError(f"photon number {n} outside 0..{pol.n_max}")
    amps = np.zeros(pol.n_max + 1)
    amps[n] = 1.0
    return PureState(amps, pol.n_max, tail_tol=pol.tail_tol)


def coherent_amplitudes(beta: float, n_max: int) -> np.ndarray:
    """exp(-beta^2/2) beta^n / sqrt(n!) for real beta >= 0."""
    if beta == 0.0:
        amps = np.zeros(n_max + 1)
        amps[0] = 1.0
        return amps
    n = np.arange(n_max + 1)
    return np.exp(-0.5 * beta * beta + n * math.log(beta) - 0.5 * _log_fact(n_max))


def coherent(beta: float, policy: TruncationPolicy | None = None) -> PureState:
    """Coherent state |beta> with real beta >= 0."""
    pol = _policy(policy)
    if beta < 0:
        raise ConfigurationError(f"beta must be >= 0, got {beta}")
    if beta * beta > pol.n_max / 4.0:
        raise ConfigurationError(
            f"coherent amplitude {beta} too large for n_max={pol.n_max}"
            f" (requires beta^2 <= n_max/4)"
        )
    return PureState(coherent_amplitudes(beta, pol.n_max), pol.n_max, tail_tol=pol.tail_tol)


def squeezed_vacuum_amplitudes(xi: float, n_max: int) -> np.ndarray:
    """Even-photon amplitudes sqrt((2n)!) tanh(xi)^n / (2^n n! sqrt(cosh xi))."""
    amps = np.zeros(n_max + 1)
    if xi == 0.0:
        amps[0] = 1.0
        return amps
    lf = _log_fact(n_max)
    log_tanh = math.log(math.tanh(xi))
    for n in range(n_max // 2 + 1):
        amps[2 * n] = math.exp(
            0.5 * lf[2 * n] - lf[n] - n * math.log(2.0)
            + n * log_tanh - 0.5 * math.log(math.cosh(xi))
        )
    return amps


def squeezed_vacuum(xi: float, policy: TruncationPolicy | None = None) -> PureState:
    """Squeezed vacuum; odd photon numbers carry exactly zero amplitude."""
    pol = _policy(policy)
    if xi < 0:
        raise ConfigurationError(f"squeezing parameter must be >= 0, got {xi}")
    amps = squeezed_vacuum_amplitudes(xi, pol.n_max)
    deficit = 1.0 - float(np.sum(amps**2))
    if deficit > 1e3 * pol.tail_tol:
        raise ConfigurationError(
            f"squeezed vacuum at xi={xi} loses mass {deficit:.3e} to truncation"
            f" at n_max={pol.n_max}"
        )
    return PureState(amps, pol.n_max, tail_tol=pol.tail_tol)


def ideal_cat(spec: CatSpec, policy: TruncationPolicy | None = None) -> PureState:
    """N_pm (|beta> pm |-beta>) with the closed-form normalization constant."""
    pol = _policy(policy)
    if spec.squeezing_db != 0.0:
        raise ConfigurationError("ideal_cat requires squeezing_db = 0; use squeezed_cat")
    sign = 1.0 if spec.parity == "even" else -1.0
    if spec.beta == 0.0:
        if spec.parity == "odd":
            raise ConfigurationError(
                "odd cat at beta=0 is undefined (normalization diverges)"
            )
        return fock_state(0, pol)
    norm = 1.0 / math.sqrt(2.0 * (1.0 + sign * math.exp(-2.0 * spec.beta**2)))
    plus = coherent_amplitudes(spec.beta, pol.n_max)
    minus = plus * (-1.0) ** np.arange(pol.n_max + 1)
    return PureState(norm * (plus + sign * minus), pol.n_max, tail_tol=pol.tail_tol)


# Extra headroom above n_max when exponentiating the squeeze generator, so
# boundary corruption stays away from the retained levels.
_SQUEEZE_PAD = 24


@lru_cache(maxsize=512)
def squeeze_operator(xi: float, n_max: int, pad: int = _SQUEEZE_PAD) -> np.ndarray:
    """Fock-basis squeeze matrix expm((xi/2)(adag^2 - a^2)), truncated to n_max.

    The exponential is computed on a padded space and cropped.  Positive xi
    stretches x; negative xi compresses it.  Columns with |n| <= n_max - pad
    are accurate to machine precision for moderate |xi|.
    """
    dim = n_max + 1 + pad
    a = np.diag(np.sqrt(np.arange(1.0, dim)), 1)
    gen = 0.5 * xi * (a.T @ a.T - a @ a)
    full = expm(gen)
    out = full[: n_max + 1, : n_max + 1].copy()
    out.flags.writeable = False
    return out


def squeezed_cat(spec: CatSpec, policy: TruncationPolicy | None = None) -> PureState:
    """Ideal cat compressed along the lobe axis by |squeezing_db| dB."""
    pol = _policy(policy)
    if spec.squeezing_db == 0.0:
        return ideal_cat(spec, pol)
    base = ideal_cat(CatSpec(spec.beta, spec.parity), pol)
    xi_cat = db_to_xi(spec.squeezing_db)  # > 0 for squeezing_db < 0
    op = squeeze_operator(-xi_cat, pol.n_max)
    amps = op @ base.amps
    norm2 = float(np.sum(np.abs(amps) ** 2))
    deficit = 1.0 - norm2
    if deficit > pol.tail_tol:
        raise ConfigurationError(
            f"squeezing the cat loses norm {deficit:.3e} to truncation"
            f" (tolerance {pol.tail_tol:.1e})"
        )
    return PureState(amps / math.sqrt(norm2), pol.n_max, tail_tol=pol.tail_tol)

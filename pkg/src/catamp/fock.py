"""Truncated Fock-basis state containers and elementary algebra.

A single mode is truncated at photon number ``n_max`` (``n_max + 1``
amplitudes).  Unnormalized states are first class: a heralded state carries
its success probability in the squared norm (pure states) or the trace
(density matrices) until ``normalize()`` is called.  All containers are
immutable after construction and safe to share across workers.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

DEFAULT_N_MAX = 40
DEFAULT_TAIL_TOL = 1e-8

# Tolerated overshoot of a squared norm / trace above 1 (roundoff slack).
NORM_SLACK = 1e-9
# Herald outcomes below this probability are treated as impossible.
ZERO_HERALD_TOL = 1e-14
HERMITICITY_TOL = 1e-10
PSD_EIG_TOL = 1e-9
# Number of top Fock levels inspected by the tail-mass check.
TAIL_WINDOW = 4


class ConfigurationError(ValueError):
    """Inconsistent or out-of-range simulation parameters."""


class NumericError(ArithmeticError):
    """A numerical invariant (hermiticity, positivity, trace) was violated."""


class ZeroHeraldError(RuntimeError):
    """A conditional measurement outcome has (numerically) zero probability."""


class TruncationWarning(UserWarning):
    """Significant state mass sits near the Fock cutoff; results may be degraded."""


@dataclass(frozen=True)
class TruncationPolicy:
    """Photon-number cutoff and the tolerated mass near it.

    ``n_max`` is the largest retained photon number, not the dimension.
    """

    n_max: int = DEFAULT_N_MAX
    tail_tol: float = DEFAULT_TAIL_TOL

    def __post_init__(self):
        if self.n_max < 4:
            raise ConfigurationError(f"n_max must be >= 4, got {self.n_max}")
        if not 0.0 < self.tail_tol <= 1e-3:
            raise ConfigurationError(
                f"tail_tol must be in (0, 1e-3], got {self.tail_tol}"
            )

    def to_dict(self) -> dict:
        return {"n_max": self.n_max, "tail_tol": self.tail_tol}

    @classmethod
    def from_dict(cls, d: dict) -> "TruncationPolicy":
        return cls(n_max=int(d["n_max"]), tail_tol=float(d["tail_tol"]))


def _check_tail(weights: np.ndarray, tail_tol: float, what: str) -> None:
    """Warn when the top ``TAIL_WINDOW`` Fock levels carry mass >= tail_tol."""
    tail = float(np.sum(weights[-TAIL_WINDOW:]))
    if tail >= tail_tol:
        warnings.warn(
            f"{what}: mass {tail:.3e} within {TAIL_WINDOW} levels of the cutoff "
            f"(tolerance {tail_tol:.1e}); consider a larger n_max",
            TruncationWarning,
            stacklevel=3,
        )


class PureState:
    """Complex amplitudes over ``|0> .. |n_max>`` for a single mode."""

    __slots__ = ("amps", "n_max")

    def __init__(self, amps, n_max: int, tail_tol: float = DEFAULT_TAIL_TOL):
        amps = np.asarray(amps, dtype=complex)
        if amps.shape != (n_max + 1,):
            raise ConfigurationError(
                f"expected {n_max + 1} amplitudes, got shape {amps.shape}"
            )
        norm2 = float(np.sum(np.abs(amps) ** 2))
        if not ZERO_HERALD_TOL < norm2 <= 1.0 + NORM_SLACK:
            raise NumericError(f"squared norm {norm2!r} outside (0, 1]")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "n_max", n_max)
        _check_tail(np.abs(amps) ** 2, tail_tol, "pure state")

    def __setattr__(self, name, value):
        raise AttributeError("PureState is immutable")

    @property
    def norm2(self) -> float:
        """Squared norm; the herald probability of an unnormalized state."""
        return float(np.sum(np.abs(self.amps) ** 2))

    def normalize(self) -> "PureState":
        n2 = self.norm2
        if n2 < ZERO_HERALD_TOL:
            raise ZeroHeraldError("cannot normalize a zero-probability state")
        return PureState(self.amps / np.sqrt(n2), self.n_max)

    def inner(self, other: "PureState") -> complex:
        """<self|other>."""
        if other.n_max != self.n_max:
            raise ConfigurationError("mismatched truncation orders")
        return complex(np.vdot(self.amps, other.amps))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amps) ** 2

    def __repr__(self):
        return f"PureState(n_max={self.n_max}, norm2={self.norm2:.6g})"


class TwoModeState:
    """Complex amplitudes over the product basis ``|n_a> x |n_b>``."""

    __slots__ = ("amps", "n_max")

    def __init__(self, amps, n_max: int):
        amps = np.asarray(amps, dtype=complex)
        if amps.shape != (n_max + 1, n_max + 1):
            raise ConfigurationError(
                f"expected shape {(n_max + 1, n_max + 1)}, got {amps.shape}"
            )
        norm2 = float(np.sum(np.abs(amps) ** 2))
        if not ZERO_HERALD_TOL < norm2 <= 1.0 + NORM_SLACK:
            raise NumericError(f"squared norm {norm2!r} outside (0, 1]")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amps", amps)
        object.__setattr__(self, "n_max", n_max)

    def __setattr__(self, name, value):
        raise AttributeError("TwoModeState is immutable")

    @property
    def norm2(self) -> float:
        return float(np.sum(np.abs(self.amps) ** 2))

    def __repr__(self):
        return f"TwoModeState(n_max={self.n_max}, norm2={self.norm2:.6g})"


class DensityMatrix:
    """Hermitian PSD matrix on the truncated Fock space.

    ``normalized=False`` admits trace in (0, 1]: the trace of a heralded,
    unnormalized state is its success probability.  Zero trace is allowed so
    ensembles can hold impossible herald outcomes; ``normalize()`` rejects it.
    """

    __slots__ = ("mat", "n_max", "normalized")

    def __init__(self, mat, n_max: int, normalized: bool = False):
        mat = np.asarray(mat, dtype=complex)
        if mat.shape != (n_max + 1, n_max + 1):
            raise ConfigurationError(
                f"expected shape {(n_max + 1, n_max + 1)}, got {mat.shape}"
            )
        herm = float(np.abs(mat - mat.conj().T).max())
        if herm > HERMITICITY_TOL:
            raise NumericError(f"hermiticity violated by {herm:.3e}")
        tr = float(np.real(np.trace(mat)))
        if normalized:
            if abs(tr - 1.0) > 1e-10:
                raise NumericError(f"normalized flag set but trace = {tr!r}")
        else:
            if not -PSD_EIG_TOL <= tr <= 1.0 + NORM_SLACK:
                raise NumericError(f"trace {tr!r} outside [0, 1]")
        min_eig = float(np.linalg.eigvalsh(mat)[0])
        if min_eig < -PSD_EIG_TOL:
            raise NumericError(f"negative eigenvalue {min_eig:.3e}")
        mat = mat.copy()
        mat.flags.writeable = False
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "n_max", n_max)
        object.__setattr__(self, "normalized", normalized)

    def __setattr__(self, name, value):
        raise AttributeError("DensityMatrix is immutable")

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.mat)))

    def normalize(self) -> "DensityMatrix":
        tr = self.trace
        if tr < ZERO_HERALD_TOL:
            raise ZeroHeraldError("cannot normalize a zero-trace density matrix")
        return DensityMatrix(self.mat / tr, self.n_max, normalized=True)

    def purity(self) -> float:
        """Tr[rho^2] of the trace-normalized matrix."""
        tr = self.trace
        if tr < ZERO_HERALD_TOL:
            raise ZeroHeraldError("purity of a zero-trace density matrix")
        return float(np.real(np.trace(self.mat @ self.mat))) / tr**2

    def probabilities(self) -> np.ndarray:
        """Diagonal photon-number weights (unnormalized if the state is)."""
        return np.real(np.diag(self.mat)).copy()

    def __repr__(self):
        return (
            f"DensityMatrix(n_max={self.n_max}, trace={self.trace:.6g}, "
            f"normalized={self.normalized})"
        )


def tensor(a: PureState, b: PureState) -> TwoModeState:
    """Product state ``amps[n, m] = a.amps[n] * b.amps[m]``."""
    if a.n_max != b.n_max:
        raise ConfigurationError(
            f"mismatched truncation orders {a.n_max} != {b.n_max}"
        )
    return TwoModeState(np.outer(a.amps, b.amps), a.n_max)


def project_mode_a(s: TwoModeState, k: int) -> PureState:
    """Project the first mode onto ``|k>``; returns the unnormalized remainder.

    The squared norm of the result is the probability of detecting ``k``.
    """
    if not 0 <= k <= s.n_max:
        raise ValueError(f"herald photon number {k} outside 0..{s.n_max}")
    amps = s.amps[k, :]
    if float(np.sum(np.abs(amps) ** 2)) < ZERO_HERALD_TOL:
        raise ZeroHeraldError(f"detecting {k} photons in mode a has zero probability")
    return PureState(amps, s.n_max)


def project_mode_b(s: TwoModeState, k: int) -> PureState:
    """Project the second mode onto ``|k>``; returns the unnormalized remainder.

    The squared norm of the result is the probability of detecting ``k``.
    """
    if not 0 <= k <= s.n_max:
        raise ValueError(f"herald photon number {k} outside 0..{s.n_max}")
    amps = s.amps[:, k]
    if float(np.sum(np.abs(amps) ** 2)) < ZERO_HERALD_TOL:
        raise ZeroHeraldError(f"detecting {k} photons in mode b has zero probability")
    return PureState(amps, s.n_max)


def purity_embed(p: PureState) -> DensityMatrix:
    """Rank-1 density matrix ``|p><p|`` of a normalized pure state."""
    n2 = p.norm2
    if abs(n2 - 1.0) > 1e-9:
        raise ConfigurationError(
            f"purity_embed requires a normalized state, norm2 = {n2!r}"
        )
    # Divide out the residual truncation deficit so the trace is exactly 1.
    return DensityMatrix(np.outer(p.amps, p.amps.conj()) / n2, p.n_max, normalized=True)

"""Beam-splitter transforms, Fock-heralded conditional maps, and loss.

Sign convention, fixed once and used everywhere: with real R = sqrt(r2) and
T = sqrt(1 - r2), photons reflected from the *second* input into the first
output carry the minus sign,

    |1,0> -> T|1,0> + R|0,1>        |0,1> -> T|0,1> - R|1,0>.

Heralds measure the *first* output mode and keep the second; this matches
the wiring in which the photon-number detector sits behind the port that the
added-photon (or second-kitten) input entered.

The pure-path herald kernel and the mixed-path herald kernel are coded
independently so the two routes cross-check each other; tests require them
to agree on rank-1 inputs.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .fock import (
    DEFAULT_TAIL_TOL,
    ConfigurationError,
    DensityMatrix,
    PureState,
    TruncationPolicy,
    TruncationWarning,
    TwoModeState,
    ZERO_HERALD_TOL,
    ZeroHeraldError,
)
from .states import squeezed_vacuum_amplitudes


@dataclass(frozen=True)
class BeamSplitter:
    """Lossless beam splitter parameterized by its reflectivity R^2."""

    r2: float

    def __post_init__(self):
        if not 0.0 <= self.r2 <= 1.0:
            raise ConfigurationError(f"reflectivity R^2 must be in [0, 1], got {self.r2}")

    @property
    def t2(self) -> float:
        return 1.0 - self.r2

    @property
    def r(self) -> float:
        return math.sqrt(self.r2)

    @property
    def t(self) -> float:
        return math.sqrt(1.0 - self.r2)


@dataclass(frozen=True)
class LossChannel:
    """Attenuation by a fractional intensity loss in [0, 1)."""

    loss: float

    def __post_init__(self):
        if not 0.0 <= self.loss < 1.0:
            raise ConfigurationError(f"loss must be in [0, 1), got {self.loss}")


@lru_cache(maxsize=8)
def _lf(n_max: int) -> np.ndarray:
    """log(n!) for n = 0..n_max."""
    return np.concatenate(([0.0], np.cumsum(np.log(np.arange(1.0, n_max + 1)))))


def _pow(base: float, exponent: int) -> float:
    """base**exponent with 0**0 = 1 and exact zero for 0**positive."""
    if base == 0.0:
        return 1.0 if exponent == 0 else 0.0
    return base**exponent


def bs_pure(a: PureState, b: PureState, bs: BeamSplitter,
            tail_tol: float = DEFAULT_TAIL_TOL) -> TwoModeState:
    """Two-mode output of the beam splitter on a product input.

    Evaluated on the doubled photon-number range and then truncated back to
    n_max per mode; a truncation warning is raised when the dropped mass
    exceeds ``tail_tol``.  Norm-preserving whenever the combined photon
    number stays within the cutoff.
    """
    if a.n_max != b.n_max:
        raise ConfigurationError(f"mismatched truncation orders {a.n_max} != {b.n_max}")
    n_max = a.n_max
    if bs.r2 == 0.0:
        return TwoModeState(np.outer(a.amps, b.amps), n_max)
    if bs.r2 == 1.0:
        signs = (-1.0) ** np.arange(n_max + 1)
        return TwoModeState(np.outer(signs * b.amps, a.amps), n_max)
    big = 2 * n_max
    lf = _lf(big)
    log_t = math.log(bs.t)
    log_r = math.log(bs.r)
    full = np.zeros((big + 1, big + 1), dtype=complex)
    for na in range(n_max + 1):
        ca = a.amps[na]
        if ca == 0.0:
            continue
        s = np.arange(na + 1)
        log_cs = lf[na] - lf[s] - lf[na - s]
        for nb in range(n_max + 1):
            amp = ca * b.amps[nb]
            if amp == 0.0:
                continue
            t_idx = np.arange(nb + 1)
            log_ct = lf[nb] - lf[t_idx] - lf[nb - t_idx]
            te = s[:, None] + (nb - t_idx)[None, :]
            re = (na - s)[:, None] + t_idx[None, :]
            log_mag = (
                log_cs[:, None] + log_ct[None, :]
                + te * log_t + re * log_r
                + 0.5 * (lf[s[:, None] + t_idx[None, :]]
                         + lf[na + nb - s[:, None] - t_idx[None, :]]
                         - lf[na] - lf[nb])
            )
            coeff = np.exp(log_mag) * (-1.0) ** t_idx[None, :]
            out1 = (s[:, None] + t_idx[None, :]).ravel()
            np.add.at(full, (out1, na + nb - out1), amp * coeff.ravel())
    kept = full[: n_max + 1, : n_max + 1]
    dropped = float(np.sum(np.abs(full) ** 2) - np.sum(np.abs(kept) ** 2))
    if dropped >= tail_tol:
        warnings.warn(
            f"beam splitter output loses mass {dropped:.3e} beyond the cutoff"
            f" (tolerance {tail_tol:.1e}); consider a larger n_max",
            TruncationWarning,
            stacklevel=2,
        )
    return TwoModeState(kept, n_max)


@lru_cache(maxsize=64)
def _subtract_kernel(n_max: int, l: int, k: int, r2: float) -> np.ndarray:
    """Pure tap kernel: amplitude weight of |m>_sqz -> |m + l - k> given the
    added-photon port held |l> and the herald read k photons."""
    t = math.sqrt(1.0 - r2)
    r = math.sqrt(r2)
    lf = _lf(max(n_max + l, n_max + k, n_max))
    out = np.zeros(n_max + 1)
    for m in range(n_max + 1):
        res = m + l - k
        if res < 0 or res > n_max:
            continue
        terms = []
        for j in range(max(k - l, 0), min(k, m) + 1):
            log_c = (lf[l] - lf[l - k + j] - lf[k - j]) + (lf[m] - lf[m - j] - lf[j])
            mag = log_c + 0.5 * (lf[k] + lf[res] - lf[l] - lf[m])
            tv = _pow(t, m + k - 2 * j)
            rv = _pow(r, l - k + 2 * j)
            terms.append(math.exp(mag) * tv * rv * (-1.0) ** j)
        out[m] = math.fsum(terms) if terms else 0.0
    return out


def herald_lk(xi: float, l: int, k: int, bs: BeamSplitter,
              policy: TruncationPolicy | None = None) -> tuple[PureState, float]:
    """l-photon-added / k-photon-subtracted squeezed vacuum.

    |l> enters the herald port of the tap beam splitter, squeezed vacuum the
    other; detecting k photons behind the tap leaves a state supported on
    photon numbers 2n + l - k (parity of l - k).  Returns the normalized
    state and the herald probability.
    """
    pol = policy if policy is not None else TruncationPolicy()
    if not 0 <= l <= pol.n_max or not 0 <= k <= pol.n_max:
        raise ConfigurationError(f"l={l}, k={k} must lie within 0..{pol.n_max}")
    alpha = squeezed_vacuum_amplitudes(xi, pol.n_max)
    kernel = _subtract_kernel(pol.n_max, l, k, bs.r2)
    out = np.zeros(pol.n_max + 1)
    for m in range(0, pol.n_max + 1, 2):
        res = m + l - k
        if 0 <= res <= pol.n_max and alpha[m] != 0.0:
            out[res] += alpha[m] * kernel[m]
    prob = float(np.sum(out**2))
    if prob < ZERO_HERALD_TOL:
        raise ZeroHeraldError(
            f"herald (l={l}, k={k}, R^2={bs.r2}) has zero probability at xi={xi}"
        )
    return PureState(out / math.sqrt(prob), pol.n_max, tail_tol=pol.tail_tol), prob


@lru_cache(maxsize=64)
def _pure_herald_kernel(n_max: int, k: int, r2: float) -> np.ndarray:
    """g[n1, n2]: amplitude taken by |n1, n2> onto |n1 + n2 - k> when the
    first output mode is projected onto |k>."""
    t = math.sqrt(1.0 - r2)
    r = math.sqrt(r2)
    lf = _lf(2 * n_max)
    g = np.zeros((n_max + 1, n_max + 1))
    for n1 in range(n_max + 1):
        for n2 in range(n_max + 1):
            res = n1 + n2 - k
            if res < 0 or res > n_max:
                continue
            terms = []
            for j in range(max(0, k - n2), min(n1, k) + 1):
                log_c = (lf[n1] - lf[j] - lf[n1 - j]) + (lf[n2] - lf[k - j] - lf[n2 - k + j])
                mag = log_c + 0.5 * (lf[k] + lf[res] - lf[n1] - lf[n2])
                tv = _pow(t, n2 + 2 * j - k)
                rv = _pow(r, n1 + k - 2 * j)
                terms.append(math.exp(mag) * tv * rv * (-1.0) ** (k - j))
            g[n1, n2] = math.fsum(terms) if terms else 0.0
    return g


def bs_pure_herald(a: PureState, b: PureState, bs: BeamSplitter,
                   k: int) -> tuple[PureState, float]:
    """Interfere two pure states and detect k photons on the first output.

    Returns the normalized kept state and the herald probability.  This is
    the closed-form conditional map; it never materializes the two-mode
    output.
    """
    if a.n_max != b.n_max:
        raise ConfigurationError(f"mismatched truncation orders {a.n_max} != {b.n_max}")
    n_max = a.n_max
    if not 0 <= k <= n_max:
        raise ValueError(f"herald photon number {k} outside 0..{n_max}")
    g = _pure_herald_kernel(n_max, k, bs.r2)
    out = np.zeros(n_max + 1, dtype=complex)
    for res in range(n_max + 1):
        n1_lo = max(0, res + k - n_max)
        n1_hi = min(n_max, res + k)
        if n1_lo > n1_hi:
            continue
        n1 = np.arange(n1_lo, n1_hi + 1)
        n2 = res + k - n1
        out[res] = np.sum(a.amps[n1] * b.amps[n2] * g[n1, n2])
    prob = float(np.sum(np.abs(out) ** 2))
    if prob < ZERO_HERALD_TOL:
        raise ZeroHeraldError(f"detecting {k} photons has zero probability")
    return PureState(out / math.sqrt(prob), n_max), prob


@lru_cache(maxsize=64)
def _mixed_herald_kernel(n_max: int, k: int, r2: float) -> np.ndarray:
    """Per-side weight W[m, p] of the quadruple-sum heralded map: the output
    matrix element picks up W[m, p] W[n, q] for ket indices (m, p) and bra
    indices (n, q)."""
    t = math.sqrt(1.0 - r2)
    r = math.sqrt(r2)
    lf = _lf(2 * n_max)
    w = np.zeros((n_max + 1, n_max + 1))
    for m in range(n_max + 1):
        for p in range(n_max + 1):
            res = m + p - k
            if res < 0 or res > n_max:
                continue
            terms = []
            for j in range(max(0, k - p), min(m, k) + 1):
                log_c = (lf[m] - lf[j] - lf[m - j]) + (lf[p] - lf[k - j] - lf[p - k + j])
                mag = log_c + 0.5 * (lf[k] + lf[res] - lf[m] - lf[p])
                tv = _pow(t, p + 2 * j - k)
                rv = _pow(r, m + k - 2 * j)
                terms.append(math.exp(mag) * tv * rv * (-1.0) ** j)
            w[m, p] = math.fsum(terms) if terms else 0.0
    return w


def bs_mixed_herald(rho1: DensityMatrix, rho2: DensityMatrix, bs: BeamSplitter,
                    k: int) -> DensityMatrix:
    """Mixed-state analogue of ``bs_pure_herald``.

    Combines two density matrices on the beam splitter and projects the
    first output mode onto |k>.  The result is unnormalized: its trace is
    the herald probability S(k).
    """
    if rho1.n_max != rho2.n_max:
        raise ConfigurationError(f"mismatched truncation orders {rho1.n_max} != {rho2.n_max}")
    n_max = rho1.n_max
    if not 0 <= k <= n_max:
        raise ValueError(f"herald photon number {k} outside 0..{n_max}")
    w = _mixed_herald_kernel(n_max, k, bs.r2)
    m1, m2 = rho1.mat, rho2.mat
    out = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    # Gather, for each output row r, the ket-side weights over m with
    # p = r + k - m, then contract with the bra side column by column.
    rows = []
    for res in range(n_max + 1):
        lo = max(0, res + k - n_max)
        hi = min(n_max, res + k)
        if lo > hi:
            rows.append(None)
            continue
        m = np.arange(lo, hi + 1)
        rows.append((m, res + k - m, w[m, res + k - m]))
    for ra in range(n_max + 1):
        if rows[ra] is None:
            continue
        m, p, wa = rows[ra]
        for rb in range(ra, n_max + 1):
            if rows[rb] is None:
                continue
            n, q, wb = rows[rb]
            val = np.einsum(
                "m,n,mn,mn->", wa, wb, m1[np.ix_(m, n)], m2[np.ix_(p, q)]
            )
            out[ra, rb] = val
            if rb != ra:
                out[rb, ra] = np.conj(val)
    return DensityMatrix(out, n_max, normalized=False)


def apply_loss(rho: DensityMatrix, ch: LossChannel) -> DensityMatrix:
    """Attenuation channel: mix with vacuum on a virtual beam splitter of
    transmittance 1 - loss and trace out the ancilla.  Trace preserving."""
    if ch.loss == 0.0:
        return rho
    n_max = rho.n_max
    t = 1.0 - ch.loss
    lf = _lf(n_max)
    n = np.arange(n_max + 1)
    out = np.zeros_like(rho.mat)
    for j in range(n_max + 1):
        m = n[: n_max + 1 - j]
        kraus = np.exp(
            0.5 * (lf[m + j] - lf[m] - lf[j])
            + 0.5 * m * math.log(t)
            + 0.5 * j * math.log(ch.loss)
        ) if j > 0 else np.sqrt(t**m).astype(float)
        out[: n_max + 1 - j, : n_max + 1 - j] += (
            kraus[:, None] * kraus[None, :] * rho.mat[j:, j:]
        )
    return DensityMatrix(out, n_max, normalized=rho.normalized)

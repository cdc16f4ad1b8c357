"""State analytics: fidelities, photon statistics, Wigner function, cat fits.

Phase-space convention: hbar = 1, alpha = (x + ip)/sqrt(2), so the vacuum
Wigner function is exp(-x^2 - p^2)/pi and a real-amplitude coherent state
|beta> peaks at x = sqrt(2) beta.  W(0, 0) equals the mean photon-number
parity divided by pi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh
from scipy.optimize import bisect, minimize_scalar
from scipy.special import eval_genlaguerre, gammaln

from .fock import (
    ConfigurationError,
    DensityMatrix,
    NumericError,
    PureState,
)
from .states import db_to_xi, squeeze_operator

State = PureState | DensityMatrix

_NORMALIZED_TOL = 1e-8


def _require_normalized(state: State, what: str) -> None:
    weight = state.norm2 if isinstance(state, PureState) else state.trace
    if abs(weight - 1.0) > _NORMALIZED_TOL:
        raise ConfigurationError(f"{what} requires a normalized state, weight={weight!r}")


def fidelity_pure(rho: DensityMatrix, psi: PureState) -> float:
    """<psi| rho |psi> for a normalized density matrix and pure reference."""
    _require_normalized(rho, "fidelity_pure")
    _require_normalized(psi, "fidelity_pure")
    value = float(np.real(np.vdot(psi.amps, rho.mat @ psi.amps)))
    return min(max(value, 0.0), 1.0)


def fidelity_mixed(rho1: DensityMatrix, rho2: DensityMatrix) -> float:
    """Uhlmann fidelity (Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2."""
    _require_normalized(rho1, "fidelity_mixed")
    _require_normalized(rho2, "fidelity_mixed")
    w, v = eigh(rho1.mat)
    if w[0] < -1e-9:
        raise NumericError(f"fidelity_mixed: negative eigenvalue {w[0]:.3e}")
    sqrt1 = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    inner = sqrt1 @ rho2.mat @ sqrt1
    lam = np.linalg.eigvalsh(inner)
    value = float(np.sum(np.sqrt(np.clip(lam, 0.0, None)))) ** 2
    return min(max(value, 0.0), 1.0)


def photon_distribution(state: State) -> np.ndarray:
    """P(n) of a normalized state; real, nonnegative, sums to 1."""
    _require_normalized(state, "photon_distribution")
    p = state.probabilities()
    if float(p.min()) < -1e-12:
        raise NumericError(f"negative photon probability {p.min():.3e}")
    return np.clip(p, 0.0, None)


def mean_photon(state: State) -> float:
    p = photon_distribution(state)
    return float(np.dot(np.arange(len(p)), p))


def parity_expectation(state: State) -> float:
    """<(-1)^n>; equals pi * W(0, 0)."""
    p = photon_distribution(state)
    return float(np.dot((-1.0) ** np.arange(len(p)), p))


@dataclass(frozen=True)
class WignerGrid:
    """Wigner values w[i, j] = W(x[i], p[j]) on a rectangular grid."""

    x: np.ndarray
    p: np.ndarray
    w: np.ndarray

    def integral(self) -> float:
        return float(np.trapezoid(np.trapezoid(self.w, self.p, axis=1), self.x))

    def min_near_origin(self, radius: float = 1.0) -> float:
        """Minimum of W over the disk x^2 + p^2 <= radius^2."""
        xx, pp = np.meshgrid(self.x, self.p, indexing="ij")
        mask = xx**2 + pp**2 <= radius**2
        return float(self.w[mask].min())


def wigner(state: State, x: np.ndarray | None = None,
           p: np.ndarray | None = None) -> WignerGrid:
    """Fock-basis Wigner function via generalized Laguerre polynomials."""
    _require_normalized(state, "wigner")
    if isinstance(state, PureState):
        rho = np.outer(state.amps, state.amps.conj()) / state.norm2
    else:
        rho = state.mat
    n_max = rho.shape[0] - 1
    if x is None:
        x = np.linspace(-7.0, 7.0, 141)
    if p is None:
        p = np.linspace(-7.0, 7.0, 141)
    x = np.asarray(x, dtype=float)
    p = np.asarray(p, dtype=float)
    alpha = (x[:, None] + 1j * p[None, :]) / math.sqrt(2.0)
    abs2 = np.abs(alpha) ** 2
    gauss = np.exp(-2.0 * abs2) / math.pi
    lg = gammaln(np.arange(n_max + 2))
    w = np.zeros_like(abs2)
    arg = 4.0 * abs2
    two_alpha_conj = 2.0 * alpha.conj()
    for m in range(n_max + 1):
        for n in range(m + 1):
            coeff = rho[m, n]
            if coeff == 0.0:
                continue
            kernel = (
                (-1.0) ** n
                * math.exp(0.5 * (lg[n + 1] - lg[m + 1]))
                * two_alpha_conj ** (m - n)
                * eval_genlaguerre(n, m - n, arg)
            )
            term = coeff * kernel
            if m == n:
                w += np.real(term)
            else:
                w += 2.0 * np.real(term)
    return WignerGrid(x=x, p=p, w=w * gauss)


@dataclass(frozen=True)
class CatFit:
    """Best cat-family match of a state.

    ``beta_star``/``f_star`` locate the fidelity peak over the scan;
    ``beta_max_99`` is the largest beta at which the fidelity still reaches
    ``f_target`` (the descending crossing), or None if it never does.  For
    joint fits over squeezing, both are taken over the scanned dB range and
    ``squeezing_db`` reports the dB at the beta_max_99 point when it exists,
    otherwise at the peak; ideal-cat fits carry 0.
    """

    beta_star: float
    f_star: float
    beta_max_99: float | None
    squeezing_db: float
    parity: str
    beta_grid: tuple[float, float, float]
    db_grid: tuple[float, float, float] | None = None
    f_target: float = 0.99

    def to_dict(self) -> dict:
        return {
            "beta_star": self.beta_star,
            "f_star": self.f_star,
            "beta_max_99": self.beta_max_99,
            "squeezing_db": self.squeezing_db,
            "parity": self.parity,
            "beta_grid": list(self.beta_grid),
            "db_grid": list(self.db_grid) if self.db_grid else None,
            "f_target": self.f_target,
        }


def _cat_matrix(betas: np.ndarray, parity: str, n_max: int) -> np.ndarray:
    """Rows of normalized cat amplitudes over the beta grid."""
    n = np.arange(n_max + 1)
    lf = gammaln(n + 1.0)
    logs = (
        -0.5 * betas[:, None] ** 2
        + n[None, :] * np.log(betas[:, None])
        - 0.5 * lf[None, :]
    )
    mat = np.exp(logs)
    sign = 1.0 if parity == "even" else -1.0
    mask = (n % 2 == 0) if parity == "even" else (n % 2 == 1)
    mat *= 2.0 * mask[None, :]
    norm = 1.0 / np.sqrt(2.0 * (1.0 + sign * np.exp(-2.0 * betas**2)))
    return mat * norm[:, None]


def _fidelity_rows(cats: np.ndarray, state: State) -> np.ndarray:
    if isinstance(state, PureState):
        overlap = cats @ state.amps
        return np.abs(overlap) ** 2
    return np.real(np.einsum("bi,ij,bj->b", cats, state.mat, cats.conj()))


def cat_fit(state: State, parity: str,
            squeezing_db_range: tuple[float, float] | None = None,
            beta_stop: float = 3.5, beta_step: float = 0.005,
            db_step: float = 0.01, f_target: float = 0.99) -> CatFit:
    """Scan the (ideal or squeezed) cat family for the best match.

    The beta grid runs from ``beta_step`` to ``beta_stop``; the peak is
    refined by golden-section search and the ``f_target`` crossing by
    bisection between the bracketing grid points.
    """
    _require_normalized(state, "cat_fit")
    if parity not in ("even", "odd"):
        raise ConfigurationError(f"parity must be 'even' or 'odd', got {parity!r}")
    if beta_stop <= beta_step:
        raise ConfigurationError("empty beta scan range")
    n_max = state.n_max
    betas = np.arange(beta_step, beta_stop, beta_step)
    base_cats = _cat_matrix(betas, parity, n_max)

    if squeezing_db_range is None:
        db_values = [0.0]
        db_grid = None
    else:
        db_lo, db_hi = squeezing_db_range
        if db_lo > db_hi or db_hi > 0.0:
            raise ConfigurationError(
                f"squeezing dB range must satisfy lo <= hi <= 0, got {squeezing_db_range}"
            )
        db_values = list(np.arange(db_hi, db_lo - 0.5 * db_step, -db_step))
        db_grid = (db_lo, db_hi, db_step)

    def curve(db: float) -> np.ndarray:
        if db == 0.0:
            return _fidelity_rows(base_cats, state)
        op = squeeze_operator(db_to_xi(db), n_max)
        cats = base_cats @ op.T
        cats /= np.linalg.norm(cats, axis=1, keepdims=True)
        return _fidelity_rows(cats, state)

    def point(beta: float, db: float) -> float:
        cat = _cat_matrix(np.array([beta]), parity, n_max)
        if db != 0.0:
            cat = cat @ squeeze_operator(db_to_xi(db), n_max).T
            cat /= np.linalg.norm(cat)
        return float(_fidelity_rows(cat, state)[0])

    best = None     # (f, beta, db)
    crossing = None  # (beta_99, db)
    for db in db_values:
        f = curve(db)
        i = int(np.argmax(f))
        if best is None or f[i] > best[0]:
            best = (float(f[i]), float(betas[i]), db)
        above = np.where(f >= f_target)[0]
        if len(above):
            j = int(above[-1])
            if j + 1 < len(betas):
                b99 = bisect(
                    lambda b, d=db: point(b, d) - f_target, betas[j], betas[j + 1],
                    xtol=1e-6,
                )
            else:
                b99 = float(betas[j])
            if crossing is None or b99 > crossing[0]:
                crossing = (float(b99), db)

    f_best, beta_best, db_best = best
    lo = max(beta_step, beta_best - beta_step)
    hi = min(beta_stop - beta_step, beta_best + beta_step)
    res = minimize_scalar(
        lambda b: -point(b, db_best), bounds=(lo, hi), method="bounded",
        options={"xatol": 1e-6},
    )
    if -res.fun >= f_best:
        beta_best, f_best = float(res.x), float(-res.fun)

    return CatFit(
        beta_star=beta_best,
        f_star=f_best,
        beta_max_99=crossing[0] if crossing else None,
        squeezing_db=(crossing[1] if crossing else db_best) if db_grid else 0.0,
        parity=parity,
        beta_grid=(beta_step, beta_stop, beta_step),
        db_grid=db_grid,
        f_target=f_target,
    )

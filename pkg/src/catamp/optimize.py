"""Derivative-free tuning of reflectivities (and source squeezing).

Strategy: exhaustive coarse grid over the free parameters, then bounded
Nelder-Mead refinement from the best grid point.  The herald makes the
objective non-smooth near zero-probability boundaries, so no gradients are
used anywhere; given the same problem and grid the result is deterministic.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .analysis import cat_fit, _cat_matrix, _fidelity_rows
from .fock import ConfigurationError, TruncationPolicy, ZeroHeraldError
from .optics import BeamSplitter, bs_pure_herald, herald_lk
from .scheme import SchemeConfig, _arm_parity

_FREE_PARAMETERS = ("r2_1", "r2_2", "r2_3", "xi")
_OBJECTIVES = ("f_star", "fidelity_at_beta", "weighted_f_star")


@dataclass(frozen=True)
class OptProblem:
    """Objective and search box for the amplifier (or a single tap).

    ``free`` maps parameter names (subset of r2_1, r2_2, r2_3, xi) to
    (low, high) bounds; ``xi`` moves both sources together.  With
    ``target="single_stage"`` only arm 1 is evaluated.
    """

    config: SchemeConfig
    free: dict
    objective: str = "f_star"
    beta: float | None = None
    target: str = "amplifier"

    def __post_init__(self):
        if not self.free:
            raise ConfigurationError("at least one free parameter is required")
        for name, bounds in self.free.items():
            if name not in _FREE_PARAMETERS:
                raise ConfigurationError(
                    f"unknown free parameter {name!r}; expected one of {_FREE_PARAMETERS}"
                )
            lo, hi = bounds
            if not lo < hi:
                raise ConfigurationError(f"empty bounds for {name}: {bounds}")
            if name.startswith("r2") and not (0.0 <= lo and hi <= 1.0):
                raise ConfigurationError(f"{name} bounds outside [0, 1]: {bounds}")
            if name == "xi" and lo < 0.0:
                raise ConfigurationError(f"xi bounds must be >= 0: {bounds}")
        if self.objective not in _OBJECTIVES:
            raise ConfigurationError(f"unknown objective {self.objective!r}")
        if self.objective == "fidelity_at_beta" and self.beta is None:
            raise ConfigurationError("fidelity_at_beta requires a target beta")
        if self.target not in ("amplifier", "single_stage"):
            raise ConfigurationError(f"unknown target {self.target!r}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(sorted(self.free))


@dataclass(frozen=True)
class OptReport:
    """Best point found, with the running-best convergence trace."""

    best_params: dict
    best_value: float
    n_evaluations: int
    trace: tuple
    grid_points: int

    def to_dict(self) -> dict:
        return {
            "best_params": dict(self.best_params),
            "best_value": self.best_value,
            "n_evaluations": self.n_evaluations,
            "trace": [dict(t) for t in self.trace],
            "grid_points": self.grid_points,
        }


def _apply_params(cfg: SchemeConfig, names, values) -> SchemeConfig:
    updates = {}
    for name, value in zip(names, values):
        if name == "xi":
            updates["xi1"] = float(value)
            updates["xi2"] = float(value)
        else:
            updates[name] = float(value)
    return replace(cfg, **updates)


def _evaluate(problem: OptProblem, values) -> float:
    """Objective value; -inf for zero-probability heralds."""
    cfg = _apply_params(problem.config, problem.names, values)
    pol = cfg.policy
    try:
        kitten1, p1 = herald_lk(cfg.xi1, cfg.l1, cfg.k1, BeamSplitter(cfg.r2_1), pol)
        if problem.target == "single_stage":
            state, prob = kitten1, p1
            parity = _arm_parity(cfg.l1, cfg.k1)
        else:
            kitten2, p2 = herald_lk(cfg.xi2, cfg.l2, cfg.k2, BeamSplitter(cfg.r2_2), pol)
            state, p3 = bs_pure_herald(kitten1, kitten2, BeamSplitter(cfg.r2_3), cfg.k)
            prob = p1 * p2 * p3
            parity = cfg.parity
    except ZeroHeraldError:
        return -math.inf
    if problem.objective == "fidelity_at_beta":
        cat = _cat_matrix(np.array([problem.beta]), parity, pol.n_max)
        return float(_fidelity_rows(cat, state)[0])
    f_star = cat_fit(state, parity).f_star
    if problem.objective == "weighted_f_star":
        return f_star * prob
    return f_star


def _grid_axes(problem: OptProblem, grid_points: int) -> list[np.ndarray]:
    return [
        np.linspace(problem.free[name][0], problem.free[name][1], grid_points)
        for name in problem.names
    ]


def _eval_job(args) -> float:
    problem, values = args
    return _evaluate(problem, values)


def optimize(problem: OptProblem, grid_points: int = 21, refine: bool = True,
             workers: int = 1) -> OptReport:
    """Coarse grid scan followed by bounded Nelder-Mead refinement.

    The returned best value is never below the best grid value, and within
    1e-4 of the local optimum along the refined directions.
    """
    axes = _grid_axes(problem, grid_points)
    grid = list(itertools.product(*axes))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(_eval_job, [(problem, g) for g in grid],
                                   chunksize=max(1, len(grid) // (4 * workers))))
    else:
        values = [_evaluate(problem, g) for g in grid]
    n_eval = len(grid)
    order = np.argsort(values, kind="stable")
    best_idx = int(order[-1])
    best_value = float(values[best_idx])
    if best_value == -math.inf:
        raise ZeroHeraldError("objective is a zero-probability herald on the full grid")
    best_point = np.array(grid[best_idx], dtype=float)

    trace = []
    running = -math.inf
    for i, value in enumerate(values):
        if value > running:
            running = value
            trace.append({
                "params": dict(zip(problem.names, map(float, grid[i]))),
                "value": float(value), "phase": "grid",
            })

    if refine and len(grid) > 1:
        bounds = [problem.free[name] for name in problem.names]
        counter = {"n": 0}

        def negative(vec):
            counter["n"] += 1
            return -_evaluate(problem, vec)

        res = minimize(
            negative, best_point, method="Nelder-Mead", bounds=bounds,
            options={"xatol": 1e-4, "fatol": 1e-4, "maxiter": 400},
        )
        n_eval += counter["n"]
        if -res.fun > best_value:
            best_value = float(-res.fun)
            best_point = np.asarray(res.x, dtype=float)
            trace.append({
                "params": dict(zip(problem.names, map(float, best_point))),
                "value": best_value, "phase": "simplex",
            })

    return OptReport(
        best_params=dict(zip(problem.names, map(float, best_point))),
        best_value=best_value,
        n_evaluations=n_eval,
        trace=tuple(trace),
        grid_points=grid_points,
    )


@dataclass(frozen=True)
class BetaMaxRow:
    """Largest cat amplitude reaching the fidelity target for one (l, k) tap."""

    l: int
    k: int
    parity: str
    beta_max: float | None
    r2_at_max: float | None

    def to_dict(self) -> dict:
        return {"l": self.l, "k": self.k, "parity": self.parity,
                "beta_max": self.beta_max, "r2_at_max": self.r2_at_max}


def _best_tap_fidelity(xi: float, l: int, k: int, beta: float, parity: str,
                       r2_bounds: tuple[float, float],
                       pol: TruncationPolicy) -> tuple[float, float]:
    """max over R^2 of the fidelity of the (l, k) tap state to cat(beta)."""
    cat = _cat_matrix(np.array([beta]), parity, pol.n_max)

    def value(r2: float) -> float:
        try:
            state, _ = herald_lk(xi, l, k, BeamSplitter(r2), pol)
        except ZeroHeraldError:
            return 0.0
        return float(_fidelity_rows(cat, state)[0])

    grid = np.linspace(r2_bounds[0], r2_bounds[1], 21)
    coarse = [value(r2) for r2 in grid]
    i = int(np.argmax(coarse))
    lo = grid[max(0, i - 1)]
    hi = grid[min(len(grid) - 1, i + 1)]
    res = minimize_scalar(lambda r2: -value(r2), bounds=(lo, hi), method="bounded")
    if -res.fun >= coarse[i]:
        return float(-res.fun), float(res.x)
    return float(coarse[i]), float(grid[i])


def beta_max_curve(pairs, xi: float, f_target: float = 0.99,
                   r2_bounds: tuple[float, float] = (0.005, 0.95),
                   beta_range: tuple[float, float] = (0.3, 3.2),
                   beta_step: float = 0.05, parity: str = "odd",
                   policy: TruncationPolicy | None = None) -> list[BetaMaxRow]:
    """Per-(l, k) largest beta with optimized-R^2 fidelity >= f_target.

    Taps whose output parity differs from ``parity`` never reach the target
    against that cat family and come back with ``beta_max=None``.
    """
    pol = policy if policy is not None else TruncationPolicy()
    rows = []
    for l, k in pairs:
        tap_parity = _arm_parity(l, k)
        target_parity = parity
        if tap_parity != target_parity:
            rows.append(BetaMaxRow(l=l, k=k, parity=tap_parity,
                                   beta_max=None, r2_at_max=None))
            continue

        def g(beta: float) -> tuple[float, float]:
            return _best_tap_fidelity(xi, l, k, beta, target_parity, r2_bounds, pol)

        last_above = None
        first_below = None
        for beta in np.arange(beta_range[0], beta_range[1] + 0.5 * beta_step, beta_step):
            f, r2 = g(float(beta))
            if f >= f_target:
                last_above = (float(beta), r2)
                first_below = None
            elif last_above is not None and first_below is None:
                first_below = float(beta)
                break
        if last_above is None:
            rows.append(BetaMaxRow(l=l, k=k, parity=tap_parity,
                                   beta_max=None, r2_at_max=None))
            continue
        if first_below is None:
            rows.append(BetaMaxRow(l=l, k=k, parity=tap_parity,
                                   beta_max=last_above[0], r2_at_max=last_above[1]))
            continue
        lo, r2_at = last_above
        hi = first_below
        for _ in range(25):
            mid = 0.5 * (lo + hi)
            f, r2 = g(mid)
            if f >= f_target:
                lo, r2_at = mid, r2
            else:
                hi = mid
        rows.append(BetaMaxRow(l=l, k=k, parity=tap_parity,
                               beta_max=lo, r2_at_max=r2_at))
    return rows

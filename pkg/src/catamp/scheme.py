"""Composed pipelines: single-stage kitten generation and the two-kitten
amplifier, in ideal (pure) and imperfect (lossy, inefficiently detected)
variants, with per-stage success-probability accounting.

Topology: arm i prepares squeezed vacuum xi_i, interferes it with Fock
|l_i> on tap beam splitter R^2_i and heralds k_i photons; the two heralded
kittens meet on the output beam splitter R^2_3 where detecting k photons
heralds the amplified state.  The output photon-number parity equals the
parity of l1 - k1 + l2 - k2 - k.

The overall success probability is reported both as the product of all
stage probabilities and as the output-stage probability alone; the two
conventions both appear in the literature on conditional state preparation.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .analysis import CatFit, cat_fit
from .detection import (
    DetectorSpec,
    build_herald_ensemble,
    detected_probability,
    heralded_mixture,
)
from .fock import (
    ConfigurationError,
    DensityMatrix,
    PureState,
    TruncationPolicy,
    purity_embed,
)
from .optics import (
    BeamSplitter,
    LossChannel,
    apply_loss,
    bs_mixed_herald,
    bs_pure_herald,
    herald_lk,
)
from .states import fock_state, squeezed_vacuum


@dataclass(frozen=True)
class SchemeConfig:
    """All physical knobs of the two-kitten amplifier."""

    xi1: float
    xi2: float
    r2_1: float
    r2_2: float
    r2_3: float
    l1: int = 0
    k1: int = 1
    l2: int = 0
    k2: int = 1
    k: int = 1
    loss1: float = 0.0
    loss2: float = 0.0
    eta1: float = 1.0
    eta2: float = 1.0
    eta3: float = 1.0
    policy: TruncationPolicy = TruncationPolicy()

    def __post_init__(self):
        for name in ("xi1", "xi2"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"{name} must be >= 0")
        for name in ("r2_1", "r2_2", "r2_3"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ConfigurationError(f"{name} must be in [0, 1]")
        for name in ("loss1", "loss2"):
            if not 0.0 <= getattr(self, name) < 1.0:
                raise ConfigurationError(f"{name} must be in [0, 1)")
        for name in ("eta1", "eta2", "eta3"):
            if not 0.0 < getattr(self, name) <= 1.0:
                raise ConfigurationError(f"{name} must be in (0, 1]")
        for name in ("l1", "k1", "l2", "k2", "k"):
            value = getattr(self, name)
            if not 0 <= value <= self.policy.n_max:
                raise ConfigurationError(
                    f"{name}={value} outside 0..{self.policy.n_max}"
                )

    @property
    def parity(self) -> str:
        """Photon-number parity of the heralded output."""
        return "odd" if (self.l1 - self.k1 + self.l2 - self.k2 - self.k) % 2 else "even"

    @property
    def is_ideal(self) -> bool:
        return (
            self.loss1 == 0.0 and self.loss2 == 0.0
            and self.eta1 == 1.0 and self.eta2 == 1.0 and self.eta3 == 1.0
        )

    def to_dict(self) -> dict:
        return {
            "xi1": self.xi1, "xi2": self.xi2,
            "r2_1": self.r2_1, "r2_2": self.r2_2, "r2_3": self.r2_3,
            "l1": self.l1, "k1": self.k1, "l2": self.l2, "k2": self.k2,
            "k": self.k,
            "loss1": self.loss1, "loss2": self.loss2,
            "eta1": self.eta1, "eta2": self.eta2, "eta3": self.eta3,
            "policy": self.policy.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SchemeConfig":
        d = dict(d)
        policy = TruncationPolicy.from_dict(d.pop("policy"))
        ints = {name: int(d.pop(name)) for name in ("l1", "k1", "l2", "k2", "k")}
        return cls(policy=policy, **ints, **{k: float(v) for k, v in d.items()})


@dataclass(frozen=True)
class SchemeResult:
    """Output state with herald bookkeeping and cat fits."""

    config: SchemeConfig
    state: PureState | DensityMatrix
    stage_probs: dict
    prob_product: float
    prob_output_stage: float
    fit_output: CatFit
    fit_arm1: CatFit | None = None
    fit_arm2: CatFit | None = None

    @property
    def is_pure(self) -> bool:
        return isinstance(self.state, PureState)

    def to_dict(self) -> dict:
        if self.is_pure:
            state = {
                "kind": "pure",
                "amps_re": np.real(self.state.amps).tolist(),
                "amps_im": np.imag(self.state.amps).tolist(),
            }
        else:
            state = {
                "kind": "mixed",
                "photon_distribution": self.state.probabilities().tolist(),
                "purity": self.state.purity(),
            }
        return {
            "config": self.config.to_dict(),
            "state": state,
            "stage_probs": dict(self.stage_probs),
            "prob_product": self.prob_product,
            "prob_output_stage": self.prob_output_stage,
            "fit_output": self.fit_output.to_dict(),
            "fit_arm1": self.fit_arm1.to_dict() if self.fit_arm1 else None,
            "fit_arm2": self.fit_arm2.to_dict() if self.fit_arm2 else None,
        }


def _arm_parity(l: int, k: int) -> str:
    return "odd" if (l - k) % 2 else "even"


def run_single_stage(xi: float, l: int, k: int, r2: float,
                     policy: TruncationPolicy | None = None) -> SchemeResult:
    """One tap: l-added / k-subtracted squeezed vacuum with its herald probability."""
    pol = policy if policy is not None else TruncationPolicy()
    state, prob = herald_lk(xi, l, k, BeamSplitter(r2), pol)
    cfg = SchemeConfig(xi1=xi, xi2=0.0, r2_1=r2, r2_2=0.0, r2_3=0.0,
                       l1=l, k1=k, l2=0, k2=0, k=0, policy=pol)
    fit = cat_fit(state, _arm_parity(l, k))
    return SchemeResult(
        config=cfg, state=state,
        stage_probs={"arm1": prob},
        prob_product=prob, prob_output_stage=prob,
        fit_output=fit,
    )


def run_amplifier_ideal(cfg: SchemeConfig) -> SchemeResult:
    """Pure-state amplifier: both kittens heralded exactly, output heralded on k."""
    if not cfg.is_ideal:
        raise ConfigurationError(
            "run_amplifier_ideal requires zero losses and unit detector efficiencies"
        )
    pol = cfg.policy
    kitten1, p1 = herald_lk(cfg.xi1, cfg.l1, cfg.k1, BeamSplitter(cfg.r2_1), pol)
    kitten2, p2 = herald_lk(cfg.xi2, cfg.l2, cfg.k2, BeamSplitter(cfg.r2_2), pol)
    output, p3 = bs_pure_herald(kitten1, kitten2, BeamSplitter(cfg.r2_3), cfg.k)
    return SchemeResult(
        config=cfg, state=output,
        stage_probs={"arm1": p1, "arm2": p2, "output": p3},
        prob_product=p1 * p2 * p3, prob_output_stage=p3,
        fit_output=cat_fit(output, cfg.parity),
        fit_arm1=cat_fit(kitten1, _arm_parity(cfg.l1, cfg.k1)),
        fit_arm2=cat_fit(kitten2, _arm_parity(cfg.l2, cfg.k2)),
    )


def _imperfect_kitten(xi: float, loss: float, r2: float, eta: float,
                      l: int, k: int, pol: TruncationPolicy
                      ) -> tuple[DensityMatrix, float]:
    """Kitten density matrix from a lossy source and an inefficient tap detector."""
    source = purity_embed(squeezed_vacuum(xi, pol))
    if loss > 0.0:
        source = apply_loss(source, LossChannel(loss))
    added = purity_embed(fock_state(l, pol))
    bs = BeamSplitter(r2)
    if eta == 1.0:
        rho_k = bs_mixed_herald(added, source, bs, k)
        return rho_k.normalize(), rho_k.trace
    ensemble = build_herald_ensemble(added, source, bs, pol)
    det = DetectorSpec(eta)
    return heralded_mixture(k, ensemble, det), detected_probability(k, ensemble, det)


def run_amplifier_imperfect(cfg: SchemeConfig) -> SchemeResult:
    """Mixed-state amplifier with source loss and inefficient detectors.

    In the ideal limit (zero losses, unit efficiencies) this agrees with
    ``run_amplifier_ideal`` up to numerical precision; the two routes are
    computed independently.
    """
    pol = cfg.policy
    kitten1, p1 = _imperfect_kitten(
        cfg.xi1, cfg.loss1, cfg.r2_1, cfg.eta1, cfg.l1, cfg.k1, pol)
    kitten2, p2 = _imperfect_kitten(
        cfg.xi2, cfg.loss2, cfg.r2_2, cfg.eta2, cfg.l2, cfg.k2, pol)
    bs3 = BeamSplitter(cfg.r2_3)
    if cfg.eta3 == 1.0:
        rho_k = bs_mixed_herald(kitten1, kitten2, bs3, cfg.k)
        p3 = rho_k.trace
        output = rho_k.normalize()
    else:
        ensemble = build_herald_ensemble(kitten1, kitten2, bs3, pol)
        det3 = DetectorSpec(cfg.eta3)
        output = heralded_mixture(cfg.k, ensemble, det3)
        p3 = detected_probability(cfg.k, ensemble, det3)
    return SchemeResult(
        config=cfg, state=output,
        stage_probs={"arm1": p1, "arm2": p2, "output": p3},
        prob_product=p1 * p2 * p3, prob_output_stage=p3,
        fit_output=cat_fit(output, cfg.parity),
        fit_arm1=cat_fit(kitten1, _arm_parity(cfg.l1, cfg.k1)),
        fit_arm2=cat_fit(kitten2, _arm_parity(cfg.l2, cfg.k2)),
    )


def run_amplifier(cfg: SchemeConfig) -> SchemeResult:
    """Dispatch to the pure pipeline when the config is ideal."""
    return run_amplifier_ideal(cfg) if cfg.is_ideal else run_amplifier_imperfect(cfg)


def _sweep_point(args: tuple) -> dict:
    cfg, xi = args
    point = replace(cfg, xi1=xi, xi2=xi)
    result = run_amplifier(point)
    return {
        "xi": xi,
        "beta_star": result.fit_output.beta_star,
        "f_star": result.fit_output.f_star,
        "beta_max_99": result.fit_output.beta_max_99,
        "prob_output_stage": result.prob_output_stage,
        "prob_product": result.prob_product,
    }


def sweep_xi(cfg: SchemeConfig, xi_values, workers: int = 1) -> list[dict]:
    """Amplifier output fit versus source squeezing, reflectivities fixed.

    Rows come back sorted by xi regardless of worker scheduling.
    """
    jobs = [(cfg, float(xi)) for xi in xi_values]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_sweep_point, jobs))
    else:
        rows = [_sweep_point(job) for job in jobs]
    return sorted(rows, key=lambda row: row["xi"])

"""Inefficient photon-number-resolving detector model.

A detector of quantum efficiency eta registers m photons out of k subtracted
with the binomial likelihood C(k, m) eta^m (1-eta)^(k-m).  Observing m
therefore heralds a Bayes mixture over the true subtraction number k, with
prior weights given by the herald ensemble probabilities S(k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fock import (
    ConfigurationError,
    DensityMatrix,
    TruncationPolicy,
    ZERO_HERALD_TOL,
)
from .optics import BeamSplitter, bs_mixed_herald

# The ensemble is grown until this much herald probability is covered.
ENSEMBLE_COVERAGE = 1.0 - 1e-6


class ImpossibleObservationError(ValueError):
    """The observed photon count has zero probability under the ensemble."""


@dataclass(frozen=True)
class DetectorSpec:
    """Photon-number-resolving detector with quantum efficiency eta."""

    eta: float

    def __post_init__(self):
        if not 0.0 < self.eta <= 1.0:
            raise ConfigurationError(f"detector efficiency must be in (0, 1], got {self.eta}")


@dataclass(frozen=True)
class HeraldEnsemble:
    """Unnormalized conditional states rho_k with probabilities S(k), k = 0..k_cap."""

    states: tuple[DensityMatrix, ...]
    probs: np.ndarray

    def __post_init__(self):
        if len(self.states) != len(self.probs):
            raise ConfigurationError("ensemble states and probabilities differ in length")
        if len(self.states) == 0:
            raise ConfigurationError("empty herald ensemble")
        total = float(np.sum(self.probs))
        if total > 1.0 + 1e-8:
            raise ConfigurationError(f"ensemble probabilities sum to {total} > 1")

    @property
    def k_cap(self) -> int:
        return len(self.probs) - 1


def build_herald_ensemble(rho1: DensityMatrix, rho2: DensityMatrix, bs: BeamSplitter,
                          policy: TruncationPolicy | None = None,
                          coverage: float = ENSEMBLE_COVERAGE) -> HeraldEnsemble:
    """Herald outcomes k = 0..k_cap of the beam splitter on two mixed inputs.

    k_cap is the smallest k whose cumulative probability reaches ``coverage``,
    capped at n_max.
    """
    pol = policy if policy is not None else TruncationPolicy(n_max=rho1.n_max)
    states = []
    probs = []
    cumulative = 0.0
    for k in range(pol.n_max + 1):
        rho_k = bs_mixed_herald(rho1, rho2, bs, k)
        states.append(rho_k)
        probs.append(rho_k.trace)
        cumulative += probs[-1]
        if cumulative >= coverage:
            break
    return HeraldEnsemble(states=tuple(states), probs=np.array(probs))


def detection_likelihood(m: int, k: int, det: DetectorSpec) -> float:
    """P(m detected | k subtracted) = C(k, m) eta^m (1-eta)^(k-m).

    Zero for m > k (a detector cannot over-count).
    """
    if m < 0 or k < 0:
        raise ConfigurationError(f"photon counts must be >= 0, got m={m}, k={k}")
    if m > k:
        return 0.0
    return math.comb(k, m) * det.eta**m * (1.0 - det.eta) ** (k - m)


def bayes_posterior(m: int, ensemble: HeraldEnsemble, det: DetectorSpec) -> np.ndarray:
    """Q(k | m) over the ensemble's k range; sums to 1."""
    likelihood = np.array(
        [detection_likelihood(m, k, det) for k in range(len(ensemble.probs))]
    )
    joint = likelihood * ensemble.probs
    denominator = float(np.sum(joint))
    if denominator < ZERO_HERALD_TOL:
        raise ImpossibleObservationError(
            f"observing m={m} photons has zero probability under the ensemble"
        )
    return joint / denominator


def detected_probability(m: int, ensemble: HeraldEnsemble, det: DetectorSpec) -> float:
    """Probability of the detector reading m: sum_k P(m|k) S(k)."""
    return float(
        sum(
            detection_likelihood(m, k, det) * s
            for k, s in enumerate(ensemble.probs)
        )
    )


def heralded_mixture(m: int, ensemble: HeraldEnsemble, det: DetectorSpec) -> DensityMatrix:
    """State heralded by an inefficient detector reading m photons.

    Posterior-weighted mixture of the normalized ensemble members,
    sum_k Q(k|m) rho_k / S(k); trace 1.
    """
    posterior = bayes_posterior(m, ensemble, det)
    n_max = ensemble.states[0].n_max
    acc = np.zeros((n_max + 1, n_max + 1), dtype=complex)
    for k, weight in enumerate(posterior):
        if weight <= 0.0 or ensemble.probs[k] < ZERO_HERALD_TOL:
            continue
        acc += (weight / ensemble.probs[k]) * ensemble.states[k].mat
    return DensityMatrix(acc, n_max, normalized=True)

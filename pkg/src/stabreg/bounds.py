"""Concentration machinery and the stability generalization bound.

For sampling m of m+u points uniformly without replacement, a bounded
symmetric function of the drawn subset concentrates with sub-Gaussian tails
governed by the effective variance factor

    alpha(m, u) = (m u / (m + u - 1/2)) * 1 / (1 - 1 / (2 max(m, u))).

A beta-cost-stable algorithm whose per-point costs are bounded through a
residual bound B then satisfies, with probability at least 1 - delta over
the draw of the split,

    R(h) <= R_hat(h) + beta
            + (2 beta + B^2 (m+u)/(m u)) * sqrt(alpha(m,u) * ln(1/delta) / 2).

``concentration_harness`` estimates tail probabilities by Monte-Carlo and
compares them against the closed-form bound; the default statistic is the
sample mean, whose per-swap variation is (max - min)/m.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import _kernels
from .errors import (
    InvalidConfidence,
    InvalidPartitionSize,
    InvalidStabilityInput,
)

__all__ = [
    "alpha",
    "BoundReport",
    "generalization_bound",
    "ConcentrationResult",
    "concentration_harness",
]


def alpha(m: int, u: int) -> float:
    """Effective variance factor for m-of-(m+u) sampling without replacement.

    Symmetric in (m, u) and strictly smaller than min(m, u).
    """
    m = int(m)
    u = int(u)
    if m < 1 or u < 1:
        raise InvalidPartitionSize("m and u must both be at least 1")
    first = (m * u) / (m + u - 0.5)
    second = 1.0 / (1.0 - 1.0 / (2.0 * max(m, u)))
    return first * second


@dataclass(frozen=True)
class BoundReport:
    """One evaluation of the generalization bound and all of its inputs."""

    r_hat: float
    beta: float
    B: float
    m: int
    u: int
    delta: float
    alpha_mu: float
    bound_value: float

    def as_dict(self) -> dict:
        return {
            "r_hat": self.r_hat,
            "beta": self.beta,
            "B": self.B,
            "m": self.m,
            "u": self.u,
            "delta": self.delta,
            "alpha_mu": self.alpha_mu,
            "bound_value": self.bound_value,
        }


def generalization_bound(
    r_hat: float, beta: float, B: float, m: int, u: int, delta: float
) -> BoundReport:
    """Evaluate the stability bound on the test error.

    Args:
        r_hat: training error of the hypothesis (mean squared residual on S).
        beta: cost stability coefficient of the learning map.
        B: bound on |h(x) - y(x)| over the sample.
        m: labeled count.  u: unlabeled count.
        delta: confidence level in (0, 1]; delta = 1 gives the slackless value.

    Returns:
        BoundReport with ``bound_value = r_hat + beta +
        (2 beta + B^2 (m+u)/(m u)) * sqrt(alpha(m,u) * ln(1/delta) / 2)``.
    """
    r_hat = float(r_hat)
    beta = float(beta)
    B = float(B)
    if not 0.0 < float(delta) <= 1.0:
        raise InvalidConfidence(f"delta={delta} outside (0, 1]")
    if beta < 0 or B < 0:
        raise InvalidStabilityInput("beta and B must be non-negative")
    if r_hat < 0:
        raise InvalidStabilityInput("r_hat must be non-negative")
    a = alpha(m, u)
    slack = (2.0 * beta + B * B * (m + u) / (m * u)) * math.sqrt(
        a * math.log(1.0 / float(delta)) / 2.0
    )
    return BoundReport(
        r_hat=r_hat,
        beta=beta,
        B=B,
        m=int(m),
        u=int(u),
        delta=float(delta),
        alpha_mu=a,
        bound_value=r_hat + beta + slack,
    )


class ConcentrationResult(NamedTuple):
    """Monte-Carlo tail estimate next to its closed-form bound."""

    empirical_tail: float
    bound: float


def _tail_bound(epsilon: float, a: float, c: float) -> float:
    if epsilon < 0:
        raise InvalidStabilityInput("epsilon must be non-negative")
    if c == 0.0:
        return 1.0 if epsilon <= 0 else 0.0
    return math.exp(-2.0 * epsilon * epsilon / (a * c * c))


def concentration_harness(
    population: np.ndarray,
    m: int,
    epsilon: float,
    trials: int,
    seed: int,
    phi: Callable[[np.ndarray], float] | None = None,
    c: float | None = None,
    expectation_trials: int | None = None,
) -> ConcentrationResult:
    """Estimate P[phi(S) - E[phi] >= epsilon] and the matching tail bound.

    The default statistic is the sample mean over the drawn subset, for which
    E[phi] is the population mean exactly (symmetry of the draw) and the
    per-swap variation is c = (max - min)/m.  A custom ``phi`` may be passed
    together with its swap bound ``c``; its expectation is then estimated by a
    separate, independently seeded pass of ``expectation_trials`` draws
    (default: same as ``trials``).

    Returns:
        ConcentrationResult(empirical_tail, bound) where
        ``bound = exp(-2 epsilon^2 / (alpha(m, u) c^2))`` with u = n - m.
    """
    pop = np.asarray(population, dtype=np.float64).ravel()
    n = pop.size
    m = int(m)
    if not 1 <= m <= n - 1:
        raise InvalidPartitionSize(f"m={m} outside [1, {n - 1}]")
    trials = int(trials)
    if trials < 1:
        raise InvalidStabilityInput("trials must be at least 1")
    u = n - m
    a = alpha(m, u)

    if phi is None:
        c_val = float(pop.max() - pop.min()) / m
        means = _kernels.sample_means_without_replacement(pop, m, trials, seed)
        expectation = float(pop.mean())
        tail = float(np.count_nonzero(means - expectation >= epsilon)) / trials
        return ConcentrationResult(tail, _tail_bound(float(epsilon), a, c_val))

    if c is None:
        raise InvalidStabilityInput("a custom statistic needs its swap bound c")
    c_val = float(c)
    if c_val < 0:
        raise InvalidStabilityInput("c must be non-negative")
    est_trials = int(expectation_trials) if expectation_trials else trials

    def draws(count: int, stream_seed: int) -> np.ndarray:
        out = np.empty(count)
        root = _kernels.mix64_int(stream_seed)
        for t in range(count):
            keys = _kernels.partition_keys(root + t + 1, n)
            subset = np.sort(np.argpartition(keys, m - 1)[:m])
            out[t] = float(phi(pop[subset]))
        return out

    expectation = float(np.mean(draws(est_trials, _kernels.mix64_int(int(seed) + 1))))
    values = draws(trials, int(seed))
    tail = float(np.count_nonzero(values - expectation >= epsilon)) / trials
    return ConcentrationResult(tail, _tail_bound(float(epsilon), a, c_val))

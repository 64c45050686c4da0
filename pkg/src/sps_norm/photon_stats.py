"""Photon-number statistics from correlators, and quantumness checks.

The correlator-to-distribution map is the alternating sum

    p(n) = sum_{k >= n} (-1)^(k+n) / (n! (k-n)!) G^(k),   G^(0) = 1,

which is formal: for heavy-tailed G^(k) the series has finite radius.
Truncation and divergence are surfaced, never papered over.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergentSeriesError, ShapeError, ValidationError
from .hilbert import DensityMatrix, partial_trace

SERIES_TERM_TOL = 1e-12


@dataclass(frozen=True)
class CorrelatorLadder:
    """Population G^(1) plus normalized g^(k) for k = 2..K."""

    population: float
    gk: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "gk", tuple(float(g) for g in self.gk))
        if self.population < 0:
            raise ValidationError(f"population must be >= 0, got {self.population}")
        if any(g < 0 for g in self.gk):
            raise ValidationError("normalized correlators must be >= 0")

    @property
    def depth(self) -> int:
        return 1 + len(self.gk)


@dataclass(frozen=True)
class PhotonDistribution:
    probabilities: tuple[float, ...]
    truncation_flag: bool = False

    def __post_init__(self):
        p = tuple(float(v) for v in self.probabilities)
        object.__setattr__(self, "probabilities", p)
        if not self.truncation_flag:
            if any(v < -1e-9 or v > 1.0 + 1e-9 for v in p):
                raise ValidationError("probability outside [0, 1] in a clean result")
            total = sum(p)
            # the tuple is a prefix of the distribution, so it may sum short
            if total > 1 + 1e-6:
                raise ValidationError(f"probabilities sum to {total} > 1")

    def clipped(self) -> tuple[float, ...]:
        # display helper only; stored values keep their negative residuals
        return tuple(min(1.0, max(0.0, v)) for v in self.probabilities)


def unnormalized_ladder(ladder: CorrelatorLadder) -> list[float]:
    """[G^(1), G^(2), ..., G^(K)] with G^(k) = population^k * g^(k)."""
    g1 = ladder.population
    out = [g1]
    for k, g in enumerate(ladder.gk, start=2):
        out.append(g1 ** k * g)
    return out


def _pn_series(G: list[float], n: int) -> tuple[float, bool, list[float]]:
    """Alternating sum for p(n). Returns (value, converged, partial_sums).

    Convergence: |term| < 1e-12 with three consecutive decreasing terms.
    Growing terms at the end of the list raise; a list that merely ran out
    is reported as unconverged.
    """
    total = 0.0
    partials: list[float] = []
    terms: list[float] = []
    K = len(G)
    for k in range(n, K + 1):
        gk = 1.0 if k == 0 else G[k - 1]
        term = (-1.0) ** (k + n) / (math.factorial(n) * math.factorial(k - n)) * gk
        total += term
        terms.append(abs(term))
        partials.append(total)
        if len(terms) >= 3 and terms[-1] < SERIES_TERM_TOL:
            if terms[-3] > terms[-2] > terms[-1] or (
                terms[-2] < SERIES_TERM_TOL and terms[-3] < SERIES_TERM_TOL
            ):
                return total, True, partials
    tail = terms[-3:]
    if len(tail) == 3 and tail[-1] >= tail[-2] >= tail[-3] and tail[-1] >= SERIES_TERM_TOL:
        raise NonConvergentSeriesError(
            f"correlator series for p({n}) diverges: last terms {tail}",
            partial_sums=partials,
        )
    return total, False, partials


def pn_from_correlators(G: list[float], n: int) -> float:
    """p(n) from unnormalized correlators [G^(1), ..., G^(K)], G^(0)=1 implied."""
    if n < 0:
        raise ValidationError(f"n must be >= 0, got {n}")
    value, _, _ = _pn_series(list(G), n)
    return value


def pn_with_flag(G: list[float], n: int) -> tuple[float, bool]:
    """Like pn_from_correlators, but also report series convergence."""
    value, converged, _ = _pn_series(list(G), n)
    return value, converged


def distribution_from_correlators(G: list[float], n_max: int) -> PhotonDistribution:
    probs = []
    clean = True
    for n in range(n_max + 1):
        value, converged, _ = _pn_series(list(G), n)
        probs.append(value)
        clean = clean and converged
    return PhotonDistribution(tuple(probs), truncation_flag=not clean)


def filip_mista_bound() -> float:
    """Largest p(1) reachable by convex mixtures of Gaussian states."""
    return 3.0 * math.sqrt(3.0) / (4.0 * math.e)


def is_strong_quantum(p1: float) -> bool:
    if not 0.0 <= p1 <= 1.0:
        raise ValidationError(f"p1 must lie in [0, 1], got {p1}")
    return p1 > filip_mista_bound()


def fock_distribution(rho: DensityMatrix, mode_slot: int) -> PhotonDistribution:
    """Diagonal of the reduced state on one tensor factor."""
    dims = rho.space.subsystem_dims
    if not 0 <= mode_slot < len(dims):
        raise ShapeError(f"slot {mode_slot} out of range for {len(dims)} factors")
    reduced = partial_trace(rho, keep=mode_slot)
    diag = np.real(np.diag(reduced.entries))
    return PhotonDistribution(tuple(float(v) for v in diag))

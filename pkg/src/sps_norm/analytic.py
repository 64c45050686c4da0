"""Closed forms for the incoherently pumped two-level system.

Everything here is an independent analytic route used to cross-check the
numerical sensor machinery: the g_Gamma^(n) recursion, the filtered
population, and the filtered photon-number distribution p(n) built from
C_n coefficients and a generalized hypergeometric 1F2.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import NonConvergentSeriesError, ValidationError


@dataclass(frozen=True)
class Analytic2lsParams:
    """Pump P, decay gamma, filter linewidth Gamma, in units of gamma.

    Gamma = 0 is admitted so the unfiltered limit of the recursion is
    reachable exactly; operations that need a finite filter check locally.
    """

    P: float
    gamma: float
    Gamma: float

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValidationError(f"gamma must be positive, got {self.gamma}")
        if self.P < 0:
            raise ValidationError(f"pump must be >= 0, got {self.P}")
        if self.Gamma < 0:
            raise ValidationError(f"filter linewidth must be >= 0, got {self.Gamma}")

    @property
    def Gamma_sigma(self) -> float:
        # power-broadened emitter linewidth
        return self.gamma + self.P


def gn_recursion(params: Analytic2lsParams, n: int) -> float:
    """Filtered g^(n) of the incoherent 2LS by the product recursion.

    g^(1) = 1 and each step multiplies by
    n*Gs*(Gs+Gamma) / ((Gs+(n-1)*Gamma) * (Gs+(2n-1)*Gamma)).
    The per-step factor is < n for Gamma > 0, so g^(n) < n! strictly;
    at Gamma = 0 it collapses to exactly n!.
    """
    if n < 1:
        raise ValidationError(f"order must be >= 1, got {n}")
    gs = params.Gamma_sigma
    gf = params.Gamma
    value = 1.0
    for m in range(2, n + 1):
        value *= m * gs * (gs + gf) / ((gs + (m - 1) * gf) * (gs + (2 * m - 1) * gf))
    return value


def filtered_population_closed(params: Analytic2lsParams) -> float:
    """Population transmitted by a Lorentzian filter of width Gamma."""
    gs = params.Gamma_sigma
    gf = params.Gamma
    return params.P * gf / (gs * gf + gs * gs)


def _is_nonpositive_integer(b: float) -> bool:
    return abs(b - round(b)) < 1e-12 and round(b) <= 0


def hyp1f2(a: float, b1: float, b2: float, z: float, max_terms: int = 10000) -> float:
    """1F2(a; b1, b2; z) by term recursion.

    The series is entire in z; summation stops once three consecutive
    terms fall below 1e-16 of the running sum. Lower-parameter poles are
    rejected. A growth guard raises rather than return a sum that has
    cancelled away its significant digits.
    """
    for b in (b1, b2):
        if _is_nonpositive_integer(b):
            raise ValidationError(f"lower parameter {b} hits a pole of 1F2")
    total = 1.0
    term = 1.0
    max_term = 1.0
    small = 0
    for m in range(max_terms):
        term *= (a + m) * z / ((b1 + m) * (b2 + m) * (m + 1))
        total += term
        max_term = max(max_term, abs(term))
        if abs(term) < 1e-16 * max(abs(total), 1e-300):
            small += 1
            if small >= 3:
                break
        else:
            small = 0
    else:
        raise NonConvergentSeriesError(f"1F2 did not settle in {max_terms} terms")
    if max_term > 1e12 * max(abs(total), 1e-300):
        raise NonConvergentSeriesError(
            f"1F2 cancellation: largest term {max_term:.3e} vs sum {total:.3e}"
        )
    return total


def cn_coefficients(params: Analytic2lsParams, n_max: int) -> list[float]:
    """C_0..C_n_max with C_0 = 1 and
    C_n / C_(n-1) = P*Gamma / ((Gs+(n-1)*Gamma) * (Gs+(2n-1)*Gamma))."""
    if n_max < 0:
        raise ValidationError(f"n_max must be >= 0, got {n_max}")
    gs = params.Gamma_sigma
    gf = params.Gamma
    out = [1.0]
    for n in range(1, n_max + 1):
        out.append(
            out[-1] * params.P * gf / ((gs + (n - 1) * gf) * (gs + (2 * n - 1) * gf))
        )
    return out


def pn_closed_form(params: Analytic2lsParams, n: int) -> float:
    """Filtered probability of n photons, in closed form.

    p(n) = C_n * 1F2(n+1; n + r, n + (r+1)/2; -P/(2*Gamma)) with
    r = Gamma_sigma / Gamma. The half on the r in the second lower
    parameter is forced by the C_n recursion: with r instead of (r+1)/2's
    half-shift the sum of p(n) is not 1 and the correlator cross-check
    fails, both by percent-level amounts.
    """
    if n < 0:
        raise ValidationError(f"n must be >= 0, got {n}")
    if params.Gamma <= 0:
        raise ValidationError("closed-form distribution needs Gamma > 0")
    if params.P == 0:
        return 1.0 if n == 0 else 0.0
    r = params.Gamma_sigma / params.Gamma
    cn = cn_coefficients(params, n)[n]
    return cn * hyp1f2(n + 1.0, n + r, n + (r + 1.0) / 2.0, -params.P / (2.0 * params.Gamma))

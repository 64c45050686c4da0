"""N-norm single-photon-source criterion and benchmark comparison.

||(g^(k))||_N = (sum_{k=2}^{N+1} (g^(k))^N)^(1/N); the infinity norm is
the worst offending order. Components are always indexed by explicit
correlation order starting at k = 2; off-by-one is the classic bug here.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ValidationError


def n_norm(g: list[float], N: int) -> float:
    """N-norm of [g^(2), ..., g^(N+1), ...]; uses exactly orders 2..N+1."""
    if N < 1:
        raise ValidationError(f"norm order must be >= 1, got {N}")
    if len(g) < N:
        missing = 2 + len(g)
        raise ValidationError(
            f"norm of order {N} needs g^(2)..g^({N + 1}); first missing order is {missing}"
        )
    comps = [float(v) for v in g[:N]]
    if any(v < 0 for v in comps):
        raise ValidationError("correlation components must be >= 0")
    return sum(v ** N for v in comps) ** (1.0 / N)


def infinity_norm(g: list[float]) -> tuple[float, int]:
    """(max component, its order); ties break toward the lowest order."""
    if not g:
        raise ValidationError("infinity norm of an empty component list")
    comps = [float(v) for v in g]
    if any(v < 0 for v in comps):
        raise ValidationError("correlation components must be >= 0")
    best = max(comps)
    order = 2 + comps.index(best)  # first occurrence = lowest order
    return best, order


@dataclass(frozen=True)
class NormReport:
    """One source's N-norm at one filter setting."""

    N: int
    value: float
    components: tuple[float, ...]  # g^(2)..g^(N+1)
    source_label: str
    filtered: bool = True
    Gamma: float | None = None
    omega_f: float | None = None

    def __post_init__(self):
        comps = tuple(float(v) for v in self.components)
        object.__setattr__(self, "components", comps)
        if len(comps) != self.N:
            raise ValidationError(
                f"norm of order {self.N} carries {len(comps)} components, needs {self.N}"
            )
        expected = n_norm(list(comps), self.N)
        if abs(expected - self.value) > 1e-9 * max(1.0, abs(expected)):
            raise ValidationError("value does not match its components")
        top = max(comps) if comps else 0.0
        # norm equivalence: max <= value <= N^(1/N) * max
        slack = 1e-9 * max(1.0, top)
        if not (top - slack <= self.value <= self.N ** (1.0 / self.N) * top + slack):
            raise ValidationError("norm equivalence bounds violated")


@dataclass(frozen=True)
class BenchmarkOrdering:
    gammas: tuple[float, ...]
    ranking: dict = field(repr=False)  # Gamma -> [(label, value)] ascending
    beats_benchmark: dict = field(default_factory=dict)


def benchmark_compare(
    reports: list[NormReport], benchmark_label: str = "incoherent-2ls"
) -> BenchmarkOrdering:
    """Per-Gamma ranking of sources, each judged against the benchmark curve.

    A source beats the benchmark when its norm is strictly below the
    benchmark's at every shared grid point.
    """
    if not reports:
        raise ValidationError("nothing to compare")
    orders = {r.N for r in reports}
    if len(orders) > 1:
        raise ValidationError(f"mixed norm orders {sorted(orders)}")
    curves: dict[str, dict[float, float]] = {}
    for r in reports:
        if r.Gamma is None:
            raise ValidationError(f"report for {r.source_label} lacks a filter linewidth")
        curves.setdefault(r.source_label, {})[r.Gamma] = r.value
    grids = {label: tuple(sorted(c)) for label, c in curves.items()}
    grid0 = next(iter(grids.values()))
    for label, grid in grids.items():
        if grid != grid0:
            raise ValidationError(f"grid of {label} does not match the others")
    if benchmark_label not in curves:
        raise ValidationError(f"benchmark source {benchmark_label!r} missing")
    ranking = {
        g: sorted(((label, c[g]) for label, c in curves.items()), key=lambda t: t[1])
        for g in grid0
    }
    bench = curves[benchmark_label]
    beats = {
        label: all(c[g] < bench[g] for g in grid0)
        for label, c in curves.items()
        if label != benchmark_label
    }
    return BenchmarkOrdering(gammas=grid0, ranking=ranking, beats_benchmark=beats)

"""Closed-form diversity-multiplexing analysis for selective-fading MACs.

Per-subset diversity curves, dominant outage sets, the optimal tradeoff, the
two-user dominant-region partition, and multiplexing-rate regions at a target
diversity order.  Everything here is deterministic arithmetic on piecewise
linear curves; Monte Carlo lives in :mod:`macdmt.simulate`.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ContractViolationError, DomainError, InfeasibleRateError
from .numerics import hermitian_eigenvalues, rank_with_tol, require_hermitian

COV_RANK_RTOL = 1e-9
UNIT_DIAG_TOL = 1e-9

# Relative tolerance when deciding that two subset exponents tie for the
# minimum.  Symmetric ties are exact in floating point; this only matters for
# grid points that land on analytic region boundaries.
TIE_RTOL = 1e-9


@dataclass(frozen=True)
class ChannelSpec:
    """Static description of a selective-fading MAC.

    users transmit with mt antennas each towards an mr-antenna receiver over
    block_len slots whose scalar subchannels share the covariance matrix
    ``covariance`` (unit diagonal, Hermitian PSD).  ``cov_rank`` is derived.
    """

    users: int
    mt: int
    mr: int
    block_len: int
    covariance: np.ndarray
    cov_rank: int = field(init=False)

    def __post_init__(self):
        for name in ("users", "mt", "mr", "block_len"):
            if getattr(self, name) < 1:
                raise DomainError(f"{name} must be >= 1, got {getattr(self, name)}")
        cov = require_hermitian(self.covariance).copy()
        if cov.shape[0] != self.block_len:
            raise ContractViolationError(
                f"covariance is {cov.shape[0]}x{cov.shape[1]} but block_len={self.block_len}"
            )
        w = hermitian_eigenvalues(cov)
        if w[0] < -1e-10:
            raise ContractViolationError(
                f"covariance is not PSD: eigenvalues {np.array2string(w, precision=3)}"
            )
        diag = np.diagonal(cov)
        if np.abs(diag - 1.0).max() > UNIT_DIAG_TOL:
            raise ContractViolationError(
                "covariance diagonal must be 1 (unit-power scalar subchannels)"
            )
        cov.setflags(write=False)
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "cov_rank", rank_with_tol(cov, COV_RANK_RTOL))


def normalize_subset(spec: ChannelSpec, subset: Iterable[int]) -> tuple[int, ...]:
    """Canonical (sorted, validated) user subset."""
    members = tuple(sorted(set(int(u) for u in subset)))
    if not members:
        raise ContractViolationError("user subset must be nonempty")
    if members[0] < 1 or members[-1] > spec.users:
        raise ContractViolationError(
            f"subset {members} outside user range 1..{spec.users}"
        )
    return members


def all_subsets(users: int) -> list[tuple[int, ...]]:
    """All nonempty user subsets, by size then lexicographically."""
    out = []
    for size in range(1, users + 1):
        out.extend(itertools.combinations(range(1, users + 1), size))
    return out


def min_dim(spec: ChannelSpec, subset: Sequence[int]) -> int:
    """min(|S| mt, mr): spatial dimension limiting the subset's multiplexing."""
    return min(len(subset) * spec.mt, spec.mr)


def max_dim(spec: ChannelSpec, subset: Sequence[int]) -> int:
    return max(len(subset) * spec.mt, spec.mr)


@dataclass(frozen=True)
class DmtCurve:
    """Piecewise-linear diversity curve anchored at integer multiplexing rates."""

    anchors: tuple[tuple[int, float], ...]

    @property
    def max_rate(self) -> int:
        return self.anchors[-1][0]

    @property
    def max_diversity(self) -> float:
        return self.anchors[0][1]

    def evaluate(self, r: float) -> float:
        """Diversity order at multiplexing rate r (linear between anchors)."""
        if r < 0 or r > self.max_rate:
            raise DomainError(f"rate {r} outside [0, {self.max_rate}]")
        k = min(int(math.floor(r)), self.max_rate - 1)
        d0 = self.anchors[k][1]
        d1 = self.anchors[k + 1][1]
        return d0 + (d1 - d0) * (r - k)

    def inverse(self, d: float) -> float:
        """The unique r with evaluate(r) == d; the curve is strictly decreasing."""
        if d < 0 or d > self.max_diversity:
            raise DomainError(f"diversity {d} outside [0, {self.max_diversity}]")
        for k in range(self.max_rate):
            d0 = self.anchors[k][1]
            d1 = self.anchors[k + 1][1]
            if d1 <= d <= d0:
                return k + (d0 - d) / (d0 - d1)
        return float(self.max_rate)  # d == 0 up to roundoff


def dmt_curve(spec: ChannelSpec, subset: Iterable[int]) -> DmtCurve:
    """Diversity curve of one user subset.

    Integer anchors sit at (r, (m - r) * (rho * M - r)) with m = min(|S| mt, mr)
    and M = max(|S| mt, mr); anchor values are exact integers.
    """
    members = normalize_subset(spec, subset)
    m = min_dim(spec, members)
    big = max_dim(spec, members)
    rho = spec.cov_rank
    anchors = tuple((r, (m - r) * (rho * big - r)) for r in range(m + 1))
    return DmtCurve(anchors)


def eval_dmt(curve: DmtCurve, r: float) -> float:
    return curve.evaluate(r)


def inverse_dmt(curve: DmtCurve, d: float) -> float:
    return curve.inverse(d)


def quadratic_dmt(spec: ChannelSpec, subset: Iterable[int], r: float) -> float:
    """Diagnostic only: the quadratic (m - r)(rho M - r) at non-integer r.

    The tradeoff itself is the piecewise linear interpolation of the integer
    anchors; the quadratic agrees with it only at integers.
    """
    members = normalize_subset(spec, subset)
    m = min_dim(spec, members)
    big = max_dim(spec, members)
    if r < 0 or r > m:
        raise DomainError(f"rate {r} outside [0, {m}]")
    return (m - r) * (spec.cov_rank * big - r)


def sum_rate(rates: Sequence[float], subset: Sequence[int]) -> float:
    return float(sum(rates[u - 1] for u in subset))


def validate_rates(spec: ChannelSpec, rates: Sequence[float], strict: bool = True) -> tuple[float, ...]:
    """Check a multiplexing-rate tuple against every subset bound r(S) < m(S)."""
    r = tuple(float(x) for x in rates)
    if len(r) != spec.users:
        raise DomainError(f"expected {spec.users} rates, got {len(r)}")
    if min(r) < 0:
        raise DomainError("multiplexing rates must be nonnegative")
    for subset in all_subsets(spec.users):
        rs = sum_rate(r, subset)
        m = min_dim(spec, subset)
        if rs > m or (strict and rs >= m):
            raise InfeasibleRateError(
                f"rate sum {rs:g} for subset {subset} reaches the bound m(S)={m}",
                subset=subset,
            )
    return r


@dataclass(frozen=True)
class DominantReport:
    """Per-subset exponents together with every subset achieving the minimum."""

    exponents: tuple[tuple[tuple[int, ...], float], ...]
    dominant: tuple[tuple[int, ...], ...]
    optimal_d: float


def dominant_set(spec: ChannelSpec, rates: Sequence[float]) -> DominantReport:
    """Evaluate all 2^U - 1 subset exponents and report every minimizer.

    Ties are reported, not broken: the optimal exponent is unique even when
    the dominant set is not.
    """
    r = validate_rates(spec, rates, strict=True)
    entries = []
    for subset in all_subsets(spec.users):
        curve = dmt_curve(spec, subset)
        entries.append((subset, curve.evaluate(sum_rate(r, subset))))
    best = min(v for _, v in entries)
    tol = TIE_RTOL * max(1.0, abs(best))
    dominant = tuple(s for s, v in entries if v <= best + tol)
    return DominantReport(tuple(entries), dominant, best)


def optimal_dmt(spec: ChannelSpec, rates: Sequence[float]) -> float:
    """Optimal diversity order for a rate tuple: the dominant subset's exponent."""
    return dominant_set(spec, rates).optimal_d


_REGION_LABELS = {(1,): "O1", (2,): "O2", (1, 2): "O3"}


def classify_region_grid(spec: ChannelSpec, step: float) -> list[tuple[float, float, str]]:
    """Label a two-user rate grid by dominant outage event.

    Grid points (i*step, j*step) strictly inside the region bounded by the
    per-user and sum-rate limits get the label of their dominant subset, or a
    deterministic ``tie:...`` label when several subsets tie.
    """
    if spec.users != 2:
        raise DomainError("region grids are only defined for two users")
    if step <= 0:
        raise DomainError(f"step must be positive, got {step}")
    m1 = min_dim(spec, (1,))
    msum = min_dim(spec, (1, 2))

    idx = np.arange(int(math.ceil(m1 / step)) + 1)
    vals = idx * step
    vals = vals[vals < m1]
    r1, r2 = np.meshgrid(vals, vals, indexing="ij")
    mask = (r1 + r2) < msum
    r1 = r1[mask]
    r2 = r2[mask]

    single = dmt_curve(spec, (1,))
    pair = dmt_curve(spec, (1, 2))
    s_r, s_d = zip(*single.anchors)
    p_r, p_d = zip(*pair.anchors)
    d1 = np.interp(r1, s_r, s_d)
    d2 = np.interp(r2, s_r, s_d)
    d3 = np.interp(r1 + r2, p_r, p_d)

    stacked = np.stack([d1, d2, d3])
    best = stacked.min(axis=0)
    tol = TIE_RTOL * np.maximum(1.0, np.abs(best))
    is_min = stacked <= best + tol

    labels = []
    names = ("O1", "O2", "O3")
    for flags in is_min.T:
        winners = [names[i] for i in range(3) if flags[i]]
        labels.append(winners[0] if len(winners) == 1 else "tie:" + ",".join(winners))
    return [(float(a), float(b), lab) for a, b, lab in zip(r1, r2, labels)]


def max_diversity(spec: ChannelSpec) -> int:
    """Largest diversity order any rate region supports: the single-user value."""
    return spec.cov_rank * spec.mt * spec.mr


def rate_region_constraints(spec: ChannelSpec, d: float) -> list[tuple[tuple[int, ...], float]]:
    """Per-subset rate bounds r(S) <= r_S(d) describing the region at diversity d."""
    dmax = max_diversity(spec)
    if d < 0 or d > dmax:
        raise DomainError(f"diversity {d} outside [0, {dmax}]")
    out = []
    for subset in all_subsets(spec.users):
        curve = dmt_curve(spec, subset)
        bound = min(curve.inverse(d), float(min_dim(spec, subset)))
        out.append((subset, bound))
    return out


def rate_region_vertices_2user(spec: ChannelSpec, d: float) -> list[tuple[float, float]]:
    """Vertices of the two-user region at diversity d, counterclockwise from the origin.

    The region is {r1 <= a, r2 <= a', r1 + r2 <= b} in the nonnegative
    quadrant; when b >= a + a' the sum constraint is slack and the region is
    the full rectangle.
    """
    if spec.users != 2:
        raise DomainError("vertex enumeration is only provided for two users")
    bounds = dict(rate_region_constraints(spec, d))
    a = bounds[(1,)]
    a2 = bounds[(2,)]
    b = bounds[(1, 2)]

    poly = [(0.0, 0.0), (a, 0.0), (a, a2), (0.0, a2)]
    if b < a + a2:
        poly = _clip_halfplane_sum(poly, b)
    # drop consecutive duplicates (degenerate zero-size edges)
    out: list[tuple[float, float]] = []
    for p in poly:
        if not out or (abs(p[0] - out[-1][0]) > 1e-15 or abs(p[1] - out[-1][1]) > 1e-15):
            out.append(p)
    while len(out) > 1 and out[0] == out[-1]:
        out.pop()
    # rotate so the origin comes first
    if (0.0, 0.0) in out:
        k = out.index((0.0, 0.0))
        out = out[k:] + out[:k]
    return out


def _clip_halfplane_sum(poly: list[tuple[float, float]], b: float) -> list[tuple[float, float]]:
    """Sutherland-Hodgman clip of a CCW polygon against x + y <= b."""
    out = []
    n = len(poly)
    for i in range(n):
        p = poly[i]
        q = poly[(i + 1) % n]
        p_in = p[0] + p[1] <= b
        q_in = q[0] + q[1] <= b
        if p_in:
            out.append(p)
        if p_in != q_in:
            # intersection of segment pq with x + y == b
            denom = (q[0] + q[1]) - (p[0] + p[1])
            t = (b - (p[0] + p[1])) / denom
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def feasible(spec: ChannelSpec, rates: Sequence[float], d: float) -> bool:
    """True when every subset satisfies r(S) <= r_S(d) (closed bounds)."""
    r = tuple(float(x) for x in rates)
    if len(r) != spec.users or min(r) < 0:
        raise DomainError("rates must be a nonnegative tuple of length users")
    for subset, bound in rate_region_constraints(spec, d):
        if sum_rate(r, subset) > bound:
            return False
    return True

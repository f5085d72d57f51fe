"""Monte Carlo engine for correlated selective-fading MACs.

Channel sampling with slot covariance, per-subset mutual information, the
concatenated-slot upper bound ("Jensen channel"), outage and union-outage
probability estimation, and SNR-exponent fitting.  Trials are evaluated in
fixed-size chunks addressed by counter blocks, so estimates are identical for
any thread count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dmt import ChannelSpec, all_subsets, normalize_subset, sum_rate
from .errors import (
    ContractViolationError,
    DomainError,
    InsufficientTrialsError,
    NotPsdError,
)
from .numerics import (
    RngStream,
    complex_normal,
    hermitian_eigenvalues,
    logdet_eye_plus_gram_batched,
    psd_sqrt,
)

TRIAL_CHUNK = 8192


def correlation_preset(name: str, block_len: int, a: float | None = None) -> np.ndarray:
    """Slot covariance matrix for a named correlation model.

    iid -> identity (rank N), flat -> all-ones (rank 1),
    exponential -> entries a**|n - n'| with 0 < a < 1.  Unit diagonal always.
    """
    if block_len < 1:
        raise DomainError(f"block_len must be >= 1, got {block_len}")
    if name == "iid":
        return np.eye(block_len, dtype=np.complex128)
    if name == "flat":
        return np.ones((block_len, block_len), dtype=np.complex128)
    if name == "exponential":
        if a is None or not 0.0 < a < 1.0:
            raise DomainError(f"exponential preset needs 0 < a < 1, got {a}")
        n = np.arange(block_len)
        return (a ** np.abs(n[:, None] - n[None, :])).astype(np.complex128)
    raise DomainError(f"unknown correlation preset {name!r}")


def load_covariance(path) -> np.ndarray:
    """Load a covariance matrix from JSON {"n": N, "re": [[...]], "im": [[...]]}.

    Rejects non-PSD input with an eigenvalue report.
    """
    with open(path) as fh:
        data = json.load(fh)
    try:
        n = int(data["n"])
        cov = np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ContractViolationError(f"malformed covariance file {path}: {exc}") from exc
    if cov.shape != (n, n):
        raise ContractViolationError(
            f"covariance file declares n={n} but matrix is {cov.shape}"
        )
    w = hermitian_eigenvalues(cov)
    if w[0] < -1e-10:
        raise NotPsdError(
            f"covariance in {path} is not PSD: eigenvalues {np.array2string(w, precision=4)}"
        )
    return cov


@dataclass(frozen=True)
class ChannelRealization:
    """One drawn channel: slots[u - 1, n] is the mr x mt matrix of user u in slot n."""

    spec: ChannelSpec
    slots: np.ndarray  # (users, block_len, mr, mt)

    def stacked(self, subset: Sequence[int]) -> np.ndarray:
        """Per-slot column-stacked matrices of the subset, shape (N, mr, |S| mt)."""
        members = normalize_subset(self.spec, subset)
        return np.concatenate([self.slots[u - 1] for u in members], axis=-1)


def _sqrt_cov(spec: ChannelSpec) -> np.ndarray:
    return psd_sqrt(spec.covariance)


def _sample_slots(spec: ChannelSpec, gen: np.random.Generator, count: int,
                  sqrt_cov: np.ndarray) -> np.ndarray:
    """Draw ``count`` channel realizations, shape (count, users, N, mr, mt).

    Each scalar subchannel's length-N slot vector is sqrt_cov @ w with w i.i.d.
    unit-variance complex Gaussian; users are independent.
    """
    w = complex_normal(gen, (count, spec.users, spec.mr, spec.mt, spec.block_len))
    h = w @ sqrt_cov.T  # h[..., n] = sum_k sqrt_cov[n, k] w[..., k]
    return np.moveaxis(h, -1, 2)


def sample_channel(spec: ChannelSpec, rng: RngStream, block: int = 0) -> ChannelRealization:
    """Draw a single correlated channel realization at the given counter block."""
    slots = _sample_slots(spec, rng.generator(block), 1, _sqrt_cov(spec))[0]
    return ChannelRealization(spec, slots)


def _stack_batch(slots: np.ndarray, members: tuple[int, ...]) -> np.ndarray:
    """(batch, users, N, mr, mt) -> (batch, N, mr, |S| mt)."""
    return np.concatenate([slots[:, u - 1] for u in members], axis=-1)


def _avg_mi_batch(spec: ChannelSpec, slots: np.ndarray, members: tuple[int, ...],
                  snr: float) -> np.ndarray:
    """Slot-averaged mutual information per realization, nats."""
    h = _stack_batch(slots, members)  # (batch, N, mr, s*mt)
    vals = logdet_eye_plus_gram_batched(snr / spec.mt, h)  # (batch, N)
    return vals.mean(axis=-1)


def _jensen_batch(spec: ChannelSpec, slots: np.ndarray, members: tuple[int, ...],
                  snr: float) -> np.ndarray:
    """Concatenated-slot (Jensen channel) mutual information per realization, nats."""
    h = _stack_batch(slots, members)  # (batch, N, mr, s*mt)
    batch, n, mr, smt = h.shape
    if mr <= smt:
        wide = np.swapaxes(h, 1, 2).reshape(batch, mr, n * smt)
    else:
        hh = np.swapaxes(h.conj(), -1, -2)  # per-slot conjugate transposes
        wide = np.swapaxes(hh, 1, 2).reshape(batch, smt, n * mr)
    return logdet_eye_plus_gram_batched(snr / (spec.mt * n), wide)


def avg_mutual_info(real: ChannelRealization, subset: Sequence[int], snr: float) -> float:
    """(1/N) sum_n log det(I + (snr/mt) H_n H_n^H) for the subset's stacked slots."""
    if snr < 0:
        raise DomainError(f"snr must be nonnegative, got {snr}")
    members = normalize_subset(real.spec, subset)
    return float(_avg_mi_batch(real.spec, real.slots[None], members, snr)[0])


def jensen_info(real: ChannelRealization, subset: Sequence[int], snr: float) -> float:
    """log det(I + snr/(mt N) * K K^H) with K the slot concatenation of the subset.

    K stacks the per-slot matrices (or their conjugate transposes when
    mr > |S| mt) so the result upper-bounds avg_mutual_info realization by
    realization, with equality at N = 1.
    """
    if snr < 0:
        raise DomainError(f"snr must be nonnegative, got {snr}")
    members = normalize_subset(real.spec, subset)
    return float(_jensen_batch(real.spec, real.slots[None], members, snr)[0])


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo probability estimate with a Wald confidence half-width."""

    p_hat: float
    successes: int
    trials: int
    ci95: float
    seed: RngStream


def _wald_halfwidth(successes: int, trials: int) -> float:
    p = successes / trials
    return 1.96 * math.sqrt(p * (1.0 - p) / trials)


def clopper_pearson(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Exact binomial interval; preferred over Wald when counts are below ~30."""
    from scipy.stats import beta

    alpha = 1.0 - confidence
    lo = 0.0 if successes == 0 else float(beta.ppf(alpha / 2, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(beta.ppf(1 - alpha / 2, successes + 1, trials - successes))
    return lo, hi


def _subset_targets(spec: ChannelSpec, rates: Sequence[float], snr: float,
                    subsets: Sequence[tuple[int, ...]], fixed_rate_nats: float) -> list[float]:
    if snr <= 1.0:
        raise DomainError(
            f"snr must exceed 1 (0 dB): rate targets r(S) log snr degenerate at snr={snr:g}"
        )
    log_snr = math.log(snr)
    return [sum_rate(rates, s) * log_snr + fixed_rate_nats * len(s) for s in subsets]


def _count_chunks(spec: ChannelSpec, rng: RngStream, trials: int, threads: int,
                  chunk_fn: Callable[[np.ndarray], int]) -> int:
    """Run chunk_fn over fixed-size channel chunks; sum of counts is schedule-independent."""
    sqrt_cov = _sqrt_cov(spec)
    starts = list(range(0, trials, TRIAL_CHUNK))

    def one(start: int) -> int:
        count = min(TRIAL_CHUNK, trials - start)
        gen = rng.generator(block=start)
        slots = _sample_slots(spec, gen, count, sqrt_cov)
        return chunk_fn(slots)

    if threads <= 1 or len(starts) == 1:
        return sum(one(s) for s in starts)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return sum(pool.map(one, starts))


def estimate_outage(spec: ChannelSpec, rates: Sequence[float], subset: Sequence[int],
                    snr: float, trials: int, rng: RngStream,
                    fixed_rate_nats: float = 0.0, threads: int = 1) -> McEstimate:
    """Frequency of the subset's slot-averaged mutual information falling below target.

    The target rate is r(S) log snr plus ``fixed_rate_nats`` per subset member,
    which keeps zero-multiplexing runs (fixed-rate outage) meaningful.
    """
    return _estimate_event(spec, rates, subset, snr, trials, rng, fixed_rate_nats,
                           threads, _avg_mi_batch)


def estimate_jensen_outage(spec: ChannelSpec, rates: Sequence[float], subset: Sequence[int],
                           snr: float, trials: int, rng: RngStream,
                           fixed_rate_nats: float = 0.0, threads: int = 1) -> McEstimate:
    """Outage frequency of the concatenated-slot bound; never above estimate_outage."""
    return _estimate_event(spec, rates, subset, snr, trials, rng, fixed_rate_nats,
                           threads, _jensen_batch)


def _estimate_event(spec, rates, subset, snr, trials, rng, fixed_rate_nats, threads, info_fn):
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    members = normalize_subset(spec, subset)
    rates = tuple(float(x) for x in rates)
    (target,) = _subset_targets(spec, rates, snr, [members], fixed_rate_nats)

    def chunk_fn(slots: np.ndarray) -> int:
        return int(np.count_nonzero(info_fn(spec, slots, members, snr) < target))

    successes = _count_chunks(spec, rng, trials, threads, chunk_fn)
    return McEstimate(successes / trials, successes, trials,
                      _wald_halfwidth(successes, trials), rng)


def estimate_total_outage(spec: ChannelSpec, rates: Sequence[float], snr: float,
                          trials: int, rng: RngStream, fixed_rate_nats: float = 0.0,
                          threads: int = 1) -> McEstimate:
    """Frequency of the union outage event over all nonempty subsets.

    Each realization is drawn once and checked against every subset condition,
    so union/marginal comparisons are exact under a shared seed.
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    rates = tuple(float(x) for x in rates)
    subsets = [normalize_subset(spec, s) for s in all_subsets(spec.users)]
    targets = _subset_targets(spec, rates, snr, subsets, fixed_rate_nats)

    def chunk_fn(slots: np.ndarray) -> int:
        hit = np.zeros(slots.shape[0], dtype=bool)
        for members, target in zip(subsets, targets):
            hit |= _avg_mi_batch(spec, slots, members, snr) < target
        return int(np.count_nonzero(hit))

    successes = _count_chunks(spec, rng, trials, threads, chunk_fn)
    return McEstimate(successes / trials, successes, trials,
                      _wald_halfwidth(successes, trials), rng)


def rayleigh_outage_probability(snr: float, r: float, fixed_rate_nats: float = 0.0) -> float:
    """Closed-form scalar Rayleigh outage: P(log(1 + snr |h|^2) < target).

    With target = r log snr + fixed_rate_nats this is
    1 - exp(-(exp(target) - 1) / snr); the independent oracle used to calibrate
    the estimators.
    """
    if snr <= 1.0:
        raise DomainError(f"snr must exceed 1, got {snr}")
    target = r * math.log(snr) + fixed_rate_nats
    return 1.0 - math.exp(-(math.exp(target) - 1.0) / snr)


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares SNR exponent of a probability curve: p(snr) ~ snr^-exponent."""

    snr_grid_db: tuple[float, ...]
    log10_p: tuple[float, ...]
    exponent: float
    stderr: float


def fit_snr_exponent(points: Sequence[tuple[float, "McEstimate | float"]]) -> SlopeFit:
    """Fit log10 p against log10 snr over >= 3 SNR points; exponent = -slope.

    Raises InsufficientTrialsError naming the first SNR point whose estimate
    is exactly zero (silently dropping such points would bias the slope).
    """
    if len(points) < 3:
        raise DomainError(f"need >= 3 SNR points for a slope fit, got {len(points)}")
    xs, ys, dbs = [], [], []
    for snr_db, est in points:
        p = est.p_hat if isinstance(est, McEstimate) else float(est)
        if p <= 0.0:
            raise InsufficientTrialsError(
                f"estimate is zero at {snr_db:g} dB; increase trials before fitting"
            )
        dbs.append(float(snr_db))
        xs.append(snr_db / 10.0)  # log10 of linear SNR
        ys.append(math.log10(p))
    x = np.asarray(xs)
    y = np.asarray(ys)
    xm = x - x.mean()
    sxx = float(xm @ xm)
    if sxx <= 0:
        raise DomainError("SNR grid points must not all coincide")
    slope = float(xm @ (y - y.mean())) / sxx
    resid = y - (y.mean() + slope * xm)
    dof = len(x) - 2
    stderr = math.sqrt(max(float(resid @ resid), 0.0) / dof / sxx) if dof > 0 else 0.0
    return SlopeFit(tuple(dbs), tuple(ys), -slope, stderr)


def db_to_linear(snr_db: float) -> float:
    return 10.0 ** (snr_db / 10.0)


def parse_snr_grid(text: str) -> list[float]:
    """Parse a dB grid 'start:stop:step' (inclusive stop) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise DomainError(f"grid must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise DomainError(f"bad grid {text!r}")
        count = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [start + i * step for i in range(count)]
    return [float(p) for p in text.split(",") if p]

"""Code design criteria for finite codebooks and an exhaustive ML error-event simulator.

The central object is the per-subset quantity Lambda: the minimum, over
codeword-difference tuples with every subset member in error, of the product
of the m(S) smallest structurally nonzero eigenvalues of the covariance-shaped
difference Gram matrix.  Its SNR decay is compared against target exponents
supplied by the tradeoff analysis.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dmt import ChannelSpec, all_subsets, dmt_curve, min_dim, normalize_subset, optimal_dmt
from .errors import CapExceededError, ContractViolationError, DomainError
from .numerics import RngStream, complex_normal
from .simulate import _sample_slots, _sqrt_cov

POWER_SLACK = 1e-9
DEDUPE_DECIMALS = 9
TUPLE_CHUNK = 1 << 17


@dataclass(frozen=True)
class CodebookSet:
    """Per-user finite codebooks (mt x N complex codewords) at one SNR point."""

    codewords: tuple[np.ndarray, ...]  # each (count, mt, block_len)
    rates: tuple[float, ...]
    snr: float

    @property
    def users(self) -> int:
        return len(self.codewords)

    @property
    def mt(self) -> int:
        return self.codewords[0].shape[1]

    @property
    def block_len(self) -> int:
        return self.codewords[0].shape[2]


def make_codebook_set(codewords: Sequence[np.ndarray], rates: Sequence[float],
                      snr: float) -> CodebookSet:
    """Validate shapes, distinctness, and the per-codeword power budget mt*N."""
    if not codewords:
        raise ContractViolationError("at least one user codebook is required")
    arrays = []
    mt = block_len = None
    for u, cw in enumerate(codewords, start=1):
        arr = np.asarray(cw, dtype=np.complex128)
        if arr.ndim != 3 or arr.shape[0] < 1:
            raise ContractViolationError(
                f"user {u} codebook must be (count, mt, N), got {arr.shape}"
            )
        if mt is None:
            mt, block_len = arr.shape[1], arr.shape[2]
        elif arr.shape[1:] != (mt, block_len):
            raise ContractViolationError("all users must share the codeword shape")
        power = np.sum(np.abs(arr) ** 2, axis=(1, 2))
        budget = mt * block_len + POWER_SLACK
        if power.max() > budget:
            raise ContractViolationError(
                f"user {u} codeword power {power.max():.9f} exceeds budget {mt * block_len}"
            )
        rounded = np.round(arr.reshape(arr.shape[0], -1), DEDUPE_DECIMALS)
        if len(np.unique(rounded, axis=0)) != arr.shape[0]:
            raise ContractViolationError(f"user {u} codebook contains duplicate codewords")
        arrays.append(arr)
    r = tuple(float(x) for x in rates)
    if len(r) != len(arrays):
        raise ContractViolationError("one multiplexing rate per user is required")
    return CodebookSet(tuple(arrays), r, float(snr))


def save_codebooks(path, codebooks: CodebookSet) -> None:
    """Write the wire format: a JSON array per user of {re, im} codeword objects."""
    data = [
        [{"re": cw.real.tolist(), "im": cw.imag.tolist()} for cw in user_cw]
        for user_cw in codebooks.codewords
    ]
    with open(path, "w") as fh:
        json.dump(data, fh)


def load_codebooks(path, rates: Sequence[float], snr: float) -> CodebookSet:
    """Read the JSON codebook format and re-validate every contract."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, list) or not data:
        raise ContractViolationError(f"{path}: expected a JSON array per user")
    users = []
    for entry in data:
        cws = [np.asarray(c["re"], dtype=float) + 1j * np.asarray(c["im"], dtype=float)
               for c in entry]
        users.append(np.stack(cws))
    return make_codebook_set(users, rates, snr)


def difference_gram(spec: ChannelSpec, subset: Sequence[int],
                    diffs: Sequence[np.ndarray]) -> np.ndarray:
    """Covariance-shaped difference Gram: cov^T (Hadamard) sum_u E_u^H E_u.

    Requires block length N >= rho |S| mt so the rank bookkeeping of the
    design criterion applies.
    """
    members = normalize_subset(spec, subset)
    if len(diffs) != len(members):
        raise ContractViolationError("one difference matrix per subset member")
    _check_block_len(spec, members)
    total = np.zeros((spec.block_len, spec.block_len), dtype=np.complex128)
    for e in diffs:
        arr = np.asarray(e, dtype=np.complex128)
        if arr.shape != (spec.mt, spec.block_len):
            raise ContractViolationError(
                f"difference must be mt x N = {spec.mt}x{spec.block_len}, got {arr.shape}"
            )
        total += arr.conj().T @ arr
    return spec.covariance.T * total


def _check_block_len(spec: ChannelSpec, members: tuple[int, ...]) -> None:
    need = spec.cov_rank * len(members) * spec.mt
    if spec.block_len < need:
        raise ContractViolationError(
            f"block length {spec.block_len} below rho*|S|*mt = {need}"
        )


@dataclass(frozen=True)
class LambdaResult:
    """Minimum eigenvalue-product over difference tuples, with its witness."""

    subset: tuple[int, ...]
    value: float
    argmin: tuple[np.ndarray, ...]
    eigenvalues: tuple[float, ...]  # the m(S) values whose product is taken, ascending


def _difference_sets(codebooks: CodebookSet,
                     members: tuple[int, ...]) -> list[np.ndarray]:
    """Deduplicated nonzero codeword differences per subset member."""
    out = []
    for u in members:
        cw = codebooks.codewords[u - 1]
        diffs = (cw[:, None] - cw[None, :]).reshape(-1, cw.shape[1], cw.shape[2])
        flat = np.round(diffs.reshape(diffs.shape[0], -1), DEDUPE_DECIMALS)
        nonzero = np.any(flat != 0, axis=1)
        if not nonzero.any():
            raise ContractViolationError(
                f"user {u} codebook admits no nonzero difference tuple"
            )
        _, idx = np.unique(flat[nonzero], axis=0, return_index=True)
        out.append(diffs[nonzero][np.sort(idx)])
    return out


def lambda_min(codebooks: CodebookSet, subset: Sequence[int], spec: ChannelSpec,
               cap: int = 10 ** 9) -> LambdaResult:
    """Minimize the eigenvalue product over difference tuples with all of S in error.

    For each tuple the ascending eigenvalues of the difference Gram are taken,
    the rho |S| mt structurally nonzero slots kept, and the product of the
    m(S) smallest of those formed.  Ties resolve to the first tuple in
    enumeration order.
    """
    members = normalize_subset(spec, subset)
    _check_block_len(spec, members)
    diff_sets = _difference_sets(codebooks, members)
    sizes = [d.shape[0] for d in diff_sets]
    total = math.prod(sizes)
    if total > cap:
        raise CapExceededError(
            f"{total} difference tuples exceed cap {cap}", required=total, cap=cap
        )

    n = spec.block_len
    nz = spec.cov_rank * len(members) * spec.mt
    m = min_dim(spec, members)
    cov_t = spec.covariance.T

    # Hadamard shaping distributes over the sum of per-user Grams.
    shaped = [
        cov_t * np.einsum("kit,kiu->ktu", d.conj(), d)
        for d in diff_sets
    ]

    best_val = math.inf
    best_idx: tuple[int, ...] | None = None
    use_det = (m == nz == n)
    for start in range(0, total, TUPLE_CHUNK):
        stop = min(start + TUPLE_CHUNK, total)
        flat = np.arange(start, stop)
        idx = []
        rem = flat
        for size in reversed(sizes):
            idx.append(rem % size)
            rem = rem // size
        idx.reverse()
        g = shaped[0][idx[0]].copy()
        for k in range(1, len(shaped)):
            g += shaped[k][idx[k]]
        if use_det:
            # all structurally nonzero eigenvalues enter the product
            vals = np.abs(np.linalg.det(g))
        else:
            w = np.linalg.eigvalsh(g)
            vals = np.clip(w[:, n - nz: n - nz + m], 0.0, None).prod(axis=1)
        k = int(vals.argmin())
        if vals[k] < best_val:
            best_val = float(vals[k])
            best_idx = tuple(int(idx[j][k]) for j in range(len(sizes)))

    assert best_idx is not None
    witness = tuple(diff_sets[j][best_idx[j]].copy() for j in range(len(sizes)))
    g = difference_gram(spec, members, witness)
    w = np.linalg.eigvalsh(g)
    eigs = tuple(float(x) for x in np.clip(w[n - nz: n - nz + m], 0.0, None))
    return LambdaResult(members, float(np.prod(eigs)), witness, eigs)


@dataclass(frozen=True)
class CriterionVerdict:
    """Empirical decay-rate check of Lambda against a target exponent."""

    passed: bool
    delta_hat: float | None
    target: float
    eps_margin: float
    label: str
    witness: tuple[np.ndarray, ...] | None = None


def criterion_check(lambda_by_snr: Sequence[tuple[float, "LambdaResult | float"]],
                    target_exponent: float,
                    eps_margin: float = 0.05) -> CriterionVerdict:
    """Fit the decay exponent of Lambda(snr) and compare it to the target.

    PASS means the fitted decay delta satisfies delta <= target - eps_margin;
    a Lambda that decays exactly at the target rate therefore fails under the
    default margin and passes only with eps_margin = 0.  A zero Lambda at any
    SNR fails immediately with its witness tuple.  Verdicts are empirical:
    finitely many SNR points cannot prove an asymptotic statement.
    """
    if len(lambda_by_snr) < 3:
        raise DomainError("need >= 3 (snr, Lambda) points")
    xs, ys = [], []
    for snr, lam in lambda_by_snr:
        value = lam.value if isinstance(lam, LambdaResult) else float(lam)
        if value <= 0.0:
            witness = lam.argmin if isinstance(lam, LambdaResult) else None
            return CriterionVerdict(False, None, target_exponent, eps_margin,
                                    "empirical", witness)
        xs.append(math.log10(snr))
        ys.append(math.log10(value))
    x = np.asarray(xs)
    y = np.asarray(ys)
    xm = x - x.mean()
    slope = float(xm @ (y - y.mean())) / float(xm @ xm)
    delta_hat = -slope
    passed = delta_hat <= target_exponent - eps_margin
    return CriterionVerdict(passed, delta_hat, target_exponent, eps_margin, "empirical")


def relaxed_target_bound(spec: ChannelSpec, rates: Sequence[float],
                         subset: Sequence[int]) -> float:
    """Largest admissible decay target for a non-dominant subset.

    A subset other than the dominant one only needs Lambda to decay no faster
    than snr**(-gamma) with gamma at most the subset's rate at the dominant
    exponent; this returns that upper bound r_S(d*).
    """
    members = normalize_subset(spec, subset)
    curve = dmt_curve(spec, members)
    return curve.inverse(optimal_dmt(spec, rates))


@dataclass(frozen=True)
class ErrorEventReport:
    """Per-subset ML error-event frequencies; subsets partition the error event."""

    counts: tuple[tuple[tuple[int, ...], int], ...]
    trials: int
    seed: RngStream

    def frequency(self, subset: Sequence[int]) -> float:
        key = tuple(sorted(subset))
        for s, c in self.counts:
            if s == key:
                return c / self.trials
        raise DomainError(f"subset {key} not tracked")

    @property
    def total_error(self) -> float:
        return sum(c for _, c in self.counts) / self.trials

    def dominant(self) -> tuple[tuple[int, ...], ...]:
        """Subsets with the largest observed count (ties reported)."""
        top = max(c for _, c in self.counts)
        return tuple(s for s, c in self.counts if c == top and c > 0)


def ml_error_event_sim(codebooks: CodebookSet, spec: ChannelSpec, snr: float,
                       trials: int, rng: RngStream, cap: int = 4096,
                       threads: int = 1) -> ErrorEventReport:
    """Joint exhaustive-ML decoding; classifies each error by the set of wrong users.

    Per trial: draw a channel and unit-variance noise, transmit a uniformly
    random codeword tuple, decode by minimizing the received-signal distance
    over the full joint codebook, and record which users were decoded wrong.
    """
    if trials < 1:
        raise DomainError(f"trials must be >= 1, got {trials}")
    if snr < 0:
        raise DomainError(f"snr must be nonnegative, got {snr}")
    if codebooks.users != spec.users or codebooks.mt != spec.mt \
            or codebooks.block_len != spec.block_len:
        raise ContractViolationError("codebook shape does not match the channel spec")
    sizes = [cw.shape[0] for cw in codebooks.codewords]
    joint = math.prod(sizes)
    if joint > cap:
        raise CapExceededError(
            f"joint codebook size {joint} exceeds cap {cap}", required=joint, cap=cap
        )

    # joint index -> per-user codeword indices, fixed enumeration order
    joint_idx = np.arange(joint)
    per_user_idx = []
    rem = joint_idx
    for size in reversed(sizes):
        per_user_idx.append(rem % size)
        rem = rem // size
    per_user_idx.reverse()

    scale = math.sqrt(snr / spec.mt)
    sqrt_cov = _sqrt_cov(spec)
    chunk_size = max(1, min(512, (1 << 22) // max(joint * spec.block_len * spec.mr, 1)))
    subsets = [tuple(s) for s in all_subsets(spec.users)]
    counter = {s: 0 for s in subsets}

    starts = list(range(0, trials, chunk_size))

    def one(start: int) -> dict:
        count = min(chunk_size, trials - start)
        gen = rng.generator(block=start)
        slots = _sample_slots(spec, gen, count, sqrt_cov)  # (count, U, N, mr, mt)
        noise = complex_normal(gen, (count, spec.block_len, spec.mr))
        sent = np.stack(
            [gen.integers(0, size, count) for size in sizes], axis=1
        )  # (count, U)

        # per-user received contributions for every codeword: (count, size_u, N, mr)
        contrib = [
            np.einsum("cnij,kjn->ckni", slots[:, u], codebooks.codewords[u])
            for u in range(spec.users)
        ]
        signal = np.zeros((count, joint, spec.block_len, spec.mr), dtype=np.complex128)
        for u in range(spec.users):
            signal += contrib[u][:, per_user_idx[u]]
        signal *= scale

        sent_joint = np.zeros(count, dtype=np.int64)
        for u, size in enumerate(sizes):
            sent_joint = sent_joint * size + sent[:, u]
        rows = np.arange(count)
        y = signal[rows, sent_joint] + noise

        metric = np.abs(y[:, None] - signal) ** 2
        decided = metric.sum(axis=(2, 3)).argmin(axis=1)

        local = {s: 0 for s in subsets}
        wrong = np.stack(
            [per_user_idx[u][decided] != sent[:, u] for u in range(spec.users)], axis=1
        )
        for flags in wrong:
            if flags.any():
                key = tuple(int(u + 1) for u in np.nonzero(flags)[0])
                local[key] += 1
        return local

    if threads <= 1 or len(starts) == 1:
        results = [one(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, starts))
    for local in results:
        for s in subsets:
            counter[s] += local[s]
    return ErrorEventReport(tuple((s, counter[s]) for s in subsets), trials, rng)

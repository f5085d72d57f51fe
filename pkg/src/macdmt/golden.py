"""Exact arithmetic for the two-user Golden-code MAC construction.

Elements of the quadratic extension Q(i, sqrt5) are held exactly as
u + v*sqrt5 with Gaussian-rational components, so codeword-difference
determinants admit exact zero tests and exact minimum searches.  The large
enumerations run on an integer lattice (basis (1, phi) over Z[i]) behind a
vectorized floating-point prescreen; final comparisons are always exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Sequence

import numpy as np

from .errors import CapExceededError, DomainError

SQRT5_F = math.sqrt(5.0)
PHI_F = (1.0 + SQRT5_F) / 2.0

# Conservative bound on the prescreen's floating-point error for the operand
# magnitudes that occur here; survivors within this margin of the float
# minimum are re-evaluated exactly.
_SCREEN_MARGIN = 1e-6


def _frac(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


@dataclass(frozen=True)
class GaussianRational:
    """Exact complex number with rational real and imaginary parts."""

    re: Fraction
    im: Fraction

    def __add__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __mul__(self, other: "GaussianRational") -> "GaussianRational":
        return GaussianRational(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def conjugate(self) -> "GaussianRational":
        return GaussianRational(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def to_complex(self) -> complex:
        return complex(self.re) + 1j * complex(self.im)

    def __str__(self) -> str:
        return f"{self.re}{'+' if self.im >= 0 else ''}{self.im}i"


def gaussian(re=0, im=0) -> GaussianRational:
    return GaussianRational(_frac(re), _frac(im))


@dataclass(frozen=True)
class QuadExt:
    """Element u + v*sqrt5 of Q(i, sqrt5) with Gaussian-rational u, v."""

    u: GaussianRational
    v: GaussianRational

    def __add__(self, other: "QuadExt") -> "QuadExt":
        return QuadExt(self.u + other.u, self.v + other.v)

    def __sub__(self, other: "QuadExt") -> "QuadExt":
        return QuadExt(self.u - other.u, self.v - other.v)

    def __neg__(self) -> "QuadExt":
        return QuadExt(-self.u, -self.v)

    def __mul__(self, other: "QuadExt") -> "QuadExt":
        five = gaussian(5)
        return QuadExt(
            self.u * other.u + five * (self.v * other.v),
            self.u * other.v + self.v * other.u,
        )

    def scale(self, c: GaussianRational) -> "QuadExt":
        return QuadExt(c * self.u, c * self.v)

    def conj_i(self) -> "QuadExt":
        """Complex conjugation; sqrt5 is real and stays fixed."""
        return QuadExt(self.u.conjugate(), self.v.conjugate())

    def is_zero(self) -> bool:
        """Exact zero test: sqrt5 is irrational over Q(i), so both parts must vanish."""
        return self.u.is_zero() and self.v.is_zero()

    def to_complex(self) -> complex:
        return self.u.to_complex() + self.v.to_complex() * SQRT5_F

    def __str__(self) -> str:
        return f"({self.u}) + ({self.v})*sqrt5"


def quad(u=0, v=0) -> QuadExt:
    u = u if isinstance(u, GaussianRational) else gaussian(u)
    v = v if isinstance(v, GaussianRational) else gaussian(v)
    return QuadExt(u, v)


def galois_sigma(x: QuadExt) -> QuadExt:
    """Generator of the Galois group: a + b*sqrt5 -> a - b*sqrt5, fixing Q(i)."""
    return QuadExt(x.u, -x.v)


def conjugate_branch(x: QuadExt) -> QuadExt:
    """Second-row image used by the encoder.

    Encoded values carry a 1/sqrt5 factor whose Galois image flips sign, so
    the companion entry the codeword actually transmits is -sigma(x).
    """
    return -galois_sigma(x)


@total_ordering
@dataclass(frozen=True)
class RealQuad:
    """Real number p + q*sqrt5 with exact rational p, q and exact comparisons."""

    p: Fraction
    q: Fraction

    def __float__(self) -> float:
        return float(self.p) + float(self.q) * SQRT5_F

    def is_zero(self) -> bool:
        return self.p == 0 and self.q == 0

    def sign(self) -> int:
        return _sign_p_q(self.p, self.q)

    def __eq__(self, other) -> bool:
        if not isinstance(other, RealQuad):
            return NotImplemented
        return self.p == other.p and self.q == other.q

    def __lt__(self, other: "RealQuad") -> bool:
        return _sign_p_q(self.p - other.p, self.q - other.q) < 0

    def __str__(self) -> str:
        return f"{self.p}+{self.q}*sqrt5"


def _sign_p_q(p: Fraction, q: Fraction) -> int:
    """Exact sign of p + q*sqrt5 via rational arithmetic."""
    if q == 0:
        return (p > 0) - (p < 0)
    if p == 0:
        return (q > 0) - (q < 0)
    if p > 0 and q > 0:
        return 1
    if p < 0 and q < 0:
        return -1
    # opposite signs: compare p^2 against 5 q^2 (equality impossible for p,q != 0)
    if p > 0:  # q < 0
        return 1 if p * p > 5 * q * q else -1
    return 1 if 5 * q * q > p * p else -1


def real_quad(p=0, q=0) -> RealQuad:
    return RealQuad(_frac(p), _frac(q))


def abs2_exact(x: QuadExt) -> RealQuad:
    """Exact squared modulus |x|^2 = x * conj(x), a nonnegative element p + q*sqrt5."""
    z = x * x.conj_i()
    if z.u.im != 0 or z.v.im != 0:
        raise AssertionError("squared modulus must be real")
    return RealQuad(z.u.re, z.v.re)


# Field constants: the golden number phi, its conjugate, and the encoder scalars.
PHI = quad(Fraction(1, 2), Fraction(1, 2))
PHI_BAR = quad(Fraction(1, 2), Fraction(-1, 2))
ALPHA = QuadExt(gaussian(1, Fraction(1, 2)), gaussian(0, Fraction(-1, 2)))
ALPHA_BAR = QuadExt(gaussian(1, Fraction(1, 2)), gaussian(0, Fraction(1, 2)))
INV_SQRT5 = quad(0, Fraction(1, 5))
GAMMA_I = gaussian(0, 1)


@dataclass(frozen=True)
class QamConstellation:
    """Square QAM carved from the Gaussian integers, 2**rate_bits points."""

    rate_bits: int
    points: tuple[tuple[int, int], ...]


def make_constellation(rate_bits: int) -> QamConstellation:
    """2**rate_bits Gaussian integers k + il with k, l in the half-open box.

    The half-open carve [-2**(R/2)/2, 2**(R/2)/2) keeps the advertised
    cardinality, nests constellations across sizes, and preserves minimum
    distance 1.
    """
    if rate_bits < 2 or rate_bits % 2 != 0:
        raise DomainError(f"rate_bits must be an even integer >= 2, got {rate_bits}")
    half = 2 ** (rate_bits // 2 - 1)
    pts = tuple((k, l) for k in range(-half, half) for l in range(-half, half))
    return QamConstellation(rate_bits, pts)


def _as_gaussian(s) -> GaussianRational:
    if isinstance(s, GaussianRational):
        return s
    k, l = s
    return gaussian(k, l)


def golden_encode(s1, s2) -> tuple[QuadExt, QuadExt]:
    """Encode a symbol pair into (x, x') exactly, including the 1/sqrt5 factor.

    x  = (alpha s1 + alpha phi s2) / sqrt5,
    x' = (alpha' s1 + alpha' phi' s2) / sqrt5,
    where primes denote the Galois conjugates of the constants.  The numeric
    embedding of the underlying 2x2 transform is unitary.
    """
    g1 = _as_gaussian(s1)
    g2 = _as_gaussian(s2)
    x = (ALPHA.scale(g1) + (ALPHA * PHI).scale(g2)) * INV_SQRT5
    xc = (ALPHA_BAR.scale(g1) + (ALPHA_BAR * PHI_BAR).scale(g2)) * INV_SQRT5
    return x, xc


def encode_matrix() -> np.ndarray:
    """Float embedding of the 2x2 encoding transform (unitary)."""
    return np.array(
        [
            [ALPHA.to_complex(), (ALPHA * PHI).to_complex()],
            [ALPHA_BAR.to_complex(), (ALPHA_BAR * PHI_BAR).to_complex()],
        ]
    ) / SQRT5_F


def delta_det(e1: QuadExt, e2: QuadExt, gamma: GaussianRational) -> QuadExt:
    """Exact determinant of the codeword-difference matrix.

    The matrix is [[e1, e1'], [gamma e2, e2']] with primes the encoder's
    conjugate-branch images; the determinant is e1 e2' - gamma e2 e1'.
    """
    g = quad(gamma)
    return e1 * conjugate_branch(e2) - g * (e2 * conjugate_branch(e1))


# ---------------------------------------------------------------------------
# Integer lattice fast path.
#
# sqrt5 * encode(d) = a + b*phi with a, b Gaussian integers, so determinants of
# difference pairs live (up to the exact factor 1/5) in Z[i][phi].  Squared
# moduli are P + Q*phi with integer P, Q, compared exactly by sign analysis.
# ---------------------------------------------------------------------------


def _encode_lattice(d1: tuple[int, int], d2: tuple[int, int]) -> tuple[int, int, int, int]:
    """sqrt5 * encode(d) in the basis (1, phi): returns (a_re, a_im, b_re, b_im)."""
    d1r, d1i = d1
    d2r, d2i = d2
    return (d1r - d1i + d2i, d1r + d1i - d2r, d1i + d2r, d2i - d1r)


def _sigma_lattice(y: tuple[int, int, int, int]) -> tuple[int, int, int, int]:
    ar, ai, br, bi = y
    return (ar + br, ai + bi, -br, -bi)


def _mul_lattice(y, z) -> tuple[int, int, int, int]:
    """(a + b phi)(c + d phi) with phi^2 = phi + 1, Gaussian-integer coefficients."""
    ar, ai, br, bi = y
    cr, ci, dr, di = z
    acr, aci = ar * cr - ai * ci, ar * ci + ai * cr
    bdr, bdi = br * dr - bi * di, br * di + bi * dr
    adr, adi = ar * dr - ai * di, ar * di + ai * dr
    bcr, bci = br * cr - bi * ci, br * ci + bi * cr
    return (acr + bdr, aci + bdi, adr + bcr + bdr, adi + bci + bdi)


def _det_lattice(y1, y2, g: tuple[int, int], ell: int = 1) -> tuple[int, int, int, int]:
    """5 * ell * det for gamma = g / ell: ell y1 sigma(y2) - g y2 sigma(y1)."""
    t1 = _mul_lattice(y1, _sigma_lattice(y2))
    t2 = _mul_lattice(y2, _sigma_lattice(y1))
    gr, gi = g
    return (
        ell * t1[0] - (gr * t2[0] - gi * t2[1]),
        ell * t1[1] - (gr * t2[1] + gi * t2[0]),
        ell * t1[2] - (gr * t2[2] - gi * t2[3]),
        ell * t1[3] - (gr * t2[3] + gi * t2[2]),
    )


def _abs2_lattice(y: tuple[int, int, int, int]) -> tuple[int, int]:
    """|a + b phi|^2 = P + Q phi with integer P, Q."""
    ar, ai, br, bi = y
    bb = br * br + bi * bi
    return (ar * ar + ai * ai + bb, 2 * (ar * br + ai * bi) + bb)


def _phi_cmp(pq1: tuple[int, int], pq2: tuple[int, int]) -> int:
    """Exact sign of (P1 + Q1 phi) - (P2 + Q2 phi)."""
    big_a = 2 * (pq1[0] - pq2[0]) + (pq1[1] - pq2[1])
    big_b = pq1[1] - pq2[1]
    if big_a == 0 and big_b == 0:
        return 0
    if big_a >= 0 and big_b >= 0:
        return 1
    if big_a <= 0 and big_b <= 0:
        return -1
    if big_a > 0:
        return 1 if big_a * big_a > 5 * big_b * big_b else -1
    return 1 if 5 * big_b * big_b > big_a * big_a else -1


def _phi_to_real_quad(pq: tuple[int, int], denom: int) -> RealQuad:
    """(P + Q phi) / denom as p + q*sqrt5."""
    p, q = pq
    return RealQuad(Fraction(2 * p + q, 2 * denom), Fraction(q, 2 * denom))


def _gamma_lattice(gamma: GaussianRational) -> tuple[tuple[int, int], int]:
    """Clear denominators: gamma = (gr + gi i) / ell with integers gr, gi, ell."""
    ell = math.lcm(gamma.re.denominator, gamma.im.denominator)
    return (int(gamma.re * ell), int(gamma.im * ell)), ell


def symbol_differences(rate_bits: int) -> list[tuple[int, int]]:
    """All Gaussian-integer differences of one constellation component."""
    side = 2 ** (rate_bits // 2)
    rng = range(-(side - 1), side)
    return [(k, l) for k in rng for l in rng]


def _canonical_diff_pairs(rate_bits: int) -> list[tuple[tuple[int, int], tuple[int, int]]]:
    """Nonzero symbol-difference vectors (d1, d2), one per unit-rotation orbit.

    Determinant magnitudes are invariant under multiplying a user's difference
    by a unit of Z[i], so one representative of each {d, id, -d, -id} orbit
    suffices for minimum searches and zero tests.
    """
    vals = symbol_differences(rate_bits)
    out = []
    for d1 in vals:
        for d2 in vals:
            if d1 == (0, 0) and d2 == (0, 0):
                continue
            pair = (d1, d2)
            rot = pair
            keep = True
            for _ in range(3):
                rot = ((-rot[0][1], rot[0][0]), (-rot[1][1], rot[1][0]))
                if rot < pair:
                    keep = False
                    break
            if keep:
                out.append(pair)
    return out


def _lattice_tables(pairs: Sequence[tuple[tuple[int, int], tuple[int, int]]]):
    """Lattice coordinates plus complex embeddings of y and sigma(y) per pair."""
    ys = [_encode_lattice(d1, d2) for d1, d2 in pairs]
    sig = [_sigma_lattice(y) for y in ys]

    def embed(rows):
        arr = np.array(rows, dtype=np.float64)
        return (arr[:, 0] + arr[:, 2] * PHI_F) + 1j * (arr[:, 1] + arr[:, 3] * PHI_F)

    return ys, sig, embed(ys), embed(sig)


@dataclass(frozen=True)
class NonzeroDetReport:
    """Exhaustive zero-determinant audit for one constellation size and twist."""

    rate_bits: int
    gamma: GaussianRational
    passed: bool
    pairs_checked: int
    counterexample: tuple[tuple[tuple[int, int], tuple[int, int]],
                          tuple[tuple[int, int], tuple[int, int]]] | None


def verify_nonzero_dets(rate_bits: int, gamma: GaussianRational,
                        cap: int = 10 ** 9) -> NonzeroDetReport:
    """Exact zero test of every nonzero difference-pair determinant.

    Enumerates one representative per unit-rotation orbit (zero-ness is orbit
    invariant) using pure integer arithmetic; returns the first counterexample
    found, or a pass.
    """
    pairs = _canonical_diff_pairs(rate_bits)
    total = len(pairs) * len(pairs)
    if total > cap:
        raise CapExceededError(
            f"{total} difference pairs exceed cap {cap}", required=total, cap=cap
        )
    g_int, ell = _gamma_lattice(gamma)
    gr, gi = g_int
    ys = [_encode_lattice(d1, d2) for d1, d2 in pairs]
    sig = [_sigma_lattice(y) for y in ys]
    checked = 0
    for i, y1 in enumerate(ys):
        s1 = sig[i]
        for j, y2 in enumerate(ys):
            checked += 1
            t1 = _mul_lattice(y1, sig[j])
            t2 = _mul_lattice(y2, s1)
            d = (
                ell * t1[0] - (gr * t2[0] - gi * t2[1]),
                ell * t1[1] - (gr * t2[1] + gi * t2[0]),
                ell * t1[2] - (gr * t2[2] - gi * t2[3]),
                ell * t1[3] - (gr * t2[3] + gi * t2[2]),
            )
            if d == (0, 0, 0, 0):
                return NonzeroDetReport(rate_bits, gamma, False, checked,
                                        (pairs[i], pairs[j]))
    return NonzeroDetReport(rate_bits, gamma, True, checked, None)


@dataclass(frozen=True)
class OmegaResult:
    """Exact minimum squared determinant over nonzero difference pairs."""

    r1_bits: int
    r2_bits: int
    gamma: GaussianRational
    value: RealQuad
    argmin: tuple[tuple[tuple[int, int], tuple[int, int]],
                  tuple[tuple[int, int], tuple[int, int]]]
    pairs_scanned: int
    candidates_checked: int


def omega(r1_bits: int, r2_bits: int, gamma: GaussianRational = GAMMA_I,
          cap: int = 10 ** 9) -> OmegaResult:
    """Exact min |det Delta|^2 over difference pairs with both users in error.

    A vectorized float sweep locates the neighbourhood of the minimum; every
    pair within a conservative error margin is then re-evaluated with integer
    arithmetic and the winner picked by exact comparison.
    """
    pairs1 = _canonical_diff_pairs(r1_bits)
    pairs2 = _canonical_diff_pairs(r2_bits)
    total = len(pairs1) * len(pairs2)
    if total > cap:
        raise CapExceededError(
            f"{total} difference pairs exceed cap {cap}", required=total, cap=cap
        )
    g_int, ell = _gamma_lattice(gamma)
    y1, s1, y1f, s1f = _lattice_tables(pairs1)
    y2, s2, y2f, s2f = _lattice_tables(pairs2)
    gf = gamma.to_complex() * ell

    chunk = max(1, (1 << 22) // max(len(pairs2), 1))
    chunk_mins = []
    fmin = math.inf
    for lo in range(0, len(pairs1), chunk):
        hi = min(lo + chunk, len(pairs1))
        d = ell * (y1f[lo:hi, None] * s2f[None, :]) \
            - gf * (y2f[None, :] * s1f[lo:hi, None])
        vals = d.real ** 2 + d.imag ** 2
        m = float(vals.min())
        chunk_mins.append((lo, hi, m))
        fmin = min(fmin, m)

    margin = _SCREEN_MARGIN * max(1.0, fmin) + 1e-9
    best_pq: tuple[int, int] | None = None
    best_idx: tuple[int, int] | None = None
    candidates = 0
    for lo, hi, m in chunk_mins:
        if m > fmin + margin:
            continue
        d = ell * (y1f[lo:hi, None] * s2f[None, :]) \
            - gf * (y2f[None, :] * s1f[lo:hi, None])
        vals = d.real ** 2 + d.imag ** 2
        for ii, jj in zip(*np.nonzero(vals <= fmin + margin)):
            i = lo + int(ii)
            j = int(jj)
            candidates += 1
            pq = _abs2_lattice(_det_lattice(y1[i], y2[j], g_int, ell))
            if best_pq is None or _phi_cmp(pq, best_pq) < 0 or (
                _phi_cmp(pq, best_pq) == 0 and (i, j) < best_idx
            ):
                best_pq = pq
                best_idx = (i, j)
    assert best_pq is not None and best_idx is not None
    value = _phi_to_real_quad(best_pq, 25 * ell * ell)
    return OmegaResult(r1_bits, r2_bits, gamma, value,
                       (pairs1[best_idx[0]], pairs2[best_idx[1]]),
                       total, candidates)


def scaled_codeword(s1_pair, s2_pair, r1_bits: int, r2_bits: int,
                    gamma: GaussianRational = GAMMA_I) -> np.ndarray:
    """Float 2x2 transmit codeword after per-user power normalization.

    Row u is sqrt2 * 2**(-R_u/2) * (x_u, x_u') with user 2's first slot
    twisted by gamma; the codebook-wide Frobenius-norm-squared maximum is 4.
    """
    x1, x1c = golden_encode(*s1_pair)
    x2, x2c = golden_encode(*s2_pair)
    c1 = math.sqrt(2.0) * 2.0 ** (-r1_bits / 2)
    c2 = math.sqrt(2.0) * 2.0 ** (-r2_bits / 2)
    g = gamma.to_complex()
    return np.array(
        [
            [c1 * x1.to_complex(), c1 * x1c.to_complex()],
            [c2 * g * x2.to_complex(), c2 * x2c.to_complex()],
        ]
    )


def golden_user_codewords(rate_bits: int, user: int,
                          gamma: GaussianRational = GAMMA_I) -> np.ndarray:
    """All scaled 1x2 codewords of one user, shape (2**(2 rate_bits), 1, 2)."""
    if user not in (1, 2):
        raise DomainError("user must be 1 or 2")
    const = make_constellation(rate_bits)
    c = math.sqrt(2.0) * 2.0 ** (-rate_bits / 2)
    g = gamma.to_complex() if user == 2 else 1.0
    out = np.empty((len(const.points) ** 2, 1, 2), dtype=np.complex128)
    k = 0
    for a in const.points:
        for b in const.points:
            x, xc = golden_encode(a, b)
            out[k, 0, 0] = c * g * x.to_complex()
            out[k, 0, 1] = c * xc.to_complex()
            k += 1
    return out


def single_user_min_sq_distance(rate_bits: int) -> Fraction:
    """Exact min squared distance of the scaled single-user codebook.

    The encoder is unitary, so this is 2**(1-R) times the minimum squared
    norm over nonzero symbol-difference vectors (computed, not assumed).
    """
    best = None
    for d1, d2 in _canonical_diff_pairs(rate_bits):
        n = d1[0] ** 2 + d1[1] ** 2 + d2[0] ** 2 + d2[1] ** 2
        if best is None or n < best:
            best = n
    return Fraction(best) * Fraction(2) / Fraction(2 ** rate_bits)


def lambda22_scale(r1_bits: int, r2_bits: int) -> Fraction:
    """Power-normalization factor mapping |det Delta|^2 to scaled |det E|^2.

    The two row scalings contribute (2 * 2**(-(R1+R2)/2))^2 = 2**(2-R1-R2).
    """
    return Fraction(4, 2 ** (r1_bits + r2_bits))


def lambda22_from_omega(r1_bits: int, r2_bits: int, omega_value: RealQuad) -> float:
    """Minimum |det E|^2 of the scaled joint codebook from the exact omega."""
    return float(lambda22_scale(r1_bits, r2_bits)) * float(omega_value)


OPEN_QUESTION_CAVEAT = (
    "classification from finitely many sizes is empirical; it cannot settle "
    "how the minimum determinant behaves as constellations keep growing"
)


@dataclass(frozen=True)
class DecayClassification:
    kind: str  # no-decay/subpolynomial | polynomial | faster-than-polynomial
    delta_hat: float
    exp_rate: float
    sse_poly: float
    sse_exp: float
    caveat: str = OPEN_QUESTION_CAVEAT


def classify_decay(snr_values: Sequence[float], values: Sequence[float]) -> DecayClassification:
    """Classify a positive decay profile against SNR.

    Compares a log-log line (polynomial decay, slope -delta) with a log-linear
    line (exponential decay); near-zero fitted delta is reported as
    no-decay/subpolynomial.
    """
    if len(snr_values) < 3 or len(snr_values) != len(values):
        raise DomainError("need >= 3 (snr, value) pairs")
    if min(values) <= 0:
        raise DomainError("decay classification needs strictly positive values")
    snr = np.asarray(snr_values, dtype=float)
    y = np.log(np.asarray(values, dtype=float))

    def line_fit(x):
        xm = x - x.mean()
        sxx = float(xm @ xm)
        slope = float(xm @ (y - y.mean())) / sxx
        resid = y - (y.mean() + slope * xm)
        return slope, float(resid @ resid)

    slope_poly, sse_poly = line_fit(np.log(snr))
    slope_exp, sse_exp = line_fit(snr)
    delta_hat = -slope_poly
    if delta_hat < 0.05:
        kind = "no-decay/subpolynomial"
    elif sse_exp < sse_poly:
        kind = "faster-than-polynomial"
    else:
        kind = "polynomial"
    return DecayClassification(kind, delta_hat, -slope_exp, sse_poly, sse_exp)


@dataclass(frozen=True)
class OmegaStudyRow:
    rate_bits: int
    omega: RealQuad
    omega_float: float
    snr: float
    snr_db: float


@dataclass(frozen=True)
class OmegaStudy:
    rows: tuple[OmegaStudyRow, ...]
    classification: DecayClassification
    r_mux: float
    eps: float


def omega_decay_study(sizes: Sequence[int], gamma: GaussianRational = GAMMA_I,
                      r_mux: float = 0.75, eps: float = 0.25,
                      cap: int = 10 ** 9) -> OmegaStudy:
    """Tabulate the exact minimum determinant as constellations grow.

    Sizes map to SNR through rate_bits = (r_mux - eps) * log2(snr); the decay
    of the tabulated minima is then classified empirically.
    """
    if len(sizes) < 3:
        raise DomainError("need at least 3 sizes for a decay study")
    if sorted(sizes) != list(sizes):
        raise DomainError("sizes must be ascending")
    if not 0 < r_mux - eps:
        raise DomainError("r_mux - eps must be positive to map sizes to SNR")
    rows = []
    for rb in sizes:
        res = omega(rb, rb, gamma, cap=cap)
        snr = 2.0 ** (rb / (r_mux - eps))
        rows.append(OmegaStudyRow(rb, res.value, float(res.value), snr,
                                  10.0 * math.log10(snr)))
    cls = classify_decay([row.snr for row in rows], [row.omega_float for row in rows])
    return OmegaStudy(tuple(rows), cls, r_mux, eps)


def parse_gamma(text: str) -> GaussianRational:
    """Parse a twist factor: 'i', '-i', '1', '-1', or 're+imi' with rational parts."""
    t = text.strip().replace(" ", "")
    if t in ("i", "+i"):
        return gaussian(0, 1)
    if t == "-i":
        return gaussian(0, -1)
    if t.endswith("i"):
        body = t[:-1]
        # split the trailing imaginary term from an optional real part
        for k in range(len(body) - 1, 0, -1):
            if body[k] in "+-" and body[k - 1] not in "+-/":
                re_part, im_part = body[:k], body[k:]
                break
        else:
            re_part, im_part = "0", body
        if im_part in ("", "+"):
            im_part = "1"
        elif im_part == "-":
            im_part = "-1"
        try:
            return gaussian(Fraction(re_part), Fraction(im_part))
        except (ValueError, ZeroDivisionError) as exc:
            raise DomainError(f"cannot parse gamma {text!r}") from exc
    try:
        return gaussian(Fraction(t), 0)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"cannot parse gamma {text!r}") from exc

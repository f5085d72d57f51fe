"""Dense complex linear-algebra kernels and reproducible counter-based random streams.

All matrices here are small (at most a few hundred rows), so the kernels favour
accuracy and simple contracts over scalability.  Randomness is addressed by
(seed, stream_id, counter block): identical addresses give identical draws no
matter how work is scheduled across threads or processes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolationError, NotPsdError

HERMITIAN_RTOL = 1e-12
PSD_EIG_FLOOR = -1e-10

_MASK64 = (1 << 64) - 1


def as_matrix(a) -> np.ndarray:
    m = np.asarray(a, dtype=np.complex128)
    if m.ndim != 2:
        raise ContractViolationError(f"expected a 2-D matrix, got ndim={m.ndim}")
    return m


def require_hermitian(a, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Validate that ``a`` is square and Hermitian (relative tolerance ``rtol``).

    Returns the matrix as complex128.  Raises ContractViolationError otherwise.
    """
    m = as_matrix(a)
    n, k = m.shape
    if n != k:
        raise ContractViolationError(f"matrix is {n}x{k}, not square")
    scale = float(np.abs(m).max()) or 1.0
    dev = float(np.abs(m - m.conj().T).max())
    if dev > rtol * scale:
        raise ContractViolationError(
            f"matrix is not Hermitian: max |A - A^H| = {dev:.3e} exceeds {rtol:.1e} * {scale:.3e}"
        )
    return m


def hermitian_eigenvalues(a, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix, ascending and real."""
    m = require_hermitian(a, rtol)
    # symmetrize so roundoff in the input cannot leak into LAPACK
    return np.linalg.eigvalsh(0.5 * (m + m.conj().T))


def psd_sqrt(a) -> np.ndarray:
    """Hermitian PSD square root S with S @ S == a.

    Eigenvalues in [-1e-10, 0) are clamped to zero; anything more negative
    raises NotPsdError.
    """
    m = require_hermitian(a)
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    if w.min() < PSD_EIG_FLOOR:
        raise NotPsdError(
            f"matrix is not PSD: eigenvalues {np.array2string(w, precision=3)}"
        )
    w = np.clip(w, 0.0, None)
    s = (v * np.sqrt(w)) @ v.conj().T
    return 0.5 * (s + s.conj().T)


def rank_with_tol(a, rel_tol: float) -> int:
    """Number of eigenvalues of a Hermitian PSD matrix above rel_tol * max eigenvalue."""
    if not 0.0 < rel_tol < 1.0:
        raise ContractViolationError(f"rel_tol must be in (0, 1), got {rel_tol}")
    w = hermitian_eigenvalues(a)
    top = float(w[-1])
    if top <= 0.0:
        return 0
    return int(np.count_nonzero(w > rel_tol * top))


def logdet_eye_plus_gram(c: float, h) -> float:
    """log det(I + c * H H^H), computed from eigenvalues of the smaller Gram side.

    Natural log.  Always >= 0 for c >= 0.
    """
    if c < 0:
        raise ContractViolationError(f"scale must be nonnegative, got {c}")
    m = as_matrix(h)
    return float(logdet_eye_plus_gram_batched(c, m[None])[0])


def logdet_eye_plus_gram_batched(c: float, h: np.ndarray) -> np.ndarray:
    """Batched log det(I + c * H H^H) over the leading axes of ``h``.

    ``h`` has shape (..., rows, cols); the Gram matrix is formed on the smaller
    side so the eigenproblem is min(rows, cols) wide.
    """
    rows, cols = h.shape[-2], h.shape[-1]
    if rows <= cols:
        g = h @ np.swapaxes(h.conj(), -1, -2)
    else:
        g = np.swapaxes(h.conj(), -1, -2) @ h
    w = np.linalg.eigvalsh(g)
    return np.log1p(np.clip(c * w, 0.0, None)).sum(axis=-1)


@dataclass(frozen=True)
class RngStream:
    """Counter-based random stream address.

    Identical (seed, stream_id) pairs always produce identical sample
    sequences; distinct stream_ids are statistically independent by Philox
    key separation.  ``block`` selects a disjoint 2**128-draw counter range,
    which is how parallel chunks of one computation stay non-overlapping.
    """

    seed: int
    stream_id: int = 0

    def generator(self, block: int = 0) -> np.random.Generator:
        key = np.array([self.seed & _MASK64, self.stream_id & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key, counter=block << 128))

    def stream(self, stream_id: int) -> "RngStream":
        """Sibling stream with the same seed and a different stream_id."""
        return RngStream(self.seed, stream_id)


def complex_normal(gen: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """Circularly symmetric complex Gaussians, unit variance (1/2 per component)."""
    z = gen.standard_normal(shape + (2,))
    return (z[..., 0] + 1j * z[..., 1]) / math.sqrt(2.0)


def sample_complex_gaussian(rng: RngStream, rows: int, cols: int, block: int = 0) -> np.ndarray:
    """rows x cols matrix of i.i.d. unit-variance complex Gaussians.

    Pure function of (rng, block): the same address returns the same matrix.
    """
    return complex_normal(rng.generator(block), (rows, cols))

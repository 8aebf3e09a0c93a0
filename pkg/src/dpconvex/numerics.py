"""Small dense complex linear algebra and seeded randomness.

Dimensions here are tiny (n <= 16), so the routines favour clarity and
explicit pivoting over speed.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, NonFiniteInput, SingularMatrix

# pivot threshold relative to the largest entry of the matrix
PIVOT_RTOL = 1e-14


def as_complex_vector(x, n: int | None = None) -> np.ndarray:
    """Coerce ``x`` to a finite 1-D complex array, optionally of length ``n``."""
    v = np.asarray(x, dtype=complex).reshape(-1)
    if v.size == 0:
        raise DimensionMismatch("vector must have at least one entry")
    if n is not None and v.size != n:
        raise DimensionMismatch(f"expected length {n}, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise NonFiniteInput("vector has non-finite entries")
    return v


def solve_linear(A, y) -> np.ndarray:
    """Solve ``A x = y`` by LU factorisation with partial pivoting.

    Raises SingularMatrix when a pivot falls below ``1e-14`` times the
    largest entry magnitude of ``A``.  Plain Python arithmetic is used on
    purpose: for n <= 16 it is several times faster than array calls.
    """
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"matrix must be square, got shape {M.shape}")
    n = M.shape[0]
    b = as_complex_vector(y, n).tolist()
    rows = M.tolist()
    scale = max(abs(v) for row in rows for v in row)
    if not np.isfinite(scale):
        raise NonFiniteInput("matrix has non-finite entries")
    if scale == 0.0:
        raise SingularMatrix("zero matrix")
    tol = PIVOT_RTOL * scale

    for k in range(n):
        piv = max(range(k, n), key=lambda r: abs(rows[r][k]))
        if abs(rows[piv][k]) < tol:
            raise SingularMatrix(f"pivot {abs(rows[piv][k]):.3e} below {tol:.3e} at column {k}")
        if piv != k:
            rows[k], rows[piv] = rows[piv], rows[k]
            b[k], b[piv] = b[piv], b[k]
        rk = rows[k]
        inv = 1.0 / rk[k]
        for r in range(k + 1, n):
            row = rows[r]
            factor = row[k] * inv
            if factor != 0:
                for c in range(k, n):
                    row[c] -= factor * rk[c]
                b[r] -= factor * b[k]

    x = [0j] * n
    for k in range(n - 1, -1, -1):
        rk = rows[k]
        acc = b[k]
        for c in range(k + 1, n):
            acc -= rk[c] * x[c]
        x[k] = acc / rk[k]
    return np.array(x, dtype=complex)


def lu_det(A) -> complex:
    """Determinant via the same pivoted elimination used by solve_linear."""
    M = np.array(A, dtype=complex)
    n = M.shape[0]
    det = 1.0 + 0j
    for k in range(n):
        piv = k + int(np.argmax(np.abs(M[k:, k])))
        if M[piv, k] == 0:
            return 0j
        if piv != k:
            M[[k, piv]] = M[[piv, k]]
            det = -det
        det *= M[k, k]
        factors = M[k + 1:, k] / M[k, k]
        M[k + 1:, k:] -= np.outer(factors, M[k, k:])
    return complex(det)


def sample_complex_gaussian(n: int, rng: np.random.Generator) -> np.ndarray:
    """Vector of ``n`` entries with independent N(0, 1) real and imaginary parts."""
    if n < 1:
        raise ValueError("n must be >= 1")
    parts = rng.standard_normal(2 * n)
    return parts[:n] + 1j * parts[n:]


def hermitian_inner(x, y) -> complex:
    """<x, y> = sum_j x_j * conj(y_j)."""
    xv = np.asarray(x, dtype=complex).reshape(-1)
    yv = np.asarray(y, dtype=complex).reshape(-1)
    if xv.shape != yv.shape:
        raise DimensionMismatch(f"lengths differ: {xv.size} vs {yv.size}")
    # expanded into real products so that <x, x> has an exactly zero imaginary part
    re = np.sum(xv.real * yv.real + xv.imag * yv.imag)
    im = np.sum(xv.imag * yv.real - xv.real * yv.imag)
    return complex(re, im)


def make_rng(seed, *key: int) -> np.random.Generator:
    """Generator derived from ``seed`` and an optional task key.

    Distinct keys give statistically independent streams, so work can be
    split into tasks without the result depending on the split.
    """
    return np.random.default_rng(np.random.SeedSequence([int(seed), *map(int, key)]))

"""Dense matrix kernel: determinants, adjugates, matrix exponentials,
nonsymmetric eigenvalues, and null vectors.

All routines are dense, double precision, and aimed at small systems
(n up to about 100).  Determinants use LU with partial pivoting, the
matrix exponential uses scaling-and-squaring with a degree-13 Pade
approximant, and eigenvalues come from Householder-Hessenberg reduction
followed by Francis double-shift QR iteration with deflation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AmbiguityError, DimensionError, NumericalError

# |lambda| below this times max(1, inf-norm) counts as a zero eigenvalue.
ZERO_EIGENVALUE_RTOL = 1e-9

_COFACTOR_MAX_N = 10
_QR_SWEEPS_PER_EIGENVALUE = 40


def as_square(m) -> np.ndarray:
    """Validate and return `m` as a square 2-d float or complex array."""
    a = np.asarray(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise DimensionError(f"expected a nonempty square matrix, got shape {a.shape}")
    a = a.astype(np.complex128) if np.iscomplexobj(a) else a.astype(np.float64)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


@dataclass(frozen=True)
class Spectrum:
    """All eigenvalues of a real square matrix.

    Eigenvalues are sorted by ascending real part, ties broken by ascending
    imaginary part, so repeated calls on the same matrix give identical
    output.  `zero_multiplicity` counts eigenvalues whose modulus falls
    below ZERO_EIGENVALUE_RTOL * max(1, inf-norm of the matrix).
    """

    eigenvalues: tuple[complex, ...]
    zero_multiplicity: int

    @property
    def n(self) -> int:
        return len(self.eigenvalues)


# ---------------------------------------------------------------------------
# LU factorization (partial pivoting) and solves
# ---------------------------------------------------------------------------

def _lu_factor(a: np.ndarray):
    """In-place LU with partial pivoting. Returns (lu, row_order, sign)."""
    lu = a.copy()
    n = lu.shape[0]
    order = np.arange(n)
    sign = 1.0
    for k in range(n - 1):
        p = k + int(np.argmax(np.abs(lu[k:, k])))
        if p != k:
            lu[[k, p]] = lu[[p, k]]
            order[[k, p]] = order[[p, k]]
            sign = -sign
        pivot = lu[k, k]
        if pivot == 0:
            continue
        lu[k + 1:, k] /= pivot
        lu[k + 1:, k + 1:] -= np.outer(lu[k + 1:, k], lu[k, k + 1:])
    return lu, order, sign


def _lu_solve(lu: np.ndarray, order: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve A x = b given the factorization of A. `b` may be a matrix."""
    n = lu.shape[0]
    x = np.array(b[order], dtype=lu.dtype, copy=True)
    for k in range(n):  # forward substitution, unit lower triangle
        x[k + 1:] -= np.multiply.outer(lu[k + 1:, k], x[k])
    for k in range(n - 1, -1, -1):  # back substitution
        if lu[k, k] == 0:
            raise NumericalError("singular matrix in linear solve")
        x[k] /= lu[k, k]
        x[:k] -= np.multiply.outer(lu[:k, k], x[k])
    return x


def determinant(m) -> float | complex:
    """det(m) via LU with partial pivoting (permutation sign included)."""
    a = as_square(m)
    lu, _, sign = _lu_factor(a)
    det = sign * np.prod(np.diag(lu))
    return complex(det) if np.iscomplexobj(a) else float(det)


def _det_unchecked(a: np.ndarray) -> float | complex:
    lu, _, sign = _lu_factor(a)
    return sign * np.prod(np.diag(lu))


# ---------------------------------------------------------------------------
# Adjugate
# ---------------------------------------------------------------------------

def adjugate(m) -> np.ndarray:
    """Adjugate (transpose of the cofactor matrix), so m @ adj(m) = det(m) I.

    Cofactor expansion is used up to n = 10; beyond that the det(m) * inv(m)
    shortcut is used when the matrix is comfortably nonsingular, falling back
    to cofactors otherwise (the adjugate of a singular matrix is still well
    defined and the inverse route is not).  adj of a 1x1 matrix is [[1]] by
    convention.
    """
    a = as_square(m)
    n = a.shape[0]
    if n == 1:
        return np.ones((1, 1), dtype=a.dtype)
    if n <= _COFACTOR_MAX_N:
        return _adjugate_cofactor(a)
    lu, order, sign = _lu_factor(a)
    diag = np.abs(np.diag(lu))
    scale = max(np.max(np.abs(a)), 1e-300)
    if np.min(diag) <= 1e-10 * scale:
        return _adjugate_cofactor(a)
    det = sign * np.prod(np.diag(lu))
    inv = _lu_solve(lu, order, np.eye(n, dtype=a.dtype))
    return det * inv


def _adjugate_cofactor(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    cof = np.empty_like(a)
    for i in range(n):
        rows = np.delete(a, i, axis=0)
        for j in range(n):
            minor = np.delete(rows, j, axis=1)
            cof[i, j] = (-1) ** ((i + j) % 2) * _det_unchecked(minor)
    return cof.T


# ---------------------------------------------------------------------------
# Matrix exponential
# ---------------------------------------------------------------------------

_PADE13 = (
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
)
_PADE13_THETA = 5.371920351148152


def mat_exp(m, t: float = 1.0) -> np.ndarray:
    """e^{m t} by scaling-and-squaring around a degree-13 Pade approximant."""
    a = as_square(m)
    if t < 0:
        raise ValueError(f"time must be nonnegative, got {t}")
    n = a.shape[0]
    x = a * t
    norm = float(np.max(np.sum(np.abs(x), axis=1))) if n else 0.0
    squarings = 0
    if norm > _PADE13_THETA:
        squarings = int(np.ceil(np.log2(norm / _PADE13_THETA)))
        x = x / (2.0 ** squarings)
    b = _PADE13
    ident = np.eye(n, dtype=x.dtype)
    x2 = x @ x
    x4 = x2 @ x2
    x6 = x2 @ x4
    u = x @ (x6 @ (b[13] * x6 + b[11] * x4 + b[9] * x2)
             + b[7] * x6 + b[5] * x4 + b[3] * x2 + b[1] * ident)
    v = (x6 @ (b[12] * x6 + b[10] * x4 + b[8] * x2)
         + b[6] * x6 + b[4] * x4 + b[2] * x2 + b[0] * ident)
    lu, order, _ = _lu_factor(v - u)
    result = _lu_solve(lu, order, v + u)
    for _ in range(squarings):
        result = result @ result
    return result


# ---------------------------------------------------------------------------
# Eigenvalues: Hessenberg reduction + Francis double-shift QR
# ---------------------------------------------------------------------------

def eigenvalues(m) -> Spectrum:
    """All eigenvalues of a real square matrix.

    Raises NumericalError if the QR iteration exceeds its sweep budget
    (40 sweeps per eigenvalue), which does not happen for the well-scaled
    matrices this package works with.
    """
    a = as_square(m)
    if np.iscomplexobj(a):
        raise ValueError("eigenvalues expects a real matrix")
    scale = max(1.0, float(np.max(np.sum(np.abs(a), axis=1))))
    eigs = _francis_eigenvalues(_hessenberg(a))
    eigs.sort(key=lambda z: (z.real, z.imag))
    zero_tol = ZERO_EIGENVALUE_RTOL * scale
    zero_mult = sum(1 for z in eigs if abs(z) < zero_tol)
    return Spectrum(eigenvalues=tuple(eigs), zero_multiplicity=zero_mult)


def _hessenberg(a: np.ndarray) -> np.ndarray:
    h = a.copy()
    n = h.shape[0]
    for k in range(n - 2):
        v = h[k + 1:, k].copy()
        alpha = np.linalg.norm(v)
        if alpha <= 1e-300:
            h[k + 2:, k] = 0.0
            continue
        if v[0] >= 0:
            v[0] += alpha
        else:
            v[0] -= alpha
        v /= np.linalg.norm(v)
        h[k + 1:, k:] -= 2.0 * np.outer(v, v @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v)
        h[k + 2:, k] = 0.0
    return h


def _eig_2x2(a: float, b: float, c: float, d: float) -> list[complex]:
    trace = a + d
    det = a * d - b * c
    disc = 0.25 * trace * trace - det
    if disc >= 0.0:
        root = np.sqrt(disc)
        big = 0.5 * trace + root if trace >= 0 else 0.5 * trace - root
        if big == 0.0:
            return [complex(root), complex(-root)]
        return [complex(big), complex(det / big)]
    root = np.sqrt(-disc)
    return [complex(0.5 * trace, root), complex(0.5 * trace, -root)]


def _reflect(col: np.ndarray) -> np.ndarray | None:
    """Unit Householder vector sending `col` to a multiple of e1, or None."""
    alpha = np.linalg.norm(col)
    if alpha <= 1e-300:
        return None
    v = col.copy()
    v[0] += alpha if v[0] >= 0 else -alpha
    norm = np.linalg.norm(v)
    if norm <= 1e-300:
        return None
    return v / norm


def _francis_eigenvalues(h: np.ndarray) -> list[complex]:
    n = h.shape[0]
    eps = np.finfo(float).eps
    hnorm = max(float(np.max(np.abs(h))), 1e-300)
    # Per-row diagonal offsets: blocks that are tiny perturbations of a
    # scalar matrix get that scalar subtracted out so the iteration runs at
    # the perturbation's own scale; it is added back on extraction.
    offsets = np.zeros(n)
    eigs: list[complex] = []
    hi = n - 1
    sweeps = 0
    while hi >= 0:
        if hi == 0:
            eigs.append(complex(h[0, 0] + offsets[0]))
            hi -= 1
            sweeps = 0
            continue
        # Locate the top of the active unreduced block, zeroing negligible
        # subdiagonal entries on the way.
        lo = hi
        while lo > 0:
            s = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if s == 0.0:
                s = hnorm
            if abs(h[lo, lo - 1]) <= eps * s:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            eigs.append(complex(h[hi, hi] + offsets[hi]))
            hi -= 1
            sweeps = 0
            continue
        if lo == hi - 1:
            eigs.extend(z + offsets[hi]
                        for z in _eig_2x2(h[hi - 1, hi - 1], h[hi - 1, hi],
                                          h[hi, hi - 1], h[hi, hi]))
            hi -= 2
            sweeps = 0
            continue

        # Rescale a near-scalar block: mu + tiny noise defeats the shift
        # polynomial through cancellation unless mu is removed explicitly.
        mu = h[hi, hi]
        block_diag = np.diagonal(h)[lo:hi + 1]
        spread = float(np.max(np.abs(block_diag - mu)))
        sub = float(np.max(np.abs(np.diagonal(h, -1)[lo:hi])))
        if max(spread, sub) <= 1e-3 * abs(mu):
            for i in range(lo, hi + 1):
                h[i, i] -= mu
                offsets[i] += mu

        sweeps += 1
        if sweeps > _QR_SWEEPS_PER_EIGENVALUE:
            raise NumericalError(
                f"QR iteration failed to converge after {sweeps} sweeps "
                f"on a block of size {hi - lo + 1}")
        if sweeps % 10 == 0:
            # Exceptional shift to break symmetry-induced stalls
            # (permutation-like blocks cycle under the Wilkinson shift).
            w = abs(h[hi, hi - 1]) + abs(h[hi - 1, hi - 2])
            center = 0.75 * w + h[hi, hi]
            if sweeps % 20 == 0:
                # second form: deterministic jitter of the anchor point
                center = h[hi, hi] + w * (0.5 + 0.618034 * (sweeps // 20))
            rt1 = complex(center, 0.66143782777 * w)
            rt2 = rt1.conjugate()
        else:
            rt1, rt2 = _eig_2x2(h[hi - 1, hi - 1], h[hi - 1, hi],
                                h[hi, hi - 1], h[hi, hi])

        # First column of (H - rt1 I)(H - rt2 I) restricted to the block,
        # in factored form: the expanded h^2 - (rt1+rt2) h + rt1 rt2 loses
        # every digit on clustered blocks that are tiny perturbations of a
        # scalar matrix.
        h00 = h[lo, lo]
        if rt1.imag != 0.0:
            x = (h00 - rt1.real) ** 2 + rt1.imag ** 2 \
                + h[lo, lo + 1] * h[lo + 1, lo]
        else:
            x = (h00 - rt1.real) * (h00 - rt2.real) \
                + h[lo, lo + 1] * h[lo + 1, lo]
        y = h[lo + 1, lo] * (h00 + h[lo + 1, lo + 1] - rt1.real - rt2.real)
        z = h[lo + 1, lo] * h[lo + 2, lo + 1]

        for k in range(lo, hi - 1):
            v = _reflect(np.array([x, y, z]))
            if v is not None:
                c0 = max(lo, k - 1)
                h[k:k + 3, c0:hi + 1] -= 2.0 * np.outer(
                    v, v @ h[k:k + 3, c0:hi + 1])
                r1 = min(hi, k + 3)
                h[lo:r1 + 1, k:k + 3] -= 2.0 * np.outer(
                    h[lo:r1 + 1, k:k + 3] @ v, v)
                if k > lo:
                    h[k + 1, k - 1] = 0.0
                    h[k + 2, k - 1] = 0.0
            x = h[k + 1, k]
            y = h[k + 2, k]
            if k < hi - 2:
                z = h[k + 3, k]
        v = _reflect(np.array([x, y]))
        if v is not None:
            h[hi - 1:hi + 1, hi - 2:hi + 1] -= 2.0 * np.outer(
                v, v @ h[hi - 1:hi + 1, hi - 2:hi + 1])
            h[lo:hi + 1, hi - 1:hi + 1] -= 2.0 * np.outer(
                h[lo:hi + 1, hi - 1:hi + 1] @ v, v)
            h[hi, hi - 2] = 0.0
    return eigs


# ---------------------------------------------------------------------------
# Left null vector
# ---------------------------------------------------------------------------

def left_null_vector(m) -> np.ndarray:
    """An unnormalized row vector v with v @ m = 0, for rank n-1 matrices.

    Gaussian elimination with full pivoting on the transpose; full pivoting
    puts the single deficient pivot last regardless of where zero columns
    sit.  Raises AmbiguityError when the numerical rank is not n-1.
    """
    a0 = as_square(m)
    if np.iscomplexobj(a0):
        raise ValueError("left_null_vector expects a real matrix")
    n = a0.shape[0]
    scale = max(float(np.max(np.abs(a0))), 1.0)
    tol = 1e-10 * scale
    if n == 1:
        if abs(a0[0, 0]) <= tol:
            return np.array([1.0])
        raise AmbiguityError("1x1 matrix is nonsingular; no null vector")
    a = a0.T.copy()
    col_perm = np.arange(n)
    rank = n
    for k in range(n):
        sub = np.abs(a[k:, k:])
        r, c = np.unravel_index(int(np.argmax(sub)), sub.shape)
        r += k
        c += k
        if abs(a[r, c]) <= tol:
            rank = k
            break
        if r != k:
            a[[k, r]] = a[[r, k]]
        if c != k:
            a[:, [k, c]] = a[:, [c, k]]
            col_perm[[k, c]] = col_perm[[c, k]]
        mult = a[k + 1:, k] / a[k, k]
        a[k + 1:, k:] -= np.outer(mult, a[k, k:])
        a[k + 1:, k] = 0.0
    if rank != n - 1:
        raise AmbiguityError(
            f"matrix has numerical rank {rank}, expected {n - 1}: "
            "the null space is not one-dimensional")
    y = np.zeros(n)
    y[n - 1] = 1.0
    for i in range(n - 2, -1, -1):
        y[i] = -(a[i, i + 1:] @ y[i + 1:]) / a[i, i]
    v = np.zeros(n)
    v[col_perm] = y
    resid = float(np.max(np.abs(v @ a0)))
    if resid > 1e-7 * scale * float(np.max(np.abs(v))):
        raise NumericalError(f"null vector residual too large: {resid:.3e}")
    return v

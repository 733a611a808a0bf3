"""Dense real linear-algebra kernels shared by every other module.

Matrices are plain float64 ``numpy`` arrays in row-major layout; vectors are
1-d arrays.  All routines are pure functions of their inputs and are safe to
call concurrently.  Rank and kernel decisions are always made relative to the
largest singular value of the operator at hand; the default relative
tolerance is :data:`DEFAULT_TOL` and can be overridden per call.

The matrix exponential is computed with scaling-and-squaring on a degree-13
Pade approximant, which is accurate to machine precision for the small dense
matrices (a handful of factors) this library works with.  Eigen and
least-squares problems are delegated to LAPACK through ``numpy.linalg``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOL = 1e-10

__all__ = [
    "DEFAULT_TOL",
    "DimensionError",
    "EigenConvergenceError",
    "EigenDecomposition",
    "LinearSolution",
    "expm",
    "expm_integral",
    "eig",
    "kernel_basis",
    "solve_linear",
    "as_matrix",
    "as_vector",
]


class DimensionError(ValueError):
    """Raised when an argument has an incompatible shape."""


class EigenConvergenceError(RuntimeError):
    """Eigenvalue iteration failed; carries the residual norm reached."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Validate and return ``m`` as a finite 2-d float64 array."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise DimensionError(f"{name} must be a 2-d array, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def as_vector(v, name: str = "vector") -> np.ndarray:
    """Validate and return ``v`` as a finite 1-d float64 array."""
    a = np.asarray(v, dtype=float).reshape(-1)
    if a.size < 1:
        raise DimensionError(f"{name} must have at least one entry")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


# Pade-13 coefficients and the corresponding 1-norm threshold (Higham 2005).
_PADE13 = np.array(
    [
        64764752532480000.0,
        32382376266240000.0,
        7771770303897600.0,
        1187353796428800.0,
        129060195264000.0,
        10559470521600.0,
        670442572800.0,
        33522128640.0,
        1323241920.0,
        40840800.0,
        960960.0,
        16380.0,
        182.0,
        1.0,
    ]
)
_THETA13 = 5.371920351148152


def expm(M, t: float = 1.0) -> np.ndarray:
    """Matrix exponential ``exp(M t)``.

    Parameters
    ----------
    M : array_like, square
    t : float
        Time scale; ``t = 0`` returns the identity exactly.

    Returns
    -------
    numpy.ndarray
        ``exp(M t)``, satisfying the semigroup property to roundoff.
    """
    A = as_matrix(M)
    n, m = A.shape
    if n != m:
        raise DimensionError(f"expm needs a square matrix, got {A.shape}")
    A = A * float(t)
    norm = np.linalg.norm(A, 1)
    if norm == 0.0:
        return np.eye(n)
    squarings = max(0, int(np.ceil(np.log2(norm / _THETA13))))
    A = A / (2.0**squarings)

    ident = np.eye(n)
    b = _PADE13
    A2 = A @ A
    A4 = A2 @ A2
    A6 = A4 @ A2
    U = A @ (
        A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
        + b[7] * A6
        + b[5] * A4
        + b[3] * A2
        + b[1] * ident
    )
    V = (
        A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
        + b[6] * A6
        + b[4] * A4
        + b[2] * A2
        + b[0] * ident
    )
    F = np.linalg.solve(V - U, V + U)
    for _ in range(squarings):
        F = F @ F
    return F


def expm_integral(M, b, t: float) -> np.ndarray:
    """Integral of the matrix exponential against a constant vector.

    Computes ``int_0^t exp(M s) b ds`` through the exponential of the
    block-augmented matrix ``[[M, b], [0, 0]]``: the top-right block of its
    exponential at ``t`` is exactly the integral.  Exact for singular ``M``
    as well, which is why the augmented form is used instead of
    ``M^{-1} (exp(M t) - I) b``.
    """
    A = as_matrix(M)
    v = as_vector(b, "b")
    n = A.shape[0]
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"expm_integral needs a square matrix, got {A.shape}")
    if v.size != n:
        raise DimensionError(f"b has length {v.size}, expected {n}")
    aug = np.zeros((n + 1, n + 1))
    aug[:n, :n] = A
    aug[:n, n] = v
    return expm(aug, t)[:n, n]


@dataclass(eq=False)
class EigenDecomposition:
    """Two-sided eigendecomposition of a real square matrix.

    Eigenvalues are sorted by descending real part, ties broken by
    descending imaginary part, and the left/right eigenvector lists follow
    that order.  ``defective`` is set when some eigenvalue's geometric
    multiplicity (rank test on ``M - lambda I``) falls short of its
    algebraic multiplicity.
    """

    eigenvalues: np.ndarray
    left_eigenvectors: list = field(repr=False)
    right_eigenvectors: list = field(repr=False)
    defective: bool = False

    def real_left_pairs(self, tol: float = DEFAULT_TOL):
        """Real eigenpairs ``(lam, v)`` with ``v^T M = lam v^T``, dominant first.

        An eigenvalue counts as real when ``|Im lam| <= tol * (1 + |lam|)``;
        the returned vectors are real, unit-norm.
        """
        pairs = []
        for lam, v in zip(self.eigenvalues, self.left_eigenvectors):
            if abs(lam.imag) <= tol * (1.0 + abs(lam)):
                w = np.real(v)
                nrm = np.linalg.norm(w)
                if nrm > 0:
                    pairs.append((float(lam.real), w / nrm))
        return pairs


def _sort_key(values: np.ndarray) -> np.ndarray:
    return np.lexsort((-values.imag, -values.real))


def eig(M, tol: float = DEFAULT_TOL) -> EigenDecomposition:
    """Eigenvalues with left and right eigenvectors of a real square matrix.

    Left vectors satisfy ``v^T M = lam v^T`` (they are eigenvectors of
    ``M^T``) and are matched to the right vectors by the shared eigenvalue
    ordering.  LAPACK failure is translated into
    :class:`EigenConvergenceError`.
    """
    A = as_matrix(M)
    if A.shape[0] != A.shape[1]:
        raise DimensionError(f"eig needs a square matrix, got {A.shape}")
    try:
        w_r, vr = np.linalg.eig(A)
        w_l, vl = np.linalg.eig(A.T)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(f"eigenvalue iteration failed: {exc}", np.inf)

    order_r = _sort_key(w_r)
    order_l = _sort_key(w_l)
    values = w_r[order_r]
    rights = [vr[:, i] for i in order_r]
    lefts = [vl[:, i] for i in order_l]

    scale = max(np.linalg.norm(A), 1.0)
    defective = False
    unique = []
    for lam in values:
        if not any(abs(lam - u) <= 1e-8 * (1.0 + abs(u)) for u in unique):
            unique.append(lam)
    for lam in unique:
        alg = int(np.sum(np.abs(values - lam) <= 1e-8 * (1.0 + abs(lam))))
        if alg > 1:
            shifted = A - lam * np.eye(A.shape[0])
            geo = A.shape[0] - int(
                np.sum(np.linalg.svd(shifted, compute_uv=False) > tol * scale)
            )
            if geo < alg:
                defective = True
    return EigenDecomposition(values, lefts, rights, defective)


def kernel_basis(rows, tol: float = DEFAULT_TOL, dim: int | None = None) -> list:
    """Orthonormal basis of the joint null space of a family of row vectors.

    Singular values below ``tol`` times the largest singular value are
    treated as zero.  An empty ``rows`` is only meaningful when the ambient
    dimension ``dim`` is supplied, in which case the full canonical basis is
    returned.

    Returns a list of 1-d arrays (possibly empty when the rows have full
    rank).
    """
    rows = [as_vector(r, "row") for r in rows]
    if not rows:
        if dim is None:
            raise ValueError("kernel_basis needs `dim` when no rows are given")
        return [np.eye(dim)[:, j].copy() for j in range(dim)]
    m = rows[0].size
    if any(r.size != m for r in rows):
        raise DimensionError("kernel rows must all have the same length")
    if tol <= 0:
        raise ValueError("tol must be positive")
    stacked = np.vstack(rows)
    _, s, vh = np.linalg.svd(stacked)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > tol * smax)) if smax > 0 else 0
    return [vh[i].copy() for i in range(rank, m)]


@dataclass
class LinearSolution:
    """Least-squares solution together with its residual norm."""

    solution: np.ndarray
    residual: float


def solve_linear(A, y, tol: float = DEFAULT_TOL) -> LinearSolution | None:
    """Solve ``A x = y`` in the least-squares sense, or report no solution.

    Returns ``None`` when the best residual exceeds ``tol * ||y||``, i.e.
    the system is inconsistent at the working tolerance.
    """
    A = as_matrix(A, "A")
    y = as_vector(y, "y")
    if A.shape[0] != y.size:
        raise DimensionError(f"A has {A.shape[0]} rows but y has {y.size} entries")
    x, _, _, _ = np.linalg.lstsq(A, y, rcond=None)
    residual = float(np.linalg.norm(A @ x - y))
    if residual > tol * np.linalg.norm(y):
        return None
    return LinearSolution(x, residual)

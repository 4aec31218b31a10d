"""Minkowski linear algebra for R^{n+4} with signature (1, n+3).

Vectors are numpy arrays whose last axis has length n+4; all operations
broadcast over leading (grid) axes.  The metric is

    <x, y> = -x0*y0 + sum_{j>=1} xj*yj,

bilinear (not Hermitian) also for complex arguments.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "metric",
    "inner",
    "norm2",
    "is_forward_lightlike",
    "validate_group",
    "validate_algebra",
    "cartan_split",
    "bracket",
    "involution_matrix",
    "boost",
]


def metric(dim: int) -> np.ndarray:
    """diag(-1, 1, ..., 1) of size dim x dim."""
    I = np.eye(dim)
    I[0, 0] = -1.0
    return I


def inner(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Lorentzian inner product along the last axis (bilinear, broadcasting)."""
    x = np.asarray(x)
    y = np.asarray(y)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError(
            f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}"
        )
    return -x[..., 0] * y[..., 0] + np.sum(x[..., 1:] * y[..., 1:], axis=-1)


def norm2(x: np.ndarray) -> np.ndarray:
    """<x, x>."""
    return inner(x, x)


def is_forward_lightlike(x: np.ndarray, tol: float = 1e-9) -> np.ndarray:
    """True where <x,x> ~ 0 (relative to |x|^2) and x0 > 0."""
    x = np.asarray(x)
    scale = np.sum(np.abs(x) ** 2, axis=-1) + 1e-300
    return (np.abs(norm2(x)) <= tol * scale) & (np.real(x[..., 0]) > 0)


def validate_group(M: np.ndarray, tol: float = 1e-9):
    """Membership test for SO+(1, d-1) acting on R^d.

    Checks M^T I M = I, det M = +1 and the orthochronous condition
    M[0,0] > 0 (forward light cone preserved).  Returns (ok, residual)
    where residual is the largest violation of the two equality
    constraints; pointwise over leading axes.
    """
    M = np.asarray(M)
    d = M.shape[-1]
    I = metric(d)
    G = np.swapaxes(M, -1, -2) @ I @ M
    res_orth = np.max(np.abs(G - I), axis=(-1, -2))
    res_det = np.abs(np.linalg.det(M) - 1.0)
    residual = np.maximum(res_orth, res_det)
    ok = (residual <= tol) & (np.real(M[..., 0, 0]) > 0)
    return ok, residual


def lorentz_inverse(M: np.ndarray) -> np.ndarray:
    """Exact inverse I M^T I for M in O(1, d-1); cheaper than LU."""
    M = np.asarray(M)
    I = metric(M.shape[-1])
    return I @ np.swapaxes(M, -1, -2) @ I


def validate_algebra(X: np.ndarray, tol: float = 1e-9):
    """Membership test for so(1, d-1): X^T I + I X = 0."""
    X = np.asarray(X)
    I = metric(X.shape[-1])
    res = np.max(np.abs(np.swapaxes(X, -1, -2) @ I + I @ X), axis=(-1, -2))
    return res <= tol, res


def involution_matrix(n: int) -> np.ndarray:
    """diag(-I4, In), the involution defining the symmetric-space split."""
    D = np.eye(n + 4)
    D[:4, :4] *= -1.0
    return D


def cartan_split(X: np.ndarray, tol: float = 1e-9):
    """Split X in so(1, n+3) into block-diagonal k-part and off-diagonal p-part.

    The k-part keeps the 4x4 and nxn diagonal blocks, the p-part the 4xn
    and nx4 off-diagonal blocks.  Raises ValueError if X is not in the
    algebra beyond tol (relative to |X|).
    """
    X = np.asarray(X)
    scale = np.max(np.abs(X)) + 1e-300
    ok, res = validate_algebra(X, tol * scale)
    if not np.all(ok):
        raise ValueError(f"input not in so(1,n+3): residual {np.max(res):.3e}")
    k = np.zeros_like(X)
    p = np.zeros_like(X)
    k[..., :4, :4] = X[..., :4, :4]
    k[..., 4:, 4:] = X[..., 4:, 4:]
    p[..., :4, 4:] = X[..., :4, 4:]
    p[..., 4:, :4] = X[..., 4:, :4]
    return k, p


def bracket(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Matrix commutator XY - YX."""
    return X @ Y - Y @ X


def boost(t: float, dim: int, axis: int = 1) -> np.ndarray:
    """Boost by rapidity t in the (0, axis) plane of R^dim."""
    B = np.eye(dim)
    B[0, 0] = B[axis, axis] = np.cosh(t)
    B[0, axis] = B[axis, 0] = np.sinh(t)
    return B

"""Harmonic-map side: loop-parameter family, flatness, harmonicity tests.

For a map into SO+(1,n+3)/SO+(1,3)xSO(n) with Maurer-Cartan coefficient
alpha(d_z) = alpha_k + alpha_p, the family

    alpha_lambda(d_z)    = lambda^{-1} alpha_p + alpha_k
    alpha_lambda(d_zbar) = conj(alpha_k) + lambda conj(alpha_p)

is flat for every unit lambda exactly when the map is harmonic; the
flatness defect at non-trivial lambda is therefore a harmonicity meter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart import Chart, DEFAULT_MARGIN, d_z, d_zbar, l2_norm, sup_norm
from .gauss_frame import FrameField, I13, MCBlocks, maurer_cartan
from .lorentz import bracket, metric

DEFAULT_LAMBDAS = (1.0, np.exp(1j * np.pi / 4), 1j, -1.0)


@dataclass
class ExtendedForm:
    """Coefficients (P, Q) of alpha_lambda = P dz + Q dzbar."""
    P: np.ndarray
    Q: np.ndarray
    lam: complex
    chart: Chart


def extend(M: MCBlocks, lam: complex) -> ExtendedForm:
    """Insert the loop parameter into the Maurer-Cartan coefficients."""
    if abs(abs(lam) - 1.0) > 1e-12:
        raise ValueError(f"lambda must be unimodular, got |lambda|={abs(lam)}")
    k = M.k_part()
    p = M.p_part()
    P = k + p / lam
    Q = np.conj(k) + lam * np.conj(p)
    return ExtendedForm(P=P, Q=Q, lam=complex(lam), chart=M.chart)


def flatness_residual(E: ExtendedForm, margin: int = DEFAULT_MARGIN) -> dict:
    """Norms of the curvature d_z Q - d_zbar P + [P, Q] of alpha_lambda."""
    c = E.chart
    R = d_z(E.Q, c) - d_zbar(E.P, c) + bracket(E.P, E.Q)
    mask = c.interior_mask(margin)
    return {"lambda": E.lam, "sup": sup_norm(R, mask),
            "l2": l2_norm(R, c, mask)}


def harmonic_residuals(M: MCBlocks, margin: int = DEFAULT_MARGIN) -> dict:
    """The three block equations equivalent to harmonicity.

    Line 1: Im(A1_zbar + conj(A1) A1 - conj(B1) B1^T I13) = 0
    Line 2: Im(A2_zbar + conj(A2) A2 - conj(B1)^T I13 B1) = 0
    Line 3: B1_zbar + conj(A1) B1 - B1 conj(A2) = 0
    """
    c = M.chart
    A1, A2, B1 = M.A1, M.A2, M.B1
    B1t = np.swapaxes(B1, -1, -2)
    r1 = np.imag(d_zbar(A1, c) + np.conj(A1) @ A1
                 - np.conj(B1) @ B1t @ I13)
    r2 = np.imag(d_zbar(A2, c) + np.conj(A2) @ A2
                 - np.conj(B1t) @ I13 @ B1)
    r3 = d_zbar(B1, c) + np.conj(A1) @ B1 - B1 @ np.conj(A2)
    mask = c.interior_mask(margin)
    return {name: {"sup": sup_norm(r, mask), "l2": l2_norm(r, c, mask)}
            for name, r in (("A1_line", r1), ("A2_line", r2),
                            ("B1_line", r3))}


def strong_conformal_check(B1: np.ndarray,
                           mask: np.ndarray | None = None) -> dict:
    """sup-norm of B1^T I13 B1, the strong-conformal-harmonicity defect.

    Also reports the conformality scalar tr(B1^T I13 B1) separately
    (its vanishing alone is ordinary conformality of the harmonic map).
    """
    G = np.swapaxes(B1, -1, -2) @ I13 @ B1
    tr = np.trace(G, axis1=-2, axis2=-1)
    return {"sup": sup_norm(G, mask),
            "trace_sup": sup_norm(tr, mask)}


def gauge(M: MCBlocks, Ff: FrameField, G: np.ndarray,
          tol: float = 1e-8) -> tuple[FrameField, MCBlocks]:
    """Apply a pointwise gauge F -> F G with G in SO+(1,3) x SO(n).

    G is (.., n+4, n+4) (constant matrices broadcast); must be
    block-diagonal and Lorentz-orthogonal.  Blocks are recomputed from
    the gauged frame, so the transformation law A-hat, B-hat carries all
    stencil consistency with it.
    """
    G = np.asarray(G, dtype=float)
    dim = Ff.F.shape[-1]
    if G.shape[-1] != dim:
        raise ValueError("gauge has wrong dimension")
    if np.max(np.abs(G[..., :4, 4:])) > tol or \
            np.max(np.abs(G[..., 4:, :4])) > tol:
        raise ValueError("gauge is not block-diagonal")
    I = metric(dim)
    res = np.max(np.abs(np.swapaxes(G, -1, -2) @ I @ G - I))
    if res > tol:
        raise ValueError(f"gauge not in the group: residual {res:.3e}")
    Fh = Ff.F @ G
    Ffh = FrameField(F=Fh, chart=Ff.chart, group_residual=Ff.group_residual)
    return Ffh, maurer_cartan(Ffh)


def flatness_sweep(M: MCBlocks, lambdas=DEFAULT_LAMBDAS,
                   margin: int = DEFAULT_MARGIN) -> list[dict]:
    """flatness_residual at each lambda sample."""
    return [flatness_residual(extend(M, lam), margin) for lam in lambdas]

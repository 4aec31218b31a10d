"""From a sampled light-cone immersion to its conformal invariants.

The pipeline is: canonical lift Y (normalized so <Y_z, Y_zbar> = 1/2),
the second lightlike section N, an orthonormal normal frame psi_j of the
conformally invariant normal bundle, and the invariant data kappa
(conformal Hopf differential), s (Schwarzian), b (normal connection) and
beta (components of D_zbar kappa).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chart import (Chart, DEFAULT_MARGIN, d_u, d_v, d_z, d_zbar,
                    sup_norm, l2_norm, umbilic_mask)
from .lorentz import inner


class DegenerateImmersionError(ValueError):
    pass


def conformality_residual(Y: np.ndarray, c: Chart) -> float:
    """sup |<Y_z, Y_z>| (zero for a conformal immersion)."""
    Yz = d_z(Y, c)
    return float(np.max(np.abs(inner(Yz, Yz))))


def canonical_lift(raw: np.ndarray, c: Chart, tol: float = 1e-8) -> np.ndarray:
    """Rescale a forward-lightlike lift so that <Y_z, Y_zbar> = 1/2.

    The scale rho = sqrt(2 <raw_z, raw_zbar>) is insensitive to the input
    scaling because the lift is null.  Raises for non-null input or where
    the immersion degenerates.
    """
    raw = np.asarray(raw, dtype=float)
    scale = np.sum(raw**2, axis=-1)
    if np.max(np.abs(inner(raw, raw))) > tol * np.max(scale):
        raise ValueError("input field is not lightlike")
    if np.min(raw[..., 0]) <= 0:
        raise ValueError("input field is not forward (x0 <= 0 somewhere)")
    e = np.real(inner(d_z(raw, c), d_zbar(raw, c)))
    if np.min(e) <= tol * np.max(e):
        raise DegenerateImmersionError(
            f"immersion degenerates: min <raw_z, raw_zbar> = {np.min(e):.3e}")
    rho = np.sqrt(2.0 * e)
    return raw / rho[..., None]


def frame_N(Y: np.ndarray, c: Chart) -> np.ndarray:
    """The section N with <N,Y> = -1, <N,N> = 0, N = 2 Y_zzbar mod Y.

    Both defining pairings are enforced pointwise-algebraically, so they
    hold at machine precision; the derivative conditions <N, Y_z> = 0 are
    inherited from the stencils at O(h^2).
    """
    W = 0.25 * (d_u(d_u(Y, c), c) + d_v(d_v(Y, c), c))   # Y_zzbar, real
    A = inner(W, W)
    B = inner(W, Y)           # ~ -1/2
    a = -1.0 / B
    coef = -a * A / (2.0 * B)
    return a[..., None] * W + coef[..., None] * Y


def _project_out_span(w: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Minkowski-orthogonal projection of w onto the complement of span(basis).

    basis has shape (..., m, dim) with a nondegenerate Gram matrix.
    """
    G = inner(basis[..., :, None, :], basis[..., None, :, :])
    rhs = inner(basis, w[..., None, :])
    coef = np.linalg.solve(G, rhs[..., None])[..., 0]
    return w - np.sum(coef[..., None] * basis, axis=-2)


def _orthonormalize(vecs: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt on (..., n, dim) spacelike vectors."""
    out = np.array(vecs, dtype=float)
    n = out.shape[-2]
    for j in range(n):
        for i in range(j):
            out[..., j, :] -= inner(out[..., j, :], out[..., i, :])[..., None] \
                * out[..., i, :]
        nrm = np.sqrt(inner(out[..., j, :], out[..., j, :]))
        out[..., j, :] /= nrm[..., None]
    return out


def normal_frame(Y: np.ndarray, N: np.ndarray, c: Chart) -> np.ndarray:
    """Oriented orthonormal frame psi of the normal bundle, shape (Nu,Nv,n,dim).

    Seeded by Gram-Schmidt of the ambient basis at (0,0) and propagated by
    nearest-frame alignment: each point projects its neighbour's frame
    onto its own normal space and re-orthonormalizes.  Row 0 is swept
    sequentially, every later row follows its predecessor in one
    vectorized step, so the result is deterministic.
    """
    dim = Y.shape[-1]
    n = dim - 4
    basis = np.stack([Y, N, d_u(Y, c), d_v(Y, c)], axis=-2)

    # seed frame at (0, 0)
    seed = []
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        w = _project_out_span(e, basis[0, 0])
        for prev in seed:
            w = w - inner(w, prev) * prev
        nrm = inner(w, w)
        if nrm > 1e-6:
            seed.append(w / np.sqrt(nrm))
        if len(seed) == n:
            break
    if len(seed) < n:
        raise RuntimeError("could not seed the normal frame")

    # orient the seed so that (phi1..phi4, psi) is positively oriented
    r2 = np.sqrt(2.0)
    F0 = np.stack([(Y[0, 0] + N[0, 0]) / r2, (-Y[0, 0] + N[0, 0]) / r2,
                   basis[0, 0, 2], basis[0, 0, 3]] + seed, axis=-1)
    if np.linalg.det(F0) < 0:
        seed[-1] = -seed[-1]

    psi = np.empty(Y.shape[:2] + (n, dim))
    psi[0, 0] = np.stack(seed)
    for j in range(1, Y.shape[1]):
        cand = _project_out_span(psi[0, j - 1], basis[0, j][None, :, :])
        psi[0, j] = _orthonormalize(cand)
    for i in range(1, Y.shape[0]):
        cand = _project_out_span(psi[i - 1], basis[i][:, None, :, :])
        psi[i] = _orthonormalize(cand)
    return psi


@dataclass
class SurfaceData:
    """Canonical lift and derived conformal invariants on a chart."""
    chart: Chart
    Y: np.ndarray          # (Nu, Nv, dim) canonical lift
    N: np.ndarray          # (Nu, Nv, dim)
    psi: np.ndarray        # (Nu, Nv, n, dim) normal frame
    kappa: np.ndarray      # (Nu, Nv, n) components k_j
    schwarzian: np.ndarray  # (Nu, Nv) complex s
    b: np.ndarray          # (Nu, Nv, n, n) normal connection, antisymmetric
    beta: np.ndarray       # (Nu, Nv, n) components of D_zbar kappa
    kappa_proj_residual: float = 0.0
    b_asym_residual: float = 0.0

    @property
    def n(self) -> int:
        return self.psi.shape[-2]

    @property
    def k2(self) -> np.ndarray:
        """<kappa, conj kappa> = sum |k_j|^2."""
        return np.sum(np.abs(self.kappa) ** 2, axis=-1)

    def kappa_ambient(self) -> np.ndarray:
        return np.sum(self.kappa[..., :, None] * self.psi, axis=-2)

    def umbilic_mask(self, eps_rel: float = 1e-8) -> np.ndarray:
        return umbilic_mask(self.kappa, eps_rel)

    def residual_mask(self, margin: int = DEFAULT_MARGIN) -> np.ndarray:
        """Region used for residual norms; trims open-chart boundaries."""
        return self.chart.interior_mask(margin)


def invariants(Y: np.ndarray, N: np.ndarray, c: Chart) -> SurfaceData:
    """Compute kappa, s, psi, b, beta from canonical data."""
    Yz = d_z(Y, c)
    Yzz = d_z(Yz, c)
    s = 2.0 * inner(Yzz, N)
    kap_raw = Yzz + 0.5 * s[..., None] * Y

    basisC = np.stack([Y, N, Yz, np.conj(Yz)], axis=-2).astype(complex)
    kap = _project_out_span(kap_raw, basisC)
    kproj_res = float(np.max(np.abs(kap - kap_raw)))

    psi = normal_frame(Y, N, c)
    k = inner(kap[..., None, :], psi)                       # (Nu, Nv, n)

    b_raw = inner(d_z(psi, c)[..., :, None, :], psi[..., None, :, :])
    b = 0.5 * (b_raw - np.swapaxes(b_raw, -1, -2))
    b_res = float(np.max(np.abs(b_raw + np.swapaxes(b_raw, -1, -2)))) / 2

    beta = d_zbar(k, c) - np.einsum("...jl,...l->...j", np.conj(b), k)
    return SurfaceData(chart=c, Y=Y, N=N, psi=psi, kappa=k, schwarzian=s,
                       b=b, beta=beta, kappa_proj_residual=kproj_res,
                       b_asym_residual=b_res)


def build_surface_data(raw: np.ndarray, c: Chart) -> SurfaceData:
    """Full pipeline raw lift -> SurfaceData."""
    Y = canonical_lift(raw, c)
    N = frame_N(Y, c)
    return invariants(Y, N, c)


def normal_derivative_components(S: SurfaceData, comps: np.ndarray,
                                 zbar: bool = False) -> np.ndarray:
    """Components of D_z (or D_zbar) of sum_j comps_j psi_j in the psi frame."""
    c = S.chart
    if zbar:
        return d_zbar(comps, c) - np.einsum("...lj,...j->...l",
                                            np.conj(S.b), comps)
    return d_z(comps, c) - np.einsum("...lj,...j->...l", S.b, comps)


def _norms(fields: dict, c: Chart, mask: np.ndarray) -> dict:
    out = {}
    for name, f in fields.items():
        out[name] = {"sup": sup_norm(f, mask), "l2": l2_norm(f, c, mask)}
    return out


def structure_residuals(S: SurfaceData, margin: int = DEFAULT_MARGIN) -> dict:
    """Residual norms of the four moving-frame structure equations."""
    c = S.chart
    Yz = d_z(S.Y, c)
    Yzz = d_z(Yz, c)
    Yzzbar = d_zbar(Yz, c)
    kap = S.kappa_ambient()
    k2 = S.k2
    Dzbar_kap = np.sum(S.beta[..., :, None] * S.psi.astype(complex), axis=-2)

    r1 = Yzz + 0.5 * S.schwarzian[..., None] * S.Y - kap
    r2 = Yzzbar + k2[..., None] * S.Y - 0.5 * S.N
    r3 = d_z(S.N, c) + 2 * k2[..., None] * Yz \
        + S.schwarzian[..., None] * np.conj(Yz) - 2 * Dzbar_kap
    r4 = d_z(S.psi, c) \
        - np.einsum("...jl,...lm->...jm", S.b, S.psi.astype(complex)) \
        - 2 * S.beta[..., None] * S.Y[..., None, :] \
        + 2 * S.kappa[..., None] * np.conj(Yz)[..., None, :]

    mask = S.residual_mask(margin)
    return _norms({"lift": r1, "mixed": r2, "N_deriv": r3, "normal": r4},
                  c, mask)


def integrability_residuals(S: SurfaceData, margin: int = DEFAULT_MARGIN) -> dict:
    """Residual norms of the conformal Gauss, Codazzi and Ricci equations."""
    c = S.chart
    k, b, beta, s = S.kappa, S.b, S.beta, S.schwarzian
    gamma = normal_derivative_components(S, k, zbar=False)     # D_z kappa
    eta = normal_derivative_components(S, beta, zbar=True)     # D_zbar^2 kappa

    gauss = 0.5 * d_zbar(s, c) \
        - 3 * np.sum(k * np.conj(beta), axis=-1) \
        - np.sum(gamma * np.conj(k), axis=-1)
    codazzi = np.imag(eta + 0.5 * np.conj(s)[..., None] * k)
    curv = d_zbar(b, c) - d_z(np.conj(b), c) \
        + b @ np.conj(b) - np.conj(b) @ b
    rhs = 2 * (k[..., :, None] * np.conj(k)[..., None, :]
               - np.conj(k)[..., :, None] * k[..., None, :])
    ricci = curv - rhs

    mask = S.residual_mask(margin)
    return _norms({"gauss": gauss, "codazzi": codazzi, "ricci": ricci},
                  c, mask)

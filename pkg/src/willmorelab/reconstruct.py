"""Recovering Willmore data from a strongly conformally harmonic map.

Once the off-diagonal Maurer-Cartan block is in canonical shape, the
frame columns (e0, e0hat, e1, e2) carry everything: the candidate
surface [e0 - e0hat], the function h = a13 + a23 whose vanishing rules
the degenerate branch, the dual-surface field Y_mu, and, when the
four-column bundle contains a constant lightlike vector, the minimal
surface seen through stereographic projection from that vector.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import spinor
from .chart import (Chart, DEFAULT_MARGIN, d_u, d_v, d_z, d_zbar,
                    sup_norm)
from .gauss_frame import FrameField, I13, MCBlocks, maurer_cartan, \
    s_willmore_rank
from .lorentz import inner, lorentz_inverse, metric

SQRT2 = np.sqrt(2.0)


@dataclass
class NormalizedFrame:
    """Frame with the B1 block in canonical row shape.

    `orientation` records the holomorphic coordinate of the blocks:
    "same" means d_z, "conjugate" means the blocks were canonicalized in
    the conjugate coordinate and all dz-coefficients are stored with
    respect to d_zbar.
    """
    F: np.ndarray          # (Nu, Nv, dim, dim), real
    blocks: MCBlocks       # w.r.t. the orientation's holomorphic coordinate
    orientation: str
    gauge: np.ndarray      # SO+(1,3) field applied on the left of B1
    chart: Chart
    shape_residual: float = 0.0
    null_residual: float = 0.0

    @property
    def n(self) -> int:
        return self.F.shape[-1] - 4

    def col(self, i: int) -> np.ndarray:
        return self.F[..., :, i]

    @property
    def e0(self) -> np.ndarray:
        return self.col(0)

    @property
    def e0hat(self) -> np.ndarray:
        return self.col(1)

    @property
    def e1(self) -> np.ndarray:
        return self.col(2)

    @property
    def e2(self) -> np.ndarray:
        return self.col(3)

    @property
    def Y0(self) -> np.ndarray:
        return (self.e0 - self.e0hat) / SQRT2

    @property
    def N0(self) -> np.ndarray:
        return (self.e0 + self.e0hat) / SQRT2

    @property
    def P(self) -> np.ndarray:
        return 0.5 * (self.e1 - 1j * self.e2)

    @property
    def h(self) -> np.ndarray:
        """a13 + a23; its zero set is the branch locus of [e0 - e0hat]."""
        return self.blocks.a(1, 3) + self.blocks.a(2, 3)

    def d_hol(self, f: np.ndarray) -> np.ndarray:
        """Derivative in the orientation's holomorphic coordinate."""
        if self.orientation == "conjugate":
            return d_zbar(f, self.chart)
        return d_z(f, self.chart)

    def d_antihol(self, f: np.ndarray) -> np.ndarray:
        if self.orientation == "conjugate":
            return d_z(f, self.chart)
        return d_zbar(f, self.chart)

    def speccond_residual(self, margin: int = DEFAULT_MARGIN) -> float:
        """sup |a13 + a23 - i(a14 + a24)|, forced by harmonicity."""
        r = self.blocks.a(1, 3) + self.blocks.a(2, 3) \
            - 1j * (self.blocks.a(1, 4) + self.blocks.a(2, 4))
        return sup_norm(r, self.chart.interior_mask(margin))

    def canonical_beta_k(self):
        """(beta, k) fields read off the canonical B1 rows."""
        B1 = self.blocks.B1
        beta = B1[..., 0, :] / SQRT2
        k = -B1[..., 2, :]
        return beta, k


def normalize(Ff: FrameField, M: MCBlocks | None = None,
              tol: float = 1e-6,
              orientation: str | None = None) -> NormalizedFrame:
    """Gauge a frame so that its B1 block takes the canonical row shape.

    The SO+(1,3) gauge comes from the pointwise rank-1 factorization of
    the columns in the 2x2-matrix model plus a continuation sweep, so it
    is smooth wherever B1 is; the frame and all blocks are recomputed in
    the new gauge.
    """
    c = Ff.chart
    if M is None:
        M = maurer_cartan(Ff)
    A, _, orient = spinor.canonicalize_B1(M.B1, c, tol=tol,
                                          orientation=orientation)
    dim = Ff.F.shape[-1]
    G = np.zeros(A.shape[:-2] + (dim, dim))
    G[..., :4, :4] = lorentz_inverse(A)
    idx = np.arange(4, dim)
    G[..., idx, idx] = 1.0
    Fh = Ff.F @ G
    Mh = maurer_cartan(FrameField(F=Fh, chart=c,
                                  group_residual=Ff.group_residual))
    if orient == "conjugate":
        Mh = MCBlocks(A1=np.conj(Mh.A1), A2=np.conj(Mh.A2),
                      B1=np.conj(Mh.B1), B2=np.conj(Mh.B2),
                      chart=c, b2_residual=Mh.b2_residual)
    shape_res = spinor.canonical_shape_residual(Mh.B1)
    null_res = float(np.max(np.abs(
        np.swapaxes(Mh.B1, -1, -2) @ I13 @ Mh.B1)))
    return NormalizedFrame(F=Fh, blocks=Mh, orientation=orient, gauge=A,
                           chart=c, shape_residual=shape_res,
                           null_residual=null_res)


def constant_lightlike_vector(F: np.ndarray, c: Chart,
                              rel_gap: float = 1e-2,
                              null_tol: float = 5e-2):
    """Search the bundle spanned by the first four columns of F for a
    constant lightlike vector.

    A constant vector of the bundle is a (near-)kernel vector of the
    grid-averaged squared rejection operator; eigenvalues below rel_gap
    times the largest one count as kernel.  A sphere-minimal surface
    contributes a constant *timelike* vector, so within a kernel of
    dimension up to two the lightlike direction is solved for exactly.
    Returns (L, diagnostics); L is None if the kernel holds no null
    vector within null_tol (relative to the unit Euclidean norm).
    """
    dim = F.shape[-1]
    I = metric(dim)
    eps = np.array([-1.0, 1.0, 1.0, 1.0])
    P = np.einsum("...ik,k,...jk,jl->...il", F[..., :, :4], eps,
                  F[..., :, :4], I)
    C = np.eye(dim) - P
    M = np.mean(np.einsum("...ki,...kj->...ij", C, C), axis=(0, 1))
    w, V = np.linalg.eigh(M)
    kdim = int(np.sum(w < rel_gap * w[-1]))
    diag = {"eigenvalues": w[:3].tolist(), "kernel_dim": kdim}

    candidates = []
    if kdim >= 1:
        candidates.append(V[:, 0])
    if kdim >= 2:
        # null directions inside span{v1, v2}: a quadratic in the mix angle
        v1, v2 = V[:, 0], V[:, 1]
        q11, q12, q22 = inner(v1, v1), inner(v1, v2), inner(v2, v2)
        disc = q12**2 - q11 * q22
        if disc >= 0:
            if abs(q11) > 1e-12:
                for t in ((-q12 + np.sqrt(disc)) / q11,
                          (-q12 - np.sqrt(disc)) / q11):
                    v = t * v1 + v2
                    candidates.append(v / np.linalg.norm(v))
            else:
                candidates.append(v1)

    best = None
    best_res = np.inf
    for L in candidates:
        res = abs(inner(L, L))        # unit Euclidean norm
        if res < best_res:
            best, best_res = L, res
    diag["null_residual"] = float(best_res)
    if best is not None and best_res < null_tol:
        if best[0] < 0:
            best = -best
        # snap onto the forward null cone (removes the off-cone component
        # of the estimation error)
        ls = best[1:]
        t = 0.5 * (best[0] + np.linalg.norm(ls))
        best = t * np.concatenate([[1.0], ls / np.linalg.norm(ls)])
        best = best / np.linalg.norm(best)
        return best, diag
    return None, diag


@dataclass
class SphereMap:
    """Grid of unit vectors in R^{n+3}, representatives of projective
    light-cone points with the first coordinate scaled to 1."""
    values: np.ndarray     # (Nu, Nv, n+3)
    chart: Chart

    def unit_residual(self) -> float:
        return float(np.max(np.abs(
            np.sum(self.values**2, axis=-1) - 1.0)))

    def distance(self, other: "SphereMap") -> float:
        return float(np.max(np.sqrt(np.sum(
            (self.values - other.values) ** 2, axis=-1))))

    def lift(self) -> np.ndarray:
        one = np.ones(self.values.shape[:-1] + (1,))
        return np.concatenate([one, self.values], axis=-1)


def to_sphere_map(Y: np.ndarray, c: Chart) -> SphereMap:
    """Scale a lightlike field to first coordinate 1; the rest is a unit
    vector in R^{n+3}."""
    x0 = Y[..., 0]
    if np.min(np.abs(x0)) < 1e-12 * np.max(np.abs(Y)):
        raise ValueError("representative has a vanishing first coordinate")
    vals = Y[..., 1:] / x0[..., None]
    nrm = np.sqrt(np.sum(vals**2, axis=-1))
    return SphereMap(values=vals / nrm[..., None], chart=c)


def project_y0(NF: NormalizedFrame, tol: float = 1e-6) -> dict:
    """The candidate surface [e0 - e0hat] with its diagnostics.

    Only meaningful on the non-degenerate branch; the immersion fails
    exactly on the zero set of h, which is reported as a mask.
    """
    c = NF.chart
    y = to_sphere_map(NF.Y0, c)
    h = NF.h
    scale = np.max(np.abs(NF.blocks.A1)) + c.h
    U0 = np.abs(h) < tol * scale
    Y0d = NF.d_hol(NF.Y0)
    conf = inner(Y0d, Y0d)
    # off U0 the derivative must have rank 2: |<Y0_hol, Y0_antihol>| > 0
    imm = np.real(inner(Y0d, np.conj(Y0d)))
    return {"map": y, "U0": U0, "conformality": conf,
            "immersion_density": imm}


def dual_mu(NF: NormalizedFrame, eps_rel: float = 1e-6) -> dict:
    """The Moebius-coordinate field mu of the dual construction.

    Solves beta_j = -(conj(mu)/2) k_j in the modulus-weighted least-squares
    sense per point; at isolated common zeros of the canonical block the
    shared monomial factor is divided out first.  Where k vanishes but
    beta does not, the reciprocal representation nu = 1/mu is valid and
    returned alongside.
    """
    _, k = NF.canonical_beta_k()
    kmag = np.sqrt(np.sum(np.abs(k)**2, axis=-1))
    B1 = NF.blocks.B1
    if np.min(np.sqrt(np.sum(np.abs(B1)**2, axis=(-2, -1)))) \
            <= eps_rel * np.max(np.abs(B1)):
        _, B1 = spinor.common_factor(B1, NF.chart, eps_rel)
    beta = B1[..., 0, :] / SQRT2
    k = -B1[..., 2, :]
    k2 = np.sum(np.abs(k)**2, axis=-1)
    b2 = np.sum(np.abs(beta)**2, axis=-1)
    scale2 = np.max(k2 + b2) + 1e-300
    pole = k2 <= eps_rel**2 * scale2          # k = 0, mu = infinity
    zero = b2 <= eps_rel**2 * scale2          # beta = 0, mu = 0

    with np.errstate(divide="ignore", invalid="ignore"):
        mubar = -2.0 * np.sum(np.conj(k) * beta, axis=-1) / k2
        nubar = np.where(b2 > 0, -0.5 * np.sum(np.conj(beta) * k, axis=-1)
                         / (b2 + 1e-300), 0.0)
    mu = np.conj(mubar)
    mu = np.where(zero, 0.0, mu)
    nu = np.conj(nubar)

    # rank-1 consistency: residual of the defining relation, worst column
    resid = beta + 0.5 * mubar[..., None] * k
    scatter = np.where(pole, 0.0,
                       np.max(np.abs(resid), axis=-1) / np.sqrt(scale2))
    return {"mu": mu, "nu": nu, "pole_mask": pole, "zero_mask": zero,
            "scatter_sup": float(np.max(scatter))}


def build_Y_mu(NF: NormalizedFrame, mu: np.ndarray) -> dict:
    """The field Y_mu = N0 + mu1 e1 - mu2 e2 + (|mu|^2/2) Y0.

    Lightlike by construction; the reported pairings of its holomorphic
    derivative decide between the surface case (positive mixed pairing)
    and the further-reduced case.
    """
    mu1 = np.real(mu)
    mu2 = np.imag(mu)
    Ymu = NF.N0 + mu1[..., None] * NF.e1 - mu2[..., None] * NF.e2 \
        + 0.5 * (np.abs(mu)**2)[..., None] * NF.Y0
    Yd = NF.d_hol(Ymu)
    return {"Ymu": Ymu,
            "null_residual": float(np.max(np.abs(inner(Ymu, Ymu)))),
            "hol_pairing": inner(Yd, Yd),
            "mixed_pairing": np.real(inner(Yd, np.conj(Yd)))}


def dual_surface(NF: NormalizedFrame, mu: np.ndarray,
                 margin: int = DEFAULT_MARGIN) -> dict:
    """Dual-surface representative for a rank-1 (duality) frame.

    Same algebraic field as build_Y_mu; additionally verifies that the
    holomorphic derivative of the dual stays inside the four-column
    bundle (the duality condition), and returns the sphere map.
    """
    c0 = NF.chart
    _, maxrank = s_willmore_rank(NF.blocks.B1, tol=max(1e-6, 50 * c0.h**2),
                                 mask=c0.interior_mask(margin))
    if maxrank > 1:
        raise ValueError("dual surface needs max rank 1, got rank 2")
    data = build_Y_mu(NF, mu)
    Ymu = data["Ymu"]
    c = NF.chart
    Yd = NF.d_hol(Ymu)
    basis = np.stack([NF.e0, NF.e0hat, NF.e1, NF.e2], axis=-2)
    coef = np.einsum("...kd,...d->...k", basis @ metric(NF.F.shape[-1]),
                     Yd) * np.array([-1.0, 1.0, 1.0, 1.0])
    rej = Yd - np.sum(coef[..., None] * basis, axis=-2)
    mask = c.interior_mask(margin)
    data["duality_residual"] = sup_norm(rej, mask)
    data["map"] = to_sphere_map(Ymu, c)
    return data


def stereographic(Ymu: np.ndarray, Y0c: np.ndarray, c: Chart,
                  margin: int = DEFAULT_MARGIN) -> dict:
    """Affine coordinates of [Y_mu] in the chart complementary to the
    constant lightlike vector Y0c, with minimality diagnostics.

    The representative is scaled to <rep, Y0c> = -1; the coordinates are
    Minkowski pairings with an orthonormal basis of {Y0c, Z}^perp, where
    Z is the time-reflected null partner of Y0c.  For the degenerate
    harmonic branch the result is conformal with harmonic components.
    """
    dim = Y0c.shape[-1]
    L = Y0c / Y0c[..., 0]                   # first coordinate 1
    Z = np.concatenate([[L[0]], -L[1:]])
    Z = Z / 2.0                              # <L, Z> = -1, null
    den = -inner(Ymu, L)
    if np.min(np.abs(den)) < 1e-12 * np.max(np.abs(Ymu)):
        raise ValueError("representative meets the projection center")
    rep = Ymu / den[..., None]

    # orthonormal spacelike basis of the complement of span{L, Z}
    basis = []
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        w = e + inner(e, Z) * L + inner(e, L) * Z
        for prev in basis:
            w = w - inner(w, prev) * prev
        nrm = inner(w, w)
        if nrm > 1e-8:
            basis.append(w / np.sqrt(nrm))
        if len(basis) == dim - 2:
            break
    E = np.stack(basis, axis=0)              # (dim-2, dim)
    x = inner(rep[..., None, :], E)

    xu = d_u(x, c)
    xv = d_v(x, c)
    Ecoef = np.sum(xu * xu, axis=-1)
    Gcoef = np.sum(xv * xv, axis=-1)
    Fcoef = np.sum(xu * xv, axis=-1)
    lap = d_u(xu, c) + d_v(xv, c)
    mask = c.interior_mask(margin)
    scale = float(np.max(Ecoef + Gcoef)) + 1e-300
    return {"x": x,
            "conformal_residual": float(max(
                sup_norm(Ecoef - Gcoef, mask), sup_norm(Fcoef, mask))
                / scale),
            "harmonic_residual": sup_norm(lap, mask) / np.sqrt(scale)}


@dataclass
class Classification:
    case: str              # a1 | a2 | b1 | b2i | b2ii | ambiguous
    max_rank: int
    h_sup: float
    h_scale: float
    constant_vector: np.ndarray | None
    verdict: str
    details: dict = field(default_factory=dict)

    @property
    def has_willmore_surface(self) -> bool:
        return self.case in ("a1", "a2", "b2i")


def classify(NF: NormalizedFrame, tol: float = 1e-6,
             tol_h: float = 1e-6) -> Classification:
    """Case analysis of a normalized strongly conformally harmonic frame.

    Non-degenerate branch (no constant lightlike vector in the bundle):
    the surface is [e0 - e0hat]; rank 1 means it has a dual.  Degenerate
    branch: rank 2 admits no surface at all; rank 1 leads, through the
    conjugate-orientation renormalization, either to a minimal surface
    in flat space (positive mixed pairing of Y_mu) or to a further
    reduction.
    """
    c = NF.chart
    _, maxrank = s_willmore_rank(NF.blocks.B1, tol=max(tol, 50 * c.h**2),
                                 mask=c.interior_mask(DEFAULT_MARGIN))
    L, cdiag = constant_lightlike_vector(NF.F, c)
    h_scale = float(np.max(np.abs(NF.blocks.A1))) + c.h
    h_sup = float(np.max(np.abs(NF.h)))
    details = {"constant_vector_diag": cdiag,
               "speccond_residual": NF.speccond_residual()}

    if L is None:
        if h_sup < tol_h * h_scale:
            # no constant vector yet h vanishes identically: borderline
            return Classification("ambiguous", maxrank, h_sup, h_scale,
                                  None, "borderline data: h vanishes but "
                                  "no constant lightlike vector found",
                                  details)
        case = "a1" if maxrank >= 2 else "a2"
        verdict = "willmore surface [e0 - e0hat]" + \
            ("" if maxrank >= 2 else " (has a dual)")
        return Classification(case, maxrank, h_sup, h_scale, None,
                              verdict, details)

    details["constant_vector"] = L
    if maxrank >= 2:
        return Classification(
            "b1", maxrank, h_sup, h_scale, L,
            "no Willmore surface: degenerate with rank 2, not the "
            "conformal Gauss map of any surface", details)

    # degenerate rank-1: renormalize so the constant vector is [e0-e0hat]
    NFc = normalize(FrameField(F=NF.F, chart=c), orientation="conjugate")
    y0c = to_sphere_map(NFc.Y0, c).values
    im = c.interior_mask(DEFAULT_MARGIN)
    drift = float(np.max(np.sqrt(np.sum(
        (y0c - np.mean(y0c[im], axis=0))**2, axis=-1))[im]))
    details["y0_constant_drift"] = drift
    md = dual_mu(NFc)
    data = build_Y_mu(NFc, md["mu"])
    details["mu_scatter"] = md["scatter_sup"]
    details["Ymu_hol_pairing_sup"] = float(np.max(np.abs(
        data["hol_pairing"])))
    mixed = data["mixed_pairing"]
    mask = c.interior_mask(DEFAULT_MARGIN)
    pos_frac = float(np.mean(mixed[mask] > tol * np.max(np.abs(mixed))))
    details["mixed_positive_fraction"] = pos_frac
    details["normalized_conjugate"] = NFc
    details["Ymu"] = data["Ymu"]
    details["mu"] = md["mu"]

    if pos_frac > 0.5:
        return Classification(
            "b2i", maxrank, h_sup, h_scale, L,
            "minimal surface in flat space via stereographic projection",
            details)
    return Classification(
        "b2ii", maxrank, h_sup, h_scale, L,
        "no Willmore surface: reduced degenerate harmonic map, not a "
        "conformal Gauss map", details)


def verify_gauss_match(y: SphereMap, NF: NormalizedFrame,
                       margin: int = DEFAULT_MARGIN) -> dict:
    """Compare the four-column bundle of NF with the central-sphere
    bundle rebuilt from the candidate surface y.

    Reports the sup principal-angle distance between the two subspace
    fields and the orientation sign of the change of basis.
    """
    from .surface import build_surface_data
    c = NF.chart
    S = build_surface_data(y.lift(), c)
    phi = np.stack([(S.Y + S.N) / SQRT2, (-S.Y + S.N) / SQRT2,
                    d_u(S.Y, c), d_v(S.Y, c)], axis=-2)   # (.., 4, dim)
    f = np.stack([NF.e0, NF.e0hat, NF.e1, NF.e2], axis=-2)

    # Euclidean orthonormal projectors for the subspace distance
    Qp = np.linalg.qr(np.swapaxes(phi, -1, -2))[0]
    Qf = np.linalg.qr(np.swapaxes(f, -1, -2))[0]
    D = Qp @ np.swapaxes(Qp, -1, -2) - Qf @ np.swapaxes(Qf, -1, -2)
    mask = c.interior_mask(margin)
    dist = sup_norm(D, mask)

    # change of basis in the Minkowski metric and its orientation
    G = inner(phi[..., :, None, :], phi[..., None, :, :])
    M = inner(phi[..., :, None, :], f[..., None, :, :])
    Cmat = np.linalg.solve(G, M)
    sgn = np.sign(np.linalg.det(Cmat))
    votes = np.mean(sgn[mask])
    orientation = "same" if votes > 0 else "opposite"
    return {"subspace_distance": dist, "orientation": orientation,
            "orientation_votes": float(votes)}

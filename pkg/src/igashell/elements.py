"""Element-level machinery: quadrature tables, internal force vectors,
consistent tangent matrices, and external load contributions.

Work conjugacy fixes the factors used throughout: with tau = 2 dW/da and
M0 = dW/db per unit reference area,

    delta W_int = int ( 1/2 tau : delta a + M0 : delta b ) dA.

The hatted strain rows carry the doubled shear entry, so the Voigt moduli
blocks from the material layer enter raw.  The curvature variation uses the
current-configuration Christoffel correction of the second basis derivatives.
"""

from __future__ import annotations

import numpy as np

from .geometry import Mesh, Patch
from .kinematics import surface_vectors_state

__all__ = [
    "PatchQuadrature",
    "EdgeQuadrature",
    "internal_forces",
    "total_energy",
    "dead_area_load",
    "follower_pressure",
    "dead_edge_traction",
    "follower_edge_moment",
    "point_load",
]

# antisymmetric symbol, eps[0, 1] = +1
_EPS2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


def gauss_01(n: int):
    """Gauss-Legendre points and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(int(n))
    return 0.5 * (x + 1.0), 0.5 * w


class PatchQuadrature:
    """Per-element basis tables and reference geometry for one patch.

    Quadrature uses (p + 1) x (q + 1) Gauss points per element.  All arrays
    are stacked over elements: N (nel, ngp, nloc), dN (..., 2), d2N (..., 3)
    with the mixed derivative last.
    """

    def __init__(self, patch: Patch, node_ids: np.ndarray, n_gauss=None):
        self.patch = patch
        pu, pv = patch.degree_u, patch.degree_v
        ngu, ngv = (pu + 1, pv + 1) if n_gauss is None else n_gauss
        tu, wu = gauss_01(ngu)
        tv, wv = gauss_01(ngv)
        spans_u = patch.basis_u.breaks
        spans_v = patch.basis_v.breaks
        nelu, nelv = patch.n_elements_u, patch.n_elements_v
        self.nel = nelu * nelv
        self.nloc = (pu + 1) * (pv + 1)
        self.ngp = ngu * ngv
        nel, nloc, ngp = self.nel, self.nloc, self.ngp

        self.N = np.empty((nel, ngp, nloc))
        self.dN = np.empty((nel, ngp, nloc, 2))
        self.d2N = np.empty((nel, ngp, nloc, 3))
        self.wq = np.empty((nel, ngp))
        self.conn = np.empty((nel, nloc), dtype=np.int64)
        self.local_ids = np.empty((nel, nloc), dtype=np.int64)
        e = 0
        for ev in range(nelv):
            v0, v1 = spans_v[ev], spans_v[ev + 1]
            for eu in range(nelu):
                u0, u1 = spans_u[eu], spans_u[eu + 1]
                g = 0
                for t_v, w_v in zip(tv, wv):
                    for t_u, w_u in zip(tu, wu):
                        u = u0 + t_u * (u1 - u0)
                        v = v0 + t_v * (v1 - v0)
                        idx, N, dN, d2N = patch.basis2d(u, v)
                        if g == 0:
                            self.local_ids[e] = idx
                            self.conn[e] = node_ids[idx]
                        self.N[e, g] = N
                        self.dN[e, g] = dN
                        self.d2N[e, g] = d2N
                        self.wq[e, g] = w_u * w_v * (u1 - u0) * (v1 - v0)
                        g += 1
                e += 1

        self.edof = (3 * self.conn[:, :, None]
                     + np.arange(3)[None, None, :]).reshape(nel, 3 * nloc)
        # reference geometry at the quadrature points
        Xe = patch.points[self.local_ids]                   # (nel, nloc, 3)
        self.X = np.einsum("egn,eni->egi", self.N, Xe)
        A_vec = np.einsum("egna,eni->egai", self.dN, Xe)
        H_vec = np.einsum("egnr,eni->egri", self.d2N, Xe)
        self.ref_state, self.ref_normal = surface_vectors_state(A_vec, H_vec)
        self.jacA = self.ref_state.jac                      # (nel, ngp)

    def current(self, x_nodes: np.ndarray):
        """Current metric states plus the vectors needed by the B operators."""
        xe = x_nodes[self.conn]                             # (nel, nloc, 3)
        a_vec = np.einsum("egna,eni->egai", self.dN, xe)
        h_vec = np.einsum("egnr,eni->egri", self.d2N, xe)
        state, normal = surface_vectors_state(a_vec, h_vec)
        a_up = np.einsum("egab,egbi->egai", state.a_con, a_vec)
        gamma = np.einsum("egci,egri->egcr", a_up, h_vec)   # (nel,ngp,2,3ord)
        return state, normal, a_vec, a_up, h_vec, gamma


def _b_operators(pq, state, normal, a_vec, a_up, gamma):
    """Hatted strain-variation operators, stacked (nel, ngp, 6, 3 nloc).

    Rows 0-2: [d a11, d a22, 2 d a12]; rows 3-5: [d b11, d b22, 2 d b12].
    """
    nel, ngp, nloc = pq.nel, pq.ngp, pq.nloc
    dN, d2N = pq.dN, pq.d2N
    # covariant second derivatives of the basis (Christoffel corrected)
    Nt = d2N - np.einsum("egcr,egnc->egnr", gamma, dN)
    B = np.empty((nel, ngp, 6, nloc, 3))
    B[:, :, 0] = 2.0 * dN[..., 0, None] * a_vec[:, :, None, 0, :]
    B[:, :, 1] = 2.0 * dN[..., 1, None] * a_vec[:, :, None, 1, :]
    B[:, :, 2] = 2.0 * (dN[..., 0, None] * a_vec[:, :, None, 1, :]
                        + dN[..., 1, None] * a_vec[:, :, None, 0, :])
    n_b = normal[:, :, None, :]
    B[:, :, 3] = Nt[..., 0, None] * n_b
    B[:, :, 4] = Nt[..., 1, None] * n_b
    B[:, :, 5] = 2.0 * Nt[..., 2, None] * n_b
    return B.reshape(nel, ngp, 6, 3 * nloc), Nt


def internal_forces(pq: PatchQuadrature, material, x_nodes, tangent=True):
    """Element internal force vectors and (optionally) consistent tangents.

    Returns (f_el (nel, nd), K_el (nel, nd, nd) or None).
    """
    state, normal, a_vec, a_up, h_vec, gamma = pq.current(x_nodes)
    ref = pq.ref_state
    w = pq.wq * pq.jacA                                    # (nel, ngp)
    sv = material.stress_voigt(ref, state)                 # (nel, ngp, 6)
    B, Nt = _b_operators(pq, state, normal, a_vec, a_up, gamma)
    half = np.array([0.5, 0.5, 0.5, 1.0, 1.0, 1.0])
    f_el = np.einsum("egkd,egk->ed", B, sv * half * w[..., None])
    if not tangent:
        return f_el, None

    C, D, E4, F = material.moduli_voigt(ref, state)        # (nel, ngp, 3, 3)
    M6 = np.empty((pq.nel, pq.ngp, 6, 6))
    M6[:, :, :3, :3] = 0.25 * C
    M6[:, :, :3, 3:] = 0.5 * D
    M6[:, :, 3:, :3] = 0.5 * E4
    M6[:, :, 3:, 3:] = F
    T = np.matmul(M6, B) * w[..., None, None]
    K_el = np.matmul(B.transpose(0, 1, 3, 2), T).sum(axis=1)

    # geometric part from the second variation of the strains
    tau = np.empty((pq.nel, pq.ngp, 2, 2))
    tau[..., 0, 0] = sv[..., 0]
    tau[..., 1, 1] = sv[..., 1]
    tau[..., 0, 1] = tau[..., 1, 0] = sv[..., 2]
    # membrane: 1/2 tau : (Delta delta a) = tau^{ab} (d a_a . D a_b)
    s_ab = np.einsum("egna,egab,egmb->egnm", pq.dN, tau * w[..., None, None],
                     pq.dN)
    K_geo = np.einsum("egnm,ij->enimj", s_ab,
                      np.eye(3)).reshape(pq.nel, 3 * pq.nloc, 3 * pq.nloc)

    # bending: M0 : (Delta delta b)
    bM = (sv[..., 3] * state.b_cov[..., 0, 0]
          + sv[..., 4] * state.b_cov[..., 1, 1]
          + 2.0 * sv[..., 5] * state.b_cov[..., 0, 1])     # M : b
    Ln = np.einsum("egna,egi->egnai", pq.dN, normal)       # (nel,ngp,n,2,3)
    w_ab = state.a_con * (bM * w)[..., None, None]
    kM1 = -np.einsum("egnai,egab,egmbj->enimj", Ln, w_ab, Ln)
    mt = (sv[..., 3, None] * Nt[..., 0] + sv[..., 4, None] * Nt[..., 1]
          + 2.0 * sv[..., 5, None] * Nt[..., 2])           # (nel, ngp, nloc)
    kM2 = -np.einsum("egi,egnc,egcj,egm->enimj",
                     normal, pq.dN, a_up * w[..., None, None], mt)
    K_geo += (kM1 + kM2 + kM2.transpose(0, 3, 4, 1, 2)).reshape(
        pq.nel, 3 * pq.nloc, 3 * pq.nloc)
    return f_el, K_el + K_geo


def total_energy(pq: PatchQuadrature, material, x_nodes):
    """Stored energy over the patch (meaningful for the direct models)."""
    state, _, _, _, _, _ = pq.current(x_nodes)
    W = material.energy(pq.ref_state, state)
    return float((pq.wq * pq.jacA * W).sum())


# ---------------------------------------------------------------------------
# surface loads


def dead_area_load(pq: PatchQuadrature, t):
    """Constant or position-dependent traction per unit reference area."""
    if callable(t):
        tv = np.asarray([[t(x) for x in row] for row in pq.X])
    else:
        tv = np.broadcast_to(np.asarray(t, dtype=float), pq.X.shape)
    w = pq.wq * pq.jacA
    f_el = np.einsum("egn,egi->eni", pq.N, tv * w[..., None])
    return f_el.reshape(pq.nel, -1)


def follower_pressure(pq: PatchQuadrature, p: float, x_nodes, tangent=True):
    """Pressure acting along the current normal on the current area."""
    state, normal, a_vec, a_up, _, _ = pq.current(x_nodes)
    w = pq.wq * state.jac                                  # current measure
    f_el = p * np.einsum("egn,egi->eni", pq.N, normal * w[..., None])
    f_el = f_el.reshape(pq.nel, -1)
    if not tangent:
        return f_el, None
    # delta(n ja) = ja sum_b dN_B,b (a^b_j n_i - a^b_i n_j) dx_Bj
    G = (np.einsum("egi,egbj->egibj", normal, a_up)
         - np.einsum("egbi,egj->egibj", a_up, normal))
    K_el = p * np.einsum("egn,egibj,egmb->enimj",
                         pq.N * w[..., None], G, pq.dN)
    nd = 3 * pq.nloc
    return f_el, K_el.reshape(pq.nel, nd, nd)


def point_load(mesh: Mesh, patch_idx: int, u: float, v: float, F):
    """Dead point force: (node_ids, per-node force rows)."""
    patch = mesh.patches[patch_idx]
    idx, N, _, _ = patch.basis2d(u, v)
    nodes = mesh.patch_node_ids[patch_idx][idx]
    return nodes, N[:, None] * np.asarray(F, dtype=float)[None, :]


# ---------------------------------------------------------------------------
# edge tables and loads


class EdgeQuadrature:
    """Boundary-strip tables for one side of a patch.

    The running parameter is u for sides v0/v1 and v for u0/u1; ``xi_dir``
    stores which of the two surface parameters runs along the edge.  The full
    2D element basis is tabulated at the edge Gauss points so that rotation
    coupled quantities (normals, curvatures) are available.
    """

    def __init__(self, patch: Patch, node_ids: np.ndarray, side: str,
                 n_gauss=None):
        self.patch = patch
        self.side = side
        along_u = side in ("v0", "v1")
        self.xi_dir = 0 if along_u else 1
        basis_run = patch.basis_u if along_u else patch.basis_v
        p_run = patch.degree_u if along_u else patch.degree_v
        ng = p_run + 1 if n_gauss is None else n_gauss
        tg, wg = gauss_01(ng)
        spans = basis_run.breaks
        if side == "v0":
            v_fix = patch.knots_v[0]
        elif side == "v1":
            v_fix = patch.knots_v[-1]
        elif side == "u0":
            v_fix = patch.knots_u[0]
        else:
            v_fix = patch.knots_u[-1]
        self.nel = len(spans) - 1
        self.ngp = ng
        self.nloc = (patch.degree_u + 1) * (patch.degree_v + 1)
        nel, nloc = self.nel, self.nloc
        self.N = np.empty((nel, ng, nloc))
        self.dN = np.empty((nel, ng, nloc, 2))
        self.d2N = np.empty((nel, ng, nloc, 3))
        self.wq = np.empty((nel, ng))
        self.conn = np.empty((nel, nloc), dtype=np.int64)
        self.local_ids = np.empty((nel, nloc), dtype=np.int64)
        for e in range(nel):
            s0, s1 = spans[e], spans[e + 1]
            for g, (t, wgt) in enumerate(zip(tg, wg)):
                s = s0 + t * (s1 - s0)
                u, v = (s, v_fix) if along_u else (v_fix, s)
                idx, N, dN, d2N = patch.basis2d(u, v)
                if g == 0:
                    self.local_ids[e] = idx
                    self.conn[e] = node_ids[idx]
                self.N[e, g] = N
                self.dN[e, g] = dN
                self.d2N[e, g] = d2N
                self.wq[e, g] = wgt * (s1 - s0)
        self.edof = (3 * self.conn[:, :, None]
                     + np.arange(3)[None, None, :]).reshape(nel, 3 * nloc)
        Xe = patch.points[self.local_ids]
        self.X = np.einsum("egn,eni->egi", self.N, Xe)
        A_vec = np.einsum("egna,eni->egai", self.dN, Xe)
        H_vec = np.einsum("egnr,eni->egri", self.d2N, Xe)
        self.ref_state, self.ref_normal = surface_vectors_state(A_vec, H_vec)
        self.ref_tangent_vec = A_vec[:, :, self.xi_dir, :]
        self.jac_edge0 = np.linalg.norm(self.ref_tangent_vec, axis=-1)

    def current(self, x_nodes: np.ndarray):
        xe = x_nodes[self.conn]
        a_vec = np.einsum("egna,eni->egai", self.dN, xe)
        h_vec = np.einsum("egnr,eni->egri", self.d2N, xe)
        state, normal = surface_vectors_state(a_vec, h_vec)
        a_up = np.einsum("egab,egbi->egai", state.a_con, a_vec)
        return state, normal, a_vec, a_up


def dead_edge_traction(eq: EdgeQuadrature, t):
    """Force per unit reference edge length, constant or callable of X."""
    if callable(t):
        tv = np.asarray([[t(x) for x in row] for row in eq.X])
    else:
        tv = np.broadcast_to(np.asarray(t, dtype=float), eq.X.shape)
    w = eq.wq * eq.jac_edge0
    f_el = np.einsum("egn,egi->eni", eq.N, tv * w[..., None])
    return f_el.reshape(eq.nel, -1)


def follower_edge_moment(eq: EdgeQuadrature, m: float, x_nodes, tangent=True):
    """Moment per unit current length about the running edge tangent.

    The virtual work is  int m (tau x n) . delta n ds.  Writing the edge
    tangent through the covariant base vector of the running parameter makes
    the arc measure cancel, leaving surface quantities only:

        f_A = -m w  ja  eps[d, xi]  a^{gd} dN_{A,g}  n.

    Positive m rotates the surface edge by the right-hand rule about the
    tangent that points along increasing edge parameter.
    """
    state, normal, a_vec, a_up = eq.current(x_nodes)
    eps_col = _EPS2[:, eq.xi_dir]                           # eps[d, xi]
    P = np.einsum("egcd,d->egc", state.a_con, eps_col)
    q = np.einsum("egnc,egc->egn", eq.dN, P)
    w = eq.wq * state.jac
    f_el = -m * np.einsum("egn,egi->eni", q * w[..., None], normal)
    f_el = f_el.reshape(eq.nel, -1)
    if not tangent:
        return f_el, None
    u = np.einsum("egnc,egci->egni", eq.dN, a_up)
    s = np.einsum("egna,egab,egmb->egnm", eq.dN, state.a_con, eq.dN)
    Pa = np.einsum("egc,egci->egi", P, a_vec)
    wn = w[..., None, None, None, None]
    K = (np.einsum("egn,egi,egmj->egnimj", q, normal, u)
         - np.einsum("egi,egnm,egj->egnimj", normal, s, Pa)
         - np.einsum("egi,egm,egnj->egnimj", normal, q, u)
         - np.einsum("egn,egmi,egj->egnimj", q, u, normal))
    K_el = (-m) * (wn * K).sum(axis=1)
    nd = 3 * eq.nloc
    return f_el, K_el.reshape(eq.nel, nd, nd)

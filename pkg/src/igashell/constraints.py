"""Edge rotation conditions along patch edges.

The deformed surface normal along an edge is tied either to the normal of a
neighbouring patch across a conforming interface (smooth coupling, fixed
folds) or to a fixed direction (symmetry planes, clamped edges, prescribed
edge rotation).  Writing n for the edge normal, nt for the mate normal and
tau for the running edge tangent, the pair

    cos(alpha) = n . nt,     sin(alpha) = (n x nt) . tau

measures the relative rotation; the rest values (c0, s0) are taken from the
reference configuration, so any rest fold angle is preserved without extra
bookkeeping.

Enforcement is either a quadratic penalty on the angle deviation,

    Pi = int eps (1 - c0 cos(alpha) - s0 sin(alpha)) dS,

or a Lagrange multiplier field q along the edge acting on

    g = 1 - cos(alpha - alpha0) + sin(alpha - alpha0),

which vanishes exactly at alpha = alpha0 and is locally convex there (valid
while |alpha - alpha0| < pi/4).  Both forces are exact gradients of their
potentials, so the tangent blocks are symmetric and the multiplier method
yields a saddle point.  The multiplier blocks reuse the penalty kernels with
the coefficient substitution eps -> 1, c0 -> q (s0 + c0), s0 -> q (s0 - c0),
which is what differentiating q g produces.

Recovered constraint moment about the edge tangent: m_tau = eps sin(alpha -
alpha0) for the penalty and m_tau = -q for the multiplier method.
"""

from dataclasses import dataclass, replace

import numpy as np

from .elements import EdgeQuadrature, gauss_01


@dataclass(frozen=True)
class Penalty:
    """Penalty enforcement; epsilon carries units of force times length."""
    epsilon: float

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError("penalty parameter must be positive")


@dataclass(frozen=True)
class Multiplier:
    """Lagrange multiplier enforcement with an edge interpolation scheme.

    interp "n2q0": one constant multiplier per edge element (default).
    interp "n2q1c": continuous piecewise-linear multipliers on the edge
    element grid.  Each constraint owns an independent multiplier chain, so
    multipliers are automatically duplicated where several interfaces meet.
    """
    interp: str = "n2q0"

    def __post_init__(self):
        if self.interp not in ("n2q0", "n2q1c"):
            raise ValueError(f"unknown multiplier interpolation {self.interp!r}")


def _flip_edge_tables(eq: EdgeQuadrature) -> None:
    """Reverse element and gauss ordering so tables align with the mate edge."""
    for name in ("N", "dN", "d2N", "wq", "X", "ref_normal", "ref_tangent_vec",
                 "jac_edge0"):
        setattr(eq, name, np.ascontiguousarray(getattr(eq, name)[::-1, ::-1]))
    eq.conn = np.ascontiguousarray(eq.conn[::-1])
    eq.local_ids = np.ascontiguousarray(eq.local_ids[::-1])
    eq.edof = (3 * eq.conn[:, :, None]
               + np.arange(3)[None, None, :]).reshape(eq.nel, -1)
    eq.ref_state = replace(
        eq.ref_state, **{f: np.ascontiguousarray(getattr(eq.ref_state, f)[::-1, ::-1])
                         for f in ("a_cov", "b_cov", "a_con", "det_a", "jac",
                                   "b_con", "H", "kappa")})


class _EdgeGeometry:
    """Per-gauss-point current quantities shared by force and tangent kernels."""

    __slots__ = ("n", "nt", "tau", "alen", "aup_a", "acon_a", "aup_b",
                 "acon_b", "cosa", "sina")

    def __init__(self, n, nt, tau, alen, aup_a, acon_a, aup_b, acon_b):
        self.n = n
        self.nt = nt
        self.tau = tau
        self.alen = alen
        self.aup_a = aup_a
        self.acon_a = acon_a
        self.aup_b = aup_b
        self.acon_b = acon_b
        self.cosa = np.einsum("egi,egi->eg", n, nt)
        self.sina = np.einsum("egi,egi->eg", np.cross(n, nt), tau)


class RotationConstraint:
    """One constrained edge, two-sided (interface) or one-sided (fixed mate).

    Side a is always a patch edge.  The mate is either the matching edge of a
    second patch, tabulated at the same physical quadrature points, or a
    fixed normal field that never varies.  Element/gauss tables follow the
    layout of EdgeQuadrature; per-element force and stiffness blocks are
    returned dense for the caller to scatter-add.
    """

    def __init__(self, mesh, patch_a: int, side_a: str, *, patch_b=None,
                 side_b=None, flip_b: bool = False, fixed_normal=None,
                 alpha0=None, n_gauss=None):
        pa = mesh.patches[patch_a]
        self.two_sided = patch_b is not None
        if self.two_sided:
            pb = mesh.patches[patch_b]
            run_a = pa.degree_u if side_a in ("v0", "v1") else pa.degree_v
            run_b = pb.degree_u if side_b in ("v0", "v1") else pb.degree_v
            ng = n_gauss if n_gauss is not None else max(run_a, run_b) + 1
        else:
            ng = n_gauss
        self.eq_a = EdgeQuadrature(pa, mesh.patch_node_ids[patch_a], side_a,
                                   n_gauss=ng)
        self.nel = self.eq_a.nel
        self.ngp = self.eq_a.ngp
        scale = mesh.bbox_diag()

        if self.two_sided:
            self.eq_b = EdgeQuadrature(pb, mesh.patch_node_ids[patch_b],
                                       side_b, n_gauss=ng)
            if flip_b:
                _flip_edge_tables(self.eq_b)
            if self.eq_b.nel != self.nel:
                raise ValueError("interface sides have different element counts")
            gap = np.linalg.norm(self.eq_a.X - self.eq_b.X, axis=-1).max()
            if gap > 1e-8 * scale:
                raise ValueError(
                    f"edge quadrature points do not coincide (gap {gap:.3e}); "
                    "interface is not conforming or flip_b is wrong")
            ref_nt = self.eq_b.ref_normal
        else:
            self.eq_b = None
            if fixed_normal is None:
                # clamped edge: the mate is the frozen reference normal field
                ref_nt = self.eq_a.ref_normal.copy()
            else:
                v = np.asarray(fixed_normal, dtype=float)
                v = v / np.linalg.norm(v)
                ref_nt = np.broadcast_to(v, self.eq_a.X.shape).copy()
            self.fixed_nt = ref_nt

        if np.any(self.eq_a.jac_edge0 <= 1e-12 * scale):
            raise ValueError("degenerate edge tangent along constrained edge")
        tau0 = self.eq_a.ref_tangent_vec / self.eq_a.jac_edge0[..., None]
        if alpha0 is None:
            self.c0 = np.einsum("egi,egi->eg", self.eq_a.ref_normal, ref_nt)
            self.s0 = np.einsum("egi,egi->eg",
                                np.cross(self.eq_a.ref_normal, ref_nt), tau0)
        else:
            self.c0 = np.full((self.nel, self.ngp), np.cos(alpha0))
            self.s0 = np.full((self.nel, self.ngp), np.sin(alpha0))
        self.wS = self.eq_a.wq * self.eq_a.jac_edge0
        self.edof_a = self.eq_a.edof
        self.edof_b = self.eq_b.edof if self.two_sided else None
        self._min_len = 1e-12 * scale

    @classmethod
    def from_interface(cls, mesh, iface, alpha0=None, n_gauss=None):
        return cls(mesh, iface.patch_a, iface.side_a, patch_b=iface.patch_b,
                   side_b=iface.side_b, flip_b=iface.reversed, alpha0=alpha0,
                   n_gauss=n_gauss)

    @classmethod
    def fixed(cls, mesh, patch: int, side: str, normal=None, alpha0=None,
              n_gauss=None):
        """One-sided constraint: symmetry plane, clamp or set edge rotation.

        normal None freezes the edge's own reference normals (clamp); a
        vector gives the mate direction (symmetry plane normal, or any
        prescribed direction for a rotational Dirichlet condition).
        """
        return cls(mesh, patch, side, fixed_normal=normal, alpha0=alpha0,
                   n_gauss=n_gauss)

    # ------------------------------------------------------------------
    # current geometry

    def _geometry(self, x_nodes) -> _EdgeGeometry:
        state_a, n_a, avec_a, aup_a = self.eq_a.current(x_nodes)
        t_vec = avec_a[:, :, self.eq_a.xi_dir, :]
        alen = np.linalg.norm(t_vec, axis=-1)
        if np.any(alen < self._min_len):
            raise ValueError("degenerate edge tangent in current configuration")
        tau = t_vec / alen[..., None]
        if self.two_sided:
            state_b, n_b, _, aup_b = self.eq_b.current(x_nodes)
            return _EdgeGeometry(n_a, n_b, tau, alen, aup_a, state_a.a_con,
                                 aup_b, state_b.a_con)
        return _EdgeGeometry(n_a, self.fixed_nt, tau, alen, aup_a,
                             state_a.a_con, None, None)

    def angle_deviation(self, x_nodes):
        """(cos, sin) of alpha - alpha0 at every edge quadrature point."""
        g = self._geometry(x_nodes)
        cosd = g.cosa * self.c0 + g.sina * self.s0
        sind = g.sina * self.c0 - g.cosa * self.s0
        return cosd, sind

    def moment(self, x_nodes, method):
        """Recovered constraint moment per unit current edge length.

        The constraint potentials integrate over the reference edge, so the
        work-conjugate angle moment is a per-reference-length density; it is
        divided by the edge stretch here to make it comparable with follower
        boundary moments, which act per unit current length.  For the
        multiplier method the caller passes (method, q) as a tuple.
        """
        if isinstance(method, tuple):
            method, q = method
        g = self._geometry(x_nodes)
        stretch = g.alen / self.eq_a.jac_edge0
        cosd = g.cosa * self.c0 + g.sina * self.s0
        sind = g.sina * self.c0 - g.cosa * self.s0
        if isinstance(method, Penalty):
            return method.epsilon * sind / stretch
        Nq, qconn, _ = self._q_tables(method.interp)
        qg = np.einsum("gq,eq->eg", Nq, np.asarray(q)[qconn])
        return -qg * (cosd + sind) / stretch

    # ------------------------------------------------------------------
    # shared force / tangent kernels; cc, ss are the effective coefficient
    # fields (penalty: eps*c0, eps*s0; multiplier: q(s0+c0), q(s0-c0))

    def _force_kernel(self, g: _EdgeGeometry, cc, ss):
        dNa = self.eq_a.dN
        dXi = dNa[..., self.eq_a.xi_dir]
        nxnt = np.cross(g.n, g.nt)
        theta = ss[..., None] * nxnt
        Mth = (theta - g.tau * np.einsum("egi,egi->eg", g.tau, theta)[..., None]
               ) / g.alen[..., None]
        nut = -np.cross(g.tau, g.nt)
        dt = cc[..., None] * g.nt + ss[..., None] * nut
        dta = np.einsum("egai,egi->ega", g.aup_a, dt)
        f_a = (np.einsum("eg,egna,ega,egi->eni", self.wS, dNa, dta, g.n)
               - np.einsum("eg,egn,egi->eni", self.wS, dXi, Mth))
        f_b = None
        if self.two_sided:
            nu = np.cross(g.tau, g.n)
            dd = cc[..., None] * g.n + ss[..., None] * nu
            dab = np.einsum("egbi,egi->egb", g.aup_b, dd)
            f_b = np.einsum("eg,egnb,egb,egi->eni", self.wS, self.eq_b.dN,
                            dab, g.nt)
        na = f_a.shape[1]
        return f_a.reshape(self.nel, 3 * na), (
            None if f_b is None else f_b.reshape(self.nel, -1))

    def _tangent_kernel(self, g: _EdgeGeometry, cc, ss):
        dNa = self.eq_a.dN
        dXi = dNa[..., self.eq_a.xi_dir]
        n, nt, tau, alen = g.n, g.nt, g.tau, g.alen
        wS = self.wS

        nxnt = np.cross(n, nt)
        theta = ss[..., None] * nxnt
        nut = -np.cross(tau, nt)
        dt = cc[..., None] * nt + ss[..., None] * nut
        dta = np.einsum("egai,egi->ega", g.aup_a, dt)
        dtn = np.einsum("egi,egi->eg", dt, n)

        nn = np.einsum("egi,egj->egij", n, n)
        Qab = (np.einsum("eg,egab,egij->egabij", dtn, g.acon_a, nn)
               - np.einsum("ega,egbi,egj->egabij", dta, g.aup_a, n)
               - np.einsum("egb,egi,egaj->egabij", dta, n, g.aup_a))
        K_aa = np.einsum("eg,egna,egabij,egmb->enimj", wS, dNa, Qab, dNa)

        tth = np.einsum("egi,egi->eg", tau, theta)
        eye = np.eye(3)
        Qxx = (tth[..., None, None] * (eye - 3.0 * np.einsum(
            "egi,egj->egij", tau, tau))
            + np.einsum("egi,egj->egij", theta, tau)
            + np.einsum("egi,egj->egij", tau, theta)) / (alen ** 2)[..., None, None]
        K_aa += np.einsum("eg,egn,egij,egm->enimj", wS, dXi, Qxx, dXi)

        # cross variation of tau with the edge normal, explicit s0 weight
        w_nta = np.cross(nt[:, :, None, :], g.aup_a)
        proj = np.einsum("egai,egi->ega", w_nta, tau)
        vv = (w_nta - proj[..., None] * tau[:, :, None, :]) / alen[..., None, None]
        W = np.einsum("eg,eg,egna,egi,egaj,egm->enimj", wS, ss, dNa, n, vv, dXi)
        K_aa -= W + W.transpose(0, 3, 4, 1, 2)

        na = K_aa.shape[1]
        K_aa = K_aa.reshape(self.nel, 3 * na, 3 * na)
        if not self.two_sided:
            return K_aa, None, None

        dNb = self.eq_b.dN
        nu = np.cross(tau, n)
        dd = cc[..., None] * n + ss[..., None] * nu
        dab = np.einsum("egbi,egi->egb", g.aup_b, dd)
        dnt = np.einsum("egi,egi->eg", dd, nt)
        ntnt = np.einsum("egi,egj->egij", nt, nt)
        Qt = (np.einsum("eg,egab,egij->egabij", dnt, g.acon_b, ntnt)
              - np.einsum("ega,egbi,egj->egabij", dab, g.aup_b, nt)
              - np.einsum("egb,egi,egaj->egabij", dab, nt, g.aup_b))
        K_bb = np.einsum("eg,egna,egabij,egmb->enimj", wS, dNb, Qt, dNb)
        nb = K_bb.shape[1]
        K_bb = K_bb.reshape(self.nel, 3 * nb, 3 * nb)

        w_nb = np.cross(n[:, :, None, :], g.aup_b)
        projb = np.einsum("egbi,egi->egb", w_nb, tau)
        mnb = (w_nb - projb[..., None] * tau[:, :, None, :]) / alen[..., None, None]
        T1 = np.einsum("eg,eg,egn,egbi,egj,egmb->enimj", wS, ss, dXi, mnb,
                       nt, dNb)
        ctb = np.cross(tau[:, :, None, :], g.aup_b)
        ahat = (cc[..., None, None] * np.einsum("egai,egbi->egab", g.aup_a,
                                                g.aup_b)
                - ss[..., None, None] * np.einsum("egai,egbi->egab", g.aup_a,
                                                  ctb))
        T2 = -np.einsum("eg,egab,egna,egi,egj,egmb->enimj", wS, ahat, dNa,
                        n, nt, dNb)
        K_ab = (T1 + T2).reshape(self.nel, 3 * na, 3 * nb)
        return K_aa, K_bb, K_ab

    # ------------------------------------------------------------------
    # penalty method

    def penalty_energy(self, x_nodes, method: Penalty) -> float:
        g = self._geometry(x_nodes)
        dens = 1.0 - self.c0 * g.cosa - self.s0 * g.sina
        return method.epsilon * float(np.sum(self.wS * dens))

    def penalty_force(self, x_nodes, method: Penalty):
        g = self._geometry(x_nodes)
        eps = method.epsilon
        return self._force_kernel(g, eps * self.c0, eps * self.s0)

    def penalty_tangent(self, x_nodes, method: Penalty):
        g = self._geometry(x_nodes)
        eps = method.epsilon
        return self._tangent_kernel(g, eps * self.c0, eps * self.s0)

    # ------------------------------------------------------------------
    # Lagrange multiplier method

    def n_multipliers(self, method: Multiplier) -> int:
        return self.nel if method.interp == "n2q0" else self.nel + 1

    def _q_tables(self, interp: str):
        tg, _ = gauss_01(self.ngp)
        if interp == "n2q0":
            Nq = np.ones((self.ngp, 1))
            qconn = np.arange(self.nel, dtype=np.int64)[:, None]
        else:
            Nq = np.column_stack([1.0 - tg, tg])
            qconn = np.column_stack([np.arange(self.nel, dtype=np.int64),
                                     np.arange(1, self.nel + 1, dtype=np.int64)])
        return Nq, qconn, Nq.shape[1]

    def _g_field(self, g: _EdgeGeometry):
        cosd = g.cosa * self.c0 + g.sina * self.s0
        sind = g.sina * self.c0 - g.cosa * self.s0
        return 1.0 - cosd + sind

    def lm_energy(self, x_nodes, q, method: Multiplier) -> float:
        g = self._geometry(x_nodes)
        Nq, qconn, _ = self._q_tables(method.interp)
        qg = np.einsum("gq,eq->eg", Nq, np.asarray(q)[qconn])
        return float(np.sum(self.wS * qg * self._g_field(g)))

    def lm_force(self, x_nodes, q, method: Multiplier):
        g = self._geometry(x_nodes)
        Nq, qconn, _ = self._q_tables(method.interp)
        qg = np.einsum("gq,eq->eg", Nq, np.asarray(q)[qconn])
        f_a, f_b = self._force_kernel(g, qg * (self.s0 + self.c0),
                                      qg * (self.s0 - self.c0))
        f_q = np.einsum("eg,gq->eq", self.wS * self._g_field(g), Nq)
        return f_a, f_b, f_q

    def lm_tangent(self, x_nodes, q, method: Multiplier):
        g = self._geometry(x_nodes)
        Nq, qconn, nql = self._q_tables(method.interp)
        qg = np.einsum("gq,eq->eg", Nq, np.asarray(q)[qconn])
        K_aa, K_bb, K_ab = self._tangent_kernel(g, qg * (self.s0 + self.c0),
                                                qg * (self.s0 - self.c0))
        K_aq = np.empty((self.nel, K_aa.shape[1], nql))
        K_bq = None if not self.two_sided else np.empty(
            (self.nel, K_bb.shape[1], nql))
        for l in range(nql):
            wl = np.broadcast_to(Nq[:, l], (self.nel, self.ngp))
            fa, fb = self._force_kernel(g, wl * (self.s0 + self.c0),
                                        wl * (self.s0 - self.c0))
            K_aq[:, :, l] = fa
            if self.two_sided:
                K_bq[:, :, l] = fb
        return K_aa, K_bb, K_ab, K_aq, K_bq

    def max_angle_deviation(self, x_nodes) -> float:
        """Largest |alpha - alpha0| over the edge, for multiplier validity."""
        cosd, sind = self.angle_deviation(x_nodes)
        return float(np.abs(np.arctan2(sind, cosd)).max())

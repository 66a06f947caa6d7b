"""Constitutive models for Kirchhoff-Love shells.

Each model maps a pair of metric states (reference, current) to the
work-conjugate stress measures

    tau^{ab} = 2 dW/da_ab   (membrane, weighted by the area stretch)
    M0^{ab}  = dW/db_ab     (bending, same weighting)

together with the four tangent blocks

    c = 2 dtau/da,  d = dtau/db,  e = 2 dM0/da,  f = dM0/db,

returned in raw Voigt (11, 22, 12) ordering.  ``d`` and ``e`` satisfy
d^{abgd} = e^{gdab} whenever the stress derives from a potential; the
thickness-integrated model with exact area prefactors intentionally loses
the major symmetries of c and f.

All entry points are batched over an arbitrary leading shape.
"""

from __future__ import annotations

import numpy as np

from .kinematics import (
    MetricState,
    det22,
    metric_state,
    outer4,
    sym4,
    tens4_to_voigt,
)

__all__ = [
    "lame_3d",
    "surface_lame",
    "KoiterMaterial",
    "CanhamMaterial",
    "MixedMaterial",
    "ProjectedNeoHooke",
]


def lame_3d(E: float, nu: float):
    """Classical 3D Lame parameters from Young's modulus and Poisson ratio."""
    lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    mu = E / (2.0 * (1.0 + nu))
    return lam, mu


def surface_lame(lam3: float, mu3: float, thickness: float):
    """Surface moduli: Lambda = T 2 lam mu/(lam + 2 mu) (plane stress), mu = T mu."""
    return thickness * 2.0 * lam3 * mu3 / (lam3 + 2.0 * mu3), thickness * mu3


def _bcast(x, like):
    return np.broadcast_to(np.asarray(x)[..., None, None], like.shape)


class ShellMaterial:
    """Interface shared by all models; also hosts the FD-perturbation hook."""

    def stress(self, ref: MetricState, cur: MetricState):
        raise NotImplementedError

    def moduli(self, ref: MetricState, cur: MetricState):
        raise NotImplementedError

    def energy(self, ref: MetricState, cur: MetricState):
        raise NotImplementedError

    def energy_perturbed(self, ref, cur, da, db):
        """Energy at (a + da, b + db); the projected model overrides this to
        apply its reduced-variation convention."""
        return self.energy(ref, metric_state(cur.a_cov + da, cur.b_cov + db))

    def stress_voigt(self, ref, cur):
        tau, M0 = self.stress(ref, cur)
        return _pack_stress(tau, M0)

    def moduli_voigt(self, ref, cur):
        c4, d4, e4, f4 = self.moduli(ref, cur)
        return (tens4_to_voigt(c4), tens4_to_voigt(d4),
                tens4_to_voigt(e4), tens4_to_voigt(f4))


def _pack_stress(tau, M0):
    out = np.empty(tau.shape[:-2] + (6,))
    out[..., 0] = tau[..., 0, 0]
    out[..., 1] = tau[..., 1, 1]
    out[..., 2] = tau[..., 0, 1]
    out[..., 3] = M0[..., 0, 0]
    out[..., 4] = M0[..., 1, 1]
    out[..., 5] = M0[..., 0, 1]
    return out


class KoiterMaterial(ShellMaterial):
    """Quadratic membrane/bending law in the Green and curvature-change strains."""

    def __init__(self, lam: float, mu: float, thickness: float):
        self.lam = float(lam)
        self.mu = float(mu)
        self.thickness = float(thickness)

    @classmethod
    def from_youngs(cls, E: float, nu: float, thickness: float):
        lam, mu = surface_lame(*lame_3d(E, nu), thickness)
        return cls(lam, mu, thickness)

    def _strains(self, ref, cur):
        E = 0.5 * (cur.a_cov - ref.a_cov)
        K = cur.b_cov - ref.b_cov
        return E, K

    def stress(self, ref, cur):
        E, K = self._strains(ref, cur)
        A = ref.a_con
        trE = np.einsum("...ab,...ab->...", A, E)
        trK = np.einsum("...ab,...ab->...", A, K)
        E_up = np.einsum("...ac,...cd,...db->...ab", A, E, A)
        K_up = np.einsum("...ac,...cd,...db->...ab", A, K, A)
        tau = self.lam * trE[..., None, None] * A + 2.0 * self.mu * E_up
        bend = self.thickness ** 2 / 12.0
        M0 = bend * (self.lam * trK[..., None, None] * A + 2.0 * self.mu * K_up)
        return tau, M0

    def moduli(self, ref, cur):
        A = ref.a_con
        c4 = self.lam * outer4(A, A) + 2.0 * self.mu * sym4(A, A)
        zero = np.zeros_like(c4)
        return c4, zero, zero, self.thickness ** 2 / 12.0 * c4

    def energy(self, ref, cur):
        E, K = self._strains(ref, cur)
        tau, M0 = self.stress(ref, cur)
        return 0.5 * (np.einsum("...ab,...ab->...", tau, E)
                      + np.einsum("...ab,...ab->...", M0, K))


class CanhamMaterial(ShellMaterial):
    """Incompressible-leaning membrane (Neo-Hooke surface) plus curvature
    energy c J (2 H^2 - kappa) for initially planar reference states."""

    def __init__(self, lam: float, mu: float, bend: float):
        self.lam = float(lam)
        self.mu = float(mu)
        self.bend = float(bend)

    def _invariants(self, ref, cur):
        J = cur.jac / ref.jac
        I1 = np.einsum("...ab,...ab->...", ref.a_con, cur.a_cov)
        return J, I1

    def stress(self, ref, cur):
        J, _ = self._invariants(ref, cur)
        Jn = J[..., None, None]
        H = cur.H[..., None, None]
        kap = cur.kappa[..., None, None]
        tau = (0.5 * self.lam * (J ** 2 - 1.0)[..., None, None] * cur.a_con
               + self.mu * (ref.a_con - cur.a_con)
               + self.bend * Jn * (2.0 * H ** 2 + kap) * cur.a_con
               - 4.0 * self.bend * Jn * H * cur.b_con)
        M0 = self.bend * Jn * cur.b_con
        return tau, M0

    def moduli(self, ref, cur):
        J, _ = self._invariants(ref, cur)
        a, b = cur.a_con, cur.b_con
        H = cur.H[..., None]
        S = sym4(a, a)
        T4 = sym4(a, b) + sym4(b, a)
        J2 = (J ** 2)[..., None, None, None, None]
        Hn = cur.H[..., None, None, None, None]
        kn = cur.kappa[..., None, None, None, None]
        Jn = J[..., None, None, None, None]
        c4 = (self.lam * (J2 * outer4(a, a) - (J2 - 1.0) * S)
              + 2.0 * self.mu * S
              + self.bend * Jn * ((2.0 * Hn ** 2 - kn) * outer4(a, a)
                                  - 4.0 * Hn * (outer4(a, b) + outer4(b, a))
                                  - 2.0 * (2.0 * Hn ** 2 + kn) * S
                                  + 4.0 * outer4(b, b) + 8.0 * Hn * T4))
        d4 = self.bend * Jn * (4.0 * Hn * outer4(a, a) - outer4(a, b)
                               - 2.0 * outer4(b, a) - 4.0 * Hn * S)
        e4 = self.bend * Jn * (outer4(b, a) - 2.0 * T4)
        f4 = self.bend * Jn * S
        return c4, d4, e4, f4

    def energy(self, ref, cur):
        J, I1 = self._invariants(ref, cur)
        W = (0.25 * self.lam * (J ** 2 - 1.0 - 2.0 * np.log(J))
             + 0.5 * self.mu * (I1 - 2.0 - 2.0 * np.log(J))
             + self.bend * J * (2.0 * cur.H ** 2 - cur.kappa))
        return W


class MixedMaterial(ShellMaterial):
    """Neo-Hooke surface membrane combined with the quadratic bending law."""

    def __init__(self, lam: float, mu: float, thickness: float):
        self.lam = float(lam)
        self.mu = float(mu)
        self.thickness = float(thickness)
        self._membrane = CanhamMaterial(lam, mu, 0.0)
        self._bending = KoiterMaterial(lam, mu, thickness)

    @classmethod
    def from_youngs(cls, E: float, nu: float, thickness: float):
        lam, mu = surface_lame(*lame_3d(E, nu), thickness)
        return cls(lam, mu, thickness)

    def stress(self, ref, cur):
        tau, _ = self._membrane.stress(ref, cur)
        _, M0 = self._bending.stress(ref, cur)
        return tau, M0

    def moduli(self, ref, cur):
        J = cur.jac / ref.jac
        a = cur.a_con
        S = sym4(a, a)
        J2 = (J ** 2)[..., None, None, None, None]
        c4 = self.lam * (J2 * outer4(a, a) - (J2 - 1.0) * S) + 2.0 * self.mu * S
        zero = np.zeros_like(c4)
        _, _, _, f4 = self._bending.moduli(ref, cur)
        return c4, zero, zero, f4

    def energy(self, ref, cur):
        J, I1 = self._membrane._invariants(ref, cur)
        Wm = (0.25 * self.lam * (J ** 2 - 1.0 - 2.0 * np.log(J))
              + 0.5 * self.mu * (I1 - 2.0 - 2.0 * np.log(J)))
        K = cur.b_cov - ref.b_cov
        _, M0 = self._bending.stress(ref, cur)
        return Wm + 0.5 * np.einsum("...ab,...ab->...", M0, K)


def _gauss_legendre(n: int, half_width: float):
    x, w = np.polynomial.legendre.leggauss(n)
    return x * half_width, w * half_width


_I4 = 0.5 * (np.einsum("ec,hd->ehcd", np.eye(2), np.eye(2))
             + np.einsum("ed,hc->ehcd", np.eye(2), np.eye(2)))


class ProjectedNeoHooke(ShellMaterial):
    """Thickness-integrated 3D Neo-Hooke with statically condensed normal
    stretch (plane stress through the thickness).

    ``reduction`` selects how the layer stresses are collapsed into surface
    measures: "exact" keeps the through-thickness area prefactors (default,
    tangents lose major symmetry), "simple" drops them.
    """

    def __init__(self, lam: float, mu: float, thickness: float,
                 incompressible: bool = False, reduction: str = "exact",
                 n_thickness: int = 3):
        if reduction not in ("exact", "simple"):
            raise ValueError("reduction must be 'exact' or 'simple'")
        self.lam = float(lam)
        self.mu = float(mu)
        self.thickness = float(thickness)
        self.incompressible = bool(incompressible)
        self.reduction = reduction
        self.xi, self.wts = _gauss_legendre(int(n_thickness), 0.5 * thickness)

    @classmethod
    def from_youngs(cls, E: float, nu: float, thickness: float, **kw):
        return cls(*lame_3d(E, nu), thickness, **kw)

    # -- layer machinery -------------------------------------------------

    def _layer(self, ref, cur, xi):
        from .kinematics import layer_metric
        G_cov, G_con, s0 = layer_metric(ref, xi)
        g_cov, g_con, s = layer_metric(cur, xi)
        Js = np.sqrt(det22(g_cov) / det22(G_cov))
        return G_cov, G_con, s0, g_cov, g_con, s, Js

    def _fJ(self, Js):
        """Coefficient f with tau~ = mu G_con + f g_con, and its derivative."""
        if self.incompressible:
            f = -self.mu / Js ** 2
            fp = 2.0 * self.mu / Js ** 3
        else:
            denom = self.lam * Js ** 2 + 2.0 * self.mu
            f = -self.mu * (self.lam + 2.0 * self.mu) / denom
            fp = 2.0 * self.lam * self.mu * (self.lam + 2.0 * self.mu) * Js / denom ** 2
        return f, fp

    def lambda3(self, Js):
        """Normal stretch solving the zero normal-stress condition."""
        if self.incompressible:
            return 1.0 / Js
        return np.sqrt((self.lam + 2.0 * self.mu) / (self.lam * Js ** 2 + 2.0 * self.mu))

    def _layer_energy(self, G_con, g_cov, Js):
        I1s = np.einsum("...ab,...ab->...", g_cov, G_con)
        lam3 = self.lambda3(Js)
        if self.incompressible:
            # J~ = Js * lam3 = 1 exactly, pressure term drops
            return 0.5 * self.mu * (I1s + lam3 ** 2 - 3.0)
        I1t = I1s + lam3 ** 2
        Jt = Js * lam3
        return (0.25 * self.lam * (Jt ** 2 - 1.0 - 2.0 * np.log(Jt))
                + 0.5 * self.mu * (I1t - 3.0 - 2.0 * np.log(Jt)))

    # -- interface -------------------------------------------------------

    def stress(self, ref, cur):
        shape = cur.a_cov.shape
        tau = np.zeros(shape)
        M0 = np.zeros(shape)
        for xi, w in zip(self.xi, self.wts):
            from .kinematics import layer_coefficients
            _, G_con, s0, g_cov, g_con, _, Js = self._layer(ref, cur, xi)
            f, _ = self._fJ(Js)
            tau_l = self.mu * G_con + f[..., None, None] * g_con
            if self.reduction == "exact":
                g_a, g_b, _ = layer_coefficients(cur.H, cur.kappa, xi)
                tau += w * (s0 * g_a)[..., None, None] * tau_l
                M0 += w * (s0 * 0.5 * g_b)[..., None, None] * tau_l
            else:
                tau += w * tau_l
                M0 += -w * xi * tau_l
        return tau, M0

    def moduli(self, ref, cur):
        from .kinematics import layer_coefficients
        shape = cur.a_cov.shape + (2, 2)
        c4 = np.zeros(shape)
        d4 = np.zeros(shape)
        e4 = np.zeros(shape)
        f4 = np.zeros(shape)
        a_con, b_con = cur.a_con, cur.b_con
        bt_con = cur.b_adj_con
        a_cov, b_cov = cur.a_cov, cur.b_cov
        H, kap = cur.H, cur.kappa
        for xi, w in zip(self.xi, self.wts):
            _, G_con, s0, g_cov, g_con, _, Js = self._layer(ref, cur, xi)
            f, fp = self._fJ(Js)
            tau_l = self.mu * G_con + f[..., None, None] * g_con
            g_a, g_b, _ = layer_coefficients(H, kap, xi)
            # dg_eh/da_cd and dg_eh/db_cd including the coefficient variations
            Da = (g_a[..., None, None, None, None] * _I4
                  + (kap * xi ** 2)[..., None, None, None, None] * outer4(a_cov, a_con)
                  - xi ** 2 * outer4(b_cov, b_con))
            Db = (g_b[..., None, None, None, None] * _I4
                  - xi ** 2 * outer4(a_cov, bt_con)
                  + xi ** 2 * outer4(b_cov, a_con))
            g4 = -sym4(g_con, g_con)
            gDa = np.einsum("...eh,...ehcd->...cd", g_con, Da)
            gDb = np.einsum("...eh,...ehcd->...cd", g_con, Db)
            g4Da = np.einsum("...abeh,...ehcd->...abcd", g4, Da)
            g4Db = np.einsum("...abeh,...ehcd->...abcd", g4, Db)
            Jfp = (Js * fp)[..., None, None, None, None]
            fn = f[..., None, None, None, None]
            ct = Jfp * outer4(g_con, gDa) + 2.0 * fn * g4Da
            dt = 0.5 * Jfp * outer4(g_con, gDb) + fn * g4Db
            if self.reduction == "exact":
                s0n = s0[..., None, None, None, None]
                gan = g_a[..., None, None, None, None]
                gbn = g_b[..., None, None, None, None]
                kxi2 = (kap * xi ** 2)[..., None, None, None, None]
                c4 += w * s0n * (2.0 * kxi2 * outer4(tau_l, a_con) + gan * ct)
                d4 += w * s0n * (-xi ** 2 * outer4(tau_l, bt_con) + gan * dt)
                e4 += w * s0n * (-xi ** 2 * outer4(tau_l, b_con) + 0.5 * gbn * ct)
                f4 += w * s0n * (0.5 * xi ** 2 * outer4(tau_l, a_con) + 0.5 * gbn * dt)
            else:
                c4 += w * ct
                d4 += w * dt
                e4 += -w * xi * ct
                f4 += -w * xi * dt
        return c4, d4, e4, f4

    def energy(self, ref, cur):
        # the simple reduction is work-conjugate to the unweighted thickness
        # integral; only the exact one carries the reference volume element
        W = np.zeros(cur.a_cov.shape[:-2])
        for xi, w in zip(self.xi, self.wts):
            _, G_con, s0, g_cov, _, _, Js = self._layer(ref, cur, xi)
            wt = w * s0 if self.reduction == "exact" else w
            W = W + wt * self._layer_energy(G_con, g_cov, Js)
        return W

    def energy_perturbed(self, ref, cur, da, db):
        """Reduced-variation convention: the layer metric is perturbed as
        g + g_a da + g_b db with base-state coefficients, which makes the
        reduced (tau, M0) the exact energy gradient."""
        from .kinematics import layer_coefficients
        W = np.zeros(cur.a_cov.shape[:-2])
        for xi, w in zip(self.xi, self.wts):
            G_cov, G_con, s0, g_cov, _, _, _ = self._layer(ref, cur, xi)
            if self.reduction == "exact":
                g_a, g_b, _ = layer_coefficients(cur.H, cur.kappa, xi)
                wt = w * s0
            else:
                g_a = np.ones_like(cur.H)
                g_b = np.full_like(cur.H, -2.0 * xi)
                wt = w * np.ones_like(s0)
            g_p = (g_cov + g_a[..., None, None] * da + g_b[..., None, None] * db)
            Js = np.sqrt(det22(g_p) / det22(G_cov))
            W = W + wt * self._layer_energy(G_con, g_p, Js)
        return W

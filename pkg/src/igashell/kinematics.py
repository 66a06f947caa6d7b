"""Surface differential geometry at (batched) material points.

All routines accept arrays with an arbitrary leading batch shape; tensors of
second order are (..., 2, 2) in covariant surface coordinates.  Voigt order
is (11, 22, 12), and the conversion helpers keep the raw tensor components
(no shear doubling) unless explicitly requested.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "MetricState",
    "metric_state",
    "surface_vectors_state",
    "det22",
    "inv22",
    "raise2",
    "to_voigt",
    "from_voigt",
    "tens4_to_voigt",
    "outer4",
    "sym4",
    "layer_coefficients",
    "layer_metric",
]


def det22(M: np.ndarray) -> np.ndarray:
    return M[..., 0, 0] * M[..., 1, 1] - M[..., 0, 1] * M[..., 1, 0]


def inv22(M: np.ndarray) -> np.ndarray:
    d = det22(M)
    out = np.empty_like(M)
    out[..., 0, 0] = M[..., 1, 1]
    out[..., 1, 1] = M[..., 0, 0]
    out[..., 0, 1] = -M[..., 0, 1]
    out[..., 1, 0] = -M[..., 1, 0]
    return out / d[..., None, None]


def raise2(a_con: np.ndarray, M_cov: np.ndarray) -> np.ndarray:
    """Raise both indices of a covariant tensor with the given inverse metric."""
    return np.einsum("...ac,...cd,...db->...ab", a_con, M_cov, a_con)


def to_voigt(M: np.ndarray, shear_factor: float = 1.0) -> np.ndarray:
    """(..., 2, 2) symmetric tensor -> (..., 3) in order (11, 22, 12)."""
    out = np.stack([M[..., 0, 0], M[..., 1, 1], shear_factor * M[..., 0, 1]], axis=-1)
    return out


def from_voigt(v: np.ndarray, shear_factor: float = 1.0) -> np.ndarray:
    out = np.empty(v.shape[:-1] + (2, 2))
    out[..., 0, 0] = v[..., 0]
    out[..., 1, 1] = v[..., 1]
    out[..., 0, 1] = v[..., 2] / shear_factor
    out[..., 1, 0] = v[..., 2] / shear_factor
    return out


_VOIGT_PAIRS = ((0, 0), (1, 1), (0, 1))


def tens4_to_voigt(T: np.ndarray) -> np.ndarray:
    """Raw Voigt 3x3 of a fourth-order tensor with minor symmetries."""
    out = np.empty(T.shape[:-4] + (3, 3))
    for I, (a, b) in enumerate(_VOIGT_PAIRS):
        for J, (c, d) in enumerate(_VOIGT_PAIRS):
            out[..., I, J] = T[..., a, b, c, d]
    return out


def outer4(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """A^{ab} B^{cd}."""
    return np.einsum("...ab,...cd->...abcd", A, B)


def sym4(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """1/2 (A^{ac} B^{bd} + A^{ad} B^{bc})."""
    return 0.5 * (np.einsum("...ac,...bd->...abcd", A, B)
                  + np.einsum("...ad,...bc->...abcd", A, B))


@dataclass
class MetricState:
    """First and second fundamental forms with the usual derived fields."""

    a_cov: np.ndarray   # (..., 2, 2)
    b_cov: np.ndarray   # (..., 2, 2)
    a_con: np.ndarray
    det_a: np.ndarray
    jac: np.ndarray     # sqrt(det a)
    b_con: np.ndarray   # both indices raised with a_con
    H: np.ndarray       # mean curvature
    kappa: np.ndarray   # Gaussian curvature

    @property
    def b_adj_con(self) -> np.ndarray:
        """2 H a^{ab} - b^{ab}, the contravariant adjugate of curvature."""
        return 2.0 * self.H[..., None, None] * self.a_con - self.b_con


def metric_state(a_cov: np.ndarray, b_cov: np.ndarray) -> MetricState:
    a_cov = np.asarray(a_cov, dtype=float)
    b_cov = np.asarray(b_cov, dtype=float)
    det_a = det22(a_cov)
    if np.any(det_a <= 0.0):
        raise ValueError("degenerate surface metric (det <= 0)")
    a_con = inv22(a_cov)
    b_con = raise2(a_con, b_cov)
    H = 0.5 * np.einsum("...ab,...ab->...", a_con, b_cov)
    kappa = det22(b_cov) / det_a
    return MetricState(a_cov, b_cov, a_con, det_a, np.sqrt(det_a), b_con, H, kappa)


def surface_vectors_state(a_vec: np.ndarray, h_vec: np.ndarray):
    """Metric state plus normal from tangent vectors and second derivatives.

    a_vec: (..., 2, 3) covariant tangents; h_vec: (..., 3, 3) second
    derivatives of the map with rows ordered (11, 22, 12).

    Returns (state, normal) where normal is (..., 3).
    """
    a_cov = np.einsum("...ai,...bi->...ab", a_vec, a_vec)
    cr = np.cross(a_vec[..., 0, :], a_vec[..., 1, :])
    nrm = np.linalg.norm(cr, axis=-1)
    normal = cr / nrm[..., None]
    b_flat = np.einsum("...ki,...i->...k", h_vec, normal)  # (11, 22, 12)
    b_cov = from_voigt(b_flat)
    return metric_state(a_cov, b_cov), normal


# ---------------------------------------------------------------------------
# through-thickness layer metrics (projected 3D models)


def layer_coefficients(H: np.ndarray, kappa: np.ndarray, xi: float):
    """Coefficients of the shifted metric at thickness coordinate xi.

    Returns (g_a, g_b, s): g_ab = g_a a_ab + g_b b_ab, with shifter
    determinant ratio s = 1 - 2 H xi + kappa xi^2.
    """
    g_a = 1.0 - xi ** 2 * kappa
    g_b = -2.0 * xi + 2.0 * H * xi ** 2
    s = 1.0 - 2.0 * H * xi + kappa * xi ** 2
    return g_a, g_b, s


def layer_metric(state: MetricState, xi: float):
    """Covariant and contravariant layer metric at ``xi``.

    The contravariant form uses the closed-form coefficients
    g^a = s^-2 (g_a + 2 H g_b), g^b = -s^-2 g_b, which reproduce the exact
    matrix inverse of the covariant layer metric.
    """
    g_a, g_b, s = layer_coefficients(state.H, state.kappa, xi)
    g_cov = g_a[..., None, None] * state.a_cov + g_b[..., None, None] * state.b_cov
    ga_con = (g_a + 2.0 * state.H * g_b) / s ** 2
    gb_con = -g_b / s ** 2
    g_con = ga_con[..., None, None] * state.a_con + gb_con[..., None, None] * state.b_con
    return g_cov, g_con, s

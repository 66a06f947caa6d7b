"""Patch evaluation, exact primitives, mesh merging and serialization."""

import json

import numpy as np
import pytest

from igashell.geometry import (
    Interface,
    Mesh,
    MeshFormatError,
    Patch,
    make_cylinder_panel,
    make_folded_strip,
    make_plate,
    make_sphere_panel,
    refined,
    skew_patch,
)


def fd_surface_derivs(patch, u, v, h=1e-3):
    xp = patch.point(u + h, v)
    xm = patch.point(u - h, v)
    yp = patch.point(u, v + h)
    ym = patch.point(u, v - h)
    x0 = patch.point(u, v)
    a1 = (xp - xm) / (2 * h)
    a2 = (yp - ym) / (2 * h)
    huu = (xp - 2 * x0 + xm) / h ** 2
    hvv = (yp - 2 * x0 + ym) / h ** 2
    xpp = patch.point(u + h, v + h)
    xpm = patch.point(u + h, v - h)
    xmp = patch.point(u - h, v + h)
    xmm = patch.point(u - h, v - h)
    huv = (xpp - xpm - xmp + xmm) / (4 * h ** 2)
    return a1, a2, huu, hvv, huv


@pytest.mark.parametrize("maker", [
    lambda: make_plate(2.0, 1.0, 3, 3, 2),
    lambda: make_cylinder_panel(1.5, 2.0, 10.0, 80.0, 3, 2, 3),
    lambda: make_sphere_panel(2.0, 0.0, 90.0, 20.0, 80.0, 4, 2, 2),
])
def test_derivatives_match_finite_differences(maker):
    patch = maker()
    rng = np.random.default_rng(9)
    (u0, u1), (v0, v1) = patch.param_range
    for _ in range(5):
        u = rng.uniform(u0 + 0.05 * (u1 - u0), u1 - 0.05 * (u1 - u0))
        v = rng.uniform(v0 + 0.05 * (v1 - v0), v1 - 0.05 * (v1 - v0))
        x, a, h2 = patch.evaluate(u, v)
        a1, a2, huu, hvv, huv = fd_surface_derivs(patch, u, v)
        assert np.allclose(a[0], a1, rtol=1e-6, atol=1e-7)
        assert np.allclose(a[1], a2, rtol=1e-6, atol=1e-7)
        assert np.allclose(h2[0], huu, rtol=2e-4, atol=1e-5)
        assert np.allclose(h2[1], hvv, rtol=2e-4, atol=1e-5)
        assert np.allclose(h2[2], huv, rtol=2e-4, atol=1e-5)


def test_cylinder_is_exact():
    R = 3.0
    patch = make_cylinder_panel(R, 4.0, 0.0, 90.0, 2, 4, 4)
    rng = np.random.default_rng(2)
    (u0, u1), (v0, v1) = patch.param_range
    for _ in range(20):
        x = patch.point(rng.uniform(u0, u1), rng.uniform(v0, v1))
        assert np.isclose(np.hypot(x[1], x[2]), R, atol=1e-12), x


def test_sphere_is_exact():
    R = 2.0
    patch = make_sphere_panel(R, 0.0, 90.0, 0.0, 90.0, 4, 3, 3)
    rng = np.random.default_rng(3)
    (u0, u1), (v0, v1) = patch.param_range
    for _ in range(20):
        x = patch.point(rng.uniform(u0, u1), rng.uniform(v0, v1))
        assert np.isclose(np.linalg.norm(x), R, atol=1e-12), x


def test_refinement_preserves_surface():
    patch = make_sphere_panel(1.0, 0.0, 90.0, 30.0, 90.0, 3, 1, 1)
    fine = refined(patch, 4, 3)
    assert fine.n_elements_u == 4 and fine.n_elements_v == 3
    rng = np.random.default_rng(4)
    (u0, u1), (v0, v1) = patch.param_range
    for _ in range(10):
        u, v = rng.uniform(u0, u1), rng.uniform(v0, v1)
        assert np.allclose(patch.point(u, v), fine.point(u, v), atol=1e-12)


def test_skew_preserves_boundary_and_tilts_cross_lines():
    patch = make_plate(3.0, 1.0, 2, 6, 6)
    sk = skew_patch(patch, r=0.2)
    # all four corner points stay put
    for u, v in [(0, 0), (3, 0), (0, 1), (3, 1)]:
        assert np.allclose(sk.point(u, v), patch.point(u, v), atol=1e-12)
    # end edges (transverse to the skew direction) are pointwise unchanged
    for v in np.linspace(0, 1, 7):
        assert np.allclose(sk.point(0.0, v), patch.point(0.0, v), atol=1e-12)
        assert np.allclose(sk.point(3.0, v), patch.point(3.0, v), atol=1e-12)
    # long edges slide along themselves but stay on the same line
    for u in np.linspace(0, 3, 9):
        assert np.isclose(sk.point(u, 0.0)[1], 0.0, atol=1e-12)
        assert np.isclose(sk.point(u, 1.0)[1], 1.0, atol=1e-12)
    # the mid cross line tilts with slope r * S / L against the cross axis
    d = sk.point(1.5, 0.55) - sk.point(1.5, 0.45)
    assert np.isclose(d[0] / d[1], -0.2 * 3.0 / 1.0, rtol=1e-10), d


def test_mesh_merges_shared_edge():
    mesh, meta = make_folded_strip(1.0, 1.0, 0.5, 10.0, 2, 4, 2)
    pa, pb = mesh.patches
    n_per_patch = pa.n_u * pa.n_v
    shared = pa.n_v  # one full edge of control points in common
    assert mesh.n_nodes == 2 * n_per_patch - shared
    ifs = mesh.detect_interfaces()
    assert len(ifs) == 1
    iface = ifs[0]
    assert {iface.side_a, iface.side_b} == {"u1", "u0"}


def test_mesh_json_round_trip(tmp_path):
    mesh, _ = make_folded_strip(1.0, 0.8, 0.5, 30.0, 3, 3, 2)
    path = tmp_path / "mesh.json"
    mesh.save(path)
    back = Mesh.load(path)
    assert back.n_nodes == mesh.n_nodes
    for p, q in zip(mesh.patches, back.patches):
        assert p.degree_u == q.degree_u and p.degree_v == q.degree_v
        assert np.allclose(p.points, q.points)
        assert np.allclose(p.weights, q.weights)
        assert np.allclose(p.knots_u, q.knots_u)


def test_mesh_rejects_malformed_input(tmp_path):
    mesh = Mesh([make_plate(1.0, 1.0, 2, 2, 2)])
    blob = mesh.to_json_dict()
    blob["patches"][0]["degree_u"] = 9
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(blob))
    with pytest.raises(MeshFormatError):
        Mesh.load(path)
    blob = mesh.to_json_dict()
    del blob["patches"][0]["points"]
    path.write_text(json.dumps(blob))
    with pytest.raises(MeshFormatError):
        Mesh.load(path)


def test_degenerate_pole_nodes_merge():
    # closing the polar angle at zero collapses one edge to the pole point
    patch = make_sphere_panel(1.0, 0.0, 90.0, 0.0, 90.0, 2, 2, 2)
    mesh = Mesh([patch])
    ids = mesh.patch_node_ids[0].reshape(patch.n_v, patch.n_u)
    assert len(set(ids[0])) == 1, "pole row should merge to a single node"


def test_patch_validation():
    with pytest.raises(ValueError):
        Patch(0, 1, [0, 0, 1, 1], [0, 0, 1, 1],
              np.zeros((4, 3)), np.ones(4))
    with pytest.raises(ValueError):
        make_plate(1.0, 1.0, 2, 2, 2, origin=(0, 0, 0)).__class__(
            2, 2, [0, 0, 0, 1, 1, 1], [0, 0, 0, 1, 1, 1],
            np.zeros((9, 3)), -np.ones(9))

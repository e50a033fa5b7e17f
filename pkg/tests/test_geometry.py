import numpy as np
import pytest

from mlswe.geometry import (
    EAST,
    NORTH,
    OPPOSITE,
    SOUTH,
    WEST,
    Mesh2D,
    MeshError,
    build_geometry,
    make_structured_mesh,
    read_mesh_text,
    sine_warp,
    write_mesh_text,
)


def test_mesh_basics():
    mesh = make_structured_mesh(4, 3, 0.0, 2.0, 0.0, 1.5)
    assert mesh.n_elements == 12
    assert mesh.vx.shape == (5, 4)
    assert mesh.element_id(0, 0) == 0
    assert mesh.element_id(3, 2) == 11
    assert mesh.vx[4, 0] == 2.0 and mesh.vy[0, 3] == 1.5


def test_mesh_validation():
    with pytest.raises(MeshError):
        make_structured_mesh(0, 3)
    v = np.zeros((3, 3))
    with pytest.raises(MeshError):
        Mesh2D(nx=3, ny=2, vx=v, vy=v)
    with pytest.raises(MeshError):
        make_structured_mesh(2, 2, bcx="reflect")


def test_cartesian_metrics():
    # uniform rectangles: J and the metric vectors are constant
    mesh = make_structured_mesh(4, 2, 0.0, 2.0, 0.0, 1.0)
    geo = build_geometry(mesh, 4)
    dx, dy = 0.5, 0.5
    assert np.allclose(geo.J, (dx / 2) * (dy / 2), rtol=0, atol=1e-14)
    assert np.allclose(geo.Ja1[..., 0], dy / 2, atol=1e-14)
    assert np.allclose(geo.Ja1[..., 1], 0.0, atol=1e-14)
    assert np.allclose(geo.Ja2[..., 0], 0.0, atol=1e-14)
    assert np.allclose(geo.Ja2[..., 1], dx / 2, atol=1e-14)
    assert np.allclose(geo.element_size, np.sqrt(dx * dy), atol=1e-14)


def test_metric_identity_warped():
    warp = sine_warp(0.0, 1.0, 0.0, 1.0, 0.1)
    mesh = make_structured_mesh(4, 4, bcx="periodic", bcy="periodic", warp=warp)
    for n_deg in (2, 4, 6):
        geo = build_geometry(mesh, n_deg)
        assert geo.J.min() > 0.0
        assert geo.metric_identity_residual().max() <= 1e-12


def test_staggered_metrics_telescope():
    warp = sine_warp(0.0, 1.0, 0.0, 1.0, 0.1)
    mesh = make_structured_mesh(3, 3, warp=warp)
    geo = build_geometry(mesh, 5)
    assert np.array_equal(geo.JA1s[:, 0], geo.Ja1[:, 0])
    assert np.array_equal(geo.JA2s[:, :, 0], geo.Ja2[:, :, 0])
    assert np.abs(geo.JA1s[:, -1] - geo.Ja1[:, -1]).max() <= 1e-12
    assert np.abs(geo.JA2s[:, :, -1] - geo.Ja2[:, :, -1]).max() <= 1e-12


def test_watertight_shared_edges():
    # both elements at a face must see bitwise identical edge nodes and
    # surface metrics, otherwise constant states pick up seams
    warp = sine_warp(-1.0, 1.0, -1.0, 1.0, 0.08)
    mesh = make_structured_mesh(4, 3, -1.0, 1.0, -1.0, 1.0, warp=warp)
    geo = build_geometry(mesh, 4)
    for j in range(3):
        for i in range(3):
            eL = mesh.element_id(i, j)
            eR = mesh.element_id(i + 1, j)
            assert np.array_equal(geo.x[eL, -1, :], geo.x[eR, 0, :])
            assert np.array_equal(geo.y[eL, -1, :], geo.y[eR, 0, :])
            assert np.array_equal(geo.Ja1[eL, -1, :], geo.Ja1[eR, 0, :])
    for j in range(2):
        for i in range(4):
            eS = mesh.element_id(i, j)
            eN = mesh.element_id(i, j + 1)
            assert np.array_equal(geo.x[eS, :, -1], geo.x[eN, :, 0])
            assert np.array_equal(geo.Ja2[eS, :, -1], geo.Ja2[eN, :, 0])


def test_neighbor_table_walls_and_periodic():
    mesh = make_structured_mesh(3, 2, bcx="wall", bcy="wall")
    geo = build_geometry(mesh, 1)
    nb = geo.neighbors
    assert nb[0, WEST] == -1 and nb[0, SOUTH] == -1
    assert nb[0, EAST] == 1 and nb[0, NORTH] == 3
    assert nb[5, EAST] == -1 and nb[5, NORTH] == -1

    mesh = make_structured_mesh(3, 2, bcx="periodic", bcy="periodic")
    geo = build_geometry(mesh, 1)
    nb = geo.neighbors
    assert nb[0, WEST] == 2 and nb[2, EAST] == 0
    assert nb[0, SOUTH] == 3 and nb[3, NORTH] == 0
    # mutual consistency wherever a neighbor exists
    for e in range(mesh.n_elements):
        for side in (WEST, EAST, SOUTH, NORTH):
            other = nb[e, side]
            if other >= 0:
                assert nb[other, OPPOSITE[side]] == e


def test_mesh_text_roundtrip(tmp_path):
    mesh = make_structured_mesh(5, 4, 0.0, 2.5, -1.0, 1.0)
    path = tmp_path / "mesh.txt"
    write_mesh_text(mesh, path)
    back = read_mesh_text(path)
    assert back.nx == 5 and back.ny == 4
    assert np.array_equal(back.vx, mesh.vx)
    assert np.array_equal(back.vy, mesh.vy)


def test_mesh_text_bakes_warp(tmp_path):
    warp = sine_warp(0.0, 1.0, 0.0, 1.0, 0.1)
    mesh = make_structured_mesh(4, 4, warp=warp)
    path = tmp_path / "mesh.txt"
    write_mesh_text(mesh, path)
    back = read_mesh_text(path)
    wx, wy = warp(mesh.vx, mesh.vy)
    assert np.array_equal(back.vx, wx)
    assert np.array_equal(back.vy, wy)
    assert back.warp is None


def test_mesh_text_errors(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("3\n")
    with pytest.raises(MeshError):
        read_mesh_text(p)
    p.write_text("2 2\n0 0\n1 0\n")
    with pytest.raises(MeshError):
        read_mesh_text(p)


def test_tangled_mesh_raises():
    mesh = make_structured_mesh(2, 2)
    # drag the center vertex outside its cells so a Jacobian flips sign
    mesh.vx[1, 1] = 1.4
    with pytest.raises(MeshError):
        build_geometry(mesh, 3)


def test_sine_warp_fixes_boundary():
    warp = sine_warp(0.0, 2.0, 1.0, 3.0, 0.1)
    s = np.linspace(0.0, 2.0, 17)
    for ybnd in (1.0, 3.0):
        X, Y = warp(s, np.full_like(s, ybnd))
        assert np.allclose(Y, ybnd, atol=1e-15)
    t = np.linspace(1.0, 3.0, 17)
    for xbnd in (0.0, 2.0):
        X, Y = warp(np.full_like(t, xbnd), t)
        assert np.allclose(X, xbnd, atol=1e-15)

import numpy as np
import pytest

from mlswe.equations import EquationSpec, LayerState, physical_flux
from mlswe.fluxes import ec_flux, es_flux, lambda_max, nonconservative_diamond
from mlswe.reconstruction import InterfacePair, reconstruct_state

import helpers
import swe_reference as ref


def make_state(h, hv, b=0.0):
    return LayerState(h=np.asarray(h, float), hv=np.asarray(hv, float), b=np.asarray(b, float))


S1 = EquationSpec(M=1, g=1.0, rho=(1.0,))


def test_ec_consistency():
    u = make_state([1.0], [1.0])
    assert np.allclose(ec_flux(u, u, S1), physical_flux(u, S1), atol=0.0)


def test_ec_average_arithmetic():
    uL = make_state([1.0], [2.0])
    uR = make_state([3.0], [12.0])
    assert np.array_equal(ec_flux(uL, uR, S1), [[7.0, 21.0]])


def test_diamond_consistency():
    u = make_state([2.0], [1.0], b=0.3)
    assert np.array_equal(nonconservative_diamond(u, u, "L", S1), [[0.0, 0.0]])


def test_diamond_direct_value():
    uL = make_state([1.0], [0.0], b=0.0)
    uR = make_state([1.0], [0.0], b=0.2)
    d = nonconservative_diamond(uL, uR, "L", S1)
    assert np.allclose(d, [[0.0, 0.1]], atol=1e-15)


def test_lambda_rest_state():
    u = make_state([1.0], [0.0])
    assert lambda_max(u, u, S1) == pytest.approx(1.0)


def test_lambda_two_sided():
    uL = make_state([1.0], [2.0])
    uR = make_state([4.0], [-4.0])
    assert lambda_max(uL, uR, S1) == pytest.approx(4.0)


def test_lambda_two_layer_rest():
    s2 = EquationSpec(M=2, g=2.0, rho=(1.0, 2.0))
    u = make_state([1.0, 1.0], [0.0, 0.0])
    assert lambda_max(u, u, s2) == pytest.approx(2.0)


def test_lambda_bounds_layer_velocities():
    rng = np.random.default_rng(8)
    for M in (1, 2, 3):
        spec = helpers.random_spec(M)
        uL = helpers.random_layer_states(rng, 20000, M)
        uR = helpers.random_layer_states(rng, 20000, M)
        lam = lambda_max(uL, uR, spec)
        vmax = np.maximum(
            np.max(np.abs(helpers.velocities(uL)), axis=-1),
            np.max(np.abs(helpers.velocities(uR)), axis=-1),
        )
        assert np.all(lam >= vmax - 1e-14)


def test_es_consistency_zero_dissipation():
    u = make_state([2.0], [3.0], b=0.4)
    res = es_flux(InterfacePair(uL=u, uR=u.copy()), S1)
    assert np.allclose(res.fstar, physical_flux(u, S1), atol=1e-15)
    assert np.allclose(res.diamondL, 0.0, atol=0.0)
    assert np.allclose(res.diamondR, 0.0, atol=0.0)


def test_es_lake_at_rest_step_no_dissipation():
    # reconstructed jump vanishes, so ES equals EC exactly
    uL = make_state([1.0], [0.0], b=0.0)
    uR = make_state([0.5], [0.0], b=0.5)
    res = es_flux(InterfacePair(uL=uL, uR=uR), S1)
    rec = reconstruct_state(InterfacePair(uL=uL, uR=uR))
    fec = ec_flux(rec.uLe, rec.uRe, S1)
    assert np.array_equal(res.fstar, fec)
    # at rest the advective flux and both diamonds vanish identically
    assert np.array_equal(res.fstar, np.zeros((1, 2)))
    assert np.array_equal(res.diamondL, np.zeros((1, 2)))
    assert np.array_equal(res.diamondR, np.zeros((1, 2)))


def test_ec_residual_single_layer_with_reconstruction():
    rng = np.random.default_rng(12)
    uL = helpers.random_layer_states(rng, 200000, 1)
    uR = helpers.random_layer_states(rng, 200000, 1)
    rec = reconstruct_state(InterfacePair(uL=uL, uR=uR))
    velL = (helpers.velocities(uL),)
    velR = (helpers.velocities(uR),)
    fec = ec_flux(rec.uLe, rec.uRe, S1, 0, velL, velR)
    resid, scale = helpers.interface_residual(uL, uR, rec.uLe, rec.uRe, S1, fec)
    assert np.max(np.abs(resid) / scale) <= 1e-13


@pytest.mark.parametrize("M", [2, 3])
def test_ec_residual_multilayer_without_reconstruction(M):
    rng = np.random.default_rng(13 + M)
    spec = helpers.random_spec(M, g=1.4)
    uL = helpers.random_layer_states(rng, 100000, M)
    uR = helpers.random_layer_states(rng, 100000, M)
    fec = ec_flux(uL, uR, spec)
    resid, scale = helpers.interface_residual(uL, uR, uL, uR, spec, fec)
    assert np.max(np.abs(resid) / scale) <= 1e-13


@pytest.mark.parametrize("M", [2, 3])
def test_ec_residual_matches_closed_form(M):
    rng = np.random.default_rng(14 + M)
    spec = helpers.random_spec(M, g=1.4)
    uL = helpers.random_layer_states(rng, 100000, M)
    uR = helpers.random_layer_states(rng, 100000, M)
    rec = reconstruct_state(InterfacePair(uL=uL, uR=uR))
    velL = (helpers.velocities(uL),)
    velR = (helpers.velocities(uR),)
    fec = ec_flux(rec.uLe, rec.uRe, spec, 0, velL, velR)
    resid, scale = helpers.interface_residual(uL, uR, rec.uLe, rec.uRe, spec, fec)
    closed = helpers.lemma_violation(uL, uR, rec, spec)
    assert np.max(np.abs(resid - closed) / scale) <= 1e-12


@pytest.mark.parametrize("M", [1, 2, 3])
def test_es_residual_nonpositive(M):
    rng = np.random.default_rng(15 + M)
    spec = helpers.random_spec(M, g=1.4)
    uL = helpers.random_layer_states(rng, 100000, M)
    uR = helpers.random_layer_states(rng, 100000, M)
    res = es_flux(InterfacePair(uL=uL, uR=uR), spec)
    rec = reconstruct_state(InterfacePair(uL=uL, uR=uR))
    resid, scale = helpers.interface_residual(uL, uR, rec.uLe, rec.uRe, spec, res.fstar)
    assert np.max(resid / scale) <= 1e-13


def test_es_flags_nonfinite():
    uL = make_state([1.0], [np.nan])
    uR = make_state([1.0], [0.0])
    with pytest.raises(FloatingPointError):
        es_flux(InterfacePair(uL=uL, uR=uR), S1)


def test_face_kernel_matches_reference_bitwise():
    # the njit face kernel at M=1 against the standalone reference
    from mlswe.kernels import FACE_WORK_ROWS, face_flux

    rng = np.random.default_rng(77)
    g = 1.7
    rho = np.array([1.0])
    sigma = np.array([[1.0]])
    wrk = np.empty((FACE_WORK_ROWS, 1))
    F = np.empty((1, 3))
    dL = np.empty(1)
    dR = np.empty(1)
    zt = np.zeros(1)
    for _ in range(2000):
        hL = 10.0 ** rng.uniform(-8.0, 1.0)
        hR = 10.0 ** rng.uniform(-8.0, 1.0)
        if rng.random() < 0.25:
            hL = 0.0
        if rng.random() < 0.25:
            hR = 0.0
        hvL = hL * rng.uniform(-5.0, 5.0)
        hvR = hR * rng.uniform(-5.0, 5.0)
        bL = rng.uniform(0.0, 2.0)
        bR = rng.uniform(0.0, 2.0)
        lam = face_flux(
            g, rho, sigma,
            np.array([hL]), np.array([hvL]), zt, bL,
            np.array([hR]), np.array([hvR]), zt, bR,
            wrk, F, dL, dR,
        )
        Fr, dLr, dRr, lamr = ref.swe_face_flux(g, hL, hvL, bL, hR, hvR, bR)
        assert F[0, 0] == Fr[0] and F[0, 1] == Fr[1]
        assert dL[0] == dLr and dR[0] == dRr
        assert lam == lamr


def test_face_kernel_matches_numpy_route():
    # same physics through the vectorized route, to tolerance
    from mlswe.kernels import FACE_WORK_ROWS, face_flux

    rng = np.random.default_rng(78)
    M = 3
    spec = helpers.random_spec(M, g=1.1)
    wrk = np.empty((FACE_WORK_ROWS, M))
    F = np.empty((M, 3))
    dL = np.empty(M)
    dR = np.empty(M)
    zt = np.zeros(M)
    uLb = helpers.random_layer_states(rng, 500, M)
    uRb = helpers.random_layer_states(rng, 500, M)
    res = es_flux(InterfacePair(uL=uLb, uR=uRb), spec)
    for i in range(500):
        lam = face_flux(
            spec.g, spec.rho, spec.sigma,
            uLb.h[i], uLb.hv[i], zt, uLb.b[i],
            uRb.h[i], uRb.hv[i], zt, uRb.b[i],
            wrk, F, dL, dR,
        )
        scale = np.abs(res.fstar[i]).max() + 1.0
        assert np.allclose(F[:, :2], res.fstar[i], atol=1e-13 * scale)
        assert np.allclose(dL, res.diamondL[i, :, 1], atol=1e-13 * scale)
        assert np.allclose(dR, res.diamondR[i, :, 1], atol=1e-13 * scale)
        assert lam == pytest.approx(res.lam[i], abs=1e-14)

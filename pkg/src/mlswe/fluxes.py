"""Interface flux machinery: EC two-point flux, LLF dissipation on
reconstructed variables, path-conservative diamond terms, wave speeds.

All pair functions take already-reconstructed traces unless stated
otherwise; es_flux applies the hydrostatic reconstruction itself.
"""

from dataclasses import dataclass

import numpy as np

from .equations import (
    DRY_FLOOR,
    EquationSpec,
    LayerState,
    coupling_heights,
    safe_velocity,
)
from .reconstruction import InterfacePair, ReconstructedPair, reconstruct_state


@dataclass
class FluxResult:
    """Face flux bundle: numerical flux and the two diamond terms.

    fstar is oriented along the pair normal. diamondL enters the L cell
    update with the same sign as fstar, diamondR the R cell with the
    opposite sign, matching the path-conservation identity.
    """

    fstar: np.ndarray
    diamondL: np.ndarray
    diamondR: np.ndarray
    lam: np.ndarray


def ec_flux(
    uLe: LayerState,
    uRe: LayerState,
    spec: EquationSpec,
    direction: int = 0,
    velL=None,
    velR=None,
):
    """Entropy-conservative two-point flux with arithmetic averages.

    For direction 0 the layer flux is (<h v>, <h v><v>[, <h v><w>]); for
    direction 1 the mass slot is <h w> and the momentum slots are
    <h w><v>, <h w><w>.

    velL / velR optionally supply the velocity tuples (v[, w]) used in
    the averages. Reconstructed traces must pass their ORIGINAL
    velocities here: a side whose height was snapped to zero keeps a
    well-defined velocity, and dividing the rebuilt momentum by a zero
    height would silently drop it, which breaks the entropy balance at
    wet/dry faces.
    """
    if velL is not None:
        vL = velL[0]
        vR = velR[0]
        if spec.dim == 2:
            wL = velL[1]
            wR = velR[1]
    else:
        vL = safe_velocity(uLe.h, uLe.hv)
        vR = safe_velocity(uRe.h, uRe.hv)
        if spec.dim == 2:
            wL = safe_velocity(uLe.h, uLe.hw)
            wR = safe_velocity(uRe.h, uRe.hw)
    out = np.empty(uLe.h.shape + (spec.ncomp,))
    if direction == 0:
        f0 = 0.5 * (uLe.hv + uRe.hv)
    else:
        f0 = 0.5 * (uLe.hw + uRe.hw)
    out[..., 0] = f0
    out[..., 1] = f0 * (0.5 * (vL + vR))
    if spec.dim == 2:
        out[..., 2] = f0 * (0.5 * (wL + wR))
    return out


def nonconservative_diamond(
    uLe: LayerState,
    uRe: LayerState,
    side: str,
    spec: EquationSpec,
    direction: int = 0,
    half: bool = True,
):
    """Path-conservative surface term (phi_side / 2) o jump(r).

    side selects whose phi factor is used ('L' or 'R'); the jump is
    always r(R) - r(L). With half=False the kernel returns phi o jump(r)
    without the half, the form used inside split-form volume terms.
    """
    cL = coupling_heights(uLe.h, uLe.b, spec)
    cR = coupling_heights(uRe.h, uRe.b, spec)
    hs = uLe.h if side == "L" else uRe.h
    factor = 0.5 if half else 1.0
    out = np.zeros(hs.shape + (spec.ncomp,))
    out[..., 1 + direction] = factor * spec.g * hs * (cR - cL)
    return out


def lambda_max(uL: LayerState, uR: LayerState, spec: EquationSpec, n=None):
    """Fastest-wave estimate from both traces.

    Uses the magnitudes of the momentum-weighted mean velocity and of all
    per-layer velocities, plus the larger total-depth gravity wave speed.
    In 2D pass the face normal n with shape (..., 2) to project
    velocities onto it.
    """

    def side(u):
        hv = u.hv
        if spec.dim == 2 and n is not None:
            nn = np.asarray(n, dtype=float)
            hv = u.hv * nn[..., 0:1] + u.hw * nn[..., 1:2]
        hsum = np.sum(u.h, axis=-1)
        qsum = np.sum(hv, axis=-1)
        wet = hsum > spec.M * DRY_FLOOR
        vmean = np.abs(np.where(wet, qsum / np.where(wet, hsum, 1.0), 0.0))
        vlay = np.max(np.abs(safe_velocity(u.h, hv)), axis=-1)
        return np.maximum(vmean, vlay), np.sqrt(spec.g * np.maximum(hsum, 0.0))

    advL, gravL = side(uL)
    advR, gravR = side(uR)
    return np.maximum(advL, advR) + np.maximum(gravL, gravR)


def es_flux(pair: InterfacePair, spec: EquationSpec) -> FluxResult:
    """Entropy-stable face flux with hydrostatic reconstruction.

    Reconstructs both traces, evaluates the EC flux in the normal
    direction, and adds local Lax-Friedrichs dissipation acting on the
    jump of the reconstructed conserved variables. Also bundles the
    diamond terms for both sides. Raises on non-finite output.
    """
    rec = reconstruct_state(pair)
    uLe, uRe = rec.uLe, rec.uRe
    velL = (safe_velocity(pair.uL.h, pair.uL.hv),)
    velR = (safe_velocity(pair.uR.h, pair.uR.hv),)
    if spec.dim == 2:
        velL = velL + (safe_velocity(pair.uL.h, pair.uL.hw),)
        velR = velR + (safe_velocity(pair.uR.h, pair.uR.hw),)
    if spec.dim == 1:
        nx = np.asarray(pair.n, dtype=float)
        fec = ec_flux(uLe, uRe, spec, 0, velL, velR) * nx[..., None, None]
        lam = lambda_max(pair.uL, pair.uR, spec)
        jump_h = uRe.h - uLe.h
        jump_hv = uRe.hv - uLe.hv
        fstar = fec.copy()
        fstar[..., 0] -= 0.5 * lam[..., None] * jump_h
        fstar[..., 1] -= 0.5 * lam[..., None] * jump_hv
        dL = nonconservative_diamond(uLe, uRe, "L", spec, 0) * nx[..., None, None]
        dR = nonconservative_diamond(uLe, uRe, "R", spec, 0) * nx[..., None, None]
    else:
        nn = np.asarray(pair.n, dtype=float)
        fec = (
            ec_flux(uLe, uRe, spec, 0, velL, velR) * nn[..., None, 0:1]
            + ec_flux(uLe, uRe, spec, 1, velL, velR) * nn[..., None, 1:2]
        )
        lam = lambda_max(pair.uL, pair.uR, spec, n=nn)
        fstar = fec.copy()
        fstar[..., 0] -= 0.5 * lam[..., None] * (uRe.h - uLe.h)
        fstar[..., 1] -= 0.5 * lam[..., None] * (uRe.hv - uLe.hv)
        fstar[..., 2] -= 0.5 * lam[..., None] * (uRe.hw - uLe.hw)
        dL = (
            nonconservative_diamond(uLe, uRe, "L", spec, 0) * nn[..., None, 0:1]
            + nonconservative_diamond(uLe, uRe, "L", spec, 1) * nn[..., None, 1:2]
        )
        dR = (
            nonconservative_diamond(uLe, uRe, "R", spec, 0) * nn[..., None, 0:1]
            + nonconservative_diamond(uLe, uRe, "R", spec, 1) * nn[..., None, 1:2]
        )
    if not (np.all(np.isfinite(fstar)) and np.all(np.isfinite(dL)) and np.all(np.isfinite(dR))):
        raise FloatingPointError("non-finite face flux; upstream state is corrupt")
    return FluxResult(fstar=fstar, diamondL=dL, diamondR=dR, lam=lam)

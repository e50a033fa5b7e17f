"""Numba kernels shared by the FV and DGSEM solvers.

The core piece is the face kernel: hydrostatic reconstruction plus the
entropy-stable flux and both diamond terms, evaluated in the local
normal frame (mass, normal momentum, tangential momentum). Rotating on
a Cartesian face multiplies by exact values, so the 1D and 2D paths stay
consistent to machine precision.

Scratch layout for face_flux, rows of the (10, M) work array:
    0: H left    1: H right   2: h_eps L   3: h_eps R
    4: vn L      5: vn R      6: vt L      7: vt R
    8: c_eps L   9: c_eps R
"""

import numpy as np
from numba import njit

DRY_FLOOR = 5.0 * np.finfo(np.float64).eps

FACE_WORK_ROWS = 10


@njit(cache=True)
def vel(h, hm):
    if h > DRY_FLOOR:
        return hm / h
    return 0.0


@njit(cache=True)
def face_flux(g, rho, sigma, hL, hvnL, hvtL, bL, hR, hvnR, hvtR, bR, wrk, F, dL, dR, diss=True):
    """ES face flux with reconstruction, in the normal frame.

    Inputs are per-layer arrays (M,) of heights and normal/tangential
    momenta plus scalar bottoms. Writes the flux F (M, 3) and per-layer
    diamond momentum entries dL, dR (M,). Returns lambda_max.

    Assembly convention for a face with normal pointing L to R:
    the L cell subtracts (F + dL), the R cell adds (F - dR).

    diss=False drops the jump dissipation (entropy-conserving flux),
    used only by diagnostics; production paths keep it on.
    """
    M = hL.shape[0]
    HL = wrk[0]
    HR = wrk[1]
    heL = wrk[2]
    heR = wrk[3]
    vnL = wrk[4]
    vnR = wrk[5]
    vtL = wrk[6]
    vtR = wrk[7]
    cL = wrk[8]
    cR = wrk[9]

    # total layer heights, bottom up
    accL = bL
    accR = bR
    for m in range(M - 1, -1, -1):
        accL = accL + hL[m]
        accR = accR + hR[m]
        HL[m] = accL
        HR[m] = accR

    bmax = bL if bL > bR else bR
    bLe = HL[0] if HL[0] < bmax else bmax
    bRe = HR[0] if HR[0] < bmax else bmax

    # original velocities (unchanged by the reconstruction)
    for m in range(M):
        vnL[m] = vel(hL[m], hvnL[m])
        vnR[m] = vel(hR[m], hvnR[m])
        vtL[m] = vel(hL[m], hvtL[m])
        vtR[m] = vel(hR[m], hvtR[m])

    # clamp total heights against the reconstructed bottom and recover
    # per-layer heights; snap below-floor heights to exactly dry
    prevL = bLe
    prevR = bRe
    for m in range(M - 1, -1, -1):
        HmL = HL[m] if HL[m] > bLe else bLe
        HmR = HR[m] if HR[m] > bRe else bRe
        he = HmL - prevL
        heL[m] = 0.0 if he <= DRY_FLOOR else he
        he = HmR - prevR
        heR[m] = 0.0 if he <= DRY_FLOOR else he
        prevL = HmL
        prevR = HmR

    # wave speed estimate from the original traces
    sumhL = 0.0
    sumhR = 0.0
    sumqL = 0.0
    sumqR = 0.0
    vmax = 0.0
    for m in range(M):
        sumhL += hL[m]
        sumhR += hR[m]
        sumqL += hvnL[m]
        sumqR += hvnR[m]
        a = abs(vnL[m])
        if a > vmax:
            vmax = a
        a = abs(vnR[m])
        if a > vmax:
            vmax = a
    if sumhL > M * DRY_FLOOR:
        a = abs(sumqL / sumhL)
        if a > vmax:
            vmax = a
    if sumhR > M * DRY_FLOOR:
        a = abs(sumqR / sumhR)
        if a > vmax:
            vmax = a
    ghL = g * sumhL if sumhL > 0.0 else 0.0
    ghR = g * sumhR if sumhR > 0.0 else 0.0
    grav = np.sqrt(ghL) if ghL > ghR else np.sqrt(ghR)
    lam = vmax + grav

    # coupling heights of the reconstructed states
    for m in range(M):
        c = bLe
        for k in range(M):
            if k >= m:
                c += heL[k]
            else:
                c += sigma[k, m] * heL[k]
        cL[m] = c
        c = bRe
        for k in range(M):
            if k >= m:
                c += heR[k]
            else:
                c += sigma[k, m] * heR[k]
        cR[m] = c

    # EC flux + LLF dissipation on reconstructed variables, diamonds
    ll = lam if diss else 0.0
    for m in range(M):
        qL = heL[m] * vnL[m]
        qR = heR[m] * vnR[m]
        tL = heL[m] * vtL[m]
        tR = heR[m] * vtR[m]
        f0 = 0.5 * (qL + qR)
        F[m, 0] = f0 - 0.5 * ll * (heR[m] - heL[m])
        F[m, 1] = f0 * (0.5 * (vnL[m] + vnR[m])) - 0.5 * ll * (qR - qL)
        F[m, 2] = f0 * (0.5 * (vtL[m] + vtR[m])) - 0.5 * ll * (tR - tL)
        jc = cR[m] - cL[m]
        dL[m] = 0.5 * g * heL[m] * jc
        dR[m] = 0.5 * g * heR[m] * jc
    return lam

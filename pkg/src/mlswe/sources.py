"""Source terms: Manning friction and the manufactured convergence test.

The manufactured solution prescribes trigonometric layer-top surfaces
H_1..H_3 and bottom b with constant layer velocities, so the PDE
residual reduces to

  Sh_m  = dh_m/dt + v dh_m/dx + w dh_m/dy
  Shv_m = v Sh_m + g h_m dc_m/dx      (and the y analog for Shw_m)

with c_m = H_m + sum_{k<m} sigma_km (H_k - H_{k+1}). All derivatives
are hand-derived in closed form; a finite-difference oracle in the
tests checks them against the PDE operator applied numerically.
"""

import numpy as np

from .equations import DRY_FLOOR, EquationSpec, ModelError

TWO_PI = 2.0 * np.pi
MANUFACTURED_V = 0.8
MANUFACTURED_W = 1.0


def manning_source(u, spec: EquationSpec, n_manning: float):
    """Explicit friction source on the layer momenta, zero elsewhere.

    Momentum source per layer: -g n^2 v ||v|| h^(-1/3); dry nodes get 0.
    Returns an array shaped like u.
    """
    h = u[..., 0]
    wet = h > DRY_FLOOR
    hs = np.where(wet, h, 1.0)
    out = np.zeros_like(u)
    gn2 = spec.g * n_manning * n_manning
    v = np.where(wet, u[..., 1] / hs, 0.0)
    if spec.dim == 2:
        w = np.where(wet, u[..., 2] / hs, 0.0)
        speed = np.sqrt(v * v + w * w)
        out[..., 2] = np.where(wet, -gn2 * w * speed * hs ** (-1.0 / 3.0), 0.0)
    else:
        speed = np.abs(v)
    out[..., 1] = np.where(wet, -gn2 * v * speed * hs ** (-1.0 / 3.0), 0.0)
    return out


def manning_semi_implicit(u, spec: EquationSpec, n_manning: float, dt: float):
    """Pointwise implicit friction update, in place:
    hv <- hv / (1 + dt g n^2 ||v|| h^(-4/3)). Unconditionally stable on
    thin layers where the explicit source is stiff."""
    h = u[..., 0]
    wet = h > DRY_FLOOR
    hs = np.where(wet, h, 1.0)
    v = np.where(wet, u[..., 1] / hs, 0.0)
    if spec.dim == 2:
        w = np.where(wet, u[..., 2] / hs, 0.0)
        speed = np.sqrt(v * v + w * w)
    else:
        speed = np.abs(v)
    gn2 = spec.g * n_manning * n_manning
    fac = 1.0 / (1.0 + dt * gn2 * speed * hs ** (-4.0 / 3.0))
    fac = np.where(wet, fac, 1.0)
    for c in range(1, u.shape[-1]):
        u[..., c] *= fac


def manufactured_tops(x, y, t, amp=0.1):
    """Layer-top surfaces H_1..H_3, stacked on the last axis."""
    cx = np.cos(TWO_PI * x + t)
    cy = np.cos(TWO_PI * y + t)
    sx = np.sin(TWO_PI * x + t)
    sy = np.sin(TWO_PI * y + t)
    H1 = 4.0 + amp * cx + amp * cy
    H2 = 2.0 + amp * sx + amp * sy
    H3 = 1.5 + amp * cx + amp * cy
    return np.stack([H1, H2, H3], axis=-1)


def manufactured_bottom(x, y, amp=0.1):
    return 1.0 + amp * np.cos(TWO_PI * x) + amp * np.cos(TWO_PI * y)


def _tops_derivatives(x, y, t, amp):
    """dH/dt, dH/dx, dH/dy for H_1..H_3 plus the bottom derivatives."""
    sx = np.sin(TWO_PI * x + t)
    sy = np.sin(TWO_PI * y + t)
    cx = np.cos(TWO_PI * x + t)
    cy = np.cos(TWO_PI * y + t)
    dt1 = -amp * sx - amp * sy
    dt2 = amp * cx + amp * cy
    Ht = np.stack([dt1, dt2, dt1], axis=-1)
    Hx = np.stack([-amp * TWO_PI * sx, amp * TWO_PI * cx, -amp * TWO_PI * sx],
                  axis=-1)
    Hy = np.stack([-amp * TWO_PI * sy, amp * TWO_PI * cy, -amp * TWO_PI * sy],
                  axis=-1)
    bx = -amp * TWO_PI * np.sin(TWO_PI * x)
    by = -amp * TWO_PI * np.sin(TWO_PI * y)
    return Ht, Hx, Hy, bx, by


def manufactured_state(x, y, t, amp=0.1):
    """Exact nodal state (..., 3 layers, 3 components) at time t."""
    H = manufactured_tops(x, y, t, amp)
    b = manufactured_bottom(x, y, amp)
    h = np.empty(H.shape)
    h[..., :2] = H[..., :2] - H[..., 1:]
    h[..., 2] = H[..., 2] - b
    u = np.empty(H.shape + (3,))
    u[..., 0] = h
    u[..., 1] = MANUFACTURED_V * h
    u[..., 2] = MANUFACTURED_W * h
    return u


def manufactured_source(x, y, t, spec: EquationSpec, amp=0.1):
    """Analytic PDE residual of the manufactured solution, (..., 3, 3)."""
    if spec.M != 3 or spec.dim != 2:
        raise ModelError("manufactured solution is for the 2D three-layer system")
    Ht, Hx, Hy, bx, by = _tops_derivatives(x, y, t, amp)
    # layer heights differentiate as differences of consecutive tops
    ht = np.empty(Ht.shape)
    hx = np.empty(Ht.shape)
    hy = np.empty(Ht.shape)
    ht[..., :2] = Ht[..., :2] - Ht[..., 1:]
    ht[..., 2] = Ht[..., 2]                 # bottom is steady
    hx[..., :2] = Hx[..., :2] - Hx[..., 1:]
    hx[..., 2] = Hx[..., 2] - bx
    hy[..., :2] = Hy[..., :2] - Hy[..., 1:]
    hy[..., 2] = Hy[..., 2] - by

    v, w = MANUFACTURED_V, MANUFACTURED_W
    sh = ht + v * hx + w * hy

    # dc_m/dx = dH_m/dx + sum_{k<m} sigma_km (dH_k/dx - dH_{k+1}/dx)
    sig = spec.sigma
    cx = Hx.copy()
    cy = Hy.copy()
    for m in range(1, 3):
        for k in range(m):
            cx[..., m] += sig[k, m] * (Hx[..., k] - Hx[..., k + 1])
            cy[..., m] += sig[k, m] * (Hy[..., k] - Hy[..., k + 1])

    H = manufactured_tops(x, y, t, amp)
    b = manufactured_bottom(x, y, amp)
    h = np.empty(H.shape)
    h[..., :2] = H[..., :2] - H[..., 1:]
    h[..., 2] = H[..., 2] - b

    src = np.empty(H.shape + (3,))
    src[..., 0] = sh
    src[..., 1] = v * sh + spec.g * h * cx
    src[..., 2] = w * sh + spec.g * h * cy
    return src

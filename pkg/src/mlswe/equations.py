"""Model layer for the one- and multilayer shallow water equations.

Layers are ordered top to bottom with densities 0 < rho_1 < ... < rho_M.
Conserved variables per layer are (h_m, h_m v_m) in 1D and
(h_m, h_m v_m, h_m w_m) in 2D. The conservative flux carries only the
advective terms; the pressure coupling lives in the nonconservative
product phi o grad(r).

All functions are vectorized over leading axes; the layer axis is last
for heights and second to last for per-layer component vectors.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

# heights at or below this value are treated as dry
DRY_FLOOR = 5.0 * np.finfo(float).eps


class ModelError(Exception):
    pass


@dataclass(frozen=True)
class EquationSpec:
    """Equation parameters: layer count, gravity, densities, dimension."""

    M: int
    g: float
    rho: np.ndarray
    dim: int = 1

    def __post_init__(self):
        rho = np.atleast_1d(np.asarray(self.rho, dtype=float))
        object.__setattr__(self, "rho", rho)
        if self.M < 1 or rho.size != self.M:
            raise ModelError("need one density per layer")
        if np.any(rho <= 0.0) or np.any(np.diff(rho) <= 0.0):
            raise ModelError("densities must satisfy 0 < rho_1 < ... < rho_M")
        if self.dim not in (1, 2):
            raise ModelError("dim must be 1 or 2")
        # sigma[k, m] = rho_k / rho_m, used for k < m only
        object.__setattr__(self, "sigma", rho[:, None] / rho[None, :])

    @property
    def ncomp(self) -> int:
        return 1 + self.dim


@dataclass
class LayerState:
    """Nodal conserved state: layer heights, momenta, bottom elevation.

    h and hv have the layer index on the last axis; hw is None in 1D.
    b broadcasts against h[..., 0].
    """

    h: np.ndarray
    hv: np.ndarray
    b: np.ndarray
    hw: Optional[np.ndarray] = None

    def copy(self) -> "LayerState":
        return LayerState(
            h=np.array(self.h, dtype=float),
            hv=np.array(self.hv, dtype=float),
            b=np.array(self.b, dtype=float),
            hw=None if self.hw is None else np.array(self.hw, dtype=float),
        )


@dataclass
class EntropyState:
    """Entropy density, entropy flux per direction, entropy variables."""

    S: np.ndarray
    fS: np.ndarray
    w: np.ndarray


def safe_velocity(h, hm):
    """Velocity hm/h with dry nodes mapped to zero.

    This is a guarded division for states that were already conditioned
    by the stabilization pipeline (floor plus momentum zeroing); it does
    not regularize momenta itself.
    """
    h = np.asarray(h, dtype=float)
    hm = np.asarray(hm, dtype=float)
    wet = h > DRY_FLOOR
    return np.where(wet, hm / np.where(wet, h, 1.0), 0.0)


def total_layer_heights(h, b):
    """H_m = b + sum_{k>=m} h_k, the absolute top elevation of layer m."""
    h = np.asarray(h, dtype=float)
    cum = np.cumsum(h[..., ::-1], axis=-1)[..., ::-1]
    return cum + np.asarray(b, dtype=float)[..., None]


def coupling_heights(h, b, spec: EquationSpec):
    """c_m = b + sum_{k>=m} h_k + sum_{k<m} sigma_km h_k per layer.

    This is the quantity whose gradient drives the momentum coupling in
    the nonconservative term.
    """
    hh = np.asarray(h, dtype=float)
    c = total_layer_heights(hh, b)
    if spec.M > 1:
        # add the density-weighted heights of the layers above
        for m in range(1, spec.M):
            c[..., m] += hh[..., :m] @ spec.sigma[:m, m]
    return c


def _velocities(u: LayerState, spec: EquationSpec):
    v = safe_velocity(u.h, u.hv)
    if spec.dim == 2:
        w = safe_velocity(u.h, u.hw)
    else:
        w = np.zeros_like(v)
    return v, w


def physical_flux(u: LayerState, spec: EquationSpec, direction: int = 0):
    """Advective flux per layer for the given direction (0 = x, 1 = y).

    Returns an array shaped (..., M, ncomp). There is no pressure term;
    pressure is carried by the nonconservative product.
    """
    v, w = _velocities(u, spec)
    out = np.empty(u.h.shape + (spec.ncomp,))
    if direction == 0:
        q = u.hv
        out[..., 0] = q
        out[..., 1] = q * v
        if spec.dim == 2:
            out[..., 2] = q * w
    else:
        q = u.hw
        out[..., 0] = q
        out[..., 1] = q * v
        out[..., 2] = q * w
    return out


def nonconservative_factors(u: LayerState, spec: EquationSpec, direction: int = 0):
    """The pair (phi, r) of the nonconservative product for one direction.

    phi_m puts g h_m in the momentum slot of the chosen direction and r_m
    puts the coupling height c_m there; all other slots are zero.
    """
    shape = u.h.shape + (spec.ncomp,)
    phi = np.zeros(shape)
    r = np.zeros(shape)
    slot = 1 + direction
    phi[..., slot] = spec.g * u.h
    r[..., slot] = coupling_heights(u.h, u.b, spec)
    return phi, r


def entropy(u: LayerState, spec: EquationSpec):
    """Total-energy entropy density S(u)."""
    v, w = _velocities(u, spec)
    kin = 0.5 * u.h * (v * v + w * w)
    g = spec.g
    s = kin + 0.5 * g * u.h**2 + g * u.h * np.asarray(u.b, dtype=float)[..., None]
    if spec.M > 1:
        for m in range(1, spec.M):
            s[..., m] += g * u.h[..., m] * (u.h[..., :m] @ spec.sigma[:m, m])
    return s @ spec.rho


def entropy_flux(u: LayerState, spec: EquationSpec, direction: int = 0):
    """Entropy flux fS for one direction; satisfies w^T f = fS."""
    v, w = _velocities(u, spec)
    vel = v if direction == 0 else w
    c = coupling_heights(u.h, u.b, spec)
    per_layer = vel * (0.5 * u.h * (v * v + w * w) + spec.g * u.h * c)
    return per_layer @ spec.rho


def entropy_variables(u: LayerState, spec: EquationSpec):
    """Entropy variables w = dS/du, shaped (..., M, ncomp)."""
    v, w = _velocities(u, spec)
    c = coupling_heights(u.h, u.b, spec)
    out = np.empty(u.h.shape + (spec.ncomp,))
    rho = spec.rho
    out[..., 0] = rho * (spec.g * c - 0.5 * (v * v + w * w))
    out[..., 1] = rho * v
    if spec.dim == 2:
        out[..., 2] = rho * w
    return out


def entropy_state(u: LayerState, spec: EquationSpec) -> EntropyState:
    """Bundle S, fS (per direction), and w for diagnostics."""
    fs = np.stack(
        [entropy_flux(u, spec, d) for d in range(spec.dim)], axis=-1
    )
    return EntropyState(S=entropy(u, spec), fS=fs, w=entropy_variables(u, spec))

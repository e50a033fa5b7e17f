"""Hydrostatic interface reconstruction for wetting and drying.

At each face the bottom elevation is reconstructed from both traces,
total layer heights are clamped against it, and per-layer water heights
are recovered so that they stay nonnegative, never exceed the original
heights, and collapse the interface jump at lake-at-rest states.
Velocities are left unchanged; momenta are rebuilt from the
reconstructed heights.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .equations import DRY_FLOOR, LayerState, safe_velocity, total_layer_heights


@dataclass
class InterfacePair:
    """Two traced states at a face. n is the outward normal of the L side."""

    uL: LayerState
    uR: LayerState
    n: np.ndarray | float = 1.0

    @property
    def bL(self):
        return self.uL.b

    @property
    def bR(self):
        return self.uR.b


@dataclass
class ReconstructedPair:
    uLe: LayerState
    uRe: LayerState
    bLe: np.ndarray
    bRe: np.ndarray


def reconstruct_bottom(pair: InterfacePair):
    """Reconstructed bottom values (bLe, bRe).

    Each side takes min(H_1, max(bL, bR)) so the bottom never rises above
    a side's free surface. Fully wet faces get the continuous value
    max(bL, bR); a dry side may keep a discontinuous bottom.
    """
    h1L = total_layer_heights(pair.uL.h, pair.uL.b)[..., 0]
    h1R = total_layer_heights(pair.uR.h, pair.uR.b)[..., 0]
    bmax = np.maximum(np.asarray(pair.bL, dtype=float), np.asarray(pair.bR, dtype=float))
    return np.minimum(h1L, bmax), np.minimum(h1R, bmax)


def _reconstruct_side(u: LayerState, be, two_d: bool) -> LayerState:
    big_h = total_layer_heights(u.h, u.b)
    clamped = np.maximum(big_h, be[..., None])
    he = np.empty_like(clamped)
    he[..., -1] = clamped[..., -1] - be
    if he.shape[-1] > 1:
        he[..., :-1] = clamped[..., :-1] - clamped[..., 1:]
    # snap sub-floor heights to exactly dry before momenta are rebuilt
    dry = he <= DRY_FLOOR
    he[dry] = 0.0
    hve = he * safe_velocity(u.h, u.hv)
    hve[dry] = 0.0
    hwe = None
    if two_d:
        hwe = he * safe_velocity(u.h, u.hw)
        hwe[dry] = 0.0
    return LayerState(h=he, hv=hve, b=np.broadcast_to(be, he.shape[:-1]).copy(), hw=hwe)


def reconstruct_state(pair: InterfacePair) -> ReconstructedPair:
    """Apply the full hydrostatic reconstruction to both traces."""
    ble, bre = reconstruct_bottom(pair)
    two_d = pair.uL.hw is not None
    return ReconstructedPair(
        uLe=_reconstruct_side(pair.uL, ble, two_d),
        uRe=_reconstruct_side(pair.uR, bre, two_d),
        bLe=ble,
        bRe=bre,
    )

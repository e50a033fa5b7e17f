"""Run diagnostics and output files.

Everything here works on plain nodal arrays plus a quadrature
description, so the same code serves the 1D element grids and the
curvilinear 2D meshes. Quantities tracked per step: volume-averaged
total entropy and its change, per-layer lake-at-rest errors against
the scenario's reference tops (signed mean and max norm), per-layer
mass, smallest water height, and the largest blending coefficient.

File outputs are plot-ready CSV (snapshots, diagnostics, gauge time
series) plus a small JSON manifest recording the configuration, code
version and seed of the run.
"""

import csv
import json
from dataclasses import dataclass, field as dc_field
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .equations import EquationSpec, LayerState, entropy, total_layer_heights


@dataclass
class DomainQuad:
    """Nodal quadrature weights (same shape as one scalar field) and
    the total domain size they sum to."""

    qw: np.ndarray
    size: float

    @classmethod
    def from_grid(cls, grid):
        qw = np.broadcast_to(
            grid.ops.weights * (grid.dx / 2.0), (grid.K, grid.P)
        ).copy()
        return cls(qw=qw, size=float(grid.K * grid.dx))

    @classmethod
    def from_geometry(cls, geo):
        w = geo.ops.weights
        qw = geo.J * np.outer(w, w)[None, :, :]
        return cls(qw=qw, size=float(qw.sum()))


@dataclass
class DiagnosticsRecord:
    t: float
    entropy: float  # volume-averaged total entropy
    d_entropy: float  # change since the previous record's step
    lar_mean: np.ndarray  # per-layer signed mean of H_m - H_m(0)
    lar_linf: np.ndarray  # per-layer max |H_m - H_m(0)|
    mass: np.ndarray  # per-layer water volume
    min_h: np.ndarray  # per-layer smallest nodal height
    max_alpha: float


def mean_entropy(u, b, spec: EquationSpec, quad: DomainQuad) -> float:
    state = LayerState(
        h=u[..., 0], hv=u[..., 1], b=b,
        hw=u[..., 2] if spec.dim == 2 else None,
    )
    return float(np.sum(entropy(state, spec) * quad.qw) / quad.size)


def _weighted_layer_sum(f, qw):
    """Sum qw * f over all axes but the trailing layer axis."""
    return (f * qw[..., None]).reshape(-1, f.shape[-1]).sum(axis=0)


def layer_masses(u, quad: DomainQuad) -> np.ndarray:
    return _weighted_layer_sum(u[..., 0], quad.qw)


def lar_errors(u, b, reference_tops, quad: DomainQuad):
    """Signed mean and max lake-at-rest error per layer."""
    d = total_layer_heights(u[..., 0], b) - reference_tops
    mean = _weighted_layer_sum(d, quad.qw) / quad.size
    linf = np.abs(d).max(axis=tuple(range(d.ndim - 1)))
    return mean, linf


def make_record(u, b, spec, quad, reference_tops, t, prev_entropy=None,
                alpha=None) -> DiagnosticsRecord:
    s_mean = mean_entropy(u, b, spec, quad)
    lar_mean, lar_linf = lar_errors(u, b, reference_tops, quad)
    h = u[..., 0]
    return DiagnosticsRecord(
        t=float(t),
        entropy=s_mean,
        d_entropy=0.0 if prev_entropy is None else s_mean - prev_entropy,
        lar_mean=lar_mean,
        lar_linf=lar_linf,
        mass=layer_masses(u, quad),
        min_h=h.min(axis=tuple(range(h.ndim - 1))),
        max_alpha=0.0 if alpha is None else float(np.max(alpha)),
    )


@dataclass
class GaugeSeries:
    """Water depth probe at one node, sampled on a forward-only clock."""

    label: str
    x: float  # requested position
    node_x: float  # nearest node actually sampled
    index: tuple
    times: list = dc_field(default_factory=list)
    values: list = dc_field(default_factory=list)

    def sample(self, u, t):
        t = float(t)
        if self.times and t <= self.times[-1]:
            raise ValueError(
                f"gauge {self.label}: times must stay monotone, "
                f"{t} after {self.times[-1]}"
            )
        depth = float(u[self.index][..., 0].sum())
        self.times.append(t)
        self.values.append(depth)


def locate_gauges(gauges, grid) -> list:
    """Map requested gauge positions to nearest-node probes."""
    coords = grid.node_coords()
    out = []
    for g in gauges:
        flat = int(np.argmin(np.abs(coords - g.x)))
        idx = np.unravel_index(flat, coords.shape)
        out.append(GaugeSeries(
            label=g.label, x=g.x, node_x=float(coords[idx]), index=idx,
            times=[], values=[],
        ))
    return out


# ---------------------------------------------------------------------------
# file output


def write_diagnostics_csv(path, records: Sequence[DiagnosticsRecord], M: int):
    cols = ["t", "entropy", "d_entropy"]
    for stem in ("lar_mean", "lar_linf", "mass", "min_h"):
        cols += [f"{stem}_{m + 1}" for m in range(M)]
    cols.append("max_alpha")
    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(cols)
        for r in records:
            row = [r.t, r.entropy, r.d_entropy]
            for vec in (r.lar_mean, r.lar_linf, r.mass, r.min_h):
                row += [float(v) for v in vec]
            row.append(r.max_alpha)
            wr.writerow([repr(float(v)) for v in row])


def write_snapshot_csv(path, field, spec: EquationSpec, coords,
                       alpha: Optional[np.ndarray] = None):
    """Nodal state dump: x[, y], b, h_1.., hv_1..[, hw_1..], alpha.

    coords is (x,) for 1D or (x, y) for 2D; alpha is per element and
    gets broadcast to the element's nodes.
    """
    u, b = field.u, field.b
    M = spec.M
    cols = ["x"] + (["y"] if spec.dim == 2 else []) + ["b"]
    cols += [f"h_{m + 1}" for m in range(M)]
    cols += [f"hv_{m + 1}" for m in range(M)]
    if spec.dim == 2:
        cols += [f"hw_{m + 1}" for m in range(M)]
    cols.append("alpha")
    if alpha is None:
        alpha = np.zeros(u.shape[0])
    anodal = np.broadcast_to(
        np.asarray(alpha).reshape((-1,) + (1,) * (b.ndim - 1)), b.shape
    )
    blocks = [c.reshape(-1) for c in coords] + [b.reshape(-1)]
    blocks += [u[..., m, 0].reshape(-1) for m in range(M)]
    blocks += [u[..., m, 1].reshape(-1) for m in range(M)]
    if spec.dim == 2:
        blocks += [u[..., m, 2].reshape(-1) for m in range(M)]
    blocks.append(anodal.reshape(-1))
    table = np.column_stack(blocks)
    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(cols)
        for row in table:
            wr.writerow([repr(float(v)) for v in row])


def write_gauges_csv(path, gauges: Sequence[GaugeSeries]):
    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow(["t"] + [g.label for g in gauges])
        if not gauges:
            return
        n = len(gauges[0].times)
        for g in gauges:
            if len(g.times) != n:
                raise ValueError("gauge series lengths differ")
        for i in range(n):
            row = [gauges[0].times[i]] + [g.values[i] for g in gauges]
            wr.writerow([repr(float(v)) for v in row])


def write_manifest(path, config_raw: dict, seed: int, extra: dict):
    payload = {
        "code_version": __version__,
        "config": dict(config_raw),
        "seed": seed,
    }
    payload.update(extra)
    with open(path, "w") as f:
        json.dump(payload, f, indent=2, sort_keys=True, default=str)
        f.write("\n")

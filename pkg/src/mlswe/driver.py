"""Scenario driver: time loop, step control, output artifacts.

The loop advances the blended DG / subcell-FV semidiscretization with
the four-stage SSP Runge-Kutta integrator. Per right-hand-side call
the shock indicator and dry-element handling produce the blending
coefficients, so every stage sees coefficients matched to its own
state. The per-stage post hook applies the positivity limiter and
momentum desingularization. Friction, when a scenario enables it, is
applied once per completed step as an unconditionally stable
semi-implicit momentum scaling.

Step sizes come from the positivity-compatible CFL bound and are
clamped so the run lands exactly on gauge sampling times, snapshot
times and the final time. A non-finite state aborts the run but still
writes the last good snapshot plus the manifest, and flags the result
with exit code 1.
"""

import time
from dataclasses import dataclass, field as dc_field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .config import RunConfig
from .dgsem import (
    FieldDG1,
    FieldDG2,
    max_stable_dt_dg1,
    max_stable_dt_dg2,
    rhs_dg_1d,
    rhs_dg_2d,
)
from .diagnostics import (
    DiagnosticsRecord,
    DomainQuad,
    GaugeSeries,
    locate_gauges,
    make_record,
    mean_entropy,
    write_diagnostics_csv,
    write_gauges_csv,
    write_manifest,
    write_snapshot_csv,
)
from .equations import ModelError
from .fv import SolverError
from .scenarios import RunSetup
from .sources import manning_semi_implicit
from .stabilization import (
    finalize_alpha,
    grid_neighbors_1d,
    post_stage,
    shock_indicator,
)
from .timestepping import clamp_dt, ssprk43_step

_TIME_TOL = 1e-9


@dataclass
class RunResult:
    setup: RunSetup
    solver: str
    u: np.ndarray
    t: float
    steps: int
    records: list
    gauges: list
    exit_code: int = 0
    aborted: bool = False
    error: str = ""
    worst_entropy_rise: float = -np.inf  # max over steps of dS/|S|
    min_stage_h: float = np.inf  # smallest height seen after any stage
    wall_time: float = 0.0
    output_dir: Optional[Path] = None

    @property
    def final_record(self) -> DiagnosticsRecord:
        return self.records[-1]


class _Stepper:
    """Bundles rhs/post/dt closures for one run."""

    def __init__(self, setup: RunSetup, solver: str):
        self.setup = setup
        self.solver = solver
        self.spec = setup.spec
        self.b = setup.field.b
        self.alpha = None  # last blending coefficients, for reporting
        self.min_stage_h = np.inf
        if setup.dim == 2:
            geo = setup.grid
            self.neighbors = geo.neighbors
            self.quad = DomainQuad.from_geometry(geo)
            self._jac = geo.J
            self._nel = geo.n_elements
        else:
            grid = setup.grid
            self.neighbors = grid_neighbors_1d(grid.K, grid.bc)
            self.quad = DomainQuad.from_grid(grid)
            self._jac = None
            self._nel = grid.K

    def _blend_coefficients(self, u):
        if self.solver == "fv1d":
            return np.ones(self._nel)
        setup = self.setup
        if setup.use_indicator:
            raw = shock_indicator(u, setup.ops, self.spec.g, setup.thresholds)
        else:
            raw = np.zeros(self._nel)
        blend = finalize_alpha(raw, u, self.neighbors, setup.thresholds)
        return blend.alpha

    def rhs(self, u, t):
        setup = self.setup
        self.alpha = self._blend_coefficients(u)
        if setup.dim == 2:
            dudt = rhs_dg_2d(FieldDG2(u, self.b), self.spec, setup.grid,
                             alpha=self.alpha, dissipation=setup.dissipation)
        else:
            dudt = rhs_dg_1d(FieldDG1(u, self.b), self.spec, setup.grid,
                             alpha=self.alpha, dissipation=setup.dissipation)
        if setup.source is not None:
            dudt = dudt + setup.source(u, t)
        return dudt

    def post(self, u):
        post_stage(u, self.setup.ops.weights, self.setup.thresholds,
                   J=self._jac)
        hmin = float(u[..., 0].min())
        if hmin < self.min_stage_h:
            self.min_stage_h = hmin
        return u

    def raw_dt(self, u) -> float:
        setup = self.setup
        if setup.fixed_dt is not None:
            return setup.fixed_dt
        if setup.dim == 2:
            return max_stable_dt_dg2(FieldDG2(u, self.b), self.spec,
                                     setup.grid, setup.cfl)
        return max_stable_dt_dg1(FieldDG1(u, self.b), self.spec,
                                 setup.grid, setup.cfl)

    def step(self, u, t, dt):
        unew = ssprk43_step(u, t, dt, self.rhs, post=self.post)
        if self.setup.manning_n > 0.0:
            manning_semi_implicit(unew, self.spec, self.setup.manning_n, dt)
        return unew


def compute_dt(setup: RunSetup, u, t: float, solver: str = "",
               t_target: Optional[float] = None) -> float:
    """Positivity-compatible step size, clamped to land on t_target."""
    stepper = _Stepper(setup, solver or ("dg2d" if setup.dim == 2 else "dg1d"))
    dt = stepper.raw_dt(u)
    if t_target is None:
        t_target = setup.t_end
    return clamp_dt(dt, t, t_target)


class _EventClock:
    """Tracks the next forced stopping time (gauges, snapshots, end)."""

    def __init__(self, t_end, gauge_dt=None, snapshot_dt=None):
        self.t_end = t_end
        self.gauge_dt = gauge_dt
        self.snapshot_dt = snapshot_dt
        self.next_gauge = gauge_dt if gauge_dt else None
        self.next_snapshot = snapshot_dt if snapshot_dt else None

    def next_stop(self):
        stops = [self.t_end]
        if self.next_gauge is not None and self.next_gauge < self.t_end:
            stops.append(self.next_gauge)
        if self.next_snapshot is not None and self.next_snapshot < self.t_end:
            stops.append(self.next_snapshot)
        return min(stops)

    def due_gauge(self, t):
        if self.next_gauge is not None and t >= self.next_gauge - _TIME_TOL:
            self.next_gauge += self.gauge_dt
            return True
        return False

    def due_snapshot(self, t):
        if self.next_snapshot is not None and t >= self.next_snapshot - _TIME_TOL:
            self.next_snapshot += self.snapshot_dt
            return True
        return False


def run_scenario(config: RunConfig) -> RunResult:
    """Execute one configured run and write its artifacts."""
    setup, solver = config.build_setup()
    stepper = _Stepper(setup, solver)
    outdir = Path(config.output_dir) if config.output_dir else None
    if outdir is not None:
        outdir.mkdir(parents=True, exist_ok=True)

    u = setup.field.u.copy()
    t = 0.0
    steps = 0
    gauges = locate_gauges(setup.gauges, setup.grid) if setup.dim == 1 else []
    clock = _EventClock(
        setup.t_end,
        gauge_dt=config.gauge_dt if gauges else None,
        snapshot_dt=config.snapshot_dt if config.snapshot_dt > 0 else None,
    )
    quad = stepper.quad
    records = [make_record(u, setup.field.b, setup.spec, quad,
                           setup.reference_tops, t, alpha=None)]
    s_prev = records[0].entropy
    worst_rise = -np.inf
    for g in gauges:
        g.sample(u, t)
    snap_index = 0

    def dump_snapshot(state, tag):
        if outdir is None:
            return None
        name = f"snapshot_{tag}.csv"
        fieldcls = FieldDG2 if setup.dim == 2 else FieldDG1
        coords = ((setup.grid.x, setup.grid.y) if setup.dim == 2
                  else (setup.grid.node_coords(),))
        write_snapshot_csv(outdir / name, fieldcls(state, setup.field.b),
                           setup.spec, coords, alpha=stepper.alpha)
        return name

    written = []
    started = time.perf_counter()
    aborted = False
    error_msg = ""
    name = dump_snapshot(u, "initial")
    if name:
        written.append(name)
    u_good = u

    while t < setup.t_end - _TIME_TOL:
        try:
            dt = clamp_dt(stepper.raw_dt(u), t, clock.next_stop())
            unew = stepper.step(u, t, dt)
            if not np.all(np.isfinite(unew)):
                raise SolverError(f"non-finite state after step {steps + 1}")
        except (SolverError, ModelError) as exc:
            aborted = True
            error_msg = str(exc)
            break
        u = u_good = unew
        t += dt
        steps += 1
        s_now = mean_entropy(u, setup.field.b, setup.spec, quad)
        rise = (s_now - s_prev) / max(abs(s_now), 1e-300)
        if rise > worst_rise:
            worst_rise = rise
        final = t >= setup.t_end - _TIME_TOL
        if steps % config.diag_every == 0 or final:
            records.append(make_record(
                u, setup.field.b, setup.spec, quad, setup.reference_tops, t,
                prev_entropy=s_prev, alpha=stepper.alpha,
            ))
        s_prev = s_now
        if clock.due_gauge(t):
            for g in gauges:
                g.sample(u, t)
        if clock.due_snapshot(t) and not final:
            name = dump_snapshot(u, f"{snap_index:04d}")
            if name:
                written.append(name)
            snap_index += 1

    wall = time.perf_counter() - started
    name = dump_snapshot(u_good, "last_good" if aborted else "final")
    if name:
        written.append(name)
    if outdir is not None:
        write_diagnostics_csv(outdir / "diagnostics.csv", records,
                              setup.spec.M)
        written.append("diagnostics.csv")
        if gauges:
            write_gauges_csv(outdir / "gauges.csv", gauges)
            written.append("gauges.csv")
        write_manifest(outdir / "manifest.json", config.raw, config.seed, {
            "scenario": setup.name,
            "solver": solver,
            "t_final": t,
            "steps": steps,
            "aborted": aborted,
            "error": error_msg,
            "wall_time_s": wall,
            "files": written,
        })

    return RunResult(
        setup=setup,
        solver=solver,
        u=u_good,
        t=t,
        steps=steps,
        records=records,
        gauges=gauges,
        exit_code=1 if aborted else 0,
        aborted=aborted,
        error=error_msg,
        worst_entropy_rise=worst_rise,
        min_stage_h=stepper.min_stage_h,
        wall_time=wall,
        output_dir=outdir,
    )


def l2_errors(u, u_exact, quad: DomainQuad) -> np.ndarray:
    """Per-layer L2 norm of the height error."""
    d2 = (u[..., 0] - u_exact[..., 0]) ** 2
    wsum = (d2 * quad.qw[..., None]).reshape(-1, d2.shape[-1]).sum(axis=0)
    return np.sqrt(wsum)


@dataclass
class SweepResult:
    key: str
    values: list
    errors: list  # per value: per-layer L2 height errors
    results: list = dc_field(default_factory=list, repr=False)


def run_sweep(config: RunConfig, key: str, values) -> SweepResult:
    """Repeat a scenario over integer parameter values (degree sweeps).

    The scenario must provide an exact solution; each run's per-layer
    L2 height errors against it are collected. Artifacts per run land
    in subdirectories of the configured output directory.
    """
    errors = []
    results = []
    for val in values:
        sub = replace(
            config,
            **{key: val},
            output_dir=(str(Path(config.output_dir) / f"{key}_{val}")
                        if config.output_dir else None),
            raw={**config.raw, key: str(val)},
        )
        res = run_scenario(sub)
        if res.aborted:
            raise SolverError(
                f"sweep member {key}={val} aborted: {res.error}"
            )
        if res.setup.exact is None:
            raise ModelError(
                f"scenario {config.scenario!r} has no exact solution to "
                "measure errors against"
            )
        quad = (DomainQuad.from_geometry(res.setup.grid)
                if res.setup.dim == 2 else DomainQuad.from_grid(res.setup.grid))
        errors.append(l2_errors(res.u, res.setup.exact(res.t), quad))
        results.append(res)
    sweep = SweepResult(key=key, values=list(values), errors=errors,
                        results=results)
    if config.output_dir:
        _write_sweep_csv(Path(config.output_dir) / "sweep.csv", sweep,
                         results[0].setup.spec.M)
    return sweep


def _write_sweep_csv(path, sweep: SweepResult, M: int):
    import csv

    with open(path, "w", newline="") as f:
        wr = csv.writer(f)
        wr.writerow([sweep.key] + [f"l2_h{m + 1}" for m in range(M)])
        for val, err in zip(sweep.values, sweep.errors):
            wr.writerow([val] + [repr(float(e)) for e in err])

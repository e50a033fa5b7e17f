"""Flat structured-text run configuration.

Config files are plain text with one `key = value` per line, `#`
comments, and blank lines. Keys are typed by a fixed schema; unknown
keys are rejected so typos fail loudly instead of silently running
defaults. Scenario-specific keys (mesh sizes, variants, friction) are
routed to the scenario builder; a handful of global keys (fixed_dt,
thresholds, indicator and dissipation switches) are applied to the
assembled setup afterwards, so they work uniformly for every scenario.
"""

from dataclasses import dataclass, field, replace
from typing import Optional

from .scenarios import SCENARIOS, get_scenario


class ConfigError(Exception):
    pass


def _parse_bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


# key -> parser; `N` is accepted as a spelling of n_deg because sweep
# parameters use it
_KEY_TYPES = {
    "scenario": str,
    "solver": str,
    "n_deg": int,
    "ne": int,
    "nx": int,
    "ny": int,
    "warp_amplitude": float,
    "cfl": float,
    "fixed_dt": float,
    "t_end": float,
    "variant": str,
    "perturbation": float,
    "manning_n": float,
    "vel_x": float,
    "vel_y": float,
    "tau_wet": float,
    "tau_vel": float,
    "alpha_max": float,
    "limit_momentum": _parse_bool,
    "use_indicator": _parse_bool,
    "dissipation": _parse_bool,
    "output_dir": str,
    "diag_every": int,
    "snapshot_dt": float,
    "gauge_dt": float,
    "seed": int,
}
_ALIASES = {"N": "n_deg", "K": "ne"}

# keys forwarded to each scenario builder; everything else that touches
# the setup is applied globally after the build
_SCENARIO_KEYS = {
    "convergence3layer": ("n_deg", "t_end", "nx", "ny", "warp_amplitude"),
    "wb2layer": ("variant", "t_end", "n_deg", "ne", "cfl", "perturbation"),
    "wb3layerCurvi": ("n_deg", "t_end", "cfl", "nx", "ny", "warp_amplitude"),
    "triangularDamBreak": ("t_end", "n_deg", "ne", "cfl", "manning_n"),
    "mlDamBreak2D": (
        "t_end", "n_deg", "nx", "ny", "cfl", "warp_amplitude",
        "vel_x", "vel_y",
    ),
}
_GLOBAL_SETUP_KEYS = ("fixed_dt", "use_indicator", "dissipation")
_THRESHOLD_KEYS = ("tau_wet", "tau_vel", "alpha_max", "limit_momentum")
_SOLVERS = ("fv1d", "dg1d", "dg2d")


@dataclass
class RunConfig:
    """Validated run parameters; None means scenario default."""

    scenario: str
    solver: str = ""
    n_deg: Optional[int] = None
    ne: Optional[int] = None
    nx: Optional[int] = None
    ny: Optional[int] = None
    warp_amplitude: Optional[float] = None
    cfl: Optional[float] = None
    fixed_dt: Optional[float] = None
    t_end: Optional[float] = None
    variant: Optional[str] = None
    perturbation: Optional[float] = None
    manning_n: Optional[float] = None
    vel_x: Optional[float] = None
    vel_y: Optional[float] = None
    tau_wet: Optional[float] = None
    tau_vel: Optional[float] = None
    alpha_max: Optional[float] = None
    limit_momentum: Optional[bool] = None
    use_indicator: Optional[bool] = None
    dissipation: Optional[bool] = None
    output_dir: Optional[str] = None
    diag_every: int = 1
    snapshot_dt: float = 0.0
    gauge_dt: float = 0.1
    seed: int = 0
    raw: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            known = ", ".join(sorted(SCENARIOS))
            raise ConfigError(
                f"unknown scenario {self.scenario!r}; available: {known}"
            )
        if self.solver and self.solver not in _SOLVERS:
            raise ConfigError(
                f"solver must be one of {', '.join(_SOLVERS)}, got {self.solver!r}"
            )
        if self.cfl is not None and not 0.0 < self.cfl <= 1.0:
            raise ConfigError("cfl must lie in (0, 1]")
        if self.t_end is not None and self.t_end <= 0.0:
            raise ConfigError("t_end must be positive")
        if self.fixed_dt is not None and self.fixed_dt <= 0.0:
            raise ConfigError("fixed_dt must be positive")
        if self.cfl is not None and self.fixed_dt is not None:
            raise ConfigError("give either cfl or fixed_dt, not both")
        for key in ("n_deg", "ne", "nx", "ny"):
            val = getattr(self, key)
            if val is not None and val < 1:
                raise ConfigError(f"{key} must be at least 1")
        if self.diag_every < 1:
            raise ConfigError("diag_every must be at least 1")
        if self.snapshot_dt < 0.0:
            raise ConfigError("snapshot_dt must be nonnegative")
        if self.gauge_dt <= 0.0:
            raise ConfigError("gauge_dt must be positive")
        scen_keys = _SCENARIO_KEYS[self.scenario]
        for key in ("variant", "perturbation", "manning_n", "vel_x", "vel_y",
                    "ne", "nx", "ny", "warp_amplitude", "cfl"):
            if getattr(self, key) is not None and key not in scen_keys:
                raise ConfigError(
                    f"key {key!r} does not apply to scenario {self.scenario!r}"
                )

    def build_setup(self):
        """Assemble the RunSetup this config describes."""
        overrides = {}
        for key in _SCENARIO_KEYS[self.scenario]:
            val = getattr(self, key)
            if val is not None:
                overrides[key] = val
        setup = get_scenario(self.scenario, **overrides)
        for key in _GLOBAL_SETUP_KEYS:
            val = getattr(self, key)
            if val is not None:
                setattr(setup, key, val)
        th_over = {
            k: getattr(self, k) for k in _THRESHOLD_KEYS
            if getattr(self, k) is not None
        }
        if th_over:
            setup.thresholds = replace(setup.thresholds, **th_over)
        solver = self.solver or ("dg2d" if setup.dim == 2 else "dg1d")
        if (solver == "dg2d") != (setup.dim == 2):
            raise ConfigError(
                f"solver {solver!r} does not fit the "
                f"{setup.dim}D scenario {self.scenario!r}"
            )
        return setup, solver


def parse_config_text(text: str) -> dict:
    """Parse `key = value` lines into a raw string dict."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value in {line!r}")
        if key in raw:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
    return raw


def config_from_dict(raw: dict) -> RunConfig:
    """Build a typed RunConfig from raw string values."""
    kwargs = {}
    for key, value in raw.items():
        canon = _ALIASES.get(key, key)
        if canon not in _KEY_TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        if canon in kwargs:
            raise ConfigError(f"key {canon!r} given twice (alias collision)")
        conv = _KEY_TYPES[canon]
        try:
            kwargs[canon] = conv(value) if isinstance(value, str) else value
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}")
    if "scenario" not in kwargs:
        raise ConfigError("config must name a scenario")
    return RunConfig(raw=dict(raw), **kwargs)


def load_config(path) -> RunConfig:
    try:
        with open(path) as f:
            text = f.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}")
    return config_from_dict(parse_config_text(text))


def parse_sweep_spec(spec: str):
    """Parse a sweep parameter like 'N=3..15' or 'N=3,5,9'.

    Returns (key, [values]); only integer-typed keys are accepted.
    """
    if "=" not in spec:
        raise ConfigError(f"sweep parameter must look like N=3..15, got {spec!r}")
    key, _, rhs = spec.partition("=")
    key = key.strip()
    canon = _ALIASES.get(key, key)
    if canon not in _KEY_TYPES or _KEY_TYPES[canon] is not int:
        raise ConfigError(f"sweep parameter must be an integer key, got {key!r}")
    rhs = rhs.strip()
    try:
        if ".." in rhs:
            lo, _, hi = rhs.partition("..")
            values = list(range(int(lo), int(hi) + 1))
        else:
            values = [int(tok) for tok in rhs.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse sweep values {rhs!r}")
    if not values:
        raise ConfigError(f"empty sweep range {rhs!r}")
    return canon, values


def config_fields() -> list:
    """Documented config keys with their type names, for --help output."""
    out = []
    for key, conv in _KEY_TYPES.items():
        name = {str: "string", int: "int", float: "float"}.get(conv, "bool")
        out.append((key, name))
    return out

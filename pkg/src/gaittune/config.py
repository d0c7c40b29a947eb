"""Experiment configuration: strict flat key-value files with dotted section
prefixes (e.g. ``sim.mass=80``). Unknown keys are rejected, every default is
materialized on parse, and serialize/parse round-trips exactly, so written
reports fully describe the run that produced them."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .footsteps import FootGeometry, Side
from .gp import Bounds2
from .lipm import LipParams
from .plant import DisturbanceScenario, Push, SimConfig

SCENARIO_LABELS = ("a", "b", "c", "d")

# Push defaults for the pushed scenarios: one lateral shove at 2 s and one
# sagittal shove at 4 s. 160 N tips over the loose-footed high-gamma gaits
# near beta = 0 while anything above ~300 N fells every weight choice.
_DEFAULT_PUSHES = "2.0 0.1 0.0 160.0; 4.0 0.1 160.0 0.0"
# Low enough that friction-indifferent gaits (small gamma) slip and fall;
# the walk itself never demands a friction coefficient above ~0.15.
_DEFAULT_MU_SLIPPERY = 0.01


class ConfigError(ValueError):
    """Malformed, unknown or out-of-range configuration input."""


@dataclass(frozen=True)
class TunerSettings:
    # lam is sized so a fall dwarfs any non-fall tracking error (which stays
    # below ~100 on the default horizon): the penalty must dominate.
    lam: float = 1000.0
    h_des: float | None = None  # defaults to the CoM height at build time
    threshold: float = 0.05
    budget: int = 50
    init_points: int = 5
    seed: int = 13

    def __post_init__(self) -> None:
        if self.lam < 0.0 or self.threshold < 0.0:
            raise ConfigError("tuner.lambda and tuner.threshold must be nonnegative")
        if self.init_points < 1 or self.budget < self.init_points + 1:
            raise ConfigError("tuner.budget must exceed tuner.init_points >= 1")


@dataclass(frozen=True)
class ExperimentConfig:
    sim: SimConfig = field(default_factory=SimConfig)
    scenarios: dict[str, DisturbanceScenario] = field(default_factory=dict)
    tuner: TunerSettings = field(default_factory=TunerSettings)
    bounds: Bounds2 = ((0.0, 1000.0), (0.0, 1000.0))
    output_dir: str = "out"

    def __post_init__(self) -> None:
        for name, (lo, hi) in zip(("beta", "gamma"), self.bounds):
            if not (0.0 <= lo < hi <= 1000.0):
                raise ConfigError(
                    f"bounds.{name} must satisfy 0 <= low < high <= 1000, got {lo} {hi}")
        for label in SCENARIO_LABELS:
            if label not in self.scenarios:
                raise ConfigError(f"scenario {label!r} is not defined")

    @property
    def h_des(self) -> float:
        if self.tuner.h_des is not None:
            return self.tuner.h_des
        return self.sim.params.com_height


def default_config() -> ExperimentConfig:
    """The documented defaults: nominal, pushed, slippery, and combined."""
    scenarios = {
        "a": DisturbanceScenario(label="a", seed=101),
        "b": DisturbanceScenario(label="b", seed=202, pushes=_parse_pushes(_DEFAULT_PUSHES)),
        "c": DisturbanceScenario(label="c", seed=303, mu_actual=_DEFAULT_MU_SLIPPERY),
        "d": DisturbanceScenario(label="d", seed=404, pushes=_parse_pushes(_DEFAULT_PUSHES),
                                  mu_actual=_DEFAULT_MU_SLIPPERY),
    }
    return ExperimentConfig(scenarios=scenarios)


def _parse_floats(value: str, count: int, key: str) -> list[float]:
    parts = value.split()
    if len(parts) != count:
        raise ConfigError(f"{key} expects {count} numbers, got {value!r}")
    try:
        return [float(p) for p in parts]
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def _parse_pushes(value: str) -> tuple[Push, ...]:
    pushes = []
    for chunk in value.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        t, dur, fx, fy = _parse_floats(chunk, 4, "pushes entry")
        pushes.append(Push(t_start=t, duration=dur, force=np.array([fx, fy])))
    return tuple(pushes)


def _format_pushes(pushes: tuple[Push, ...]) -> str:
    return "; ".join(
        f"{float(p.t_start)!r} {float(p.duration)!r} "
        f"{float(p.force[0])!r} {float(p.force[1])!r}" for p in pushes)


def _scalar(kind, key, value):
    try:
        return kind(value)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from exc


def parse_config_text(text: str) -> ExperimentConfig:
    """Parse config text; unknown keys and malformed values are errors."""
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        entries[key] = value
    return config_from_entries(entries)


def parse_config(path) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text)


def config_from_entries(entries: dict[str, str]) -> ExperimentConfig:
    base = default_config()
    lip = dict(com_height=base.sim.params.com_height, gravity=base.sim.params.gravity,
               dt_plan=base.sim.params.dt_plan, dt_plant=base.sim.params.dt_plant)
    foot = dict(half_length=base.sim.geom.half_length, half_width=base.sim.geom.half_width,
                step_width=base.sim.geom.step_width, step_time=base.sim.geom.step_time,
                side0=base.sim.geom.side0, reach_half_x=base.sim.geom.reach_half_x,
                reach_half_y=base.sim.geom.reach_half_y)
    sim = dict(total_time=base.sim.total_time, replan_period=base.sim.replan_period,
               mass=base.sim.mass, fall_distance=base.sim.fall_distance,
               v_des=base.sim.v_des, horizon_samples=base.sim.horizon_samples,
               mu_design=base.sim.mu_design)
    tuner = dict(lam=base.tuner.lam, h_des=base.tuner.h_des, threshold=base.tuner.threshold,
                 budget=base.tuner.budget, init_points=base.tuner.init_points,
                 seed=base.tuner.seed)
    bounds = [list(base.bounds[0]), list(base.bounds[1])]
    scen: dict[str, dict] = {
        label: dict(pushes=s.pushes, mu_actual=s.mu_actual,
                    sensor_noise_std=s.sensor_noise_std, seed=s.seed)
        for label, s in base.scenarios.items()
    }
    output_dir = base.output_dir

    for key, value in entries.items():
        section, _, name = key.partition(".")
        if section == "lip" and name in lip:
            lip[name] = _scalar(float, key, value)
        elif section == "foot" and name == "side0":
            if value not in ("left", "right"):
                raise ConfigError(f"{key} must be 'left' or 'right', got {value!r}")
            foot[name] = Side(value)
        elif section == "foot" and name in foot:
            foot[name] = _scalar(float, key, value)
        elif section == "sim" and name == "v_des":
            sim[name] = tuple(_parse_floats(value, 2, key))
        elif section == "sim" and name == "horizon_samples":
            sim[name] = _scalar(int, key, value)
        elif section == "sim" and name in sim:
            sim[name] = _scalar(float, key, value)
        elif section == "planner" and name == "mu_design":
            sim["mu_design"] = _scalar(float, key, value)
        elif section == "tuner" and name == "lambda":
            tuner["lam"] = _scalar(float, key, value)
        elif section == "tuner" and name in ("h_des", "threshold"):
            tuner[name] = _scalar(float, key, value)
        elif section == "tuner" and name in ("budget", "init_points", "seed"):
            tuner[name] = _scalar(int, key, value)
        elif section == "bounds" and name in ("beta", "gamma"):
            bounds[0 if name == "beta" else 1] = _parse_floats(value, 2, key)
        elif section == "output" and name == "dir":
            output_dir = value
        elif section == "scenario":
            label, _, attr = name.partition(".")
            if label not in SCENARIO_LABELS or attr not in (
                    "pushes", "mu_actual", "sensor_noise_std", "seed"):
                raise ConfigError(f"unknown config key {key!r}")
            if attr == "pushes":
                scen[label][attr] = _parse_pushes(value)
            elif attr == "seed":
                scen[label][attr] = _scalar(int, key, value)
            else:
                scen[label][attr] = _scalar(float, key, value)
        else:
            raise ConfigError(f"unknown config key {key!r}")

    try:
        params = LipParams(**lip)
        geom = FootGeometry(**foot)
        sim_cfg = SimConfig(params=params, geom=geom, **sim)
        scenarios = {
            label: DisturbanceScenario(label=label, **attrs)
            for label, attrs in scen.items()
        }
        return ExperimentConfig(
            sim=sim_cfg, scenarios=scenarios, tuner=TunerSettings(**tuner),
            bounds=(tuple(bounds[0]), tuple(bounds[1])), output_dir=output_dir,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def serialize_config(config: ExperimentConfig) -> str:
    """Canonical flat text with every value materialized."""
    p, g, s, t = config.sim.params, config.sim.geom, config.sim, config.tuner
    lines = [
        f"lip.com_height = {p.com_height!r}",
        f"lip.gravity = {p.gravity!r}",
        f"lip.dt_plan = {p.dt_plan!r}",
        f"lip.dt_plant = {p.dt_plant!r}",
        f"foot.half_length = {g.half_length!r}",
        f"foot.half_width = {g.half_width!r}",
        f"foot.step_width = {g.step_width!r}",
        f"foot.step_time = {g.step_time!r}",
        f"foot.side0 = {g.side0.value}",
        f"foot.reach_half_x = {g.reach_half_x!r}",
        f"foot.reach_half_y = {g.reach_half_y!r}",
        f"sim.total_time = {s.total_time!r}",
        f"sim.replan_period = {s.replan_period!r}",
        f"sim.mass = {s.mass!r}",
        f"sim.fall_distance = {s.fall_distance!r}",
        f"sim.v_des = {s.v_des[0]!r} {s.v_des[1]!r}",
        f"sim.horizon_samples = {s.horizon_samples}",
        f"planner.mu_design = {s.mu_design!r}",
        f"tuner.lambda = {t.lam!r}",
        f"tuner.threshold = {t.threshold!r}",
        f"tuner.budget = {t.budget}",
        f"tuner.init_points = {t.init_points}",
        f"tuner.seed = {t.seed}",
        f"bounds.beta = {config.bounds[0][0]!r} {config.bounds[0][1]!r}",
        f"bounds.gamma = {config.bounds[1][0]!r} {config.bounds[1][1]!r}",
        f"output.dir = {config.output_dir}",
    ]
    if t.h_des is not None:
        lines.insert(19, f"tuner.h_des = {t.h_des!r}")
    for label in SCENARIO_LABELS:
        sc = config.scenarios[label]
        lines.append(f"scenario.{label}.mu_actual = {sc.mu_actual!r}")
        lines.append(f"scenario.{label}.sensor_noise_std = {sc.sensor_noise_std!r}")
        lines.append(f"scenario.{label}.seed = {sc.seed}")
        lines.append(f"scenario.{label}.pushes = {_format_pushes(sc.pushes)}")
    return "\n".join(lines) + "\n"


def with_overrides(config: ExperimentConfig, **tuner_overrides) -> ExperimentConfig:
    """Return a copy with selected tuner fields replaced (CLI flags)."""
    return replace(config, tuner=replace(config.tuner, **tuner_overrides))

"""Run configuration: a flat, commented key = value text format.

Grammar: one ``key = value`` pair per line; blank lines and text after
``#`` are ignored. Periods are declared as ``period.<name> = START..END``
with ISO dates, inclusive on both ends. Recognized keys:

    input            path to the panel CSV/TSV (required for data commands)
    date_column      name of the date column (default: first column)
    node_columns     comma-separated subset of node columns (default: all)
    gap_fill         none | linear                (default none)
    difference       true | false, first-difference before estimation
    alpha            edge significance level      (default 0.05)
    bins             histogram bins for curves    (default 10)
    seed             integer RNG seed             (default 0)
    jobs             parallel pairwise fits       (default 1)
    out              output directory             (default ./spillnet-out)
    max_iterations   optimizer iteration cap      (default 500)
    gradient_tol     optimizer gradient tolerance (default 1e-6)
    svg              true | false, emit SVG plots (default true)
    period.<name>    YYYY-MM-DD..YYYY-MM-DD

The period names lockdown, recovery, normal-lockdown and normal-recovery
are special: when all four are present the pipeline also emits the
pattern-shift comparison (S values and the rebound R).
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, replace

from .errors import ConfigError
from .panel import PeriodSpec

COMPARISON_PERIODS = ("lockdown", "recovery", "normal-lockdown", "normal-recovery")

_KNOWN_KEYS = {
    "input", "date_column", "node_columns", "gap_fill", "difference",
    "alpha", "bins", "seed", "jobs", "out", "max_iterations",
    "gradient_tol", "svg",
}


@dataclass(frozen=True)
class RunConfig:
    input: str | None = None
    date_column: str | None = None
    node_columns: tuple[str, ...] | None = None
    periods: tuple[PeriodSpec, ...] = ()
    gap_fill: str = "none"
    difference: bool = False
    alpha: float = 0.05
    bins: int = 10
    seed: int = 0
    jobs: int = 1
    out: str = "spillnet-out"
    max_iterations: int = 500
    gradient_tol: float = 1e-6
    svg: bool = True

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must be in (0, 1), got {self.alpha}")
        if self.bins < 1:
            raise ConfigError("bins must be >= 1")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        names = [p.name for p in self.periods]
        if len(set(names)) != len(names):
            raise ConfigError(f"duplicate period names in {names}")

    def require_input(self) -> str:
        if not self.input:
            raise ConfigError("config needs an 'input' path for this command")
        return self.input

    def require_periods(self) -> tuple[PeriodSpec, ...]:
        if not self.periods:
            raise ConfigError("config declares no period.<name> entries")
        return self.periods


def _parse_bool(key: str, value: str) -> bool:
    low = value.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {value!r}")


def _parse_period(name: str, value: str) -> PeriodSpec:
    if ".." not in value:
        raise ConfigError(f"period.{name}: expected START..END, got {value!r}")
    start_s, end_s = value.split("..", 1)
    try:
        start = dt.date.fromisoformat(start_s.strip())
        end = dt.date.fromisoformat(end_s.strip())
    except ValueError as exc:
        raise ConfigError(f"period.{name}: bad ISO date in {value!r}") from exc
    try:
        return PeriodSpec(name, start, end)
    except Exception as exc:
        raise ConfigError(f"period.{name}: {exc}") from exc


def parse_config_text(text: str) -> RunConfig:
    values: dict = {}
    periods: list[PeriodSpec] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected key = value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key.startswith("period."):
            periods.append(_parse_period(key[len("period."):], value))
            continue
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"line {line_no}: unknown key {key!r}")
        values[key] = value

    kwargs: dict = {}
    if "input" in values:
        kwargs["input"] = values["input"]
    if "date_column" in values:
        kwargs["date_column"] = values["date_column"]
    if "node_columns" in values:
        kwargs["node_columns"] = tuple(
            c.strip() for c in values["node_columns"].split(",") if c.strip()
        )
    if "gap_fill" in values:
        if values["gap_fill"] not in ("none", "linear"):
            raise ConfigError(f"gap_fill must be none or linear, got {values['gap_fill']!r}")
        kwargs["gap_fill"] = values["gap_fill"]
    if "difference" in values:
        kwargs["difference"] = _parse_bool("difference", values["difference"])
    if "svg" in values:
        kwargs["svg"] = _parse_bool("svg", values["svg"])
    for key, cast in (
        ("alpha", float), ("gradient_tol", float),
        ("bins", int), ("seed", int), ("jobs", int), ("max_iterations", int),
    ):
        if key in values:
            try:
                kwargs[key] = cast(values[key])
            except ValueError as exc:
                raise ConfigError(f"{key}: expected {cast.__name__}, got {values[key]!r}") from exc
    if "out" in values:
        kwargs["out"] = values["out"]
    return RunConfig(periods=tuple(periods), **kwargs)


def load_config(path: str) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    return parse_config_text(text)


def apply_overrides(config: RunConfig, **overrides) -> RunConfig:
    """CLI-flag overrides; None values leave the config untouched."""
    changes = {key: value for key, value in overrides.items() if value is not None}
    return replace(config, **changes) if changes else config

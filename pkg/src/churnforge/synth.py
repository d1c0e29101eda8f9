"""Seeded synthetic contest market.

Tasks arrive as a Poisson process; workers join uniformly early in the
horizon with a Beta-distributed skill. Every alive worker enters each task
with a fixed probability, one winner is drawn in proportion to skill, and
losers accumulate a losing streak that raises their chance of leaving the
market for good.

All randomness comes from a single ``numpy.random.Generator`` (PCG64)
seeded with ``config.seed``. Draws happen in a fixed order: task gaps,
join times, skills, then per task: entry, winner, exits. Changing that
order changes every generated log.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Dict, Optional, Sequence

import numpy as np

from .model import ArrivalEvent, ConfigurationError, EventLog

SECONDS_PER_DAY = 86400


@dataclass(frozen=True)
class MarketConfig:
    n_workers: int = 1000
    n_tasks: int = 13000
    horizon_days: int = 600
    task_rate: float = 22.5
    worker_join_spread: float = 0.3
    skill_alpha: float = 1.5
    skill_beta: float = 3.0
    base_participation_prob: float = 0.03
    streak_hazard: float = 0.0004
    base_hazard: float = 0.0003
    seed: int = 0

    def __post_init__(self):
        problems = []
        if self.n_workers < 2:
            problems.append(f"n_workers must be >= 2, got {self.n_workers}")
        if self.n_tasks < 1:
            problems.append(f"n_tasks must be >= 1, got {self.n_tasks}")
        if self.horizon_days < 1:
            problems.append(f"horizon_days must be >= 1, got {self.horizon_days}")
        if not self.task_rate > 0:
            problems.append(f"task_rate must be > 0, got {self.task_rate}")
        if not 0 <= self.worker_join_spread <= 1:
            problems.append(f"worker_join_spread must lie in [0, 1], got {self.worker_join_spread}")
        if not (self.skill_alpha > 0 and self.skill_beta > 0):
            problems.append("skill_alpha and skill_beta must be > 0")
        if not 0 < self.base_participation_prob <= 1:
            problems.append(
                f"base_participation_prob must lie in (0, 1], got {self.base_participation_prob}"
            )
        if self.streak_hazard < 0 or self.base_hazard < 0:
            problems.append("hazards must be >= 0")
        if problems:
            raise ConfigurationError("; ".join(problems))

    @property
    def horizon_seconds(self) -> int:
        return self.horizon_days * SECONDS_PER_DAY

    def replace(self, **changes) -> "MarketConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        return "".join(f"{f.name}={getattr(self, f.name)}\n" for f in dataclasses.fields(self))


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(MarketConfig)}


def coerce_config_values(raw: Dict[str, str]) -> Dict[str, object]:
    """Convert string settings to the field types of ``MarketConfig``."""
    out = {}
    for key, value in raw.items():
        name = key.strip().replace("-", "_")
        if name not in _FIELD_TYPES:
            raise ConfigurationError(f"unknown config key {key!r}")
        kind = int if _FIELD_TYPES[name] in (int, "int") else float
        try:
            out[name] = kind(str(value).strip())
        except ValueError:
            raise ConfigurationError(f"{key}: cannot parse {value!r} as {kind.__name__}") from None
    return out


def parse_config_text(text: str) -> Dict[str, object]:
    """Parse a flat ``key=value`` file; ``#`` starts a comment."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"config line {lineno}: expected key=value")
        key, value = line.split("=", 1)
        raw[key] = value
    return coerce_config_values(raw)


def default_config(seed: int = 0) -> MarketConfig:
    return MarketConfig(seed=seed)


def _ids(prefix: str, n: int):
    width = len(str(max(n - 1, 0)))
    return [f"{prefix}{i:0{width}d}" for i in range(n)]


def generate_market(config: MarketConfig, skills: Optional[Sequence[float]] = None) -> EventLog:
    """Simulate one market; ``skills`` overrides the drawn skill vector."""
    rng = np.random.default_rng(config.seed)
    horizon = float(config.horizon_days)

    gaps = rng.exponential(1.0 / config.task_rate, size=config.n_tasks)
    task_days = np.cumsum(gaps)
    task_days = task_days[task_days < horizon]
    join_days = rng.uniform(0.0, config.worker_join_spread * horizon, size=config.n_workers)
    drawn = rng.beta(config.skill_alpha, config.skill_beta, size=config.n_workers)
    if skills is not None:
        drawn = np.asarray(skills, dtype=float)
        if drawn.shape != (config.n_workers,) or np.any(drawn <= 0):
            raise ConfigurationError("skills override needs n_workers positive values")
    skill = np.maximum(drawn, 1e-12)

    worker_ids = _ids("w", config.n_workers)
    task_ids = _ids("t", config.n_tasks)
    alive = np.ones(config.n_workers, dtype=bool)
    streak = np.zeros(config.n_workers, dtype=np.int64)
    hazard_on = config.base_hazard > 0 or config.streak_hazard > 0

    events = []
    for i, day in enumerate(task_days):
        enter = rng.random(config.n_workers) < config.base_participation_prob
        who = np.flatnonzero(enter & alive & (join_days <= day))
        if who.size == 0:
            continue
        cum = np.cumsum(skill[who])
        winner = who[min(int(np.searchsorted(cum, rng.random() * cum[-1], side="right")), who.size - 1)]

        streak[who] += 1
        streak[winner] = 0
        if hazard_on:
            p_exit = np.minimum(1.0, config.base_hazard + config.streak_hazard * streak[who])
            alive[who[rng.random(who.size) < p_exit]] = False

        ts = int(day * SECONDS_PER_DAY)
        tid = task_ids[i]
        events.extend(ArrivalEvent(worker_ids[w], tid, ts, bool(w == winner)) for w in who)

    return EventLog(tuple(events), 0, config.horizon_seconds)

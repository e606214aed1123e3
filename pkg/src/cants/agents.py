"""Cant agents: one walk from an input node to an output node per agent."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from cants.pheromone import PheromoneSpace

RADIUS_RANGE = (0.01, 0.98)
FINISH_Y = 0.99
MAX_RESTARTS = 8


@dataclass
class CantAgent:
    radius: float
    exploitation: float
    level: int = 1
    x: float = 0.0
    y: float = 0.0
    start_level: int = 1

    def __post_init__(self):
        if not 0 < self.radius < 1:
            raise ValueError(f"sensing radius must lie in (0, 1), got {self.radius}")
        if not 0 <= self.exploitation <= 1:
            raise ValueError(f"exploitation must lie in [0, 1], got {self.exploitation}")


@dataclass
class Waypoint:
    level: int
    x: float
    y: float
    created: bool
    point_id: int | None = None
    followed: tuple[int, ...] = ()


@dataclass
class AgentPath:
    input_level: int
    input_index: int
    waypoints: list[Waypoint] = field(default_factory=list)
    output: int = 0
    radius: float = 0.0

    @property
    def levels(self) -> list[int]:
        return [w.level for w in self.waypoints]

    def coordinates(self, space: PheromoneSpace | None = None) -> list[tuple[int, float, float]]:
        """(level, x, y) sequence including the input node when ``space`` is given."""
        coords = [(w.level, w.x, w.y) for w in self.waypoints]
        if space is not None:
            coords.insert(0, (self.input_level, float(space.input_positions[self.input_index]), 0.0))
        return coords


@dataclass
class PathStats:
    aborted: int = 0
    dropped: int = 0


def new_agent(rng: np.random.Generator, radius: float | None = None, exploitation: float | None = None) -> CantAgent:
    """Agent with fixed parameters, or parameters drawn from U(0.01, 0.98)."""
    if radius is None:
        radius = rng.uniform(*RADIUS_RANGE)
    if exploitation is None:
        exploitation = rng.uniform(*RADIUS_RANGE)
    return CantAgent(float(radius), float(exploitation))


def max_path_steps(radius: float, levels: int) -> int:
    return 4 * math.ceil(1.0 / radius) + 8 * levels


def decide_climb(agent: CantAgent, space: PheromoneSpace, rng: np.random.Generator) -> int:
    return space.select_climb(agent.level, rng)


def step_explore(x: float, y: float, radius: float, level_changed: bool, rng=None, bisect: float | None = None):
    """Move ``radius`` along a random heading.

    The heading is ``bisect * pi`` with ``bisect`` in [0, 1] on the same
    level (never backwards) and in [-1, 1] right after a level change.
    """
    if bisect is None:
        bisect = rng.uniform(-1.0, 1.0) if level_changed else rng.random()
    theta = bisect * math.pi
    nx = min(max(x + radius * math.cos(theta), 0.0), 1.0)
    ny = min(max(y + radius * math.sin(theta), 0.0), 1.0)
    return nx, ny


def step_exploit(agent: CantAgent, space: PheromoneSpace, level: int, level_changed: bool, rng: np.random.Generator):
    """Choose the next position on ``level``.

    Returns ``(x, y, followed_ids)``; an empty ``followed_ids`` means the agent
    explored (either by choice or because it sensed nothing).
    """
    if agent.exploitation > 0 and rng.random() < agent.exploitation:
        com = space.sense_center_of_mass(level, agent.x, agent.y, agent.radius, forward_only=not level_changed)
        if com is not None and (level_changed or com.y > agent.y):
            return com.x, com.y, com.point_ids
    for _ in range(16):
        nx, ny = step_explore(agent.x, agent.y, agent.radius, level_changed, rng)
        if level_changed or ny > agent.y:
            return nx, ny, ()
    # sin(theta) kept rounding to zero; take the straight-ahead step
    return agent.x, min(agent.y + agent.radius, 1.0), ()


def _output_in_range(agent: CantAgent, space: PheromoneSpace) -> bool:
    if agent.level != 1:
        return False
    r2 = agent.radius * agent.radius
    return any((ox - agent.x) ** 2 + (1.0 - agent.y) ** 2 <= r2 for ox in space.output_positions)


def _walk(agent: CantAgent, space: PheromoneSpace, rng: np.random.Generator, limit: int) -> AgentPath | None:
    level = space.select_start_level(rng)
    index = space.select_input(level, rng)
    agent.level = agent.start_level = level
    agent.x, agent.y = float(space.input_positions[index]), 0.0
    path = AgentPath(level, index, radius=agent.radius)
    while True:
        if len(path.waypoints) >= limit:
            _abort(path, space)
            return None
        new_level = decide_climb(agent, space, rng)
        changed = new_level != agent.level
        x, y, followed = step_exploit(agent, space, new_level, changed, rng)
        agent.level, agent.x, agent.y = new_level, x, y
        path.waypoints.append(_place(space, agent, followed))
        if _output_in_range(agent, space):
            break
        if agent.y >= FINISH_Y:
            if agent.level != 1:
                agent.level = 1
                path.waypoints.append(_place(space, agent, ()))
            break
    path.output = space.select_output(rng)
    return path


def _place(space: PheromoneSpace, agent: CantAgent, followed: tuple[int, ...]) -> Waypoint:
    if followed:
        return Waypoint(agent.level, agent.x, agent.y, created=False, followed=followed)
    point = space.add_point(agent.level, agent.x, agent.y)
    return Waypoint(agent.level, agent.x, agent.y, created=True, point_id=point.id)


def _abort(path: AgentPath, space: PheromoneSpace) -> None:
    for w in path.waypoints:
        if w.created and w.point_id in space.points:
            space.remove_point(w.point_id)


def create_path(
    agent: CantAgent,
    space: PheromoneSpace,
    rng: np.random.Generator,
    stats: PathStats | None = None,
    max_steps: int | None = None,
) -> AgentPath | None:
    """Walk ``agent`` from an input to an output, inserting explored points.

    A walk longer than ``max_steps`` is rolled back and retried; after
    repeated failures ``None`` is returned and counted as dropped.
    """
    limit = max_steps or max_path_steps(agent.radius, space.levels)
    for _ in range(MAX_RESTARTS):
        path = _walk(agent, space, rng, limit)
        if path is not None:
            return path
        if stats is not None:
            stats.aborted += 1
    if stats is not None:
        stats.dropped += 1
    return None

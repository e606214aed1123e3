"""The stacked continuous search space and all of its pheromone state.

Level 1 is the current time step; level ``l`` holds lag ``l - 1``. Inputs sit
on the ``y = 0`` edge of every level, outputs on the ``y = 1`` edge of level 1.
Levels, inputs and outputs carry discrete pheromone arrays; everything else is
a cloud of :class:`PheromonePoint` objects per level, indexed by a uniform grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from cants.cells import CellType

NUM_CELL_TYPES = len(CellType)


@dataclass
class PheromoneConfig:
    initial: float = 1.0
    maximum: float = 10.0
    decay: float = 0.05
    reward: float = 0.5
    evict_threshold: float = 0.05
    grid_cell: float = 0.05

    def __post_init__(self):
        for name in ("initial", "maximum", "decay", "reward", "evict_threshold", "grid_cell"):
            if not getattr(self, name) > 0:
                raise ValueError(f"pheromone {name} must be positive")
        if not self.evict_threshold < self.initial <= self.maximum:
            raise ValueError("initial pheromone must lie in (evict_threshold, maximum]")


@dataclass(eq=False)
class PheromonePoint:
    id: int
    level: int
    x: float
    y: float
    pheromone: float
    type_pheromones: np.ndarray
    weight_memory: dict[int, float] = field(default_factory=dict)


@dataclass
class CenterOfMass:
    x: float
    y: float
    point_ids: tuple[int, ...]
    weight_memory: dict[int, list[float]]


def roulette(weights, rng: np.random.Generator) -> int:
    """Index drawn with probability proportional to ``weights``."""
    total = 0.0
    for w in weights:
        total += w
    r = rng.random() * total
    acc = 0.0
    last = len(weights) - 1
    for i, w in enumerate(weights):
        acc += w
        if r < acc:
            return i
    return last


class PheromoneSpace:
    """Owner of every pheromone value in the search.

    Only one thread (the colony coordinator) may mutate a space.
    """

    def __init__(self, num_inputs: int, num_outputs: int, levels: int, cfg: PheromoneConfig | None = None):
        if num_inputs < 1 or num_outputs < 1 or levels < 1:
            raise ValueError("num_inputs, num_outputs and levels must all be >= 1")
        self.cfg = cfg or PheromoneConfig()
        self.num_inputs = num_inputs
        self.num_outputs = num_outputs
        self.levels = levels
        self.level_pheromones = 2.0 * np.arange(1, levels + 1, dtype=float)
        self.input_pheromones = np.full((levels, num_inputs), self.cfg.initial)
        self.output_pheromones = np.full(num_outputs, self.cfg.initial)
        self.input_positions = (np.arange(num_inputs) + 0.5) / num_inputs
        self.output_positions = (np.arange(num_outputs) + 0.5) / num_outputs
        self.points: dict[int, PheromonePoint] = {}
        self._by_level: list[dict[int, PheromonePoint]] = [{} for _ in range(levels)]
        self._grid: list[dict[tuple[int, int], dict[int, PheromonePoint]]] = [{} for _ in range(levels)]
        self._redirect: dict[int, int] = {}
        self._next_id = 0

    # ------------------------------------------------------------------
    # point bookkeeping

    def _cell(self, x: float, y: float) -> tuple[int, int]:
        g = self.cfg.grid_cell
        return int(x / g), int(y / g)

    def _check_level(self, level: int) -> None:
        if not 1 <= level <= self.levels:
            raise ValueError(f"level {level} outside 1..{self.levels}")

    def add_point(
        self,
        level: int,
        x: float,
        y: float,
        pheromone: float | None = None,
        type_pheromones=None,
        weight_memory: dict[int, float] | None = None,
    ) -> PheromonePoint:
        self._check_level(level)
        if not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise ValueError(f"point ({x}, {y}) outside the unit square")
        if pheromone is None:
            pheromone = self.cfg.initial
        if type_pheromones is None:
            type_pheromones = np.full(NUM_CELL_TYPES, self.cfg.initial)
        point = PheromonePoint(
            id=self._next_id,
            level=level,
            x=float(x),
            y=float(y),
            pheromone=min(float(pheromone), self.cfg.maximum),
            type_pheromones=np.asarray(type_pheromones, dtype=float).copy(),
            weight_memory=dict(weight_memory or {}),
        )
        self._next_id += 1
        self.points[point.id] = point
        self._by_level[level - 1][point.id] = point
        self._grid[level - 1].setdefault(self._cell(point.x, point.y), {})[point.id] = point
        return point

    def remove_point(self, pid: int) -> None:
        point = self.points.pop(pid)
        del self._by_level[point.level - 1][pid]
        key = self._cell(point.x, point.y)
        bucket = self._grid[point.level - 1][key]
        del bucket[pid]
        if not bucket:
            del self._grid[point.level - 1][key]

    def merge_points(self, member_ids, level: int, x: float, y: float, **kwargs) -> PheromonePoint:
        """Replace ``member_ids`` by one new point; old ids forward to it."""
        new = self.add_point(level, x, y, **kwargs)
        for pid in member_ids:
            self.remove_point(pid)
            self._redirect[pid] = new.id
        return new

    def resolve(self, pid: int) -> int | None:
        """Current id of a point, following merges. ``None`` once evicted."""
        seen = []
        while pid not in self.points:
            nxt = self._redirect.get(pid)
            if nxt is None:
                for s in seen:
                    self._redirect.pop(s, None)
                return None
            seen.append(pid)
            pid = nxt
        for s in seen[:-1]:
            self._redirect[s] = pid
        return pid

    def points_on_level(self, level: int) -> list[PheromonePoint]:
        self._check_level(level)
        return sorted(self._by_level[level - 1].values(), key=lambda p: p.id)

    def neighbors(self, level: int, x: float, y: float, radius: float) -> list[PheromonePoint]:
        """Points on ``level`` within Euclidean ``radius`` of (x, y), by id."""
        self._check_level(level)
        g = self.cfg.grid_cell
        i0, i1 = int(max(x - radius, 0.0) / g), int(min(x + radius, 1.0) / g)
        j0, j1 = int(max(y - radius, 0.0) / g), int(min(y + radius, 1.0) / g)
        r2 = radius * radius
        level_points = self._by_level[level - 1]
        if (i1 - i0 + 1) * (j1 - j0 + 1) > len(level_points):
            candidates = level_points.values()
        else:
            grid = self._grid[level - 1]
            candidates = [p for i in range(i0, i1 + 1) for j in range(j0, j1 + 1) for p in grid.get((i, j), {}).values()]
        found = [p for p in candidates if (p.x - x) ** 2 + (p.y - y) ** 2 <= r2]
        found.sort(key=lambda p: p.id)
        return found

    def sense_center_of_mass(self, level: int, x: float, y: float, radius: float, forward_only: bool) -> CenterOfMass | None:
        """Pheromone-weighted mean position of the points an agent senses.

        ``forward_only`` keeps only points strictly ahead (larger y), the
        rule for an agent that stays on its level.
        """
        if radius <= 0:
            raise ValueError("radius must be positive")
        found = self.neighbors(level, x, y, radius)
        if forward_only:
            found = [p for p in found if p.y > y]
        if not found:
            return None
        mass = sum(p.pheromone for p in found)
        cx = sum(p.pheromone * p.x for p in found) / mass
        cy = sum(p.pheromone * p.y for p in found) / mass
        memory: dict[int, list[float]] = {}
        for p in found:
            for dest, w in p.weight_memory.items():
                memory.setdefault(dest, []).append(w)
        return CenterOfMass(min(max(cx, 0.0), 1.0), min(max(cy, 0.0), 1.0), tuple(p.id for p in found), memory)

    # ------------------------------------------------------------------
    # discrete selections

    def select_start_level(self, rng: np.random.Generator) -> int:
        return roulette(self.level_pheromones, rng) + 1

    def select_climb(self, level: int, rng: np.random.Generator) -> int:
        """Roulette over the current level and every level closer to level 1."""
        self._check_level(level)
        return roulette(self.level_pheromones[:level], rng) + 1

    def select_input(self, level: int, rng: np.random.Generator) -> int:
        self._check_level(level)
        return roulette(self.input_pheromones[level - 1], rng)

    def select_output(self, rng: np.random.Generator) -> int:
        if self.num_outputs == 1:
            return 0
        return roulette(self.output_pheromones, rng)

    def start_probabilities(self) -> np.ndarray:
        return self.level_pheromones / self.level_pheromones.sum()

    # ------------------------------------------------------------------
    # volatility and reinforcement

    def decay_all(self) -> int:
        """Evaporate every free point by the decay constant; evict weak ones."""
        doomed = []
        for point in self.points.values():
            point.pheromone -= self.cfg.decay
            if point.pheromone <= self.cfg.evict_threshold:
                doomed.append(point.id)
        for pid in doomed:
            self.remove_point(pid)
        if len(self._redirect) > 4 * len(self.points) + 1024:
            for pid in list(self._redirect):
                if pid in self._redirect and self.resolve(pid) is None:
                    self._redirect.pop(pid, None)
        return len(doomed)

    def reward_point(self, pid: int, cell_type=None) -> bool:
        current = self.resolve(pid)
        if current is None:
            return False
        point = self.points[current]
        point.pheromone = min(point.pheromone + self.cfg.reward, self.cfg.maximum)
        if cell_type is not None:
            t = int(CellType.parse(cell_type))
            point.type_pheromones[t] = min(point.type_pheromones[t] + self.cfg.reward, self.cfg.maximum)
        return True

    def reward(self, point_ids=(), levels=(), inputs=(), outputs=(), node_types=None) -> int:
        """Reinforce everything an accepted network used.

        Each distinct surviving point is rewarded once; evicted points are
        skipped. Returns the number of points rewarded.
        """
        node_types = node_types or {}
        rewarded = set()
        for pid in point_ids:
            current = self.resolve(pid)
            if current is None or current in rewarded:
                continue
            rewarded.add(current)
            self.reward_point(current)
        for pid, cell_type in node_types.items():
            current = self.resolve(pid)
            if current is not None:
                t = int(CellType.parse(cell_type))
                tp = self.points[current].type_pheromones
                tp[t] = min(tp[t] + self.cfg.reward, self.cfg.maximum)
        for level in set(levels):
            self._check_level(level)
            self.level_pheromones[level - 1] += self.cfg.reward
        for level, index in set(inputs):
            self.input_pheromones[level - 1, index] += self.cfg.reward
        for index in set(outputs):
            self.output_pheromones[index] += self.cfg.reward
        return len(rewarded)

    def update_weight_memory(self, pid: int, trained: dict[int, float]) -> bool:
        """Average trained outgoing weights into a point's memory.

        Destination keys that are point ids are resolved through merges;
        negative keys (output nodes) are kept verbatim.
        """
        current = self.resolve(pid)
        if current is None:
            return False
        update_memory(self.points[current].weight_memory, {self._memory_key(k): w for k, w in trained.items()})
        return True

    def _memory_key(self, key: int) -> int:
        if key < 0:
            return key
        current = self.resolve(key)
        return key if current is None else current

    def resolved_memory(self, memory: dict[int, float]) -> dict[int, float]:
        return {self._memory_key(k): w for k, w in memory.items()}

    # ------------------------------------------------------------------

    def snapshot(self) -> list[dict]:
        return [
            {"level": p.level, "x": p.x, "y": p.y, "pheromone": p.pheromone}
            for p in sorted(self.points.values(), key=lambda p: p.id)
        ]

    def __len__(self) -> int:
        return len(self.points)


def new_space(num_inputs: int, num_outputs: int, levels: int, cfg: PheromoneConfig | None = None) -> PheromoneSpace:
    return PheromoneSpace(num_inputs, num_outputs, levels, cfg)


def update_memory(memory: dict[int, float], trained: dict[int, float]) -> None:
    for dest, w in trained.items():
        memory[dest] = 0.5 * (memory[dest] + w) if dest in memory else float(w)


def reward_genome(space: PheromoneSpace, genome) -> int:
    """Reward the points, levels, selectors and cell types a genome used and
    fold its trained outgoing weights into the centroid memories."""
    prov = genome.provenance
    count = space.reward(prov.point_ids, prov.levels, prov.inputs, prov.outputs, prov.node_types)
    for centroid, weights in genome.outgoing_weights().items():
        space.update_weight_memory(centroid, weights)
    return count

"""DBSCAN and the condensation of swarm paths onto cluster centroids."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from cants.agents import AgentPath
from cants.pheromone import NUM_CELL_TYPES, PheromoneSpace

NOISE = -1


@dataclass
class ClusterResult:
    labels: np.ndarray
    members: list[np.ndarray]
    centroids: np.ndarray

    @property
    def num_clusters(self) -> int:
        return len(self.members)


def _neighbourhoods(pts: np.ndarray, eps: float) -> list[np.ndarray]:
    """Indices within ``eps`` of every point (self included), grid accelerated."""
    n = len(pts)
    cells = np.floor(pts / eps).astype(np.int64)
    buckets: dict[tuple[int, int], list[int]] = {}
    for i, (cx, cy) in enumerate(cells):
        buckets.setdefault((int(cx), int(cy)), []).append(i)
    buckets = {k: np.array(v) for k, v in buckets.items()}
    eps2 = eps * eps
    out = [None] * n
    cache: dict[tuple[int, int], np.ndarray] = {}
    for key in buckets:
        cx, cy = key
        near = [buckets[(cx + dx, cy + dy)] for dx in (-1, 0, 1) for dy in (-1, 0, 1) if (cx + dx, cy + dy) in buckets]
        cache[key] = np.sort(np.concatenate(near))
    for i in range(n):
        cand = cache[(int(cells[i, 0]), int(cells[i, 1]))]
        dx = pts[cand, 0] - pts[i, 0]
        dy = pts[cand, 1] - pts[i, 1]
        out[i] = cand[dx * dx + dy * dy <= eps2]
    return out


def dbscan(points, eps: float, min_pts: int) -> ClusterResult:
    """Density clustering with the usual core/border/noise semantics.

    A point is core when at least ``min_pts`` points (itself included) lie
    within ``eps``. Points are visited in input order, so border points go to
    the first cluster that reaches them.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if min_pts < 1:
        raise ValueError("min_pts must be >= 1")
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    n = len(pts)
    labels = np.full(n, NOISE, dtype=np.int64)
    if n == 0:
        return ClusterResult(labels, [], np.zeros((0, 2)))
    hoods = _neighbourhoods(pts, eps)
    core = np.array([len(h) >= min_pts for h in hoods])
    visited = np.zeros(n, dtype=bool)
    cluster = 0
    for i in range(n):
        if visited[i]:
            continue
        visited[i] = True
        if not core[i]:
            continue
        labels[i] = cluster
        queue = deque(hoods[i])
        while queue:
            j = queue.popleft()
            if labels[j] == NOISE:
                labels[j] = cluster
            if visited[j]:
                continue
            visited[j] = True
            if core[j]:
                queue.extend(hoods[j])
        cluster += 1
    members = [np.flatnonzero(labels == k) for k in range(cluster)]
    centroids = np.array([pts[m].mean(axis=0) for m in members]) if members else np.zeros((0, 2))
    return ClusterResult(labels, members, centroids)


@dataclass
class Centroid:
    """A condensed node: a space point plus what its members remembered."""

    id: int
    level: int
    x: float
    y: float
    members: tuple[int, ...] = ()
    type_pheromones: np.ndarray = field(default_factory=lambda: np.ones(NUM_CELL_TYPES))
    weight_memory: dict[int, list[float]] = field(default_factory=dict)


@dataclass
class CondensedPath:
    input_level: int
    input_index: int
    nodes: list[int]
    output: int
    followed: tuple[int, ...] = ()
    coordinates: list[tuple[int, float, float]] = field(default_factory=list)


def condense_paths(paths: list[AgentPath], space: PheromoneSpace, eps: float, min_pts: int):
    """Cluster each level and move every waypoint onto its centroid.

    The clustered set per level is every point already in the space (which
    includes this swarm's explored waypoints) followed by the swarm's
    pheromone-following waypoints. Each cluster touched by the swarm becomes
    one space point that replaces its members; untouched clusters are left
    alone. Noise waypoints become singleton centroids.

    Returns ``(centroids, condensed_paths)`` with centroids keyed by id.
    """
    if not paths:
        raise ValueError("no paths to condense")
    cfg = space.cfg
    assignment: dict[tuple[int, int], int] = {}
    centroids: dict[int, Centroid] = {}
    pending_memory: dict[int, list[dict[int, float]]] = {}

    for level in range(1, space.levels + 1):
        existing = space.points_on_level(level)
        followers = [
            (pi, wi, w)
            for pi, path in enumerate(paths)
            for wi, w in enumerate(path.waypoints)
            if w.level == level and not w.created
        ]
        created: dict[int, list[tuple[int, int]]] = {}
        for pi, path in enumerate(paths):
            for wi, w in enumerate(path.waypoints):
                if w.level == level and w.created:
                    created.setdefault(w.point_id, []).append((pi, wi))
        if not followers and not created:
            continue
        coords = [(p.x, p.y) for p in existing] + [(w.x, w.y) for _, _, w in followers]
        result = dbscan(coords, eps, min_pts)
        n_existing = len(existing)
        swarm_index: dict[int, list[tuple[int, int]]] = {}
        for k, p in enumerate(existing):
            if p.id in created:
                swarm_index.setdefault(k, []).extend(created[p.id])
        for k, (pi, wi, _) in enumerate(followers):
            swarm_index.setdefault(n_existing + k, []).append((pi, wi))

        groups: list[np.ndarray] = []
        touched = {int(result.labels[k]) for k in swarm_index if result.labels[k] != NOISE}
        for label in sorted(touched):
            groups.append(result.members[label])
        for k in sorted(swarm_index):
            if result.labels[k] == NOISE:
                groups.append(np.array([k]))

        for group in groups:
            space_members = [existing[k] for k in group if k < n_existing]
            cx, cy = _mean(coords, group)
            if len(group) == 1 and space_members:
                point = space_members[0]
                ctype = point.type_pheromones.copy()
            else:
                if space_members:
                    tau = max(p.pheromone for p in space_members)
                    ctype = np.sum([p.type_pheromones for p in space_members], axis=0)
                else:
                    tau = cfg.initial
                    ctype = np.full(NUM_CELL_TYPES, cfg.initial)
                point = space.merge_points(
                    [p.id for p in space_members],
                    level,
                    cx,
                    cy,
                    pheromone=tau,
                    type_pheromones=np.minimum(ctype, cfg.maximum),
                )
            pending_memory[point.id] = [dict(p.weight_memory) for p in space_members]
            centroids[point.id] = Centroid(
                id=point.id,
                level=level,
                x=point.x,
                y=point.y,
                members=tuple(p.id for p in space_members),
                type_pheromones=ctype,
            )
            for k in group:
                for ref in swarm_index.get(int(k), ()):
                    assignment[ref] = point.id

    # memory keys refer to destination ids that may just have been merged
    for cid, memories in pending_memory.items():
        merged: dict[int, list[float]] = {}
        for memory in memories:
            for dest, w in space.resolved_memory(memory).items():
                merged.setdefault(dest, []).append(w)
        centroids[cid].weight_memory = merged
        space.points[cid].weight_memory = {d: float(np.mean(v)) for d, v in merged.items()}

    condensed = []
    for pi, path in enumerate(paths):
        nodes: list[int] = []
        for wi in range(len(path.waypoints)):
            cid = assignment[(pi, wi)]
            if not nodes or nodes[-1] != cid:
                nodes.append(cid)
        followed = tuple(sorted({f for w in path.waypoints for f in w.followed}))
        condensed.append(
            CondensedPath(path.input_level, path.input_index, nodes, path.output, followed, path.coordinates(space))
        )
    return centroids, condensed


def _mean(coords, group) -> tuple[float, float]:
    sel = np.asarray([coords[int(k)] for k in group], dtype=float)
    m = sel.mean(axis=0)
    return float(min(max(m[0], 0.0), 1.0)), float(min(max(m[1], 0.0), 1.0))

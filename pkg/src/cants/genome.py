"""Recurrent network genomes built from condensed agent paths."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from cants.cells import BIAS_MASK, CellType, num_params
from cants.clustering import Centroid, CondensedPath
from cants.pheromone import PheromoneSpace, roulette

INPUT = "input"
HIDDEN = "hidden"
OUTPUT = "output"


def output_key(index: int) -> int:
    """Weight-memory key for an output node (point ids are never negative)."""
    return -(index + 1)


@dataclass
class Node:
    id: int
    kind: str
    level: int
    x: float
    y: float
    cell_type: CellType = CellType.SIMPLE
    centroid: int | None = None
    index: int | None = None
    params: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "level": self.level,
            "x": self.x,
            "y": self.y,
            "cell_type": self.cell_type.label if self.kind != INPUT else None,
            "centroid": self.centroid,
            "index": self.index,
            "params": [float(v) for v in self.params],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Node":
        cell = CellType.parse(d["cell_type"]) if d.get("cell_type") else CellType.SIMPLE
        return cls(d["id"], d["kind"], d["level"], d["x"], d["y"], cell, d["centroid"], d["index"], np.array(d["params"], dtype=float))


@dataclass
class Edge:
    src: int
    dst: int
    weight: float
    skip: int = 0
    orientation: str | None = None

    @property
    def recurrent(self) -> bool:
        return self.skip > 0

    def to_dict(self) -> dict:
        return {"src": self.src, "dst": self.dst, "weight": self.weight, "skip": self.skip, "orientation": self.orientation}


@dataclass
class Provenance:
    point_ids: list[int] = field(default_factory=list)
    levels: list[int] = field(default_factory=list)
    inputs: list[tuple[int, int]] = field(default_factory=list)
    outputs: list[int] = field(default_factory=list)
    node_types: dict[int, CellType] = field(default_factory=dict)
    paths: list[list[tuple[int, float, float]]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "point_ids": list(self.point_ids),
            "levels": list(self.levels),
            "inputs": [list(t) for t in self.inputs],
            "outputs": list(self.outputs),
            "node_types": {str(k): v.label for k, v in self.node_types.items()},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Provenance":
        return cls(
            d.get("point_ids", []),
            d.get("levels", []),
            [tuple(t) for t in d.get("inputs", [])],
            d.get("outputs", []),
            {int(k): CellType.parse(v) for k, v in d.get("node_types", {}).items()},
        )


@dataclass
class RnnGenome:
    nodes: list[Node]
    edges: list[Edge]
    num_inputs: int
    num_outputs: int
    fitness: float | None = None
    provenance: Provenance = field(default_factory=Provenance)
    candidate_id: int | None = None

    @property
    def feedforward_edges(self) -> list[Edge]:
        return [e for e in self.edges if not e.recurrent]

    @property
    def recurrent_edges(self) -> list[Edge]:
        return [e for e in self.edges if e.recurrent]

    @property
    def hidden_nodes(self) -> list[Node]:
        return [n for n in self.nodes if n.kind == HIDDEN]

    def summary(self) -> dict:
        return {
            "nodes": len(self.hidden_nodes),
            "edges": len(self.feedforward_edges),
            "recurrent_edges": len(self.recurrent_edges),
            "fitness": self.fitness,
        }

    def outgoing_weights(self) -> dict[int, dict[int, float]]:
        """Trained outgoing weights per source centroid, keyed by destination.

        Several edges to the same destination (different time skips) are
        averaged.
        """
        by_id = {n.id: n for n in self.nodes}
        collected: dict[int, dict[int, list[float]]] = {}
        for e in self.edges:
            src, dst = by_id[e.src], by_id[e.dst]
            if src.kind != HIDDEN:
                continue
            key = dst.centroid if dst.kind == HIDDEN else output_key(dst.index)
            collected.setdefault(src.centroid, {}).setdefault(key, []).append(e.weight)
        return {c: {k: float(np.mean(v)) for k, v in d.items()} for c, d in collected.items()}

    def copy(self) -> "RnnGenome":
        return RnnGenome.from_dict(self.to_dict(), paths=self.provenance.paths)

    def to_dict(self) -> dict:
        return {
            "candidate_id": self.candidate_id,
            "num_inputs": self.num_inputs,
            "num_outputs": self.num_outputs,
            "fitness": self.fitness,
            "nodes": [n.to_dict() for n in self.nodes],
            "edges": [e.to_dict() for e in self.feedforward_edges],
            "recurrent_edges": [e.to_dict() for e in self.recurrent_edges],
            "provenance": self.provenance.to_dict(),
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @classmethod
    def from_dict(cls, d: dict, paths=None) -> "RnnGenome":
        edges = [Edge(**e) for e in d["edges"]] + [Edge(**e) for e in d["recurrent_edges"]]
        prov = Provenance.from_dict(d.get("provenance", {}))
        if paths is not None:
            prov.paths = [list(p) for p in paths]
        return cls(
            [Node.from_dict(n) for n in d["nodes"]],
            edges,
            d["num_inputs"],
            d["num_outputs"],
            d.get("fitness"),
            prov,
            d.get("candidate_id"),
        )

    @classmethod
    def from_json(cls, text: str) -> "RnnGenome":
        return cls.from_dict(json.loads(text))


def select_node_type(type_pheromones, rng: np.random.Generator) -> CellType:
    return CellType(roulette(np.asarray(type_pheromones, dtype=float), rng))


def init_bound(scheme: str, fan_in: int, fan_out: int) -> float:
    if scheme == "uniform":
        return 0.5
    if scheme == "xavier":
        return math.sqrt(6.0 / max(fan_in + fan_out, 1))
    if scheme == "kaiming":
        return math.sqrt(6.0 / max(fan_in, 1))
    raise ValueError(f"unknown weight init scheme {scheme!r}")


def seed_weights(memory: list[float] | None, scheme: str, rng: np.random.Generator, fan_in: int = 1, fan_out: int = 1) -> float:
    """Initial edge weight: the mean remembered value, else a random draw."""
    if memory:
        return float(np.mean(memory))
    bound = init_bound(scheme, fan_in, fan_out)
    return float(rng.uniform(-bound, bound))


def _init_params(cell_type: CellType, scheme: str, rng, fan_in: int, fan_out: int) -> np.ndarray:
    bound = init_bound(scheme, fan_in, fan_out)
    params = rng.uniform(-bound, bound, size=num_params(cell_type))
    params[BIAS_MASK[cell_type]] = 0.0
    return params


def build_genome(
    paths: list[CondensedPath],
    centroids: dict[int, Centroid],
    space: PheromoneSpace,
    rng: np.random.Generator,
    scheme: str = "uniform",
) -> RnnGenome:
    """Turn condensed paths into a genome.

    Consecutive nodes on one level give a feedforward edge when the target is
    further along y (ties broken by id), otherwise a skip-1 recurrent edge,
    which keeps the feedforward graph acyclic. Nodes on different levels give
    a recurrent edge whose skip is the lag difference.
    """
    paths = [p for p in paths if p.nodes]
    nodes: list[Node] = []
    input_ids: dict[tuple[int, int], int] = {}
    for level, index in sorted({(p.input_level, p.input_index) for p in paths}):
        input_ids[(level, index)] = len(nodes)
        nodes.append(Node(len(nodes), INPUT, level, float(space.input_positions[index]), 0.0, index=index))
    hidden_ids: dict[int, int] = {}
    for p in paths:
        for cid in p.nodes:
            if cid not in hidden_ids:
                c = centroids[cid]
                hidden_ids[cid] = len(nodes)
                nodes.append(Node(len(nodes), HIDDEN, c.level, c.x, c.y, centroid=cid))
    output_ids = {}
    for j in range(space.num_outputs):
        output_ids[j] = len(nodes)
        nodes.append(Node(len(nodes), OUTPUT, 1, float(space.output_positions[j]), 1.0, index=j))

    def rank(n: Node):
        order = {INPUT: 0, HIDDEN: 1, OUTPUT: 2}[n.kind]
        return (order, n.y, n.id) if n.kind == HIDDEN else (order, 0.0, n.id)

    edge_index: dict[tuple[int, int, int], Edge] = {}
    for p in paths:
        seq = [input_ids[(p.input_level, p.input_index)]] + [hidden_ids[c] for c in p.nodes] + [output_ids[p.output]]
        for a, b in zip(seq, seq[1:]):
            na, nb = nodes[a], nodes[b]
            if nb.level > na.level:
                raise ValueError("path moves to a larger lag")
            if na.level == nb.level:
                if rank(na) < rank(nb):
                    skip, orient = 0, None
                else:
                    skip, orient = 1, "backward"
            else:
                skip = na.level - nb.level
                orient = "forward" if nb.y >= na.y else "backward"
            key = (a, b, skip)
            if key not in edge_index:
                edge_index[key] = Edge(a, b, 0.0, skip, orient)
    edges = list(edge_index.values())

    fan_in = np.zeros(len(nodes), dtype=int)
    fan_out = np.zeros(len(nodes), dtype=int)
    for e in edges:
        fan_in[e.dst] += 1
        fan_out[e.src] += 1

    for n in nodes:
        if n.kind == HIDDEN:
            n.cell_type = select_node_type(centroids[n.centroid].type_pheromones, rng)
    for e in edges:
        src, dst = nodes[e.src], nodes[e.dst]
        memory = None
        if src.kind == HIDDEN:
            key = dst.centroid if dst.kind == HIDDEN else output_key(dst.index)
            memory = centroids[src.centroid].weight_memory.get(key)
        e.weight = seed_weights(memory, scheme, rng, int(fan_in[e.dst]), int(fan_out[e.src]))
    for n in nodes:
        if n.kind != INPUT:
            n.params = _init_params(n.cell_type, scheme, rng, int(fan_in[n.id]), int(fan_out[n.id]))

    point_ids = sorted(set(hidden_ids) | {f for p in paths for f in p.followed})
    prov = Provenance(
        point_ids=point_ids,
        levels=sorted({n.level for n in nodes if n.kind != OUTPUT}),
        inputs=sorted(input_ids),
        outputs=sorted({p.output for p in paths}),
        node_types={n.centroid: n.cell_type for n in nodes if n.kind == HIDDEN},
        paths=[list(p.coordinates) for p in paths],
    )
    return RnnGenome(nodes, edges, space.num_inputs, space.num_outputs, provenance=prov)


def topological_order(genome: RnnGenome) -> list[int]:
    """Node ids ordered so every feedforward edge points forward.

    Raises ``ValueError`` when the feedforward subgraph has a cycle.
    """
    n = len(genome.nodes)
    indeg = [0] * n
    succ: list[list[int]] = [[] for _ in range(n)]
    for e in genome.feedforward_edges:
        indeg[e.dst] += 1
        succ[e.src].append(e.dst)
    ready = [i for i in range(n) if indeg[i] == 0]
    ready.reverse()
    order = []
    while ready:
        i = ready.pop()
        order.append(i)
        for j in succ[i]:
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
    if len(order) != n:
        raise ValueError("feedforward edges contain a cycle")
    return order

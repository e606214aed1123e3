"""Hand-built genomes and conversions shared by the tests."""

from __future__ import annotations

import numpy as np

from cants.cells import CellType, num_params
from cants.genome import HIDDEN, INPUT, OUTPUT, Edge, Node, RnnGenome


def make_genome(num_inputs, hidden_types, edges, output_type=CellType.SIMPLE, rng=None, scale=1.0):
    """Inputs, then hidden nodes, then a single output node.

    ``edges`` are (src, dst, skip) with node ids in that layout. Weights and
    cell parameters are drawn from U(-scale, scale) when ``rng`` is given and
    are zero otherwise.
    """
    nodes = [Node(i, INPUT, 1, (i + 0.5) / num_inputs, 0.0, index=i) for i in range(num_inputs)]
    for k, ct in enumerate(hidden_types):
        nodes.append(Node(len(nodes), HIDDEN, 1, 0.5, 0.1 + 0.8 * k / max(len(hidden_types), 1), CellType(ct), centroid=k))
    nodes.append(Node(len(nodes), OUTPUT, 1, 0.5, 1.0, output_type, index=0))
    for n in nodes:
        if n.kind != INPUT:
            m = num_params(n.cell_type)
            n.params = rng.uniform(-scale, scale, m) if rng is not None else np.zeros(m)
    es = []
    for src, dst, skip in edges:
        w = float(rng.uniform(-scale, scale)) if rng is not None else 0.0
        es.append(Edge(src, dst, w, skip, "backward" if skip else None))
    return RnnGenome(nodes, es, num_inputs, 1)


def random_small_genome(rng, max_nodes=6, cell_types=None):
    """Random genome with at most ``max_nodes`` nodes and >= 1 recurrent edge.

    Feedforward edges follow node order so the graph stays acyclic; every
    hidden node is wired input-side and output-side.
    """
    num_inputs = int(rng.integers(1, 3))
    num_hidden = int(rng.integers(1, max_nodes - num_inputs))
    pool = list(CellType) if cell_types is None else list(cell_types)
    types = [pool[int(rng.integers(len(pool)))] for _ in range(num_hidden)]
    out = num_inputs + num_hidden
    edges = set()
    for h in range(num_inputs, out):
        edges.add((int(rng.integers(0, h)), h, 0))
        edges.add((h, int(rng.integers(h + 1, out + 1)), 0))
    for _ in range(int(rng.integers(0, 4))):
        a, b = sorted(rng.choice(out + 1, 2, replace=False).tolist())
        edges.add((a, b, 0))
    for _ in range(int(rng.integers(1, 4))):
        src = int(rng.integers(0, out + 1))
        dst = int(rng.integers(num_inputs, out + 1))
        edges.add((src, dst, int(rng.integers(1, 4))))
    return make_genome(num_inputs, types, sorted(edges), CellType(pool[int(rng.integers(len(pool)))]), rng)


def genome_spec(genome: RnnGenome) -> dict:
    """Plain description consumed by the arbitrary-precision oracle."""
    nodes = []
    for n in genome.nodes:
        nodes.append(
            {
                "kind": n.kind,
                "cell": int(n.cell_type),
                "index": n.index,
                "nparams": 0 if n.kind == INPUT else int(n.params.size),
            }
        )
    return {"nodes": nodes, "edges": [(e.src, e.dst, e.skip) for e in genome.edges]}


def single_cell_genome(cell_type, rng):
    """input -> cell (with a skip-1 self loop) -> Simple output."""
    return make_genome(1, [cell_type], [(0, 1, 0), (1, 1, 1), (1, 2, 0)], rng=rng)


def is_path_shaped(genome: RnnGenome) -> bool:
    """Every hidden node is reachable from an input and reaches an output."""
    fwd: dict[int, set[int]] = {n.id: set() for n in genome.nodes}
    back: dict[int, set[int]] = {n.id: set() for n in genome.nodes}
    for e in genome.edges:
        fwd[e.src].add(e.dst)
        back[e.dst].add(e.src)

    def reach(starts, adj):
        seen = set(starts)
        stack = list(starts)
        while stack:
            for j in adj[stack.pop()]:
                if j not in seen:
                    seen.add(j)
                    stack.append(j)
        return seen

    from_in = reach([n.id for n in genome.nodes if n.kind == INPUT], fwd)
    to_out = reach([n.id for n in genome.nodes if n.kind == OUTPUT], back)
    return all(n.id in from_in and n.id in to_out for n in genome.nodes if n.kind == HIDDEN)

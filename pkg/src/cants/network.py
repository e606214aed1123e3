"""Time-unrolled execution of a genome: forward pass and BPTT."""

from __future__ import annotations

import numpy as np
from numba import njit

from cants.cells import BUFFER_WIDTH, INPUT_KIND, cell_backward, cell_forward
from cants.genome import INPUT, OUTPUT, RnnGenome, topological_order


@njit(cache=True, nogil=True)
def _forward(X, kinds, feature, poff, in_ptr, in_src, in_skip, in_widx, theta, outs, cst, buf, agg):
    T = X.shape[0]
    n = kinds.shape[0]
    for t in range(T):
        for i in range(n):
            k = kinds[i]
            if k == INPUT_KIND:
                outs[t, i] = X[t, feature[i]]
                continue
            a = 0.0
            for e in range(in_ptr[i], in_ptr[i + 1]):
                ts = t - in_skip[e]
                if ts >= 0:
                    a += theta[in_widx[e]] * outs[ts, in_src[e]]
            agg[t, i] = a
            h = 0.0
            c = 0.0
            if t > 0:
                h = outs[t - 1, i]
                c = cst[t - 1, i]
            y, cn = cell_forward(k, a, h, c, theta, poff[i], buf, t, i)
            outs[t, i] = y
            cst[t, i] = cn


@njit(cache=True, nogil=True)
def _backward(kinds, poff, in_ptr, in_src, in_skip, in_widx, theta, outs, cst, buf, agg, dout, grad):
    T = outs.shape[0]
    n = kinds.shape[0]
    dcs = np.zeros((T, n))
    for t in range(T - 1, -1, -1):
        for i in range(n - 1, -1, -1):
            k = kinds[i]
            if k == INPUT_KIND:
                continue
            h = 0.0
            c = 0.0
            if t > 0:
                h = outs[t - 1, i]
                c = cst[t - 1, i]
            da, dh, dc = cell_backward(k, agg[t, i], h, c, theta, poff[i], buf, t, i, dout[t, i], dcs[t, i], grad)
            if t > 0:
                dout[t - 1, i] += dh
                dcs[t - 1, i] += dc
            for e in range(in_ptr[i], in_ptr[i + 1]):
                ts = t - in_skip[e]
                if ts >= 0:
                    src = in_src[e]
                    grad[in_widx[e]] += da * outs[ts, src]
                    dout[ts, src] += da * theta[in_widx[e]]


class UnrolledNet:
    """Compiled execution plan for one genome.

    Nodes are renumbered into a feedforward topological order; parameters
    live in one flat vector: edge weights in genome edge order, then each
    node's cell parameters in genome node order.
    """

    def __init__(self, genome: RnnGenome):
        self.genome = genome
        order = topological_order(genome)
        pos = {nid: i for i, nid in enumerate(order)}
        n = len(order)
        self.order = order
        self.kinds = np.empty(n, dtype=np.int64)
        self.feature = np.zeros(n, dtype=np.int64)
        self.poff = np.zeros(n, dtype=np.int64)
        self.max_skip = max((e.skip for e in genome.edges), default=0)

        theta = [e.weight for e in genome.edges]
        offsets = {}
        for node in genome.nodes:
            if node.kind != INPUT:
                offsets[node.id] = len(theta)
                theta.extend(float(v) for v in node.params)
        self.theta = np.array(theta, dtype=np.float64)
        self.num_edge_params = len(genome.edges)

        for node in genome.nodes:
            i = pos[node.id]
            if node.kind == INPUT:
                self.kinds[i] = INPUT_KIND
                self.feature[i] = node.index
            else:
                self.kinds[i] = int(node.cell_type)
                self.poff[i] = offsets[node.id]

        incoming: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
        for widx, e in enumerate(genome.edges):
            incoming[pos[e.dst]].append((pos[e.src], e.skip, widx))
        self.in_ptr = np.zeros(n + 1, dtype=np.int64)
        flat = []
        for i, lst in enumerate(incoming):
            flat.extend(lst)
            self.in_ptr[i + 1] = len(flat)
        arr = np.array(flat, dtype=np.int64).reshape(-1, 3)
        self.in_src = np.ascontiguousarray(arr[:, 0])
        self.in_skip = np.ascontiguousarray(arr[:, 1])
        self.in_widx = np.ascontiguousarray(arr[:, 2])

        outputs = sorted((node.index, pos[node.id]) for node in genome.nodes if node.kind == OUTPUT)
        self.out_pos = np.array([p for _, p in outputs], dtype=np.int64)
        self.num_inputs = genome.num_inputs

    @property
    def num_params(self) -> int:
        return self.theta.size

    def _run(self, X: np.ndarray, theta: np.ndarray):
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.num_inputs:
            raise ValueError(f"expected input of shape (T, {self.num_inputs}), got {X.shape}")
        if X.shape[0] <= self.max_skip:
            raise ValueError(f"sequence of length {X.shape[0]} is shorter than the deepest recurrent skip {self.max_skip}")
        T, n = X.shape[0], self.kinds.size
        outs = np.zeros((T, n))
        cst = np.zeros((T, n))
        buf = np.zeros((T, n, BUFFER_WIDTH))
        agg = np.zeros((T, n))
        _forward(X, self.kinds, self.feature, self.poff, self.in_ptr, self.in_src, self.in_skip, self.in_widx, theta, outs, cst, buf, agg)
        return outs, cst, buf, agg

    def forward(self, X, theta=None) -> np.ndarray:
        """Predictions, shape ``(T, num_outputs)``."""
        theta = self.theta if theta is None else np.asarray(theta, dtype=np.float64)
        outs = self._run(X, theta)[0]
        return outs[:, self.out_pos]

    def loss(self, X, Y, theta=None) -> float:
        pred = self.forward(X, theta)
        return float(np.mean((pred - np.asarray(Y).reshape(pred.shape)) ** 2))

    def loss_and_grad(self, X, Y, theta=None) -> tuple[float, np.ndarray]:
        """Mean squared error over the whole sequence and its BPTT gradient."""
        theta = self.theta if theta is None else np.asarray(theta, dtype=np.float64)
        outs, cst, buf, agg = self._run(X, theta)
        pred = outs[:, self.out_pos]
        Y = np.asarray(Y, dtype=np.float64).reshape(pred.shape)
        diff = pred - Y
        loss = float(np.mean(diff**2))
        dout = np.zeros_like(outs)
        dout[:, self.out_pos] = 2.0 * diff / diff.size
        grad = np.zeros_like(theta)
        _backward(self.kinds, self.poff, self.in_ptr, self.in_src, self.in_skip, self.in_widx, theta, outs, cst, buf, agg, dout, grad)
        return loss, grad

    def write_back(self, genome: RnnGenome | None = None, theta=None) -> RnnGenome:
        """Copy a parameter vector into ``genome`` (default: the source genome)."""
        genome = self.genome if genome is None else genome
        theta = self.theta if theta is None else np.asarray(theta, dtype=np.float64)
        for widx, e in enumerate(genome.edges):
            e.weight = float(theta[widx])
        k = self.num_edge_params
        for node in genome.nodes:
            if node.kind != INPUT:
                m = node.params.size
                node.params = theta[k : k + m].copy()
                k += m
        return genome


def forward(genome: RnnGenome, X) -> np.ndarray:
    return UnrolledNet(genome).forward(X)

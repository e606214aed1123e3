"""Scalar memory cells used as network nodes.

Every node receives one aggregated input ``a`` (the weighted sum of its
incoming edges) and keeps its own previous output ``h`` as recurrent state;
LSTM nodes additionally carry a cell state ``c``. The kernels are numba
compiled so the unrolled network can call them per node and per time step.

Update equations (sigma = logistic, all quantities scalars):

Simple   y = tanh(a + b)
Delta    d1 = alpha*v*h*a ; d2 = beta1*v*h + beta2*a
         zc = tanh(d1 + d2 + bz) ; r = sigma(a + br)
         y = tanh((1 - r)*zc + r*h)
GRU      z = sigma(wz*a + uz*h + bz) ; r = sigma(wr*a + ur*h + br)
         hc = tanh(wh*a + uh*(r*h) + bh) ; y = (1 - z)*h + z*hc
LSTM     i, f, o = sigma(w*a + u*h + b) ; g = tanh(wg*a + ug*h + bg)
         c' = f*c + i*g ; y = o*tanh(c')
MGU      f = sigma(wf*a + uf*h + bf) ; hc = tanh(wh*a + uh*(f*h) + bh)
         y = (1 - f)*h + f*hc
UGRNN    cc = tanh(wc*a + uc*h + bc) ; g = sigma(wg*a + ug*h + bg)
         y = g*h + (1 - g)*cc
"""

from __future__ import annotations

import enum
import math

import numpy as np
from numba import njit


class CellType(enum.IntEnum):
    SIMPLE = 0
    DELTA = 1
    GRU = 2
    LSTM = 3
    MGU = 4
    UGRNN = 5

    @property
    def label(self) -> str:
        return _LABELS[self]

    @classmethod
    def parse(cls, value) -> "CellType":
        if isinstance(value, CellType):
            return value
        if isinstance(value, (int, np.integer)):
            return cls(int(value))
        key = str(value).strip().lower().replace("-", "").replace("_", "")
        for member, label in _LABELS.items():
            if key in (label.lower(), member.name.lower()):
                return member
        raise ValueError(f"unknown cell type {value!r}")


_LABELS = {
    CellType.SIMPLE: "Simple",
    CellType.DELTA: "DeltaRNN",
    CellType.GRU: "GRU",
    CellType.LSTM: "LSTM",
    CellType.MGU: "MGU",
    CellType.UGRNN: "UGRNN",
}

INPUT_KIND = -1

PARAM_NAMES: dict[CellType, tuple[str, ...]] = {
    CellType.SIMPLE: ("b",),
    CellType.DELTA: ("alpha", "beta1", "beta2", "v", "br", "bz"),
    CellType.GRU: ("wz", "uz", "bz", "wr", "ur", "br", "wh", "uh", "bh"),
    CellType.LSTM: ("wi", "ui", "bi", "wf", "uf", "bf", "wo", "uo", "bo", "wg", "ug", "bg"),
    CellType.MGU: ("wf", "uf", "bf", "wh", "uh", "bh"),
    CellType.UGRNN: ("wc", "uc", "bc", "wg", "ug", "bg"),
}

# Bias terms start at zero; everything else is drawn like an edge weight.
BIAS_MASK: dict[CellType, np.ndarray] = {
    t: np.array([n.startswith("b") and n not in ("beta1", "beta2") for n in names])
    for t, names in PARAM_NAMES.items()
}

# Width of the per-step scratch buffer each node needs for the backward pass.
BUFFER_WIDTH = 8


def num_params(cell_type) -> int:
    return len(PARAM_NAMES[CellType(cell_type)])


@njit(cache=True, nogil=True, inline="always")
def _sigmoid(z):
    if z >= 0.0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


@njit(cache=True, nogil=True, inline="always")
def cell_forward(kind, a, h, c, p, off, buf, t, j):
    """One cell update. Returns ``(y, c_new)`` and fills ``buf``."""
    if kind == 0:
        y = math.tanh(a + p[off])
        buf[t, j, 0] = y
        return y, 0.0
    elif kind == 1:
        alpha = p[off]
        beta1 = p[off + 1]
        beta2 = p[off + 2]
        v = p[off + 3]
        vh = v * h
        zc = math.tanh(alpha * vh * a + beta1 * vh + beta2 * a + p[off + 5])
        r = _sigmoid(a + p[off + 4])
        y = math.tanh((1.0 - r) * zc + r * h)
        buf[t, j, 0] = zc
        buf[t, j, 1] = r
        buf[t, j, 2] = y
        return y, 0.0
    elif kind == 2:
        z = _sigmoid(p[off] * a + p[off + 1] * h + p[off + 2])
        r = _sigmoid(p[off + 3] * a + p[off + 4] * h + p[off + 5])
        hc = math.tanh(p[off + 6] * a + p[off + 7] * (r * h) + p[off + 8])
        y = (1.0 - z) * h + z * hc
        buf[t, j, 0] = z
        buf[t, j, 1] = r
        buf[t, j, 2] = hc
        return y, 0.0
    elif kind == 3:
        i = _sigmoid(p[off] * a + p[off + 1] * h + p[off + 2])
        f = _sigmoid(p[off + 3] * a + p[off + 4] * h + p[off + 5])
        o = _sigmoid(p[off + 6] * a + p[off + 7] * h + p[off + 8])
        g = math.tanh(p[off + 9] * a + p[off + 10] * h + p[off + 11])
        cn = f * c + i * g
        tc = math.tanh(cn)
        y = o * tc
        buf[t, j, 0] = i
        buf[t, j, 1] = f
        buf[t, j, 2] = o
        buf[t, j, 3] = g
        buf[t, j, 4] = tc
        return y, cn
    elif kind == 4:
        f = _sigmoid(p[off] * a + p[off + 1] * h + p[off + 2])
        hc = math.tanh(p[off + 3] * a + p[off + 4] * (f * h) + p[off + 5])
        y = (1.0 - f) * h + f * hc
        buf[t, j, 0] = f
        buf[t, j, 1] = hc
        return y, 0.0
    else:
        cc = math.tanh(p[off] * a + p[off + 1] * h + p[off + 2])
        g = _sigmoid(p[off + 3] * a + p[off + 4] * h + p[off + 5])
        y = g * h + (1.0 - g) * cc
        buf[t, j, 0] = cc
        buf[t, j, 1] = g
        return y, 0.0


@njit(cache=True, nogil=True, inline="always")
def cell_backward(kind, a, h, c, p, off, buf, t, j, dy, dcn, grad):
    """Backward step for :func:`cell_forward`.

    Accumulates parameter gradients into ``grad[off:]`` and returns the
    gradients with respect to ``(a, h, c)``.
    """
    da = 0.0
    dh = 0.0
    dc = 0.0
    if kind == 0:
        y = buf[t, j, 0]
        dz = dy * (1.0 - y * y)
        grad[off] += dz
        da = dz
    elif kind == 1:
        alpha = p[off]
        beta1 = p[off + 1]
        beta2 = p[off + 2]
        v = p[off + 3]
        zc = buf[t, j, 0]
        r = buf[t, j, 1]
        y = buf[t, j, 2]
        ds = dy * (1.0 - y * y)
        dzc = ds * (1.0 - r)
        dr = ds * (h - zc)
        dh = ds * r
        dzr = dr * r * (1.0 - r)
        grad[off + 4] += dzr
        da += dzr
        dpre = dzc * (1.0 - zc * zc)
        grad[off + 5] += dpre
        grad[off] += dpre * v * h * a
        grad[off + 1] += dpre * v * h
        grad[off + 2] += dpre * a
        grad[off + 3] += dpre * (alpha * h * a + beta1 * h)
        da += dpre * (alpha * v * h + beta2)
        dh += dpre * (alpha * v * a + beta1 * v)
    elif kind == 2:
        z = buf[t, j, 0]
        r = buf[t, j, 1]
        hc = buf[t, j, 2]
        dz = dy * (hc - h)
        dhc = dy * z
        dh = dy * (1.0 - z)
        dzh = dhc * (1.0 - hc * hc)
        grad[off + 6] += dzh * a
        grad[off + 7] += dzh * r * h
        grad[off + 8] += dzh
        da += p[off + 6] * dzh
        dr = dzh * p[off + 7] * h
        dh += dzh * p[off + 7] * r
        dzr = dr * r * (1.0 - r)
        grad[off + 3] += dzr * a
        grad[off + 4] += dzr * h
        grad[off + 5] += dzr
        da += p[off + 3] * dzr
        dh += p[off + 4] * dzr
        dzz = dz * z * (1.0 - z)
        grad[off] += dzz * a
        grad[off + 1] += dzz * h
        grad[off + 2] += dzz
        da += p[off] * dzz
        dh += p[off + 1] * dzz
    elif kind == 3:
        i = buf[t, j, 0]
        f = buf[t, j, 1]
        o = buf[t, j, 2]
        g = buf[t, j, 3]
        tc = buf[t, j, 4]
        do = dy * tc
        dct = dcn + dy * o * (1.0 - tc * tc)
        dzi = dct * g * i * (1.0 - i)
        dzf = dct * c * f * (1.0 - f)
        dzo = do * o * (1.0 - o)
        dzg = dct * i * (1.0 - g * g)
        dc = dct * f
        grad[off] += dzi * a
        grad[off + 1] += dzi * h
        grad[off + 2] += dzi
        grad[off + 3] += dzf * a
        grad[off + 4] += dzf * h
        grad[off + 5] += dzf
        grad[off + 6] += dzo * a
        grad[off + 7] += dzo * h
        grad[off + 8] += dzo
        grad[off + 9] += dzg * a
        grad[off + 10] += dzg * h
        grad[off + 11] += dzg
        da = p[off] * dzi + p[off + 3] * dzf + p[off + 6] * dzo + p[off + 9] * dzg
        dh = p[off + 1] * dzi + p[off + 4] * dzf + p[off + 7] * dzo + p[off + 10] * dzg
    elif kind == 4:
        f = buf[t, j, 0]
        hc = buf[t, j, 1]
        df = dy * (hc - h)
        dhc = dy * f
        dh = dy * (1.0 - f)
        dzh = dhc * (1.0 - hc * hc)
        grad[off + 3] += dzh * a
        grad[off + 4] += dzh * f * h
        grad[off + 5] += dzh
        da += p[off + 3] * dzh
        df += dzh * p[off + 4] * h
        dh += dzh * p[off + 4] * f
        dzf = df * f * (1.0 - f)
        grad[off] += dzf * a
        grad[off + 1] += dzf * h
        grad[off + 2] += dzf
        da += p[off] * dzf
        dh += p[off + 1] * dzf
    else:
        cc = buf[t, j, 0]
        g = buf[t, j, 1]
        dg = dy * (h - cc)
        dcc = dy * (1.0 - g)
        dh = dy * g
        dzc = dcc * (1.0 - cc * cc)
        grad[off] += dzc * a
        grad[off + 1] += dzc * h
        grad[off + 2] += dzc
        da += p[off] * dzc
        dh += p[off + 1] * dzc
        dzg = dg * g * (1.0 - g)
        grad[off + 3] += dzg * a
        grad[off + 4] += dzg * h
        grad[off + 5] += dzg
        da += p[off + 3] * dzg
        dh += p[off + 4] * dzg
    return da, dh, dc


def cell_step(cell_type, state, a: float, params) -> tuple[float, tuple[float, float]]:
    """Run a single cell update from Python.

    ``state`` is ``(h, c)``; ``c`` is ignored by every type except LSTM.
    Returns ``(output, new_state)``.
    """
    kind = int(CellType.parse(cell_type))
    p = np.asarray(params, dtype=np.float64)
    if p.shape != (num_params(kind),):
        raise ValueError(f"{CellType(kind).label} expects {num_params(kind)} parameters, got {p.shape}")
    h, c = state
    buf = np.zeros((1, 1, BUFFER_WIDTH))
    y, cn = cell_forward(kind, float(a), float(h), float(c), p, 0, buf, 0, 0)
    return y, (y, cn)


def cell_step_grad(cell_type, state, a: float, params, dy: float = 1.0, dc: float = 0.0):
    """Gradients of ``dy*y + dc*c_new`` for one cell update.

    Returns ``(dparams, da, dh, dc_prev)``.
    """
    kind = int(CellType.parse(cell_type))
    p = np.asarray(params, dtype=np.float64)
    h, c = state
    buf = np.zeros((1, 1, BUFFER_WIDTH))
    cell_forward(kind, float(a), float(h), float(c), p, 0, buf, 0, 0)
    grad = np.zeros_like(p)
    da, dh, dcp = cell_backward(kind, float(a), float(h), float(c), p, 0, buf, 0, 0, float(dy), float(dc), grad)
    return grad, da, dh, dcp

"""Pure numpy kernels; same contract as the compiled ``_fast`` module.

Used when the extension is not built or ``SIGRISK_PURE_PYTHON`` is set.
The batch routine vectorises across paths instead of looping per path.
"""
from __future__ import annotations

import numpy as np


def _layout(dim, depth):
    sizes = [dim**k for k in range(depth + 1)]
    offsets = np.concatenate(([0], np.cumsum(sizes)))
    return sizes, offsets


def tensor_mul(a, b, dim, depth, out=None):
    """Truncated tensor product of two flat tensors."""
    sizes, off = _layout(dim, depth)
    if a.shape[0] != off[-1] or b.shape[0] != off[-1]:
        raise ValueError("buffer length does not match shape")
    res = np.zeros(off[-1]) if out is None else out
    if out is not None:
        res[:] = 0.0
    for k in range(depth + 1):
        dst = res[off[k]:off[k + 1]]
        for i in range(k + 1):
            j = k - i
            dst += np.outer(a[off[i]:off[i + 1]], b[off[j]:off[j + 1]]).ravel()
    return res


def _mul_exp_batched(sig, inc, dim, depth, off):
    # sig: (n, D) updated in place, inc: (n, dim)
    s0 = sig[:, :1]
    n = sig.shape[0]
    for k in range(depth, 0, -1):
        acc = (s0 / k) * inc
        for i in range(1, k):
            acc = acc + sig[:, off[i]:off[i + 1]]
            acc = (acc[:, :, None] * inc[:, None, :]).reshape(n, -1) * (1.0 / (k - i))
        sig[:, off[k]:off[k + 1]] += acc


def mul_exp_inplace(sig, inc, dim, depth):
    """In place ``sig <- sig (x) exp(inc)`` for a level-1 increment ``inc``."""
    _, off = _layout(dim, depth)
    if sig.shape[0] != off[-1] or inc.shape[0] != dim:
        raise ValueError("buffer length does not match shape")
    view = sig.reshape(1, -1)
    _mul_exp_batched(view, np.asarray(inc, dtype=float).reshape(1, -1), dim, depth, off)


def batch_signature(increments, depth, snapshots=None):
    """Signatures of ``n`` piecewise-linear paths given their increments.

    See the compiled twin for the contract.
    """
    increments = np.ascontiguousarray(increments, dtype=np.float64)
    n, m, dim = increments.shape
    _, off = _layout(dim, depth)
    out = np.zeros((n, off[-1]))
    out[:, 0] = 1.0
    flows = None
    snap = []
    if snapshots is not None:
        snap = np.asarray(snapshots, dtype=np.int64)
        if len(snap) and (snap.min() < 0 or snap.max() > m or np.any(np.diff(snap) < 0)):
            raise ValueError("snapshots must be ascending step counts in [0, m]")
        flows = np.zeros((n, len(snap), off[-1]))
    g = 0
    for s in range(m + 1):
        while g < len(snap) and snap[g] == s:
            flows[:, g, :] = out
            g += 1
        if s < m:
            _mul_exp_batched(out, increments[:, s, :], dim, depth, off)
    return out, flows


def dot(a, b):
    """Plain inner product, O(len)."""
    if a.shape[0] != b.shape[0]:
        raise ValueError("length mismatch")
    return float(np.dot(a, b))


def advance(sig, last, first, point, dim, depth):
    """One streaming step to ``point``; see the compiled twin."""
    if not np.isfinite(point).all():
        return False
    mul_exp_inplace(sig, point - last, dim, depth)
    sig[1:1 + dim] = point - first
    last[:] = point
    return True

"""Pure numpy versions of the compiled kernels in ``_ckernels.pyx``.

Every function takes C-contiguous float64 arrays and an integer ``kind``:
0 Euclidean, 1 finite p-norm, 2 sup norm, 3 discrete, 4 spherical (intrinsic).
Sums run left to right so both backends agree to rounding.
"""

import numpy as np

NAME = "numpy"

EUCLIDEAN, PNORM, SUP, DISCRETE, SPHERICAL = range(5)


def _scaled(d, p):
    ad = np.abs(d)
    m = ad.max(axis=1)
    safe = np.where(m > 0.0, m, 1.0)
    s = ((ad / safe[:, None]) ** p).sum(axis=1)
    return np.where(m > 0.0, m * s ** (1.0 / p), 0.0)


def _rows(a, b, kind, p):
    d = a - b
    if kind == EUCLIDEAN:
        s = np.einsum("ij,ij->i", d, d)
        out = np.sqrt(s)
        bad = (s < 1e-280) | (s > 1e280)
        if np.any(bad):
            # squares under/overflow or go subnormal
            out[bad] = _scaled(d[bad], 2.0)
        return out
    if kind == SUP:
        return np.abs(d).max(axis=1) if d.shape[1] else np.zeros(len(d))
    if kind == PNORM:
        return _scaled(d, p)
    if kind == DISCRETE:
        return np.any(a != b, axis=1).astype(float)
    s = a + b
    return 2.0 * np.arctan2(np.sqrt(np.einsum("ij,ij->i", d, d)), np.sqrt(np.einsum("ij,ij->i", s, s)))


def chord_lengths(pts, kind, p=2.0):
    if len(pts) < 2:
        return np.zeros(0)
    return _rows(pts[1:], pts[:-1], kind, p)


def chord_sum(pts, kind, p=2.0):
    lengths = chord_lengths(pts, kind, p)
    if lengths.size == 0:
        return 0.0
    return float(np.add.accumulate(lengths)[-1])


def row_distances(a, b, kind, p=2.0):
    return _rows(a, b, kind, p)


def pairwise_max(pts, kind, p=2.0):
    best, bi, bj = 0.0, 0, 0
    m = len(pts)
    for i in range(m - 1):
        rest = pts[i + 1:]
        d = _rows(np.broadcast_to(pts[i], rest.shape), rest, kind, p)
        j = int(np.argmax(d))
        if d[j] > best:
            best, bi, bj = float(d[j]), i, i + 1 + j
    return best, bi, bj


def relax_half(pts, parity, sphere):
    start = 2 if parity == 0 else 1
    idx = np.arange(start, len(pts) - 1, 2)
    if idx.size == 0:
        return
    mid = 0.5 * (pts[idx - 1] + pts[idx + 1])
    if sphere:
        nrm = np.sqrt(np.einsum("ij,ij->i", mid, mid))
        mid = np.where(nrm[:, None] > 0.0, mid / np.where(nrm > 0.0, nrm, 1.0)[:, None], mid)
    pts[idx] = mid


def respace(pts, seglens, sphere):
    m = len(pts)
    out = np.array(pts, copy=True)
    if m < 3:
        return out
    cum = np.concatenate(([0.0], np.add.accumulate(seglens)))
    total = cum[-1]
    i = np.arange(1, m - 1)
    target = total * i / (m - 1)
    j = np.minimum(np.searchsorted(cum[1:], target, side="right"), m - 2)
    th = seglens[j]
    pos = th > 0.0
    f = np.zeros_like(target)
    f[pos] = np.clip((target[pos] - cum[j][pos]) / th[pos], 0.0, 1.0)
    wa, wb = 1.0 - f, f
    if sphere:
        big = th > 1e-8
        sth = np.sin(th[big])
        wa[big] = np.sin((1.0 - f[big]) * th[big]) / sth
        wb[big] = np.sin(f[big] * th[big]) / sth
    new = wa[:, None] * pts[j] + wb[:, None] * pts[j + 1]
    if sphere:
        nrm = np.sqrt(np.einsum("ij,ij->i", new, new))
        new = new / np.where(nrm > 0.0, nrm, 1.0)[:, None]
    out[1:-1] = new
    return out

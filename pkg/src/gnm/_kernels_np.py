"""Pure numpy versions of the compiled kernels in ``_kernels_cy.pyx``."""

from __future__ import annotations

from functools import lru_cache

import numpy as np


def parity(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.uint64)
    for shift in (32, 16, 8, 4, 2, 1):
        v = v ^ (v >> np.uint64(shift))
    return (v & np.uint64(1)).astype(np.int64)


def popcount(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.uint64)
    out = np.zeros(v.shape, dtype=np.int64)
    while np.any(v):
        out += (v & np.uint64(1)).astype(np.int64)
        v = v >> np.uint64(1)
    return out


def _sigma(q: np.ndarray, px: int, pz: int, n: int) -> np.ndarray:
    xmask = np.uint64((1 << n) - 1)
    xq = q & xmask
    zq = q >> np.uint64(n)
    xr = xq ^ np.uint64(px)
    zr = zq ^ np.uint64(pz)
    e = (
        bin(px & pz).count("1")
        + popcount(xq & zq)
        - popcount(xr & zr)
        + 2 * popcount(np.uint64(pz) & xq)
    ) & 3
    return np.where(e == 1, 1.0, -1.0)


@lru_cache(maxsize=512)
def _pairs(n: int, px: int, pz: int):
    idx = np.arange(1 << (2 * n), dtype=np.uint64)
    anti = np.uint64(pz | (px << n))
    pidx = np.uint64(px | (pz << n))
    a = idx[(parity(idx & anti) == 1) & ((idx ^ pidx) > idx)]
    b = a ^ pidx
    return a.astype(np.intp), b.astype(np.intp), _sigma(a, px, pz, n), _sigma(b, px, pz, n)


def rotate(c: np.ndarray, n: int, px: int, pz: int, cs: float, sn: float) -> None:
    a, b, sa, sb = _pairs(n, int(px), int(pz))
    ca = c[a]
    cb = c[b]
    c[a] = cs * ca + sb * sn * cb
    c[b] = cs * cb + sa * sn * ca


def fwht(v: np.ndarray) -> None:
    size = v.shape[0]
    h = 1
    while h < size:
        view = v.reshape(-1, 2, h)
        u = view[:, 0, :].copy()
        w = view[:, 1, :]
        view[:, 0, :] += w
        view[:, 1, :] = u - w
        h *= 2


def pair_table(n: int, px: int, pz: int):
    pidx = px | (pz << n)
    h = pidx.bit_length() - 1
    low = np.uint64((1 << h) - 1)
    i = np.arange(1 << (2 * n - 1), dtype=np.uint64)
    a = ((i & ~low) << np.uint64(1)) | (i & low)
    a = a[parity(a & np.uint64(pz | (px << n))) == 1]
    return a.astype(np.int32), _sigma(a, px, pz, n).astype(np.int8)


def rotate_table(c: np.ndarray, ta: np.ndarray, ts: np.ndarray, pidx: int, cs: float, sn: float) -> None:
    a = ta.astype(np.intp)
    b = a ^ pidx
    ca = c[a]
    cb = c[b]
    s = ts * sn
    c[a] = cs * ca - s * cb
    c[b] = cs * cb + s * ca

"""Batched hit-and-run walk kernel.

Runs W persistent chains side by side; one shared random direction per step
(each chain's marginal law is exact hit-and-run, chains are correlated, which
only inflates estimator variance).  Inner loops run over the chain axis so
they vectorize.  Chord slacks are tracked incrementally via AX = A @ X and
re-synced by the caller between kernel calls.
"""
import numpy as np
from numba import njit

PINCH = 1e-12


@njit(cache=True, fastmath=True, nogil=True)
def walk_batch(A, b, X, AX, dirs, unifs, r_out2, r_in2, walk_len):
    """Advance all chains ``dirs.shape[0]`` steps; X and AX are updated in place.

    A: (m, n); b: (m,); X: (n, W); AX: (m, W); dirs: (S, n) unit directions,
    shared across chains at each step; unifs: (S, W) chord positions.
    r_out2 > 0 adds the constraint ||x||^2 <= r_out2 to the body.  Every
    ``walk_len``-th step delivers a sample; when r_in2 > 0 the number of
    delivered samples with ||x||^2 <= r_in2 is returned.
    """
    m, W = AX.shape
    n = X.shape[0]
    S = dirs.shape[0]
    AD = np.empty(m)
    xd = np.empty(W)
    xx = np.empty(W)
    lo = np.empty(W)
    hi = np.empty(W)
    tt = np.empty(W)
    hits = 0
    for s in range(S):
        d = dirs[s]
        for i in range(m):
            acc = 0.0
            for j in range(n):
                acc += A[i, j] * d[j]
            AD[i] = acc
        for w in range(W):
            xd[w] = 0.0
            xx[w] = 0.0
        for j in range(n):
            dj = d[j]
            for w in range(W):
                xd[w] += X[j, w] * dj
                xx[w] += X[j, w] * X[j, w]
        if r_out2 > 0.0:
            for w in range(W):
                disc = xd[w] * xd[w] - (xx[w] - r_out2)
                if disc < 0.0:
                    disc = 0.0
                sq = np.sqrt(disc)
                lo[w] = -xd[w] - sq
                hi[w] = -xd[w] + sq
        else:
            for w in range(W):
                lo[w] = -1e300
                hi[w] = 1e300
        for i in range(m):
            ad = AD[i]
            bi = b[i]
            if ad > 1e-300:
                inv = 1.0 / ad
                for w in range(W):
                    t = (bi - AX[i, w]) * inv
                    if t < hi[w]:
                        hi[w] = t
            elif ad < -1e-300:
                inv = 1.0 / ad
                for w in range(W):
                    t = (bi - AX[i, w]) * inv
                    if t > lo[w]:
                        lo[w] = t
        for w in range(W):
            # interior points give lo <= 0 <= hi; clamp drift, skip pinches
            if lo[w] > 0.0:
                lo[w] = 0.0
            if hi[w] < 0.0:
                hi[w] = 0.0
            if hi[w] - lo[w] < PINCH:
                tt[w] = 0.0
            else:
                tt[w] = lo[w] + unifs[s, w] * (hi[w] - lo[w])
        for j in range(n):
            dj = d[j]
            for w in range(W):
                X[j, w] += tt[w] * dj
        for i in range(m):
            adi = AD[i]
            for w in range(W):
                AX[i, w] += tt[w] * adi
        if r_in2 > 0.0 and (s + 1) % walk_len == 0:
            for w in range(W):
                acc = 0.0
                for j in range(n):
                    acc += X[j, w] * X[j, w]
                if acc <= r_in2:
                    hits += 1
    return hits

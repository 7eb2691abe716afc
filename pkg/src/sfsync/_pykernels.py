"""Pure-Python implementations of the compiled kernels.

Same signatures and results as ``_ckernels``; used when the extension is not
built or when ``SFSYNC_PURE_PYTHON`` is set.
"""
from collections import deque

import numpy as np


def bfs(indptr, indices, source):
    n = len(indptr) - 1
    ptr = indptr.tolist()
    adj = indices.tolist()
    dist = [-1] * n
    sigma = [0.0] * n
    dist[source] = 0
    sigma[source] = 1.0
    order = []
    queue = deque([source])
    while queue:
        v = queue.popleft()
        order.append(v)
        dv = dist[v] + 1
        for w in adj[ptr[v]:ptr[v + 1]]:
            if dist[w] < 0:
                dist[w] = dv
                queue.append(w)
            if dist[w] == dv:
                sigma[w] += sigma[v]
    return (np.asarray(dist, dtype=np.int64), np.asarray(sigma, dtype=np.float64),
            np.asarray(order, dtype=np.int64))


def brandes_closeness(indptr, indices):
    n = len(indptr) - 1
    ptr = indptr.tolist()
    adj = indices.tolist()
    nbrs = [adj[ptr[v]:ptr[v + 1]] for v in range(n)]
    bet = [0.0] * n
    dsum = [0] * n
    reach = [0] * n
    for s in range(n):
        dist = [-1] * n
        sigma = [0.0] * n
        delta = [0.0] * n
        dist[s] = 0
        sigma[s] = 1.0
        order = [s]
        head = 0
        while head < len(order):
            v = order[head]
            head += 1
            dv = dist[v] + 1
            for w in nbrs[v]:
                if dist[w] < 0:
                    dist[w] = dv
                    order.append(w)
                if dist[w] == dv:
                    sigma[w] += sigma[v]
        dsum[s] = sum(dist[v] for v in order)
        reach[s] = len(order)
        for w in reversed(order[1:]):
            coeff = (1.0 + delta[w]) / sigma[w]
            dw = dist[w] - 1
            for v in nbrs[w]:
                if dist[v] == dw:
                    delta[v] += sigma[v] * coeff
            bet[w] += delta[w]
    return (np.asarray(bet, dtype=np.float64), np.asarray(dsum, dtype=np.int64),
            np.asarray(reach, dtype=np.int64))


def euler_csr(indptr, indices, data, x, h, steps, f_kind, f_param, inner):
    # vectorised over nodes; the per-step loop is what the extension removes
    n = x.shape[0]
    rows = np.repeat(np.arange(n), np.diff(indptr))
    for st in range(steps):
        acc = np.bincount(rows, weights=data * x[indices], minlength=n)
        if f_kind == 1:
            dx = -f_param * x + inner * acc
        elif f_kind == 2:
            dx = f_param * x * (1.0 - x) + inner * acc
        else:
            dx = inner * acc
        x += h * dx
        bad = ~np.isfinite(x)
        if bad.any():
            return st, int(np.argmax(bad))
    return -1, -1

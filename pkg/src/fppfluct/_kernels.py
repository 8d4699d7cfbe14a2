"""Numba inner loops: edge-weight hashing, grid Dijkstra, cluster growth.

Everything here works on plain integer/float arrays; the public modules wrap
these with argument checking and friendlier return types.
"""

import numpy as np
from numba import njit

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_COORD_OFFSET = np.int64(1) << np.int64(40)
_INV53 = 1.0 / 9007199254740992.0  # 2**-53

# neighbour directions: 0 = +x, 1 = -x, 2 = +y, 3 = -y
DIR_NONE = -1


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


@njit(cache=True, inline="always")
def edge_hash(seed, x, y, d):
    h = _mix64(seed + _GAMMA)
    h = _mix64(h ^ (np.uint64(x + _COORD_OFFSET) + _GAMMA))
    h = _mix64(h ^ (np.uint64(y + _COORD_OFFSET) + _GAMMA + _GAMMA))
    h = _mix64(h ^ (np.uint64(d) + _GAMMA * np.uint64(3)))
    return h


@njit(cache=True, inline="always")
def hash_to_exp(h):
    # U = (k + 1/2) 2^-53 lies strictly inside (0, 1), so -log U > 0.
    u = (np.float64(h >> _S11) + 0.5) * _INV53
    return -np.log(u)


@njit(cache=True)
def exp_weights(seed, xs, ys, ds, period):
    """Exp(1) weights for canonical edges; period > 0 folds onto E(n)^o."""
    out = np.empty(xs.shape[0], dtype=np.float64)
    s = np.uint64(seed)
    for k in range(xs.shape[0]):
        x = xs[k]
        y = ys[k]
        if period > 0:
            x = x % period
            y = y % period
        out[k] = hash_to_exp(edge_hash(s, x, y, ds[k]))
    return out


@njit(cache=True, inline="always")
def _less(d1, h1, v1, d2, h2, v2):
    if d1 != d2:
        return d1 < d2
    if h1 != h2:
        return h1 < h2
    return v1 < v2


@njit(cache=True)
def _heap_push(hd, hh, hv, size, d, h, v):
    i = size
    hd[i] = d
    hh[i] = h
    hv[i] = v
    while i > 0:
        p = (i - 1) >> 1
        if _less(hd[i], hh[i], hv[i], hd[p], hh[p], hv[p]):
            hd[i], hd[p] = hd[p], hd[i]
            hh[i], hh[p] = hh[p], hh[i]
            hv[i], hv[p] = hv[p], hv[i]
            i = p
        else:
            break
    return size + 1


@njit(cache=True)
def _heap_pop(hd, hh, hv, size):
    d = hd[0]
    h = hh[0]
    v = hv[0]
    size -= 1
    hd[0] = hd[size]
    hh[0] = hh[size]
    hv[0] = hv[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        c = left
        right = left + 1
        if right < size and _less(hd[right], hh[right], hv[right], hd[left], hh[left], hv[left]):
            c = right
        if _less(hd[c], hh[c], hv[c], hd[i], hh[i], hv[i]):
            hd[i], hd[c] = hd[c], hd[i]
            hh[i], hh[c] = hh[c], hh[i]
            hv[i], hv[c] = hv[c], hv[i]
            i = c
        else:
            break
    return d, h, v, size


@njit(cache=True)
def grid_dijkstra(wh, wv, wrapx, wrapy, sources, target_mask, guard_mask, stop_at_target):
    """Multi-source Dijkstra on a rectangular grid with optional wrap-around.

    Vertex (i, j) has index i * ny + j.  ``wh[i, j]`` weights the edge
    (i, j)-(i+1, j) (wrapping to column 0 when ``wrapx``), ``wv[i, j]`` the
    edge (i, j)-(i, j+1).  Infinite weights remove edges.

    Labels are compared lexicographically on (distance, hop count, vertex
    index), so equal-distance ties resolve to fewer hops and then to the
    smaller predecessor index.

    Returns (dist, hops, pred, pred_dir, hit, guard_first) where ``hit`` is
    the first target settled (or -1) and ``guard_first`` is True when some
    vertex of ``guard_mask`` was settled strictly before ``hit``.
    """
    nx, ny = wh.shape
    nv = nx * ny
    dist = np.full(nv, np.inf)
    hops = np.full(nv, np.iinfo(np.int64).max, dtype=np.int64)
    pred = np.full(nv, -1, dtype=np.int64)
    pred_dir = np.full(nv, DIR_NONE, dtype=np.int8)
    done = np.zeros(nv, dtype=np.bool_)
    cap = 4 * nv + sources.shape[0] + 4
    hd = np.empty(cap, dtype=np.float64)
    hh = np.empty(cap, dtype=np.int64)
    hv = np.empty(cap, dtype=np.int64)
    size = 0
    for s in sources:
        if dist[s] > 0.0 or hops[s] > 0:
            dist[s] = 0.0
            hops[s] = 0
            size = _heap_push(hd, hh, hv, size, 0.0, 0, s)
    hit = -1
    guard_first = False
    while size > 0:
        d, h, u, size = _heap_pop(hd, hh, hv, size)
        if done[u] or d != dist[u] or h != hops[u]:
            continue
        done[u] = True
        if target_mask[u]:
            if hit < 0:
                hit = u
                if stop_at_target:
                    break
        elif hit < 0 and guard_mask[u]:
            guard_first = True
        i = u // ny
        j = u - i * ny
        for k in range(4):
            if k == 0:
                if i + 1 < nx:
                    w = wh[i, j]
                    t = u + ny
                elif wrapx:
                    w = wh[i, j]
                    t = j
                else:
                    continue
            elif k == 1:
                if i > 0:
                    w = wh[i - 1, j]
                    t = u - ny
                elif wrapx:
                    w = wh[nx - 1, j]
                    t = (nx - 1) * ny + j
                else:
                    continue
            elif k == 2:
                if j + 1 < ny:
                    w = wv[i, j]
                    t = u + 1
                elif wrapy:
                    w = wv[i, j]
                    t = i * ny
                else:
                    continue
            else:
                if j > 0:
                    w = wv[i, j - 1]
                    t = u - 1
                elif wrapy:
                    w = wv[i, ny - 1]
                    t = i * ny + ny - 1
                else:
                    continue
            if t == u or done[t] or not np.isfinite(w):
                continue
            nd = d + w
            nh = h + 1
            better = False
            if nd < dist[t]:
                better = True
            elif nd == dist[t]:
                if nh < hops[t] or (nh == hops[t] and u < pred[t]):
                    better = True
            if better:
                dist[t] = nd
                hops[t] = nh
                pred[t] = u
                pred_dir[t] = k
                size = _heap_push(hd, hh, hv, size, nd, nh, t)
    return dist, hops, pred, pred_dir, hit, guard_first


@njit(cache=True)
def _cyl_neighbours(v, n, K, out):
    m = K + 1
    x = v // m
    y = v - x * m
    c = 0
    if x + 1 <= n:
        out[c] = v + m
        c += 1
    if x > 0:
        out[c] = v - m
        c += 1
    if y + 1 <= K:
        out[c] = v + 1
        c += 1
    if y > 0:
        out[c] = v - 1
        c += 1
    return c


@njit(cache=True)
def _cyl_edge_id(a, b, n, K):
    m = K + 1
    if a > b:
        a, b = b, a
    if b - a == m:
        return a  # horizontal edge keyed by its left endpoint
    x = a // m
    y = a - x * m
    return n * m + x * K + y


@njit(cache=True)
def grow_cylinder(n, K, uniforms, full):
    """Richardson-type growth on [0, n] x [0, K] seeded by the left column.

    Returns (b, inside, absorbed, hit) with ``b[i-1] = #B_{i-1}``, the
    cluster endpoint and newly absorbed endpoint of the chosen edge, and the
    1-based step at which the right column is first reached.
    """
    m = K + 1
    nv = (n + 1) * m
    ne = n * m + (n + 1) * K
    total = n * m
    in_c = np.zeros(nv, dtype=np.bool_)
    pos = np.full(ne, -1, dtype=np.int64)
    bd = np.empty(ne, dtype=np.int64)
    size = 0
    nb = np.empty(4, dtype=np.int64)
    for y in range(m):
        in_c[y] = True
    for y in range(m):
        cnt = _cyl_neighbours(y, n, K, nb)
        for q in range(cnt):
            w = nb[q]
            if not in_c[w]:
                e = _cyl_edge_id(y, w, n, K)
                pos[e] = size
                bd[size] = e
                size += 1
    b = np.zeros(total, dtype=np.int64)
    inside = np.zeros(total, dtype=np.int64)
    absorbed = np.zeros(total, dtype=np.int64)
    hit = -1
    steps = 0
    for i in range(total):
        b[i] = size
        k = int(uniforms[i] * size)
        if k >= size:
            k = size - 1
        e = bd[k]
        if e < n * m:
            a = e
            c = e + m
        else:
            r = e - n * m
            x = r // K
            y = r - x * K
            a = x * m + y
            c = a + 1
        if in_c[a]:
            src, new = a, c
        else:
            src, new = c, a
        inside[i] = src
        absorbed[i] = new
        in_c[new] = True
        cnt = _cyl_neighbours(new, n, K, nb)
        for q in range(cnt):
            w = nb[q]
            f = _cyl_edge_id(new, w, n, K)
            if in_c[w]:
                p = pos[f]
                last = bd[size - 1]
                bd[p] = last
                pos[last] = p
                pos[f] = -1
                size -= 1
            else:
                pos[f] = size
                bd[size] = f
                size += 1
        steps = i + 1
        if hit < 0 and new // m == n:
            hit = i + 1
            if not full:
                break
    return b[:steps], inside[:steps], absorbed[:steps], hit

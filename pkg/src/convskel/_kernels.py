"""Compiled inner loops over CSR adjacency (``indptr``, ``indices``).

Everything here works on plain arrays so the callers stay readable and the
kernels can release the GIL for threaded Monte Carlo runs.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def components(n, indptr, indices):
    comp = np.full(n, -1, dtype=np.int64)
    stack = np.empty(n, dtype=np.int64)
    c = 0
    for root in range(n):
        if comp[root] >= 0:
            continue
        comp[root] = c
        top = 0
        stack[top] = root
        top += 1
        while top > 0:
            top -= 1
            v = stack[top]
            for p in range(indptr[v], indptr[v + 1]):
                w = indices[p]
                if comp[w] < 0:
                    comp[w] = c
                    stack[top] = w
                    top += 1
        c += 1
    return comp


@njit(**_JIT)
def all_pairs_summary(n, indptr, indices):
    """Ordered connected pairs, summed distances, summed geodesic counts, distance histogram."""
    dist = np.full(n, -1, dtype=np.int64)
    sigma = np.zeros(n, dtype=np.float64)
    order = np.empty(n, dtype=np.int64)
    hist = np.zeros(n + 1, dtype=np.int64)
    pairs = 0
    dsum = 0.0
    ssum = 0.0
    for s in range(n):
        dist[s] = 0
        sigma[s] = 1.0
        order[0] = s
        cnt = 1
        h = 0
        while h < cnt:
            v = order[h]
            h += 1
            for p in range(indptr[v], indptr[v + 1]):
                w = indices[p]
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    order[cnt] = w
                    cnt += 1
                if dist[w] == dist[v] + 1:
                    sigma[w] += sigma[v]
        for i in range(1, cnt):
            v = order[i]
            pairs += 1
            dsum += dist[v]
            ssum += sigma[v]
            hist[dist[v]] += 1
        for i in range(cnt):
            v = order[i]
            dist[v] = -1
            sigma[v] = 0.0
    return pairs, dsum, ssum, hist


@njit(**_JIT)
def _add_member(y, step, indptr, indices, in_s, join_step, queue, size, wout, state):
    # state[0] = number of boundary edges
    in_s[y] = True
    join_step[y] = step
    queue[size] = y
    state[0] -= wout[y]
    wout[y] = 0
    for p in range(indptr[y], indptr[y + 1]):
        z = indices[p]
        if not in_s[z]:
            wout[z] += 1
            state[0] += 1
    return size + 1


@njit(**_JIT)
def _close(head, size, step, indptr, indices, in_s, join_step, queue, wout, state,
           dist, order, mark):
    """Process queued members until the set is closed under geodesic intervals.

    For a member ``x`` a BFS from ``x`` is followed by a reverse sweep that
    marks every node with a monotone path to some member, i.e. the union of
    the intervals ``I(x, u)`` over members ``u``.
    """
    while head < size:
        x = queue[head]
        head += 1
        dist[x] = 0
        order[0] = x
        cnt = 1
        found = 1
        lmax = 1 << 60
        if found == size:
            lmax = 0
        h = 0
        while h < cnt:
            v = order[h]
            h += 1
            if dist[v] >= lmax:
                continue
            for p in range(indptr[v], indptr[v + 1]):
                w = indices[p]
                if dist[w] < 0:
                    dist[w] = dist[v] + 1
                    order[cnt] = w
                    cnt += 1
                    if in_s[w]:
                        found += 1
                        if found == size:
                            lmax = dist[w]
        for i in range(cnt - 1, -1, -1):
            y = order[i]
            if in_s[y]:
                mark[y] = True
                continue
            dy = dist[y] + 1
            for p in range(indptr[y], indptr[y + 1]):
                z = indices[p]
                if dist[z] == dy and mark[z]:
                    mark[y] = True
                    break
        for i in range(cnt):
            y = order[i]
            if mark[y] and not in_s[y]:
                size = _add_member(y, step, indptr, indices, in_s, join_step, queue,
                                   size, wout, state)
            dist[y] = -1
            mark[y] = False
    return size


@njit(**_JIT)
def hull(n, indptr, indices, seeds):
    """Membership mask of the geodesic closure of ``seeds``."""
    in_s = np.zeros(n, dtype=np.bool_)
    join_step = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    wout = np.zeros(n, dtype=np.int64)
    state = np.zeros(1, dtype=np.int64)
    dist = np.full(n, -1, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    mark = np.zeros(n, dtype=np.bool_)
    size = 0
    for s in seeds:
        if not in_s[s]:
            size = _add_member(s, 0, indptr, indices, in_s, join_step, queue, size, wout, state)
    _close(0, size, 0, indptr, indices, in_s, join_step, queue, wout, state, dist, order, mark)
    return in_s


@njit(**_JIT)
def expansion(n, indptr, indices, start, uniforms, max_steps):
    """One convex expansion run.

    Returns the step at which each node joined the growing convex set
    (-1 if it had not joined by ``max_steps``) and a flag that is false when
    the run got stuck because the graph is disconnected.
    """
    in_s = np.zeros(n, dtype=np.bool_)
    join_step = np.full(n, -1, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    wout = np.zeros(n, dtype=np.int64)
    state = np.zeros(1, dtype=np.int64)
    dist = np.full(n, -1, dtype=np.int64)
    order = np.empty(n, dtype=np.int64)
    mark = np.zeros(n, dtype=np.bool_)
    size = _add_member(start, 0, indptr, indices, in_s, join_step, queue, 0, wout, state)
    head = 1
    step = 0
    while size < n and step < max_steps:
        step += 1
        total = state[0]
        if total <= 0:
            return join_step, False
        target = int(uniforms[step] * total)
        if target >= total:
            target = total - 1
        pick = -1
        acc = 0
        for i in range(n):
            if wout[i] > 0:
                acc += wout[i]
                if acc > target:
                    pick = i
                    break
        size = _add_member(pick, step, indptr, indices, in_s, join_step, queue, size, wout, state)
        size = _close(head, size, step, indptr, indices, in_s, join_step, queue, wout, state,
                      dist, order, mark)
        head = size
    return join_step, True

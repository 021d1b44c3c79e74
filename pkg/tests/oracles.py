"""Independent brute-force references used by the tests.

None of these share code with the package implementations.
"""

import itertools
import math
from collections import deque

import numpy as np


def _bfs_dist(adj, s):
    dist = {s: 0}
    q = deque([s])
    while q:
        v = q.popleft()
        for w in adj[v]:
            if w not in dist:
                dist[w] = dist[v] + 1
                q.append(w)
    return dist


def _all_shortest_paths(adj, s, t, dist_from_s):
    """Enumerate every shortest s->t path explicitly."""
    if t not in dist_from_s:
        return []
    d = dist_from_s[t]
    paths = []

    def walk(path):
        v = path[-1]
        if len(path) - 1 == d:
            if v == t:
                paths.append(list(path))
            return
        for w in adj[v]:
            if w not in path:
                path.append(w)
                walk(path)
                path.pop()

    walk([s])
    return paths


def brute_betweenness(nodes, edges, directed=True, normalized=True):
    adj = {v: set() for v in nodes}
    for u, v in edges:
        if u == v:
            continue
        adj[u].add(v)
        if not directed:
            adj[v].add(u)
    cb = {v: 0.0 for v in nodes}
    pairs = itertools.permutations(nodes, 2) if directed else itertools.combinations(nodes, 2)
    for s, t in pairs:
        paths = _all_shortest_paths(adj, s, t, _bfs_dist(adj, s))
        if not paths:
            continue
        for v in nodes:
            if v in (s, t):
                continue
            through = sum(1 for p in paths if v in p)
            cb[v] += through / len(paths)
    n = len(nodes)
    if normalized:
        scale = (n - 1) * (n - 2) / (1 if directed else 2)
        cb = {v: x / scale for v, x in cb.items()}
    return cb


def gram_singular_values(a):
    """Singular values from the eigenvalues of A^T A, descending."""
    a = np.asarray(a, dtype=float)
    ev = np.linalg.eigvalsh(a.T @ a)[::-1]
    return np.sqrt(np.clip(ev, 0.0, None))


def kde_by_loops(points, axes, h):
    """Product Gaussian KDE evaluated node by node with plain loops."""
    points = [tuple(p) for p in points]
    d = len(axes)
    shape = tuple(len(a) for a in axes)
    out = np.zeros(shape)
    for idx in itertools.product(*(range(s) for s in shape)):
        x = [axes[i][idx[i]] for i in range(d)]
        total = 0.0
        for p in points:
            k = 1.0
            for i in range(d):
                z = (x[i] - p[i]) / h[i]
                k *= math.exp(-0.5 * z * z) / (h[i] * math.sqrt(2 * math.pi))
            total += k
        out[idx] = total / len(points)
    return out


def entropy_bits(counts):
    total = sum(counts)
    return -sum(c / total * math.log2(c / total) for c in counts if c)

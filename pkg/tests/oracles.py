"""Dense reference implementations written straight from the filter formulas.

Nothing here calls the package's forward or backward code; these are the
independent side of every dual-route check.
"""

import numpy as np


def path_adjacency(n):
    a = np.zeros((n, n))
    i = np.arange(n - 1)
    a[i, i + 1] = a[i + 1, i] = 1.0
    return a


def complete_adjacency(n):
    return np.ones((n, n)) - np.eye(n)


def star_adjacency(n):
    a = np.zeros((n, n))
    a[0, 1:] = a[1:, 0] = 1.0
    return a


def random_symmetric_adjacency(rng, n, p=0.4, weighted=True):
    upper = np.triu(rng.random((n, n)) < p, 1)
    w = rng.uniform(0.5, 1.5, (n, n)) if weighted else np.ones((n, n))
    a = np.where(upper, w, 0.0)
    return a + a.T


def poly_matrix(s, taps):
    out = np.zeros_like(s)
    power = np.eye(len(s))
    for phi in taps:
        out += phi * power
        power = power @ s
    return out


def ev_matrix(mats):
    """``sum_k Phi^(k) ... Phi^(1)``."""
    n = mats[0].shape[0]
    out, prod = np.zeros((n, n)), np.eye(n)
    for m in mats:
        prod = m @ prod
        out += prod
    return out


def spectral_matrix(u, response):
    return u @ np.diag(response) @ u.T


def nv_matrix(s, taps, assignment):
    """``sum_k diag(C_B phi^(k)) S^k`` with taps ``(K+1, |B|)``."""
    out = np.zeros_like(s)
    power = np.eye(len(s))
    for row in taps:
        out += np.diag(row[assignment]) @ power
        power = power @ s
    return out


def hev_matrix(s, diag0, mats, taps):
    """``sum_{k=0}^K (Phi_B^(k) ... Phi_B^(0) + phi_k S^k)`` with ``diag0`` an N-vector."""
    prod = np.diag(diag0)
    out = prod + taps[0] * np.eye(len(s))
    power = np.eye(len(s))
    for k, m in enumerate(mats, start=1):
        prod = m @ prod
        power = power @ s
        out += prod + taps[k] * power
    return out


def bfs_hops(a, source):
    n = len(a)
    dist = np.full(n, -1)
    dist[source] = 0
    frontier = [source]
    while frontier:
        nxt = []
        for u in frontier:
            for v in range(n):
                if (a[u, v] != 0 or a[v, u] != 0) and dist[v] < 0:
                    dist[v] = dist[u] + 1
                    nxt.append(v)
        frontier = nxt
    return dist


def random_support_matrix(rng, allowed):
    return np.where(allowed, rng.standard_normal(allowed.shape), 0.0)

"""Power-diagram grid assignment kernel.

Grid cell centers are assigned to the site minimizing |x - p_i|^2 - h_i
(ties to the smallest site index). Along one grid row this is the lower
envelope of n lines in x, so each row costs O(n + G) after a one-off sort
of the sites by x: lines enter in decreasing slope order and a stack keeps
the envelope. Segment boundaries estimated from line crossings are refined
with the canonical distance comparison so the result matches a brute-force
argmin exactly.

Per-segment count and coordinate sums use closed forms over the sample
index range, which keeps the accumulation order-independent.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def _beats(px, py, h, c, s, x, y):
    """True when site c strictly wins the canonical comparison against s at
    grid point (x, y), with ties going to the smaller index."""
    dc = (x - px[c]) ** 2 + (y - py[c]) ** 2 - h[c]
    ds = (x - px[s]) ** 2 + (y - py[s]) ** 2 - h[s]
    if dc < ds:
        return True
    if dc == ds and c < s:
        return True
    return False


@numba.njit(cache=True)
def assign_grid(px, py, h, order, ox, oy, side, G, want_centroids):
    """Counts and coordinate sums of the grid centers owned by each site.

    ``order`` must hold the site indices sorted by (px, index) ascending.
    Returns (counts, sum_x, sum_y); the sums are zero arrays when
    ``want_centroids`` is False.
    """
    n = len(px)
    counts = np.zeros(n, dtype=np.int64)
    sum_x = np.zeros(n, dtype=np.float64)
    sum_y = np.zeros(n, dtype=np.float64)
    dx = side / G
    cand = np.empty(n, dtype=np.int64)
    stack_site = np.empty(n, dtype=np.int64)
    stack_from = np.empty(n, dtype=np.float64)

    for r in range(G):
        y = oy + (r + 0.5) * dx
        # one candidate line per distinct x: parallel lines never alternate
        m = 0
        i = 0
        while i < n:
            s = order[i]
            best = s
            bb = px[s] * px[s] + (y - py[s]) ** 2 - h[s]
            j = i + 1
            while j < n and px[order[j]] == px[s]:
                t = order[j]
                bt = px[t] * px[t] + (y - py[t]) ** 2 - h[t]
                if bt < bb:
                    best = t
                    bb = bt
                j += 1
            cand[m] = best
            m += 1
            i = j
        # lower envelope; slopes -2*px strictly decreasing in push order
        top = 0
        for q in range(m):
            c = cand[q]
            ac = -2.0 * px[c]
            bc = px[c] * px[c] + (y - py[c]) ** 2 - h[c]
            while top > 0:
                s = stack_site[top - 1]
                a_s = -2.0 * px[s]
                b_s = px[s] * px[s] + (y - py[s]) ** 2 - h[s]
                xc = (bc - b_s) / (a_s - ac)
                if top > 1 and xc <= stack_from[top - 1]:
                    top -= 1
                    continue
                stack_site[top] = c
                stack_from[top] = xc
                top += 1
                break
            if top == 0:
                stack_site[0] = c
                stack_from[0] = -np.inf
                top = 1
        # sweep envelope segments over the row samples
        prev_k = 0
        for e in range(1, top + 1):
            if e == top:
                k = G
            else:
                cur = stack_site[e]
                before = stack_site[e - 1]
                xc = stack_from[e]
                xf = (xc - ox) / dx - 0.5
                if xf <= prev_k:
                    k = prev_k
                elif xf >= G:
                    k = G
                else:
                    k = int(np.ceil(xf))
                while k > prev_k and _beats(px, py, h, cur, before,
                                            ox + (k - 0.5) * dx, y):
                    k -= 1
                while k < G and not _beats(px, py, h, cur, before,
                                           ox + (k + 0.5) * dx, y):
                    k += 1
            site = stack_site[e - 1]
            cnt = k - prev_k
            if cnt > 0:
                counts[site] += cnt
                if want_centroids:
                    sum_x[site] += cnt * ox + dx * 0.5 * float(k * k - prev_k * prev_k)
                    sum_y[site] += cnt * y
            prev_k = k
            if prev_k >= G:
                break
    return counts, sum_x, sum_y


@numba.njit(cache=True)
def assign_owners(px, py, h, order, ox, oy, side, G):
    """Full G x G owner map (same assignment rule as :func:`assign_grid`)."""
    n = len(px)
    owners = np.empty((G, G), dtype=np.int32)
    dx = side / G
    cand = np.empty(n, dtype=np.int64)
    stack_site = np.empty(n, dtype=np.int64)
    stack_from = np.empty(n, dtype=np.float64)
    for r in range(G):
        y = oy + (r + 0.5) * dx
        m = 0
        i = 0
        while i < n:
            s = order[i]
            best = s
            bb = px[s] * px[s] + (y - py[s]) ** 2 - h[s]
            j = i + 1
            while j < n and px[order[j]] == px[s]:
                t = order[j]
                bt = px[t] * px[t] + (y - py[t]) ** 2 - h[t]
                if bt < bb:
                    best = t
                    bb = bt
                j += 1
            cand[m] = best
            m += 1
            i = j
        top = 0
        for q in range(m):
            c = cand[q]
            ac = -2.0 * px[c]
            bc = px[c] * px[c] + (y - py[c]) ** 2 - h[c]
            while top > 0:
                s = stack_site[top - 1]
                a_s = -2.0 * px[s]
                b_s = px[s] * px[s] + (y - py[s]) ** 2 - h[s]
                xc = (bc - b_s) / (a_s - ac)
                if top > 1 and xc <= stack_from[top - 1]:
                    top -= 1
                    continue
                stack_site[top] = c
                stack_from[top] = xc
                top += 1
                break
            if top == 0:
                stack_site[0] = c
                stack_from[0] = -np.inf
                top = 1
        prev_k = 0
        for e in range(1, top + 1):
            if e == top:
                k = G
            else:
                cur = stack_site[e]
                before = stack_site[e - 1]
                xc = stack_from[e]
                xf = (xc - ox) / dx - 0.5
                if xf <= prev_k:
                    k = prev_k
                elif xf >= G:
                    k = G
                else:
                    k = int(np.ceil(xf))
                while k > prev_k and _beats(px, py, h, cur, before,
                                            ox + (k - 0.5) * dx, y):
                    k -= 1
                while k < G and not _beats(px, py, h, cur, before,
                                           ox + (k + 0.5) * dx, y):
                    k += 1
            site = stack_site[e - 1]
            for col in range(prev_k, k):
                owners[r, col] = site
            prev_k = k
            if prev_k >= G:
                break
    return owners


def site_order(px):
    """Stable (px, index) ascending order used by :func:`assign_grid`."""
    return np.argsort(px, kind="stable").astype(np.int64)

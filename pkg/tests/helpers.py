"""Independent oracle implementations used by the tests.

Everything here is written with plain loops or a different algorithm
than the package so the two sides cannot share a bug.
"""

import heapq
import itertools
import math

import numpy as np


def grad_central(z):
    """Central-difference gradient (one-sided at borders), plain loops."""
    h, w = z.shape
    gx = np.zeros((h, w))
    gy = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            if w > 1:
                if x == 0:
                    gx[y, x] = z[y, 1] - z[y, 0]
                elif x == w - 1:
                    gx[y, x] = z[y, w - 1] - z[y, w - 2]
                else:
                    gx[y, x] = (z[y, x + 1] - z[y, x - 1]) / 2.0
            if h > 1:
                if y == 0:
                    gy[y, x] = z[1, x] - z[0, x]
                elif y == h - 1:
                    gy[y, x] = z[h - 1, x] - z[h - 2, x]
                else:
                    gy[y, x] = (z[y + 1, x] - z[y - 1, x]) / 2.0
    return gx, gy


def edge_map_loops(z, iota):
    gx, gy = grad_central(np.asarray(z, dtype=float))
    return 1.0 / (1.0 + iota * (gx * gx + gy * gy))


def tv_loops(u, g):
    """Edge-weighted total variation, forward differences, zero at far borders."""
    h, w = u.shape
    total = 0.0
    for y in range(h):
        for x in range(w):
            dx = u[y, x + 1] - u[y, x] if x + 1 < w else 0.0
            dy = u[y + 1, x] - u[y, x] if y + 1 < h else 0.0
            total += g[y, x] * math.hypot(dx, dy)
    return total


def region_means_loops(z, u):
    num1 = den1 = num2 = den2 = 0.0
    h, w = z.shape
    for y in range(h):
        for x in range(w):
            num1 += z[y, x] * u[y, x]
            den1 += u[y, x]
            num2 += z[y, x] * (1.0 - u[y, x])
            den2 += 1.0 - u[y, x]
    mean = z.sum() / z.size
    c1 = num1 / den1 if den1 > 0 else mean
    c2 = num2 / den2 if den2 > 0 else mean
    return c1, c2


def energy_loops(u, z, lam, iota, extra=None):
    """Full discrete energy, loop-based, with per-state region means."""
    g = edge_map_loops(z, iota)
    c1, c2 = region_means_loops(z, u)
    total = tv_loops(u, g)
    h, w = z.shape
    for y in range(h):
        for x in range(w):
            total += lam * (((z[y, x] - c1) ** 2) - ((z[y, x] - c2) ** 2)) * u[y, x]
            if extra is not None:
                total += extra[y, x] * u[y, x]
    return total


def exhaustive_best_mask(z, lam):
    """Reference minimizer over every binary mask, ties by area then lex.

    The energy uses g identically 1 and per-mask closed-form means; the
    mask is enumerated as a row-major bit tuple so lexicographic order
    is just tuple order.
    """
    z = np.asarray(z, dtype=float)
    h, w = z.shape
    n = h * w
    ones = np.ones((h, w))
    best = None
    for bits in itertools.product((0, 1), repeat=n):
        u = np.array(bits, dtype=float).reshape(h, w)
        c1, c2 = region_means_loops(z, u)
        e = tv_loops(u, ones)
        for y in range(h):
            for x in range(w):
                e += lam * (((z[y, x] - c1) ** 2) - ((z[y, x] - c2) ** 2)) * u[y, x]
        key = (e, sum(bits), bits)
        if best is None or key < best:
            best = key
    return np.array(best[2], dtype=np.uint8).reshape(h, w)


def two_valued_field(rng, n):
    """Random two-level field with a strict majority at the high level."""
    npix = n * n
    k_hi = int(rng.integers(npix // 2 + 1, npix))
    lo = float(rng.uniform(0.0, 0.05))
    hi = lo + float(rng.uniform(0.9, 1.0 - lo))
    mask = np.zeros(npix)
    mask[rng.choice(npix, size=k_hi, replace=False)] = 1.0
    return np.where(mask.reshape(n, n) == 1.0, hi, lo)


_MOVES_16 = [(dy, dx) for dy in range(-2, 3) for dx in range(-2, 3)
             if (dy or dx) and math.gcd(abs(dy), abs(dx)) == 1]


def dijkstra_16(slowness, sources_xy):
    """Shortest-path distance on the grid graph with a 16-move neighborhood.

    Edge cost is the Euclidean step length times the mean slowness of the
    two endpoints (trapezoid rule along the edge).
    """
    h, w = slowness.shape
    dist = np.full((h, w), np.inf)
    heap = []
    for x, y in sources_xy:
        dist[y, x] = 0.0
        heapq.heappush(heap, (0.0, y, x))
    lengths = {m: math.hypot(*m) for m in _MOVES_16}
    while heap:
        t, y, x = heapq.heappop(heap)
        if t > dist[y, x]:
            continue
        for dy, dx in _MOVES_16:
            ny, nx = y + dy, x + dx
            if 0 <= ny < h and 0 <= nx < w:
                cand = t + lengths[(dy, dx)] * 0.5 * (slowness[y, x] + slowness[ny, nx])
                if cand < dist[ny, nx]:
                    dist[ny, nx] = cand
                    heapq.heappush(heap, (cand, ny, nx))
    return dist


def slowness_of(f, speed_eps, speed_beta):
    gx, gy = grad_central(np.asarray(f, dtype=float))
    return speed_eps + speed_beta * (gx * gx + gy * gy)


def auc_pairwise(scores, gt):
    """Brute-force AUC: fraction of (positive, negative) pairs in order."""
    s = np.asarray(scores, dtype=float).ravel()
    g = np.asarray(gt).ravel()
    pos = s[g == 1]
    neg = s[g == 0]
    wins = 0.0
    for sp in pos:
        for sn in neg:
            if sp > sn:
                wins += 1.0
            elif sp == sn:
                wins += 0.5
    return wins / (len(pos) * len(neg))


def two_blob_image(size=64, radius=6):
    """Two identical bright disks on a dark background plus per-blob masks."""
    yy, xx = np.mgrid[0:size, 0:size]
    ca = (size // 4, size // 2)
    cb = (3 * size // 4, size // 2)
    blob_a = ((xx - ca[0]) ** 2 + (yy - ca[1]) ** 2 <= radius * radius)
    blob_b = ((xx - cb[0]) ** 2 + (yy - cb[1]) ** 2 <= radius * radius)
    img = np.where(blob_a | blob_b, 0.8, 0.25)
    return img, blob_a.astype(np.uint8), blob_b.astype(np.uint8), ca

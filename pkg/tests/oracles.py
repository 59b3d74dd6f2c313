"""Independent reference implementations used to check the library."""

import math
from math import gcd


def hull_boundary_rays(start, end):
    """Lattice points on the compact boundary of conv(nonzero lattice points in the cone).

    Brute force: every lattice point of the triangle (0, start, end) except
    the origin, plus far copies of the generators to close the hull, then
    Andrew's monotone chain and a walk along each edge.
    """
    xs = [0, start[0], end[0]]
    ys = [0, start[1], end[1]]
    pts = set()
    d = start[0] * end[1] - start[1] * end[0]
    for x in range(min(xs), max(xs) + 1):
        for y in range(min(ys), max(ys) + 1):
            if (x, y) == (0, 0):
                continue
            a = x * end[1] - y * end[0]  # d * coefficient of start
            b = start[0] * y - start[1] * x  # d * coefficient of end
            if a >= 0 and b >= 0 and a + b <= d:
                pts.add((x, y))
    K = 4
    pts.add((K * start[0], K * start[1]))
    pts.add((K * end[0], K * end[1]))
    hull = _convex_hull(sorted(pts))
    # walk the hull from start to end on the side facing the origin
    n = len(hull)
    i = hull.index(tuple(start))
    j = hull.index(tuple(end))
    # the chain facing the origin is the one not through the far points
    far = {(K * start[0], K * start[1]), (K * end[0], K * end[1])}
    chain_a = [hull[(i + k) % n] for k in range((j - i) % n + 1)]
    chain_b = [hull[(i - k) % n] for k in range((i - j) % n + 1)]
    chain = chain_a if not far & set(chain_a) else chain_b
    out = []
    for p, q in zip(chain, chain[1:]):
        g = gcd(q[0] - p[0], q[1] - p[1])
        sx, sy = (q[0] - p[0]) // g, (q[1] - p[1]) // g
        for k in range(1, g + 1):
            out.append((p[0] + k * sx, p[1] + k * sy))
    return out[:-1]


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _convex_hull(points):
    lower, upper = [], []
    for p in points:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    for p in reversed(points):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def angle(v):
    a = math.atan2(v[1], v[0])
    return a if a >= 0 else a + 2 * math.pi


def float_ccw_between(a, x, b):
    ta, tx, tb = angle(a), angle(x), angle(b)
    arc = (tb - ta) % (2 * math.pi)
    off = (tx - ta) % (2 * math.pi)
    return 0 < off < arc


def usnich_formula(i, j):
    return (j, min(-i, j - i))


def brute_orbit(M, v, n):
    out = [v]
    for _ in range(n - 1):
        x, y = out[-1]
        w = (M[0][0] * x + M[0][1] * y, M[1][0] * x + M[1][1] * y)
        g = gcd(abs(w[0]), abs(w[1]))
        out.append((w[0] // g, w[1] // g))
    return out

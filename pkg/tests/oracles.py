"""Independent reference implementations used to check the library."""

import math


def tri(x, left, peak, right):
    if x <= left or x >= right:
        return 1.0 if x == peak else 0.0
    if x <= peak:
        return (x - left) / (peak - left)
    return (right - x) / (right - peak)


def sifie_ref(x, peaks=(-1.0, 0.0, 1.0)):
    """Hand-coded weighted mean with NB -> 1, Z -> 0, PB -> -1 on shouldered triangles."""
    p0, p1, p2 = peaks
    x = min(max(x, p0), p2)
    nb = 1.0 if x <= p0 else tri(x, -math.inf, p0, p1)
    z = tri(x, p0, p1, p2)
    pb = 1.0 if x >= p2 else tri(x, p1, p2, math.inf)
    return (nb * 1.0 + z * 0.0 + pb * -1.0) / (nb + z + pb)


def pfie_ref(theta_abs, theta_ref):
    """DS -> 1, DM -> 0.5, DL -> 1 with peaks at 0, theta_ref/2, theta_ref."""
    p0, p1, p2 = 0.0, theta_ref / 2, theta_ref
    x = min(max(theta_abs, p0), p2)
    ds = 1.0 if x <= p0 else tri(x, -math.inf, p0, p1)
    dm = tri(x, p0, p1, p2)
    dl = 1.0 if x >= p2 else tri(x, p1, p2, math.inf)
    return (ds * 1.0 + dm * 0.5 + dl * 1.0) / (ds + dm + dl)


def dominates_ref(a, b):
    return all(x <= y for x, y in zip(a, b)) and any(x < y for x, y in zip(a, b))


def ranks_ref(objs):
    """Peel fronts by exhaustive pairwise dominance checks."""
    remaining = set(range(len(objs)))
    ranks = [None] * len(objs)
    r = 0
    while remaining:
        front = [i for i in remaining if not any(dominates_ref(objs[j], objs[i]) for j in remaining if j != i)]
        for i in front:
            ranks[i] = r
        remaining -= set(front)
        r += 1
    return ranks


def union_area(points, ref):
    """Area of the union of boxes [x, ref_x] x [y, ref_y], by coordinate compression."""
    pts = [p for p in points if p[0] < ref[0] and p[1] < ref[1]]
    xs = sorted({p[0] for p in pts} | {ref[0]})
    ys = sorted({p[1] for p in pts} | {ref[1]})
    area = 0.0
    for x0, x1 in zip(xs, xs[1:]):
        for y0, y1 in zip(ys, ys[1:]):
            if any(p[0] <= x0 and p[1] <= y0 for p in pts):
                area += (x1 - x0) * (y1 - y0)
    return area


def ranks_pairwise(objs):
    """Fronts from an explicit n x n dominance table, peeled by domination counts."""
    n = len(objs)
    beats = [[dominates_ref(objs[i], objs[j]) for j in range(n)] for i in range(n)]
    count = [sum(beats[j][i] for j in range(n)) for i in range(n)]
    ranks = [None] * n
    current = [i for i in range(n) if count[i] == 0]
    r = 0
    while current:
        nxt = []
        for i in current:
            ranks[i] = r
            for j in range(n):
                if beats[i][j]:
                    count[j] -= 1
                    if count[j] == 0:
                        nxt.append(j)
        current, r = nxt, r + 1
    return ranks

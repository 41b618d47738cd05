"""Hot grid loops.

Every kernel here is written as plain loops over numpy arrays so the same
source runs under numba or as interpreted Python (``GVDTG_NUMBA=0``). Where
the interpreted version would be hopeless, a vectorized numpy variant is kept
next to it and picked automatically when numba is off.

Cell states follow :mod:`gvdtg.grid`: 0 unknown, 1 free, 2 occupied.
Arrays are indexed ``[y, x]``.
"""
from __future__ import annotations

import heapq
import math

import numpy as np

from ._accel import USE_NUMBA, njit

UNKNOWN = 0
FREE = 1
OCCUPIED = 2

SQRT2 = math.sqrt(2.0)


# ---------------------------------------------------------------- line of sight
@njit
def los_free(cells, x0, y0, x1, y1):
    """True iff every supercover cell of the centre-to-centre segment is free."""
    if cells[y0, x0] != FREE:
        return False
    dx = abs(x1 - x0)
    dy = abs(y1 - y0)
    sx = 1 if x1 > x0 else -1
    sy = 1 if y1 > y0 else -1
    x = x0
    y = y0
    ix = 0
    iy = 0
    while ix < dx or iy < dy:
        d = (1 + 2 * ix) * dy - (1 + 2 * iy) * dx
        if d == 0:
            # segment passes exactly through a lattice corner: both side cells are touched
            if cells[y, x + sx] != FREE or cells[y + sy, x] != FREE:
                return False
            x += sx
            y += sy
            ix += 1
            iy += 1
        elif d < 0:
            x += sx
            ix += 1
        else:
            y += sy
            iy += 1
        if cells[y, x] != FREE:
            return False
    return True


@njit
def los_many(cells, x0, y0, xs, ys):
    out = np.empty(xs.shape[0], dtype=np.bool_)
    for i in range(xs.shape[0]):
        out[i] = los_free(cells, x0, y0, xs[i], ys[i])
    return out


@njit
def kd_radius(points, perm, start, end, axis, split, left, right, qx, qy, r):
    """Closed-disk radius query over flattened median-split tree arrays."""
    out = np.empty(perm.shape[0], dtype=np.int64)
    n = 0
    if start.shape[0] == 0:
        return out[:0]
    r2 = r * r
    stack = np.empty(2 * start.shape[0] + 2, dtype=np.int64)
    top = 1
    stack[0] = 0
    while top > 0:
        top -= 1
        node = stack[top]
        ax = axis[node]
        if ax < 0:
            for k in range(start[node], end[node]):
                j = perm[k]
                dx = points[j, 0] - qx
                dy = points[j, 1] - qy
                if dx * dx + dy * dy <= r2:
                    out[n] = j
                    n += 1
            continue
        q = qx if ax == 0 else qy
        s = split[node]
        if q - r <= s:
            stack[top] = left[node]
            top += 1
        if q + r >= s:
            stack[top] = right[node]
            top += 1
    return np.sort(out[:n])


@njit
def shift_all(cells, points, perm, start, end, axis, split, left, right, r, eps_conv, max_iters):
    """Visibility-constrained mean-shift climb from every point; returns the modes."""
    h, w = cells.shape
    n = points.shape[0]
    modes = np.empty((n, 2), dtype=np.float64)
    for s in range(n):
        cx = points[s, 0]
        cy = points[s, 1]
        for _ in range(max_iters):
            ix = int(np.floor(cx + 0.5))
            iy = int(np.floor(cy + 0.5))
            nbr = kd_radius(points, perm, start, end, axis, split, left, right, cx, cy, r)
            sx = 0.0
            sy = 0.0
            cnt = 0
            for j in nbr:
                px = int(np.floor(points[j, 0] + 0.5))
                py = int(np.floor(points[j, 1] + 0.5))
                if los_free(cells, ix, iy, px, py):
                    sx += points[j, 0]
                    sy += points[j, 1]
                    cnt += 1
            if cnt == 0:
                break
            nx = sx / cnt
            ny = sy / cnt
            jx = int(np.floor(nx + 0.5))
            jy = int(np.floor(ny + 0.5))
            if jx < 0 or jy < 0 or jx >= w or jy >= h or cells[jy, jx] != FREE:
                break
            if not los_free(cells, ix, iy, jx, jy):
                break
            shift = np.sqrt((nx - cx) ** 2 + (ny - cy) ** 2)
            cx = nx
            cy = ny
            if shift < eps_conv:
                break
        modes[s, 0] = cx
        modes[s, 1] = cy
    return modes


@njit
def visible_pairs(cells, xs, ys, radius):
    """Index pairs ``i < j`` within ``radius`` (closed) whose segment is free."""
    n = xs.shape[0]
    r2 = radius * radius
    ia = []
    ib = []
    for i in range(n):
        for j in range(i + 1, n):
            dx = float(xs[j] - xs[i])
            dy = float(ys[j] - ys[i])
            if dx * dx + dy * dy <= r2 and los_free(cells, xs[i], ys[i], xs[j], ys[j]):
                ia.append(i)
                ib.append(j)
    out = np.empty((len(ia), 2), dtype=np.int64)
    for k in range(len(ia)):
        out[k, 0] = ia[k]
        out[k, 1] = ib[k]
    return out


def supercover(x0: int, y0: int, x1: int, y1: int) -> list[tuple[int, int]]:
    """All cells touched by the segment between two cell centres, in walk order."""
    out = [(x0, y0)]
    dx, dy = abs(x1 - x0), abs(y1 - y0)
    sx = 1 if x1 > x0 else -1
    sy = 1 if y1 > y0 else -1
    x, y, ix, iy = x0, y0, 0, 0
    while ix < dx or iy < dy:
        d = (1 + 2 * ix) * dy - (1 + 2 * iy) * dx
        if d == 0:
            out.append((x + sx, y))
            out.append((x, y + sy))
            x += sx
            y += sy
            ix += 1
            iy += 1
        elif d < 0:
            x += sx
            ix += 1
        else:
            y += sy
            iy += 1
        out.append((x, y))
    return out


# ---------------------------------------------------------------- obstacle search
@njit
def _blocking(cells, x, y, unknown_blocks):
    v = cells[y, x]
    if v == OCCUPIED:
        return True
    return unknown_blocks and v == UNKNOWN


@njit
def ring_search(cells, px, py, r_min, dr, delta, unknown_blocks):
    """Expanding square-window search for the obstacles nearest to ``(px, py)``.

    Returns ``(d_min, xs, ys, r_found)``; ``xs``/``ys`` hold every blocking
    cell whose Euclidean distance is below ``d_min + delta``. With no obstacle
    anywhere, ``d_min`` is ``max(h, w)`` and the arrays are empty.
    """
    h, w = cells.shape
    cap = max(h, w)
    r = r_min
    found = False
    # grow the Chebyshev window until it holds a blocking cell; after the
    # first window only the newly added ring needs scanning
    prev = -1
    while True:
        x_lo = max(px - r, 0)
        x_hi = min(px + r, w - 1)
        y_lo = max(py - r, 0)
        y_hi = min(py + r, h - 1)
        for y in range(y_lo, y_hi + 1):
            inner_row = prev >= 0 and abs(y - py) <= prev
            for x in range(x_lo, x_hi + 1):
                if inner_row and abs(x - px) <= prev:
                    continue
                if _blocking(cells, x, y, unknown_blocks):
                    found = True
                    break
            if found:
                break
        if found or r >= cap:
            break
        prev = r
        r += dr
    empty = np.empty(0, dtype=np.int64)
    if not found:
        return float(cap), empty, empty, r
    # the window may hold an obstacle at Chebyshev r, hence Euclidean <= r*sqrt2;
    # anything nearer than that lies in the enlarged window below
    reach = int(math.ceil(r * SQRT2))
    best2 = 1 << 60
    for y in range(max(py - reach, 0), min(py + reach, h - 1) + 1):
        for x in range(max(px - reach, 0), min(px + reach, w - 1) + 1):
            if _blocking(cells, x, y, unknown_blocks):
                d2 = (x - px) * (x - px) + (y - py) * (y - py)
                if d2 < best2:
                    best2 = d2
    d_min = math.sqrt(best2)
    band = d_min + delta
    reach = int(math.ceil(band))
    manhattan_cap = band * SQRT2
    n = 0
    xs = np.empty((2 * reach + 1) * (2 * reach + 1), dtype=np.int64)
    ys = np.empty_like(xs)
    for y in range(max(py - reach, 0), min(py + reach, h - 1) + 1):
        for x in range(max(px - reach, 0), min(px + reach, w - 1) + 1):
            if abs(x - px) + abs(y - py) >= manhattan_cap:
                continue
            if not _blocking(cells, x, y, unknown_blocks):
                continue
            if math.sqrt((x - px) * (x - px) + (y - py) * (y - py)) < band:
                xs[n] = x
                ys[n] = y
                n += 1
    return d_min, xs[:n], ys[:n], r


@njit
def nearest_blocking(cells, px, py, unknown_blocks):
    """Exact Euclidean distance from ``(px, py)`` to the nearest blocking cell."""
    d, xs, ys, r = ring_search(cells, px, py, 1, 1, 0.0, unknown_blocks)
    return d


@njit
def count_within(cells, px, py, radius, unknown_blocks):
    h, w = cells.shape
    reach = int(math.ceil(radius))
    n = 0
    for y in range(max(py - reach, 0), min(py + reach, h - 1) + 1):
        for x in range(max(px - reach, 0), min(px + reach, w - 1) + 1):
            if _blocking(cells, x, y, unknown_blocks):
                if math.sqrt((x - px) * (x - px) + (y - py) * (y - py)) <= radius:
                    n += 1
    return n


@njit
def bisect(cells, xs, ys, r_min, d_o_thr, delta, unknown_blocks, snap_radius):
    """Midpoint-of-farthest-pair node construction.

    Returns ``(ok, gx, gy, r_g)``. ``ok`` is False when the pair is too close,
    no free cell is found near the midpoint, the clearance is too small, or the
    centre is not flanked by two obstacles within ``r_g + delta``.
    """
    n = xs.shape[0]
    if n < 2:
        return False, -1, -1, 0.0
    best = -1
    ia = 0
    ib = 0
    for i in range(n):
        for j in range(i + 1, n):
            d2 = (xs[i] - xs[j]) ** 2 + (ys[i] - ys[j]) ** 2
            if d2 > best:
                best = d2
                ia = i
                ib = j
    if math.sqrt(best) <= d_o_thr:
        return False, -1, -1, 0.0
    h, w = cells.shape
    mx = (xs[ia] + xs[ib]) / 2.0
    my = (ys[ia] + ys[ib]) / 2.0
    cx = int(math.floor(mx + 0.5))
    cy = int(math.floor(my + 0.5))
    gx = -1
    gy = -1
    if 0 <= cx < w and 0 <= cy < h and cells[cy, cx] == FREE:
        gx = cx
        gy = cy
    else:
        bd = 1e18
        for y in range(cy - snap_radius, cy + snap_radius + 1):
            for x in range(cx - snap_radius, cx + snap_radius + 1):
                if x < 0 or y < 0 or x >= w or y >= h:
                    continue
                if cells[y, x] != FREE:
                    continue
                dd = (x - cx) * (x - cx) + (y - cy) * (y - cy)
                if dd > snap_radius * snap_radius:
                    continue
                if dd < bd:
                    bd = dd
                    gx = x
                    gy = y
        if gx < 0:
            return False, -1, -1, 0.0
    r_g = nearest_blocking(cells, gx, gy, unknown_blocks)
    if not r_g > r_min:
        return False, gx, gy, r_g
    if count_within(cells, gx, gy, r_g + delta, unknown_blocks) < 2:
        return False, gx, gy, r_g
    return True, gx, gy, r_g


@njit
def sample_candidates(cells, cx, cy, r_min, dr, delta, d_o_thr, unknown_blocks, snap_radius):
    """Run the obstacle search + bisection on every candidate cell."""
    m = cx.shape[0]
    ok = np.zeros(m, dtype=np.bool_)
    gx = np.zeros(m, dtype=np.int64)
    gy = np.zeros(m, dtype=np.int64)
    rg = np.zeros(m, dtype=np.float64)
    for k in range(m):
        d_min, xs, ys, r = ring_search(cells, cx[k], cy[k], r_min, dr, delta, unknown_blocks)
        if xs.shape[0] < 2:
            continue
        good, x, y, r_g = bisect(cells, xs, ys, r_min, d_o_thr, delta, unknown_blocks, snap_radius)
        if good:
            ok[k] = True
            gx[k] = x
            gy[k] = y
            rg[k] = r_g
    return ok, gx, gy, rg


@njit
def mark_disk(mask, cx, cy, radius):
    h, w = mask.shape
    r = int(radius)
    r2 = radius * radius
    n = 0
    for y in range(max(cy - r, 0), min(cy + r, h - 1) + 1):
        for x in range(max(cx - r, 0), min(cx + r, w - 1) + 1):
            if (x - cx) * (x - cx) + (y - cy) * (y - cy) <= r2:
                if not mask[y, x]:
                    mask[y, x] = True
                    n += 1
    return n


# ---------------------------------------------------------------- denoise
def box_count(votes: np.ndarray, half: int) -> np.ndarray:
    """Count of truthy cells in the clipped ``(2*half+1)``-square around each cell."""
    v = votes.astype(np.int32)
    p = np.pad(v, half)
    ii = np.zeros((p.shape[0] + 1, p.shape[1] + 1), dtype=np.int32)
    ii[1:, 1:] = p.cumsum(0).cumsum(1)
    k = 2 * half + 1
    h, w = v.shape
    return ii[k:k + h, k:k + w] - ii[0:h, k:k + w] - ii[k:k + h, 0:w] + ii[0:h, 0:w]


# ---------------------------------------------------------------- ray casting
@njit
def cast_ray_cell(cells, ox, oy, ang, max_range):
    """Exact cell traversal (Amanatides-Woo) from a point in cell units.

    Returns ``(t, x, y)``: distance to the first occupied cell boundary and
    that cell, or ``(-1.0, -1, -1)`` on a miss within ``max_range``.
    """
    h, w = cells.shape
    dx = math.cos(ang)
    dy = math.sin(ang)
    x = int(math.floor(ox))
    y = int(math.floor(oy))
    step_x = 1 if dx > 0 else -1
    step_y = 1 if dy > 0 else -1
    if dx != 0.0:
        t_dx = abs(1.0 / dx)
        t_x = ((x + 1 - ox) if dx > 0 else (ox - x)) * t_dx
    else:
        t_dx = 1e300
        t_x = 1e300
    if dy != 0.0:
        t_dy = abs(1.0 / dy)
        t_y = ((y + 1 - oy) if dy > 0 else (oy - y)) * t_dy
    else:
        t_dy = 1e300
        t_y = 1e300
    t = 0.0
    while t < max_range:
        if x < 0 or y < 0 or x >= w or y >= h:
            return -1.0, -1, -1
        if cells[y, x] == OCCUPIED:
            return t, x, y
        if t_x < t_y:
            t = t_x
            t_x += t_dx
            x += step_x
        else:
            t = t_y
            t_y += t_dy
            y += step_y
    return -1.0, -1, -1


@njit
def cast_ray(cells, ox, oy, ang, max_range):
    """Distance to the first occupied cell boundary, or -1.0 on a miss."""
    return cast_ray_cell(cells, ox, oy, ang, max_range)[0]


@njit
def scan_all(cells, ox, oy, angles, max_range):
    """Per-beam hit distance (-1 on a miss) and hit cell (-1, -1 on a miss)."""
    n = angles.shape[0]
    out = np.empty(n, dtype=np.float64)
    hx = np.empty(n, dtype=np.int64)
    hy = np.empty(n, dtype=np.int64)
    for i in range(n):
        out[i], hx[i], hy[i] = cast_ray_cell(cells, ox, oy, angles[i], max_range)
    return out, hx, hy


@njit
def integrate_hits(belief, ox, oy, angles, hit_x, hit_y, max_range):
    """Replay each cast: cells before the recorded hit cell become free, the
    hit cell occupied. ``hit_x < 0`` marks a miss traced out to ``max_range``.
    """
    h, w = belief.shape
    changed = 0
    for i in range(angles.shape[0]):
        ang = angles[i]
        tx_ = hit_x[i]
        ty_ = hit_y[i]
        dx = math.cos(ang)
        dy = math.sin(ang)
        x = int(math.floor(ox))
        y = int(math.floor(oy))
        step_x = 1 if dx > 0 else -1
        step_y = 1 if dy > 0 else -1
        if dx != 0.0:
            t_dx = abs(1.0 / dx)
            t_x = ((x + 1 - ox) if dx > 0 else (ox - x)) * t_dx
        else:
            t_dx = 1e300
            t_x = 1e300
        if dy != 0.0:
            t_dy = abs(1.0 / dy)
            t_y = ((y + 1 - oy) if dy > 0 else (oy - y)) * t_dy
        else:
            t_dy = 1e300
            t_y = 1e300
        t = 0.0
        while True:
            if x < 0 or y < 0 or x >= w or y >= h:
                break
            if x == tx_ and y == ty_:
                if belief[y, x] != OCCUPIED:
                    belief[y, x] = OCCUPIED
                    changed += 1
                break
            if tx_ < 0 and t >= max_range:
                break
            if belief[y, x] == UNKNOWN:
                belief[y, x] = FREE
                changed += 1
            if t_x < t_y:
                t = t_x
                t_x += t_dx
                x += step_x
            else:
                t = t_y
                t_y += t_dy
                y += step_y
    return changed


@njit
def integrate_rays(belief, ox, oy, angles, dists, max_range):
    """Mark traversed cells free and hit cells occupied; returns #cells changed."""
    h, w = belief.shape
    changed = 0
    for i in range(angles.shape[0]):
        ang = angles[i]
        d = dists[i]
        hit = d >= 0.0
        limit = d if hit else max_range
        dx = math.cos(ang)
        dy = math.sin(ang)
        x = int(math.floor(ox))
        y = int(math.floor(oy))
        step_x = 1 if dx > 0 else -1
        step_y = 1 if dy > 0 else -1
        if dx != 0.0:
            t_dx = abs(1.0 / dx)
            t_x = ((x + 1 - ox) if dx > 0 else (ox - x)) * t_dx
        else:
            t_dx = 1e300
            t_x = 1e300
        if dy != 0.0:
            t_dy = abs(1.0 / dy)
            t_y = ((y + 1 - oy) if dy > 0 else (oy - y)) * t_dy
        else:
            t_dy = 1e300
            t_y = 1e300
        t = 0.0
        while True:
            if x < 0 or y < 0 or x >= w or y >= h:
                break
            if hit and t >= limit - 1e-9:
                if belief[y, x] != OCCUPIED:
                    belief[y, x] = OCCUPIED
                    changed += 1
                break
            if not hit and t >= limit:
                break
            if belief[y, x] == UNKNOWN:
                belief[y, x] = FREE
                changed += 1
            if t_x < t_y:
                t = t_x
                t_x += t_dx
                x += step_x
            else:
                t = t_y
                t_y += t_dy
                y += step_y
    return changed


@njit
def segment_free(cells, x0, y0, x1, y1):
    """Every cell crossed by the continuous segment (cell units) is free.

    Passing exactly through a lattice corner counts both side cells.
    """
    h, w = cells.shape
    cx = int(math.floor(x0))
    cy = int(math.floor(y0))
    ex = int(math.floor(x1))
    ey = int(math.floor(y1))
    if cx < 0 or cy < 0 or cx >= w or cy >= h or cells[cy, cx] != FREE:
        return False
    dx = x1 - x0
    dy = y1 - y0
    step_x = 1 if dx > 0 else -1
    step_y = 1 if dy > 0 else -1
    if dx != 0.0:
        t_dx = abs(1.0 / dx)
        t_x = ((cx + 1 - x0) if dx > 0 else (x0 - cx)) * t_dx
    else:
        t_dx = 1e300
        t_x = 1e300
    if dy != 0.0:
        t_dy = abs(1.0 / dy)
        t_y = ((cy + 1 - y0) if dy > 0 else (y0 - cy)) * t_dy
    else:
        t_dy = 1e300
        t_y = 1e300
    guard = abs(ex - cx) + abs(ey - cy) + 2
    while (cx != ex or cy != ey) and guard > 0:
        guard -= 1
        if min(t_x, t_y) > 1.0:
            break
        if abs(t_x - t_y) < 1e-12:
            if cx + step_x < 0 or cx + step_x >= w or cy + step_y < 0 or cy + step_y >= h:
                return False
            if cells[cy, cx + step_x] != FREE or cells[cy + step_y, cx] != FREE:
                return False
            cx += step_x
            cy += step_y
            t_x += t_dx
            t_y += t_dy
        elif t_x < t_y:
            cx += step_x
            t_x += t_dx
        else:
            cy += step_y
            t_y += t_dy
        if cx < 0 or cy < 0 or cx >= w or cy >= h or cells[cy, cx] != FREE:
            return False
    return True


# ---------------------------------------------------------------- A*
@njit
def _octile(x0, y0, x1, y1):
    dx = abs(x1 - x0)
    dy = abs(y1 - y0)
    return (SQRT2 - 1.0) * min(dx, dy) + max(dx, dy)


@njit
def _can_step(passable, x, y, mx, my, w, h):
    nx = x + mx
    ny = y + my
    if nx < 0 or ny < 0 or nx >= w or ny >= h:
        return False
    if not passable[ny, nx]:
        return False
    if mx != 0 and my != 0:
        # no squeezing between two diagonal blockers
        if not passable[y, nx] or not passable[ny, x]:
            return False
    return True


@njit
def bidir_astar(passable, sx, sy, gx, gy):
    """Bidirectional A* on an 8-connected grid with octile heuristic.

    Returns ``(length, path_x, path_y)``; ``length`` is ``-1`` when the goal
    is unreachable. Diagonal steps may not cut a blocked corner.
    """
    h, w = passable.shape
    empty = np.empty(0, dtype=np.int64)
    if not passable[sy, sx] or not passable[gy, gx]:
        return -1.0, empty, empty
    if sx == gx and sy == gy:
        px = np.empty(1, dtype=np.int64)
        py = np.empty(1, dtype=np.int64)
        px[0] = sx
        py[0] = sy
        return 0.0, px, py
    n = h * w
    inf = 1e300
    g_f = np.full(n, inf)
    g_b = np.full(n, inf)
    par_f = np.full(n, -1, dtype=np.int64)
    par_b = np.full(n, -1, dtype=np.int64)
    closed_f = np.zeros(n, dtype=np.bool_)
    closed_b = np.zeros(n, dtype=np.bool_)
    s = sy * w + sx
    g = gy * w + gx
    g_f[s] = 0.0
    g_b[g] = 0.0
    heap_f = [(_octile(sx, sy, gx, gy), 0, s)]
    heap_b = [(_octile(gx, gy, sx, sy), 0, g)]
    tick = 1
    mu = inf
    meet = -1
    mxs = np.array([1, -1, 0, 0, 1, 1, -1, -1])
    mys = np.array([0, 0, 1, -1, 1, -1, 1, -1])
    while len(heap_f) > 0 and len(heap_b) > 0:
        if max(heap_f[0][0], heap_b[0][0]) >= mu:
            break
        forward = heap_f[0][0] <= heap_b[0][0]
        if forward:
            f, _, u = heapq.heappop(heap_f)
            if closed_f[u]:
                continue
            closed_f[u] = True
            ux = u % w
            uy = u // w
            for k in range(8):
                if not _can_step(passable, ux, uy, mxs[k], mys[k], w, h):
                    continue
                v = (uy + mys[k]) * w + ux + mxs[k]
                cost = SQRT2 if (mxs[k] != 0 and mys[k] != 0) else 1.0
                ng = g_f[u] + cost
                if ng < g_f[v]:
                    g_f[v] = ng
                    par_f[v] = u
                    heapq.heappush(heap_f, (ng + _octile(ux + mxs[k], uy + mys[k], gx, gy), tick, v))
                    tick += 1
                if g_b[v] < inf and ng + g_b[v] < mu:
                    mu = ng + g_b[v]
                    meet = v
        else:
            f, _, u = heapq.heappop(heap_b)
            if closed_b[u]:
                continue
            closed_b[u] = True
            ux = u % w
            uy = u // w
            for k in range(8):
                if not _can_step(passable, ux, uy, mxs[k], mys[k], w, h):
                    continue
                v = (uy + mys[k]) * w + ux + mxs[k]
                cost = SQRT2 if (mxs[k] != 0 and mys[k] != 0) else 1.0
                ng = g_b[u] + cost
                if ng < g_b[v]:
                    g_b[v] = ng
                    par_b[v] = u
                    heapq.heappush(heap_b, (ng + _octile(ux + mxs[k], uy + mys[k], sx, sy), tick, v))
                    tick += 1
                if g_f[v] < inf and ng + g_f[v] < mu:
                    mu = ng + g_f[v]
                    meet = v
    if meet < 0:
        return -1.0, empty, empty
    # stitch start..meet and meet..goal
    cnt = 0
    c = meet
    while c >= 0:
        cnt += 1
        c = par_f[c]
    c = par_b[meet]
    while c >= 0:
        cnt += 1
        c = par_b[c]
    px = np.empty(cnt, dtype=np.int64)
    py = np.empty(cnt, dtype=np.int64)
    i = 0
    c = meet
    while c >= 0:
        i += 1
        c = par_f[c]
    j = i - 1
    c = meet
    while c >= 0:
        px[j] = c % w
        py[j] = c // w
        j -= 1
        c = par_f[c]
    c = par_b[meet]
    while c >= 0:
        px[i] = c % w
        py[i] = c // w
        i += 1
        c = par_b[c]
    return mu, px, py


@njit
def dijkstra_grid(passable, sx, sy):
    """Single-source 8-connected distances (no corner cutting); inf if unreachable."""
    h, w = passable.shape
    n = h * w
    dist = np.full(n, np.inf)
    if not passable[sy, sx]:
        return dist.reshape(h, w)
    s = sy * w + sx
    dist[s] = 0.0
    heap = [(0.0, s)]
    mxs = np.array([1, -1, 0, 0, 1, 1, -1, -1])
    mys = np.array([0, 0, 1, -1, 1, -1, 1, -1])
    while len(heap) > 0:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        ux = u % w
        uy = u // w
        for k in range(8):
            if not _can_step(passable, ux, uy, mxs[k], mys[k], w, h):
                continue
            v = (uy + mys[k]) * w + ux + mxs[k]
            nd = d + (SQRT2 if (mxs[k] != 0 and mys[k] != 0) else 1.0)
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist.reshape(h, w)


__all__ = [
    "USE_NUMBA",
    "los_free",
    "los_many",
    "kd_radius",
    "shift_all",
    "visible_pairs",
    "supercover",
    "ring_search",
    "nearest_blocking",
    "count_within",
    "bisect",
    "sample_candidates",
    "mark_disk",
    "box_count",
    "cast_ray",
    "cast_ray_cell",
    "integrate_hits",
    "scan_all",
    "integrate_rays",
    "segment_free",
    "bidir_astar",
    "dijkstra_grid",
]

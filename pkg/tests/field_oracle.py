"""Brute-force risk-field oracle for cross-checking the production path.

Distances come from dense sampling of the capsule spine (no projection
formula), with the closest spine point recovered by fitting the exact
parabola through three samples of the squared distance (the squared
distance is quadratic in the spine parameter, so the fit is exact, not
approximate). Everything else is evaluated exhaustively per point.
"""

import math

import numpy as np

SPINE_STEP = 1e-4


def _spine_points(ax, ay, bx, by, step=SPINE_STEP):
    length = math.hypot(bx - ax, by - ay)
    n = max(1, math.ceil(length / step))
    ts = np.linspace(0.0, 1.0, n + 1)
    return ts, np.column_stack([ax + ts * (bx - ax), ay + ts * (by - ay)])


def closest_spine_points(points, ax, ay, bx, by, step=SPINE_STEP):
    """Distances and closest spine points for an (N,2) array.

    Returns (dist, m) where m is the parabola-refined closest point.
    """
    ts, samples = _spine_points(ax, ay, bx, by, step)
    n_samples = samples.shape[0]
    dist = np.empty(points.shape[0])
    closest = np.empty_like(points)
    chunk = max(1, int(2_000_000 // max(n_samples, 1)))
    for start in range(0, points.shape[0], chunk):
        pts = points[start:start + chunk]
        dx = pts[:, 0:1] - samples[None, :, 0]
        dy = pts[:, 1:2] - samples[None, :, 1]
        d2 = dx * dx + dy * dy
        if n_samples < 3:
            idx = np.argmin(d2, axis=1)
            dist[start:start + chunk] = np.sqrt(d2[np.arange(len(pts)), idx])
            closest[start:start + chunk] = samples[idx]
            continue
        idx = np.clip(np.argmin(d2, axis=1), 1, n_samples - 2)
        rows = np.arange(len(pts))
        f0 = d2[rows, idx - 1]
        f1 = d2[rows, idx]
        f2 = d2[rows, idx + 1]
        h = ts[1] - ts[0]
        denom = f2 - 2.0 * f1 + f0
        offset = np.where(denom > 0.0, 0.5 * h * (f0 - f2) / np.where(denom > 0, denom, 1.0), 0.0)
        t_star = np.clip(ts[idx] + offset, 0.0, 1.0)
        mx = ax + t_star * (bx - ax)
        my = ay + t_star * (by - ay)
        closest[start:start + chunk, 0] = mx
        closest[start:start + chunk, 1] = my
        dist[start:start + chunk] = np.hypot(pts[:, 0] - mx, pts[:, 1] - my)
    return dist, closest


def point_risk_formula(d_o, d):
    if d_o > d:
        return 0.0
    if d_o < 0.0:
        return 1.0
    return (d - d_o) / d


def line_hits_capsule(px, py, ux, uy, ax, ay, bx, by, radius, step=SPINE_STEP):
    """Line-capsule intersection from dense spine offsets.

    The perpendicular offset of a spine point from the line is affine in
    the spine parameter, so a sign change between adjacent samples or a
    small endpoint value decides exactly.
    """
    _, samples = _spine_points(ax, ay, bx, by, step)
    cross = (samples[:, 0] - px) * uy - (samples[:, 1] - py) * ux
    if np.any(np.abs(cross) <= radius):
        return True
    return bool(np.any(np.signbit(cross[:-1]) != np.signbit(cross[1:])))


def evaluate(points, ax, ay, bx, by, radius, d, frame_x, signs, step=SPINE_STEP):
    """All risk aggregates for one scene.

    Returns a dict with c_r, argmax index (or None), c_rx, c_ry, and the
    directed variants for the given (sign_x, sign_y).
    """
    dist, closest = closest_spine_points(points, ax, ay, bx, by, step)
    sd = dist - radius
    axes = {
        "x": (frame_x[0], frame_x[1]),
        "y": (-frame_x[1], frame_x[0]),
    }

    c_r = 0.0
    argmax = None
    iso = [point_risk_formula(s, d) for s in sd]
    for i, r in enumerate(iso):
        if r > c_r:
            c_r = r
            argmax = i

    out = {"c_r": c_r, "argmax": argmax}
    for axis_name, (ux, uy), sign in (
        ("x", axes["x"], signs[0]),
        ("y", axes["y"], signs[1]),
    ):
        best = 0.0
        best_dir = 0.0
        for i in range(points.shape[0]):
            px, py = points[i]
            if sd[i] > d:
                continue  # outside the field support
            if not line_hits_capsule(px, py, ux, uy, ax, ay, bx, by, radius, step):
                continue
            if sd[i] <= 0.0:
                risk = 1.0
            else:
                mx, my = closest[i]
                mag = math.hypot(px - mx, py - my)
                qx = mx + radius * (px - mx) / mag
                qy = my + radius * (py - my) / mag
                d_axis = abs((px - qx) * ux + (py - qy) * uy)
                risk = point_risk_formula(d_axis, d)
            best = max(best, risk)
            side = (px - closest[i][0]) * ux + (py - closest[i][1]) * uy
            if (side >= 0.0 and sign > 0) or (side <= 0.0 and sign < 0):
                best_dir = max(best_dir, risk)
        out[f"c_r{axis_name}"] = best
        out[f"c_r{axis_name}_directed"] = best_dir
    return out

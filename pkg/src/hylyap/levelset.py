"""Level sets by marching squares, rendered as SVG."""
from __future__ import annotations

import numpy as np

from .errors import DomainError

# corner bits: bottom-left 1, bottom-right 2, top-right 4, top-left 8
_CASES = {
    0: (), 15: (),
    1: (("L", "B"),), 14: (("L", "B"),),
    2: (("B", "R"),), 13: (("B", "R"),),
    3: (("L", "R"),), 12: (("L", "R"),),
    4: (("R", "T"),), 11: (("R", "T"),),
    6: (("B", "T"),), 9: (("B", "T"),),
    7: (("L", "T"),), 8: (("L", "T"),),
}


def raster(V, bbox, res: int):
    """Sample ``V`` on a res×res grid; points outside V's domain become NaN."""
    x0, y0, x1, y1 = bbox
    xs = np.linspace(x0, x1, res)
    ys = np.linspace(y0, y1, res)
    X, Y = np.meshgrid(xs, ys)
    P = np.stack([X.ravel(), Y.ravel()], axis=1)
    try:
        Z = np.asarray(V(P), dtype=float)
    except DomainError:
        Z = np.empty(len(P))
        for k, p in enumerate(P):
            try:
                Z[k] = float(V(p))
            except DomainError:
                Z[k] = np.nan
    return xs, ys, Z.reshape(res, res)


def marching_squares(Z, xs, ys, level: float):
    """Polylines of {Z = level}; each is an (m, 2) array, closed ones repeat their start."""
    ny, nx = Z.shape
    above = Z > level
    segs = []

    def point(edge, i, j):
        # edge key and interpolated coordinates for an edge of cell (i, j)
        if edge == "B":
            a, b, key = (i, j), (i, j + 1), ("h", i, j)
        elif edge == "T":
            a, b, key = (i + 1, j), (i + 1, j + 1), ("h", i + 1, j)
        elif edge == "L":
            a, b, key = (i, j), (i + 1, j), ("v", i, j)
        else:
            a, b, key = (i, j + 1), (i + 1, j + 1), ("v", i, j + 1)
        za, zb = Z[a], Z[b]
        s = 0.5 if zb == za else (level - za) / (zb - za)
        pa = np.array([xs[a[1]], ys[a[0]]])
        pb = np.array([xs[b[1]], ys[b[0]]])
        return key, pa + s * (pb - pa)

    for i in range(ny - 1):
        for j in range(nx - 1):
            corners = (Z[i, j], Z[i, j + 1], Z[i + 1, j + 1], Z[i + 1, j])
            if any(np.isnan(c) for c in corners):
                continue
            idx = (int(above[i, j]) | int(above[i, j + 1]) << 1
                   | int(above[i + 1, j + 1]) << 2 | int(above[i + 1, j]) << 3)
            if idx in (5, 10):
                center_above = sum(corners) / 4 > level
                if (idx == 5) == center_above:
                    pairs = (("B", "R"), ("L", "T"))
                else:
                    pairs = (("L", "B"), ("R", "T"))
            else:
                pairs = _CASES[idx]
            for e1, e2 in pairs:
                segs.append((point(e1, i, j), point(e2, i, j)))
    return _chain(segs)


def _chain(segs):
    adj = {}
    for k, (a, b) in enumerate(segs):
        adj.setdefault(a[0], []).append(k)
        adj.setdefault(b[0], []).append(k)
    used = [False] * len(segs)
    lines = []

    def walk(k, key):
        pts = []
        while True:
            used[k] = True
            a, b = segs[k]
            nxt = b if a[0] == key else a
            pts.append(nxt[1])
            key = nxt[0]
            cand = [m for m in adj[key] if not used[m]]
            if not cand:
                return pts
            k = cand[0]

    # open chains start at edge keys used once
    starts = sorted(key for key, ks in adj.items() if len(ks) == 1)
    for key in starts:
        k = adj[key][0]
        if used[k]:
            continue
        a, b = segs[k]
        first = a if a[0] == key else b
        lines.append(np.array([first[1]] + walk(k, key)))
    for k in range(len(segs)):
        if not used[k]:
            a, _ = segs[k]
            pts = [a[1]] + walk(k, a[0])
            lines.append(np.array(pts))
    return sorted(lines, key=lambda p: (round(float(p[0, 0]), 9), round(float(p[0, 1]), 9), len(p)))


def level_set(V, level: float, bbox=(-3, -3, 3, 3), res: int = 400):
    xs, ys, Z = raster(V, bbox, res)
    return marching_squares(Z, xs, ys, level)


def midpoint_convexity(V, points, level: float, chords: int = 20000, seed: int = 0,
                       homogeneous: bool = True, tol: float = 1e-9):
    """Test whether the sublevel set {V ≤ level} looks convex along sampled chords.

    For degree-2 homogeneous V the points are first pulled radially onto the
    exact level set. Returns ``(convex, worst)`` where ``worst`` is the
    largest V(midpoint)/level found.
    """
    P = np.asarray(points, dtype=float).reshape(-1, 2)
    if homogeneous:
        v = np.asarray(V(P), dtype=float)
        P = P * np.sqrt(level / v)[:, None]
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(P), size=(chords, 2))
    M = 0.5 * (P[idx[:, 0]] + P[idx[:, 1]])
    worst = float(np.max(np.asarray(V(M), dtype=float)) / level)
    return worst <= 1 + tol, worst


def _fmt(v):
    s = f"{v:.4f}"
    return "0.0000" if s == "-0.0000" else s


def render_svg(contours: dict, bbox, size: int = 600, overlay=None) -> str:
    """``contours`` maps level → list of polylines; ``overlay`` is a list of polylines."""
    x0, y0, x1, y1 = bbox
    sx = size / (x1 - x0)
    sy = size / (y1 - y0)

    def tr(p):
        return _fmt((p[0] - x0) * sx), _fmt((y1 - p[1]) * sy)

    def path(line):
        closed = len(line) > 2 and np.allclose(line[0], line[-1])
        pts = [tr(p) for p in line]
        d = "M" + " L".join(f"{a} {b}" for a, b in pts)
        return d + (" Z" if closed else "")

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for level in sorted(contours):
        out.append(f'<g class="level" data-level="{level!r}" fill="none" stroke="black" stroke-width="1">')
        for line in contours[level]:
            out.append(f'<path d="{path(line)}"/>')
        out.append("</g>")
    if overlay:
        out.append('<g class="trajectory" fill="none" stroke="red" stroke-width="1.5">')
        for line in overlay:
            out.append(f'<path d="{path(np.asarray(line))}"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"

"""Iso-level contour extraction (marching squares) and length filtering.

Contours are traced on the unit-normalized filtered image.  Vertices are
sub-pixel (row, col) points obtained by linear interpolation along cell
edges, so bilinear interpolation of the image at any vertex reproduces the
level exactly.  Saddle cells (two opposite corners above the level) are
disambiguated by comparing the 4-corner mean against the level.  Contour
ids follow row-major seed-cell order, which makes the output deterministic
vertex-for-vertex.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Contour:
    vertices: np.ndarray          # (n, 2) float array of (row, col)
    closed: bool
    level: float
    id: int

    def __len__(self):
        return len(self.vertices)


@dataclass(frozen=True)
class ContourSet:
    contours: tuple
    source_shape: tuple
    level: float

    def __len__(self):
        return len(self.contours)

    def to_dict(self):
        return {
            "level": self.level,
            "source_shape": list(self.source_shape),
            "contours": [
                {"id": c.id, "closed": c.closed, "vertices": c.vertices.tolist()}
                for c in self.contours
            ],
        }

    @classmethod
    def from_dict(cls, d):
        contours = tuple(
            Contour(np.asarray(c["vertices"], dtype=float), bool(c["closed"]),
                    float(d["level"]), int(c["id"]))
            for c in d["contours"]
        )
        return cls(contours, tuple(d.get("source_shape", (0, 0))), float(d["level"]))

    def save(self, path):
        with open(path, "w") as f:
            json.dump(self.to_dict(), f)

    @classmethod
    def load(cls, path):
        with open(path) as f:
            return cls.from_dict(json.load(f))


# Cell edges are keyed ('h', r, c) for the horizontal edge (r,c)-(r,c+1) and
# ('v', r, c) for the vertical edge (r,c)-(r+1,c).  For a cell whose top-left
# corner is (r, c): top=('h',r,c), bottom=('h',r+1,c), left=('v',r,c),
# right=('v',r,c+1).

_T, _R, _B, _L = 0, 1, 2, 3

# case index: bit 8 = TL above, 4 = TR, 2 = BR, 1 = BL. Segments as edge pairs.
_CASES = {
    0: [], 15: [],
    8: [(_L, _T)], 7: [(_L, _T)],
    4: [(_T, _R)], 11: [(_T, _R)],
    2: [(_R, _B)], 13: [(_R, _B)],
    1: [(_B, _L)], 14: [(_B, _L)],
    12: [(_L, _R)], 3: [(_L, _R)],
    6: [(_T, _B)], 9: [(_T, _B)],
    # 10 (TL+BR) and 5 (TR+BL) are saddles, resolved at runtime
}
_SADDLE = {
    # (case, center_above): segments
    (10, True): [(_T, _R), (_B, _L)],    # above corners joined through the center
    (10, False): [(_L, _T), (_R, _B)],
    (5, True): [(_L, _T), (_R, _B)],
    (5, False): [(_T, _R), (_B, _L)],
}


def _cell_edges(r, c):
    return (("h", r, c), ("v", r, c + 1), ("h", r + 1, c), ("v", r, c))  # T R B L


def marching_squares(image, level):
    """Trace all iso-level contours of a 2D array.

    Returns a ContourSet; levels outside the image's value range (or a
    constant image) yield an empty set rather than an error.
    """
    img = np.asarray(image, dtype=float)
    if img.ndim != 2 or img.shape[0] < 2 or img.shape[1] < 2:
        raise ValueError("image must be 2D with shape >= (2, 2)")
    if not np.all(np.isfinite(img)):
        raise ValueError("image contains non-finite values")
    level = float(level)
    if not (img.min() < level < img.max()):
        return ContourSet((), img.shape, level)

    above = img > level
    tl = above[:-1, :-1]
    tr = above[:-1, 1:]
    br = above[1:, 1:]
    bl = above[1:, :-1]
    case = (tl.astype(np.int8) << 3) | (tr.astype(np.int8) << 2) \
        | (br.astype(np.int8) << 1) | bl.astype(np.int8)
    active = np.argwhere((case != 0) & (case != 15))

    # build segments cell by cell in row-major order
    segments = []          # (edge_key_a, edge_key_b)
    edge_segments = {}     # edge_key -> [segment indices]
    for r, c in map(tuple, active.tolist()):
        code = int(case[r, c])
        if code in (5, 10):
            center_above = img[r:r + 2, c:c + 2].mean() > level
            pairs = _SADDLE[(code, center_above)]
        else:
            pairs = _CASES[code]
        edges = _cell_edges(r, c)
        for a, b in pairs:
            idx = len(segments)
            segments.append((edges[a], edges[b]))
            edge_segments.setdefault(edges[a], []).append(idx)
            edge_segments.setdefault(edges[b], []).append(idx)

    def interp(edge):
        kind, r, c = edge
        v0 = img[r, c]
        v1 = img[r, c + 1] if kind == "h" else img[r + 1, c]
        t = (level - v0) / (v1 - v0)
        return (float(r), c + t) if kind == "h" else (r + t, float(c))

    def other_segment(edge, seg_idx):
        segs = edge_segments[edge]
        for s in segs:
            if s != seg_idx:
                return s
        return None

    visited = [False] * len(segments)
    contours = []
    for start in range(len(segments)):
        if visited[start]:
            continue
        visited[start] = True
        ea, eb = segments[start]
        chain = [ea, eb]
        closed = False
        # walk forward from eb
        cur_edge, cur_seg = eb, start
        while True:
            nxt = other_segment(cur_edge, cur_seg)
            if nxt is None:
                break
            if nxt == start:
                closed = True
                break
            visited[nxt] = True
            a, b = segments[nxt]
            cur_edge = b if a == cur_edge else a
            chain.append(cur_edge)
            cur_seg = nxt
        if not closed:
            # walk backward from ea
            cur_edge, cur_seg = ea, start
            back = []
            while True:
                nxt = other_segment(cur_edge, cur_seg)
                if nxt is None:
                    break
                visited[nxt] = True
                a, b = segments[nxt]
                cur_edge = b if a == cur_edge else a
                back.append(cur_edge)
                cur_seg = nxt
            chain = back[::-1] + chain
        verts = np.array([interp(e) for e in chain])
        contours.append(Contour(verts, closed, level, id=len(contours)))
    return ContourSet(tuple(contours), img.shape, level)


def filter_contours(cset, min_length, level_band=None):
    """Drop contours shorter than min_length vertices; ids re-densified in the
    original order.  level_band is accepted for forward compatibility with
    multi-level extraction and is not interpreted here.
    """
    if min_length < 2:
        raise ValueError("min_length must be >= 2")
    kept = []
    for c in cset.contours:
        if len(c.vertices) >= min_length:
            kept.append(Contour(c.vertices, c.closed, c.level, id=len(kept)))
    return ContourSet(tuple(kept), cset.source_shape, cset.level)


def bilinear(image, r, c):
    """Bilinearly interpolated image value at fractional (r, c)."""
    img = np.asarray(image, dtype=float)
    r0 = int(np.clip(np.floor(r), 0, img.shape[0] - 2))
    c0 = int(np.clip(np.floor(c), 0, img.shape[1] - 2))
    dr, dc = r - r0, c - c0
    return ((1 - dr) * (1 - dc) * img[r0, c0] + (1 - dr) * dc * img[r0, c0 + 1]
            + dr * (1 - dc) * img[r0 + 1, c0] + dr * dc * img[r0 + 1, c0 + 1])


def export_overlay_png(image, cset, path, assignment=None, upscale=4):
    """Grayscale background with contours drawn on top and labeled by id
    (colored by group when an assignment is given).  Row 0 of the PNG is the
    highest frequency, matching the filtered-image export.
    """
    from PIL import Image, ImageDraw

    img = np.asarray(image, dtype=float)
    lo, hi = img.min(), img.max()
    scale8 = np.zeros_like(img) if hi <= lo else (img - lo) / (hi - lo)
    base = (np.clip(scale8, 0, 1) * 255).astype(np.uint8)[::-1]
    rows = img.shape[0]
    im = Image.fromarray(base, mode="L").convert("RGB")
    im = im.resize((im.width * upscale, im.height * upscale), Image.NEAREST)
    draw = ImageDraw.Draw(im)
    palette = [(230, 60, 60), (60, 160, 230), (90, 200, 90), (240, 180, 40),
               (190, 90, 220), (80, 220, 210), (240, 120, 190), (150, 150, 60)]
    group_of = {}
    if assignment is not None:
        for gid, members in assignment.groups.items():
            for cid in members:
                group_of[cid] = int(gid)
    for c in cset.contours:
        color = (255, 140, 0)
        if c.id in group_of:
            color = palette[group_of[c.id] % len(palette)]
        pts = [((v[1] + 0.5) * upscale, (rows - 1 - v[0] + 0.5) * upscale)
               for v in c.vertices]
        if len(pts) > 1:
            draw.line(pts, fill=color, width=2)
        mid = pts[len(pts) // 2]
        draw.text(mid, str(c.id), fill=(255, 255, 0))
    im.save(path)

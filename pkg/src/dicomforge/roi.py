"""Mask post-processing: thresholding, connected components, border
following, bounding boxes.

These are the building blocks that turn probabilistic or binary model
outputs into discrete ROIs ready for SR encoding. Masks are plain 2D numpy
arrays; pixel coordinates everywhere are (column, row) pairs referring to
pixel centers.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

_N4 = ((-1, 0), (1, 0), (0, -1), (0, 1))
_N8 = _N4 + ((-1, -1), (-1, 1), (1, -1), (1, 1))

# Moore neighborhood in clockwise order starting west, as (drow, dcol)
_MOORE = ((0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1))
_MOORE_INDEX = {offset: i for i, offset in enumerate(_MOORE)}


@dataclass(frozen=True)
class LabeledComponents:
    """Integer label image: 0 background, 1..count in first-encounter order."""

    labels: np.ndarray
    count: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    def support(self, label: int) -> np.ndarray:
        return self.labels == label


@dataclass(frozen=True)
class Contour:
    """Closed outer boundary of one component; vertices are (column, row)
    pixel centers, first vertex equals last."""

    label: int
    vertices: np.ndarray

    def __post_init__(self):
        vertices = np.asarray(self.vertices)
        if vertices.ndim != 2 or vertices.shape[1] != 2 or len(vertices) < 2:
            raise ValueError("contour needs an (N, 2) vertex array, N >= 2")
        if not np.array_equal(vertices[0], vertices[-1]):
            raise ValueError("contour must be closed (first vertex == last)")
        vertices.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)


class BoundingBox:
    """Tight inclusive pixel box around one component."""

    __slots__ = ("label", "min_col", "min_row", "max_col", "max_row")

    def __init__(self, label, min_col, min_row, max_col, max_row):
        if min_col > max_col or min_row > max_row:
            raise ValueError("box minima must not exceed maxima")
        self.label = int(label)
        self.min_col = int(min_col)
        self.min_row = int(min_row)
        self.max_col = int(max_col)
        self.max_row = int(max_row)

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.min_col, self.min_row, self.max_col, self.max_row)

    def corner_points(self) -> np.ndarray:
        """The 4 corner pixel centers, clockwise from (min_col, min_row)."""
        return np.array([
            (self.min_col, self.min_row),
            (self.max_col, self.min_row),
            (self.max_col, self.max_row),
            (self.min_col, self.max_row),
        ], dtype=float)

    def __eq__(self, other):
        return isinstance(other, BoundingBox) and (
            (self.label, *self.as_tuple()) == (other.label, *other.as_tuple())
        )

    def __repr__(self):
        return f"BoundingBox(label={self.label}, {self.as_tuple()})"


def threshold(probabilities: np.ndarray, t: float) -> np.ndarray:
    """Binary mask: 1 where probability >= t (inclusive), else 0.

    `t` must lie in [0, 1]; the inclusive comparison makes behaviour at the
    usual 0.5 operating point deterministic.
    """
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"threshold must be within [0, 1], got {t}")
    prob = np.asarray(probabilities)
    if prob.ndim != 2:
        raise ValueError("probability map must be 2D")
    return (prob >= t).astype(np.uint8)


def connected_components(mask: np.ndarray, connectivity: int = 8) -> LabeledComponents:
    """Label maximal connected foreground regions.

    Labels are assigned 1..count in the order the raster scan (row-major)
    first encounters each region.
    """
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise ValueError("mask must be 2D")
    offsets = _N4 if connectivity == 4 else _N8
    rows, cols = mask.shape
    labels = np.zeros((rows, cols), dtype=np.int32)
    count = 0
    for r in range(rows):
        for c in range(cols):
            if not mask[r, c] or labels[r, c]:
                continue
            count += 1
            queue = deque([(r, c)])
            labels[r, c] = count
            while queue:
                qr, qc = queue.popleft()
                for dr, dc in offsets:
                    nr, nc = qr + dr, qc + dc
                    if 0 <= nr < rows and 0 <= nc < cols \
                            and mask[nr, nc] and not labels[nr, nc]:
                        labels[nr, nc] = count
                        queue.append((nr, nc))
    return LabeledComponents(labels=labels, count=count)


def _trace_one(labels: np.ndarray, label: int, start: tuple[int, int]) -> list[tuple[int, int]]:
    """Moore-neighbor border following with Jacob's stopping criterion.

    `start` must be the first (row-major) pixel of the component, so the
    west neighbor is guaranteed background.
    """
    rows, cols = labels.shape
    path = [start]
    state = (start, 0)  # backtrack direction: west
    initial = state
    seen = {state}
    while True:
        (r, c), back = state
        nxt = None
        for k in range(1, 9):
            idx = (back + k) % 8
            dr, dc = _MOORE[idx]
            nr, nc = r + dr, c + dc
            if 0 <= nr < rows and 0 <= nc < cols and labels[nr, nc] == label:
                prev = _MOORE[(back + k - 1) % 8]
                prev_pixel = (r + prev[0], c + prev[1])
                new_back = _MOORE_INDEX[(prev_pixel[0] - nr, prev_pixel[1] - nc)]
                nxt = ((nr, nc), new_back)
                break
        if nxt is None:
            break  # isolated pixel
        if nxt == initial:
            break
        if nxt in seen:
            break
        seen.add(nxt)
        path.append(nxt[0])
        state = nxt
    return path


def trace_contours(components: LabeledComponents) -> list[Contour]:
    """One closed outer contour per component, in label order.

    For hole-free components, rasterizing the contour and filling its
    interior reproduces the component support exactly; holes are not
    traced (only outer boundaries are emitted).
    """
    labels = components.labels
    contours = []
    for label in range(1, components.count + 1):
        pixels = np.argwhere(labels == label)
        if len(pixels) == 0:
            continue
        start = tuple(pixels[0])  # row-major first pixel
        path = _trace_one(labels, label, start)
        vertices = np.array(
            [(c, r) for r, c in path] + [(start[1], start[0])], dtype=float
        )
        contours.append(Contour(label=label, vertices=vertices))
    return contours


def bounding_boxes(components: LabeledComponents) -> list[BoundingBox]:
    """Tight inclusive boxes, one per component, in label order."""
    boxes = []
    for label in range(1, components.count + 1):
        rows_idx, cols_idx = np.nonzero(components.labels == label)
        if len(rows_idx) == 0:
            continue
        boxes.append(BoundingBox(
            label=label,
            min_col=cols_idx.min(),
            min_row=rows_idx.min(),
            max_col=cols_idx.max(),
            max_row=rows_idx.max(),
        ))
    return boxes

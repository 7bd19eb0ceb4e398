"""Interval containment answered as a dominance range search over points.

An m-dimensional closed interval [x1,y1] x ... x [xm,ym] becomes the 2m-d
point (x1..xm, -y1..-ym).  The intervals containing a query interval are
exactly the points lying below the query's own point in every coordinate.
"""

from __future__ import annotations

import functools
import random
from dataclasses import dataclass
from typing import Any, Iterable, Sequence


@functools.total_ordering
class Desc:
    """Order-reversing wrapper; stands in for negation on non-numeric values."""

    __slots__ = ("v",)

    def __init__(self, v):
        self.v = v

    def __eq__(self, other):
        return isinstance(other, Desc) and self.v == other.v

    def __lt__(self, other):
        return other.v < self.v

    def __hash__(self):
        return hash(("desc", self.v))

    def __repr__(self):
        return f"Desc({self.v!r})"


def negate(v):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return -v
    return Desc(v)


@dataclass(frozen=True)
class Point2m:
    coords: tuple
    payload: Any = None


@dataclass(frozen=True)
class UpperBoundRange:
    bounds: tuple

    def admits(self, coords: Sequence) -> bool:
        return all(c <= b for c, b in zip(coords, self.bounds))


def _check(iv: Sequence[tuple]):
    for lo, hi in iv:
        if lo is None or hi is None:
            raise ValueError("interval must be closed and bounded in every dimension")
        if hi < lo:
            raise ValueError(f"empty dimension [{lo}, {hi}]")


def interval_to_point(iv: Sequence[tuple], payload=None) -> Point2m:
    _check(iv)
    return Point2m(tuple(lo for lo, _ in iv) + tuple(negate(hi) for _, hi in iv), payload)


def query_to_bounds(iv: Sequence[tuple]) -> UpperBoundRange:
    _check(iv)
    return UpperBoundRange(tuple(lo for lo, _ in iv) + tuple(negate(hi) for _, hi in iv))


class _Node:
    __slots__ = ("coords", "payload", "axis", "left", "right", "lo", "dead")

    def __init__(self, coords, payload, axis):
        self.coords = coords
        self.payload = payload
        self.axis = axis
        self.left = None
        self.right = None
        self.lo = list(coords)  # componentwise minimum over the subtree
        self.dead = False


class KDTree:
    """KD-tree over k-d points supporting dominance (upper-bound) queries.

    Removal marks nodes dead; the tree is rebuilt once dead nodes exceed
    ``rebuild_fraction`` of all nodes.
    """

    def __init__(self, k: int, points: Iterable[Point2m] = (), rebuild_fraction: float = 0.25, seed: int = 0):
        self.k = k
        self.rebuild_fraction = rebuild_fraction
        self._rng = random.Random(seed)
        self._root = None
        self._nodes: dict[Any, _Node] = {}
        self._dead = 0
        self.last_visited = 0
        points = list(points)
        if points:
            self._bulk(points)

    def __len__(self):
        return len(self._nodes)

    @property
    def node_count(self) -> int:
        return len(self._nodes) + self._dead

    def _bulk(self, points: list[Point2m]):
        for p in points:
            if len(p.coords) != self.k:
                raise ValueError(f"point has {len(p.coords)} coordinates, tree has {self.k}")
        self._nodes = {}
        self._dead = 0
        self._root = self._build(list(points), 0)

    def _build(self, pts: list[Point2m], depth: int):
        if not pts:
            return None
        axis = depth % self.k
        sample = pts if len(pts) <= 15 else self._rng.sample(pts, 15)
        pivot_val = sorted(p.coords[axis] for p in sample)[len(sample) // 2]
        pivot_i = next(i for i, p in enumerate(pts) if p.coords[axis] == pivot_val)
        pivot = pts[pivot_i]
        rest = pts[:pivot_i] + pts[pivot_i + 1:]
        node = _Node(pivot.coords, pivot.payload, axis)
        self._nodes[pivot.payload] = node
        # only the right side must hold coords >= the split, so ties may go either way
        left, right, ties = [], [], []
        for p in rest:
            v = p.coords[axis]
            (left if v < pivot_val else ties if v == pivot_val else right).append(p)
        half = len(ties) // 2
        node.left = self._build(left + ties[:half], depth + 1)
        node.right = self._build(right + ties[half:], depth + 1)
        for child in (node.left, node.right):
            if child is not None:
                node.lo = [min(a, b) for a, b in zip(node.lo, child.lo)]
        return node

    def insert(self, point: Point2m):
        if len(point.coords) != self.k:
            raise ValueError(f"point has {len(point.coords)} coordinates, tree has {self.k}")
        if point.payload in self._nodes:
            raise KeyError(f"duplicate handle {point.payload!r}")
        c = point.coords
        if self._root is None:
            self._root = _Node(c, point.payload, 0)
            self._nodes[point.payload] = self._root
            return
        node, depth = self._root, 0
        while True:
            node.lo = [a if a <= b else b for a, b in zip(node.lo, c)]
            depth += 1
            if c[node.axis] < node.coords[node.axis]:
                if node.left is None:
                    node.left = _Node(c, point.payload, depth % self.k)
                    node = node.left
                    break
                node = node.left
            else:
                if node.right is None:
                    node.right = _Node(c, point.payload, depth % self.k)
                    node = node.right
                    break
                node = node.right
        self._nodes[point.payload] = node

    def remove(self, handle) -> bool:
        node = self._nodes.pop(handle, None)
        if node is None:
            return False
        node.dead = True
        self._dead += 1
        if self._dead > self.rebuild_fraction * self.node_count:
            self._rebuild()
        return True

    def _rebuild(self):
        live = [Point2m(n.coords, h) for h, n in self._nodes.items()]
        self._root = None
        self._bulk(live)

    def range_search(self, b: UpperBoundRange) -> list:
        """Payloads of all live points with every coordinate <= its bound."""
        bounds = b.bounds
        out, visited = [], 0
        stack = [self._root] if self._root is not None else []
        while stack:
            node = stack.pop()
            visited += 1
            if not all(x <= y for x, y in zip(node.lo, bounds)):
                continue
            if not node.dead and all(x <= y for x, y in zip(node.coords, bounds)):
                out.append(node.payload)
            if node.left is not None:
                stack.append(node.left)
            # right subtree holds coords >= the split value on this axis
            if node.right is not None and not bounds[node.axis] < node.coords[node.axis]:
                stack.append(node.right)
        self.last_visited = visited
        return out


class LinearScan:
    """Reference backend with the same interface as KDTree."""

    def __init__(self, k: int):
        self.k = k
        self._points: dict[Any, tuple] = {}
        self.last_visited = 0

    def __len__(self):
        return len(self._points)

    def insert(self, point: Point2m):
        self._points[point.payload] = point.coords

    def remove(self, handle) -> bool:
        return self._points.pop(handle, None) is not None

    def range_search(self, b: UpperBoundRange) -> list:
        self.last_visited = len(self._points)
        return [h for h, c in self._points.items() if b.admits(c)]

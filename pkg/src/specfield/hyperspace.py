"""Compact subsets of the real line stored as finite unions of closed intervals.

Endpoints may be floats, ints or :class:`fractions.Fraction`.  Every operation
here uses only comparisons, addition, subtraction and halving, so a set built
from fractions stays exact end to end (the slow-closing family relies on this,
its gap widths go far below double precision).
"""

from __future__ import annotations

import bisect
import csv
import io
import json
import logging
from dataclasses import dataclass
from typing import Iterable, Sequence

log = logging.getLogger(__name__)


class EmptySetError(ValueError):
    """Raised when an operation needs a non-empty set."""


@dataclass(frozen=True)
class Gap:
    """Bounded component ``(a, b)`` of the complement of a compact set."""

    a: object
    b: object

    def __post_init__(self):
        if not self.a < self.b:
            raise ValueError(f"gap needs a < b, got ({self.a}, {self.b})")

    @property
    def width(self):
        return self.b - self.a

    @property
    def center(self):
        return (self.a + self.b) / 2


@dataclass(frozen=True)
class CompactSet:
    """Sorted union of disjoint closed intervals ``[lo, hi]``.

    Consecutive intervals are strictly separated (``hi_k < lo_{k+1}``);
    degenerate intervals ``lo == hi`` are isolated points.
    """

    intervals: tuple = ()

    def __post_init__(self):
        ivs = tuple((lo, hi) for lo, hi in self.intervals)
        object.__setattr__(self, "intervals", ivs)
        prev_hi = None
        for lo, hi in ivs:
            if not lo <= hi:
                raise ValueError(f"interval [{lo}, {hi}] has lo > hi")
            if prev_hi is not None and not prev_hi < lo:
                raise ValueError("intervals must be sorted and strictly separated")
            prev_hi = hi

    @classmethod
    def empty(cls) -> "CompactSet":
        return cls(())

    @classmethod
    def from_intervals(cls, intervals: Iterable[Sequence]) -> "CompactSet":
        """Normalize arbitrary closed intervals: sort, merge overlapping or touching."""
        ivs = sorted((lo, hi) for lo, hi in intervals)
        out: list[list] = []
        for lo, hi in ivs:
            if hi < lo:
                raise ValueError(f"interval [{lo}, {hi}] has lo > hi")
            if out and lo <= out[-1][1]:
                if hi > out[-1][1]:
                    out[-1][1] = hi
            else:
                out.append([lo, hi])
        return cls(tuple((lo, hi) for lo, hi in out))

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def lows(self) -> list:
        return [lo for lo, _ in self.intervals]

    @property
    def highs(self) -> list:
        return [hi for _, hi in self.intervals]

    def __len__(self) -> int:
        return len(self.intervals)

    def __contains__(self, x) -> bool:
        k = bisect.bisect_right(self.lows, x) - 1
        return k >= 0 and x <= self.intervals[k][1]

    def measure(self):
        return sum((hi - lo for lo, hi in self.intervals), 0)

    def shifted(self, delta) -> "CompactSet":
        return CompactSet(tuple((lo + delta, hi + delta) for lo, hi in self.intervals))

    def to_float(self) -> "CompactSet":
        return CompactSet.from_intervals((float(lo), float(hi)) for lo, hi in self.intervals)

    def is_exact(self) -> bool:
        return any(not isinstance(v, float) for iv in self.intervals for v in iv)

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        return {"intervals": [[float(lo), float(hi)] for lo, hi in self.intervals]}

    @classmethod
    def from_dict(cls, data: dict) -> "CompactSet":
        return cls.from_intervals((lo, hi) for lo, hi in data["intervals"])

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "CompactSet":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        for lo, hi in self.intervals:
            w.writerow([repr(float(lo)), repr(float(hi))])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CompactSet":
        rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
        return cls.from_intervals((float(lo), float(hi)) for lo, hi in rows)


@dataclass(frozen=True)
class HitAndMissNbhd:
    """Basic hit-and-miss neighbourhood: miss the compact ``miss``, hit every open interval."""

    miss: CompactSet
    hits: tuple = ()

    def __post_init__(self):
        hits = tuple((lo, hi) for lo, hi in self.hits)
        for lo, hi in hits:
            if not lo < hi:
                raise ValueError(f"open interval ({lo}, {hi}) is empty")
        object.__setattr__(self, "hits", hits)


def _require(F: CompactSet, what: str = "no spectrum"):
    if F.is_empty:
        raise EmptySetError(what)


def from_points(points: Sequence, merge_tol) -> CompactSet:
    """Group a sorted point cloud into intervals.

    Neighbours closer than or equal to ``merge_tol`` share an interval; a larger
    spacing starts a new one.  An empty cloud gives the empty set (logged).
    """
    if not merge_tol > 0:
        raise ValueError("merge_tol must be positive")
    pts = list(points)
    if not pts:
        log.warning("from_points: empty point cloud, returning the empty set")
        return CompactSet.empty()
    for x, y in zip(pts, pts[1:]):
        if y < x:
            raise ValueError("points must be sorted ascending")
    out = []
    lo = hi = pts[0]
    for x in pts[1:]:
        if x - hi <= merge_tol:
            hi = x
        else:
            out.append((lo, hi))
            lo = hi = x
    out.append((lo, hi))
    return CompactSet(tuple(out))


def gaps(F: CompactSet) -> list[Gap]:
    """Bounded components of the complement, in increasing order."""
    _require(F)
    ivs = F.intervals
    return [Gap(ivs[k][1], ivs[k + 1][0]) for k in range(len(ivs) - 1)]


def edges(F: CompactSet) -> tuple:
    """``(inf F, sup F)``."""
    _require(F)
    return F.intervals[0][0], F.intervals[-1][1]


def dist_point(x, F: CompactSet):
    """Distance from ``x`` to the nearest interval of ``F``."""
    _require(F)
    ivs = F.intervals
    k = bisect.bisect_right(F.lows, x) - 1
    if k < 0:
        return ivs[0][0] - x
    lo, hi = ivs[k]
    if x <= hi:
        return x - x  # keeps the number type
    if k + 1 < len(ivs):
        return min(x - hi, ivs[k + 1][0] - x)
    return x - hi


def _directed(F: CompactSet, G: CompactSet):
    """sup over x in F of dist(x, G), by one merged sweep.

    On each interval of F the function dist(., G) is piecewise linear; its
    maximum sits at an endpoint or at the midpoint of a gap of G.
    """
    g = G.intervals
    mids = [(g[k][1] + g[k + 1][0]) / 2 for k in range(len(g) - 1)]
    best = None
    j = 0  # index of the last G interval with lo <= x
    mk = 0  # next gap midpoint not yet visited

    def dist(x):
        nonlocal j
        while j + 1 < len(g) and g[j + 1][0] <= x:
            j += 1
        lo, hi = g[j]
        if x < lo:
            return lo - x
        if x <= hi:
            return x - x
        if j + 1 < len(g):
            return min(x - hi, g[j + 1][0] - x)
        return x - hi

    for lo, hi in F.intervals:
        while mk < len(mids) and mids[mk] <= lo:
            mk += 1
        cands = [lo]
        while mk < len(mids) and mids[mk] < hi:
            cands.append(mids[mk])
            mk += 1
        cands.append(hi)
        for x in cands:
            d = dist(x)
            if best is None or d > best:
                best = d
    return best


def hausdorff(F: CompactSet, G: CompactSet):
    """Exact Hausdorff distance between two non-empty compact sets."""
    _require(F, "hausdorff of an empty set")
    _require(G, "hausdorff of an empty set")
    return max(_directed(F, G), _directed(G, F))


def in_nbhd(F: CompactSet, N: HitAndMissNbhd) -> bool:
    """True iff F misses ``N.miss`` and meets every open interval of ``N.hits``."""
    for lo, hi in F.intervals:
        for klo, khi in N.miss.intervals:
            if lo <= khi and klo <= hi:
                return False
    for olo, ohi in N.hits:
        if not any(lo < ohi and hi > olo for lo, hi in F.intervals):
            return False
    return True


def poly_image(F: CompactSet, p) -> CompactSet:
    """Image of F under ``p(z) = p0 + p1 z + p2 z^2`` (any object with p0, p1, p2)."""
    _require(F)
    out = []
    for lo, hi in F.intervals:
        a, b = p(lo), p(hi)
        vlo, vhi = min(a, b), max(a, b)
        if p.p2 != 0:
            h = -p.p1 / (2 * p.p2)
            if lo < h < hi:
                v = p(h)
                vlo, vhi = min(vlo, v), max(vhi, v)
        out.append((vlo, vhi))
    return CompactSet.from_intervals(out)


def max_abs(F: CompactSet):
    """``max |x|`` over F."""
    lo, hi = edges(F)
    return max(abs(lo), abs(hi))

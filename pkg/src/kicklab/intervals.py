"""Finite unions of disjoint closed intervals with compensated measure."""

from __future__ import annotations

import math


class IntervalSet:
    """Sorted disjoint closed intervals [l_i, r_i].

    Construction merges overlapping or touching inputs and drops degenerate
    slivers narrower than ``tiny`` (relative to the endpoint scale), so the
    invariants (sorted, disjoint, positive width) hold by construction.
    """

    __slots__ = ("ivs",)

    tiny = 1e-14

    def __init__(self, pairs=()):
        cleaned = []
        for l, r in pairs:
            l, r = float(l), float(r)
            if r < l:
                raise ValueError(f"bad interval [{l}, {r}]")
            if r - l > self.tiny * max(1.0, abs(l), abs(r)):
                cleaned.append((l, r))
        cleaned.sort()
        merged = []
        for l, r in cleaned:
            if merged and l <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], r))
            else:
                merged.append((l, r))
        self.ivs = tuple(merged)

    @classmethod
    def single(cls, l: float, r: float) -> "IntervalSet":
        return cls([(l, r)])

    def __len__(self) -> int:
        return len(self.ivs)

    def __iter__(self):
        return iter(self.ivs)

    def __bool__(self) -> bool:
        return bool(self.ivs)

    def __eq__(self, other) -> bool:
        return isinstance(other, IntervalSet) and self.ivs == other.ivs

    def measure(self) -> float:
        return math.fsum(r - l for l, r in self.ivs)

    def contains(self, t: float) -> bool:
        for l, r in self.ivs:
            if l <= t <= r:
                return True
            if t < l:
                return False
        return False

    def sup(self) -> float:
        if not self.ivs:
            raise ValueError("empty set has no sup")
        return self.ivs[-1][1]

    def inf(self) -> float:
        if not self.ivs:
            raise ValueError("empty set has no inf")
        return self.ivs[0][0]

    def union(self, other: "IntervalSet") -> "IntervalSet":
        return IntervalSet(list(self.ivs) + list(other.ivs))

    def intersect(self, other: "IntervalSet") -> "IntervalSet":
        out = []
        for al, ar in self.ivs:
            for bl, br in other.ivs:
                l, r = max(al, bl), min(ar, br)
                if l <= r:
                    out.append((l, r))
        return IntervalSet(out)

    def subtract_open(self, holes) -> "IntervalSet":
        """Remove open intervals (l, r) from the set; result stays closed."""
        pieces = list(self.ivs)
        for hl, hr in holes:
            nxt = []
            for l, r in pieces:
                if hr <= l or hl >= r:
                    nxt.append((l, r))
                    continue
                if l <= hl:
                    nxt.append((l, min(hl, r)))
                if hr <= r:
                    nxt.append((max(hr, l), r))
            pieces = nxt
        return IntervalSet(pieces)

    def sample(self, per_interval: int):
        """Evenly spaced interior points, ``per_interval`` in each interval."""
        if per_interval < 1:
            raise ValueError("need at least one sample per interval")
        pts = []
        for l, r in self.ivs:
            w = r - l
            for i in range(per_interval):
                pts.append(l + w * (i + 0.5) / per_interval)
        return pts

    def as_pairs(self):
        return [[l, r] for l, r in self.ivs]

    def __repr__(self) -> str:
        body = ", ".join(f"[{l!r}, {r!r}]" for l, r in self.ivs)
        return f"IntervalSet({body})"

"""Unions of disjoint open intervals on the extended real line.

The truncation sets produced by the selection geometry and consumed by
the Gaussian kernel are finite unions of open intervals. This module
provides the one canonical container for them: endpoints are floats
(possibly infinite), intervals are kept sorted, and normalization merges
pieces that overlap or touch at a point. Gluing at a contact point
changes the set only by a Lebesgue-null amount, which is invisible to
every probability computed downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass(frozen=True)
class IntervalUnion:
    """A normalized union ``(a_1, b_1) u ... u (a_K, b_K)`` with a_i < b_i
    and b_i < a_{i+1}. May be empty. Instances are immutable; construct
    through :meth:`from_pairs`, which normalizes.
    """

    pairs: tuple[tuple[float, float], ...]

    @classmethod
    def from_pairs(cls, pairs) -> "IntervalUnion":
        cleaned = []
        for lo, hi in pairs:
            lo = float(lo)
            hi = float(hi)
            if math.isnan(lo) or math.isnan(hi):
                raise ValueError("interval endpoint is NaN")
            if not lo < hi:
                raise ValueError(f"empty or reversed interval ({lo}, {hi})")
            cleaned.append((lo, hi))
        cleaned.sort()
        merged: list[tuple[float, float]] = []
        for lo, hi in cleaned:
            if merged and lo <= merged[-1][1]:
                last_lo, last_hi = merged[-1]
                merged[-1] = (last_lo, max(last_hi, hi))
            else:
                merged.append((lo, hi))
        return cls(tuple(merged))

    @property
    def k(self) -> int:
        return len(self.pairs)

    @property
    def bounded_above(self) -> bool:
        return self.k > 0 and math.isfinite(self.pairs[-1][1])

    @property
    def bounded_below(self) -> bool:
        return self.k > 0 and math.isfinite(self.pairs[0][0])

    @property
    def outer_gap(self) -> float:
        """Distance from the first upper endpoint to the last lower one.

        Zero for a single interval. For a union unbounded on both sides
        this is the diameter of the region the support fails to cover.
        """
        if self.k < 2:
            return 0.0
        return self.pairs[-1][0] - self.pairs[0][1]

    def contains(self, w: float) -> bool:
        return any(lo < w < hi for lo, hi in self.pairs)

    def reflected(self) -> "IntervalUnion":
        """The mirror image ``-T``."""
        return IntervalUnion(
            tuple((-hi, -lo) for lo, hi in reversed(self.pairs))
        )

    def clamp(self, w: float, sd: float) -> float:
        """Return ``w`` moved to the interior of the union if needed.

        Points within ``1e-9 * sd`` of the closure are pulled to the
        nearest interior point at distance ``1e-12 * sd`` from the
        boundary; callers produce such boundary-grazing values through
        float arithmetic on polyhedron data. Anything farther out is a
        caller bug and raises.
        """
        if self.k == 0:
            raise ValueError("empty interval union has no interior")
        slack = 1e-9 * sd
        inset = 1e-12 * sd
        best_dist = math.inf
        best_point = w
        for lo, hi in self.pairs:
            left = lo + inset if math.isfinite(lo) else -math.inf
            right = hi - inset if math.isfinite(hi) else math.inf
            if left > right:
                # interval narrower than twice the inset; aim at its middle
                left = right = 0.5 * (lo + hi)
            inner = min(max(w, left), right)
            dist = abs(w - inner)
            if dist < best_dist:
                best_dist = dist
                best_point = inner
        if best_dist == 0.0:
            return w
        # moved: acceptable only for a boundary graze
        if best_dist <= slack + inset:
            return best_point
        raise ValueError(
            f"point {w!r} lies outside the support beyond clamp tolerance"
        )

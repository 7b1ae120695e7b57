"""Productivity bookkeeping: how much each delay class contributes.

For every probe we accumulate, per coarse delay bin of the probing
tuple, the candidate-combination count and the match count.  The ratio
of partial to total selectivity then says how the join's productivity
would change if tuples above a given delay were sacrificed, which is
what lets the recall model distinguish delay-correlated predicates from
delay-neutral ones.

Late arrivals never probe, so their counts are estimated by the largest
candidate/match sizes seen for in-order probes: this interval's maxima
when available, the previous interval's otherwise.
"""
from __future__ import annotations

from .join import ProbeRecord
from .stats import coarse_delay


class ProductivityMaps:
    """Per-interval productivity maps keyed by coarse delay bin."""

    def __init__(self, g: int):
        if g <= 0:
            raise ValueError("granularity must be positive")
        self.g = g
        self.m_cross: dict[int, int] = {}
        self.m_join: dict[int, int] = {}
        self._max_cross = 0
        self._max_join = 0
        self._prev_max_cross = 0
        self._prev_max_join = 0
        self._saw_in_order = False

    @property
    def max_delay_key(self) -> int:
        return max(self.m_cross) if self.m_cross else 0

    def record(self, rec: ProbeRecord) -> None:
        d = coarse_delay(rec.delay, self.g)
        if rec.in_order:
            n_cross, n_join = rec.n_cross, rec.n_join
            self._saw_in_order = True
            if n_cross > self._max_cross:
                self._max_cross = n_cross
            if n_join > self._max_join:
                self._max_join = n_join
        elif self._saw_in_order:
            n_cross, n_join = self._max_cross, self._max_join
        else:
            n_cross, n_join = self._prev_max_cross, self._prev_max_join
        self.m_cross[d] = self.m_cross.get(d, 0) + n_cross
        self.m_join[d] = self.m_join.get(d, 0) + n_join

    def selectivity_ratio(self, k_ms: int) -> tuple[float, bool]:
        """Productivity of delays <= k relative to overall productivity.

        Returns (ratio, defined).  When the needed sums are empty the
        ratio cannot be estimated and (1.0, False) is returned; a slack
        covering every recorded delay gives exactly 1.0.
        """
        if not self.m_cross:
            return 1.0, False
        k_bin = k_ms // self.g
        if k_bin >= self.max_delay_key:
            total_join = sum(self.m_join.values())
            total_cross = sum(self.m_cross.values())
            if total_join == 0 or total_cross == 0:
                return 1.0, False
            return 1.0, True
        part_cross = sum(v for d, v in self.m_cross.items() if d <= k_bin)
        part_join = sum(v for d, v in self.m_join.items() if d <= k_bin)
        total_cross = sum(self.m_cross.values())
        total_join = sum(self.m_join.values())
        if part_cross == 0 or total_join == 0:
            return 1.0, False
        return (part_join / part_cross) * (total_cross / total_join), True

    def true_result_size_estimate(self) -> int:
        """Matches accumulated this interval, i.e. an N_true estimate."""
        return sum(self.m_join.values())

    def reset_interval(self) -> ProductivityMaps:
        """Start a fresh interval; return the finished interval's maps."""
        snap = ProductivityMaps(self.g)
        snap.m_cross = self.m_cross
        snap.m_join = self.m_join
        snap._max_cross = self._max_cross
        snap._max_join = self._max_join
        snap._prev_max_cross = self._prev_max_cross
        snap._prev_max_join = self._prev_max_join
        snap._saw_in_order = self._saw_in_order
        self.m_cross = {}
        self.m_join = {}
        self._prev_max_cross = self._max_cross
        self._prev_max_join = self._max_join
        self._max_cross = 0
        self._max_join = 0
        self._saw_in_order = False
        return snap

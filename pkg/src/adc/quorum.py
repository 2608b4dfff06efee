"""Grid quorum systems over a slotted wakeup period.

A period of m slots is laid out row-major in a ceil(sqrt(m)) square.
A cross quorum is the union of r consecutive rows and r consecutive
columns of that square.  Any two cross quorums intersect under every
cyclic rotation of the period, so two nodes that each wake in their own
quorum share at least one awake slot no matter how their clocks are
shifted.  This module builds the grids, sizes quorums from traffic
demand, sweeps rotations, and bounds the per-slot load induced by
quorum selection strategies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from random import Random
from typing import Iterable, Sequence


class PeriodMismatchError(ValueError):
    """Quorums from different periods were combined."""


class AnchorRangeError(ValueError):
    """An anchor/row-count pair does not fit inside the grid."""


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    # demand grids are coarse (steps like 0.05); strip binary float noise
    # so the ceilings below stay exact
    return Fraction(float(x)).limit_denominator(10**6)


def grid_side(m: int) -> int:
    """Side length of the smallest square holding m slots."""
    if m < 1:
        raise ValueError("period must hold at least one slot")
    return math.isqrt(m - 1) + 1


@dataclass(frozen=True)
class Period:
    """A wakeup period of m slots; slot_duration is in milliseconds."""

    m: int
    slot_duration: float = 1.0

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("period must hold at least one slot")
        if self.slot_duration <= 0:
            raise ValueError("slot duration must be positive")


@dataclass(frozen=True)
class Demand:
    """Per-node traffic demand relative to the channel rate.

    rate and data_rate share one unit; only the ratio matters.  Exact
    ratios survive if rate is given as a Fraction.
    """

    rate: float | Fraction
    data_rate: float | Fraction = 1.0

    def __post_init__(self):
        if not 0 < self.ratio <= 1:
            raise ValueError("demand must be positive and at most the channel rate")

    @property
    def ratio(self) -> Fraction:
        return _as_fraction(self.rate) / _as_fraction(self.data_rate)

    def slot_count(self, m: int) -> Fraction:
        """Slots of airtime needed per period at this demand."""
        return self.ratio * m


@dataclass(frozen=True)
class Quorum:
    """An awake-slot set inside one period.

    anchor/rows record how a cross quorum was built; hand-assembled slot
    sets leave them None.
    """

    m: int
    slots: frozenset[int]
    anchor: int | None = None
    rows: int | None = None

    def __post_init__(self):
        bad = [s for s in self.slots if not 0 <= s < self.m]
        if bad:
            raise ValueError(f"slots out of period range: {sorted(bad)}")

    def __len__(self) -> int:
        return len(self.slots)

    @cached_property
    def mask(self) -> int:
        mask = 0
        for s in self.slots:
            mask |= 1 << s
        return mask

    @property
    def min_slot(self) -> int:
        return min(self.slots)

    def sorted_slots(self) -> list[int]:
        return sorted(self.slots)


class GridQuorumSystem:
    """Row-major arrangement of a period's slots into a square grid.

    Slot s sits in cell (s // side, s % side), rows and columns 0-based;
    anchors below are 1-based.  When m is not a perfect square the
    trailing cells of the last rows are empty and quorums simply skip
    them.
    """

    def __init__(self, m: int, slot_duration: float = 1.0):
        self.period = Period(m, slot_duration)
        self.m = m
        self.side = grid_side(m)

    def __repr__(self):
        return f"GridQuorumSystem(m={self.m}, side={self.side})"

    def cell_slot(self, row: int, col: int) -> int | None:
        """Slot held by 0-based cell (row, col), None for empty cells."""
        if not (0 <= row < self.side and 0 <= col < self.side):
            raise IndexError(f"cell ({row}, {col}) outside a {self.side}x{self.side} grid")
        s = row * self.side + col
        return s if s < self.m else None

    def slot_cell(self, slot: int) -> tuple[int, int]:
        if not 0 <= slot < self.m:
            raise IndexError(f"slot {slot} outside period of {self.m}")
        return divmod(slot, self.side)

    def row_slots(self, anchor: int) -> list[int]:
        """Slots of the 1-based row `anchor`, skipping empty cells."""
        if not 1 <= anchor <= self.side:
            raise AnchorRangeError(f"row anchor {anchor} outside 1..{self.side}")
        base = (anchor - 1) * self.side
        return [base + c for c in range(self.side) if base + c < self.m]

    def col_slots(self, anchor: int) -> list[int]:
        """Slots of the 1-based column `anchor`, skipping empty cells."""
        if not 1 <= anchor <= self.side:
            raise AnchorRangeError(f"column anchor {anchor} outside 1..{self.side}")
        return [r * self.side + (anchor - 1) for r in range(self.side)
                if r * self.side + (anchor - 1) < self.m]

    def max_anchor(self, rows: int = 1) -> int:
        return self.side - rows + 1

    def anchors(self, rows: int = 1) -> range:
        """Valid 1-based anchors for quorums of the given row count."""
        return range(1, self.max_anchor(rows) + 1)

    def quorum(self, anchor: int, rows: int = 1) -> Quorum:
        """Cross quorum: rows anchor..anchor+rows-1 plus the same columns."""
        if rows < 1:
            raise AnchorRangeError("row count must be at least 1")
        if anchor < 1 or anchor + rows - 1 > self.side:
            raise AnchorRangeError(
                f"anchor {anchor} with {rows} rows exceeds side {self.side}")
        slots: set[int] = set()
        for a in range(anchor, anchor + rows):
            slots.update(self.row_slots(a))
            slots.update(self.col_slots(a))
        return Quorum(self.m, frozenset(slots), anchor=anchor, rows=rows)

    def all_cross_quorums(self, max_rows: int | None = None) -> list[Quorum]:
        """Every cross quorum the grid admits, ordered by (rows, anchor)."""
        top = self.side if max_rows is None else max_rows
        out = []
        for rows in range(1, top + 1):
            for anchor in self.anchors(rows):
                out.append(self.quorum(anchor, rows))
        return out


def build_grid_qs(m: int, slot_duration: float = 1.0) -> GridQuorumSystem:
    return GridQuorumSystem(m, slot_duration)


def demand_rows(demand: Demand, m: int) -> int:
    """Row count a demand requires: ceil(ratio * sqrt(m) / 2), at least 1."""
    side = grid_side(m)
    r = math.ceil(demand.ratio * side / 2)
    return max(1, r)


def design_quorum(qs: GridQuorumSystem, anchor: int, demand: Demand) -> Quorum:
    """Cross quorum sized for `demand` at the given anchor."""
    return qs.quorum(anchor, demand_rows(demand, qs.m))


def rotate(q: Quorum, shift: int) -> Quorum:
    """Cyclic rotation of a quorum's slots by `shift` (mod m)."""
    s = shift % q.m
    if s == 0:
        return q
    return Quorum(q.m, frozenset((x + s) % q.m for x in q.slots), rows=q.rows)


def _require_same_period(qu: Quorum, qv: Quorum):
    if qu.m != qv.m:
        raise PeriodMismatchError(f"period mismatch: {qu.m} vs {qv.m}")


def _rotated_mask(mask: int, shift: int, m: int) -> int:
    shift %= m
    if shift == 0:
        return mask
    return ((mask << shift) | (mask >> (m - shift))) & ((1 << m) - 1)


def rendezvous(qu: Quorum, qv: Quorum, relative_shift: int = 0) -> frozenset[int]:
    """Slots where qu is awake while qv, shifted forward, is also awake."""
    _require_same_period(qu, qv)
    m = qu.m
    common = qu.mask & _rotated_mask(qv.mask, relative_shift, m)
    return frozenset(s for s in range(m) if common >> s & 1)


def rendezvous_profile(qu: Quorum, qv: Quorum) -> list[int]:
    """Rendezvous slot count at every relative shift 0..m-1."""
    _require_same_period(qu, qv)
    m = qu.m
    mu = qu.mask
    mv = qv.mask
    return [(mu & _rotated_mask(mv, s, m)).bit_count() for s in range(m)]


def min_rendezvous_over_rotations(qu: Quorum, qv: Quorum) -> int:
    """Worst-case rendezvous count over every relative clock shift."""
    return min(rendezvous_profile(qu, qv))


def verify_rotation_closure(quorums: Sequence[Quorum]):
    """Check that every pair intersects under every rotation.

    Returns (True, None) or (False, (index_a, index_b, shift)) with the
    first failing combination in scan order.
    """
    qs = list(quorums)
    if not qs:
        return True, None
    m = qs[0].m
    for q in qs:
        if q.m != m:
            raise PeriodMismatchError("all quorums must share one period")
    masks = [q.mask for q in qs]
    rots = [[_rotated_mask(mk, s, m) for s in range(m)] for mk in masks]
    for a, ma in enumerate(masks):
        for b, rb in enumerate(rots):
            for s, rm in enumerate(rb):
                if not ma & rm:
                    return False, (a, b, s)
    return True, None


def _ceil_frac(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def sync_rendezvous_bound(du: Demand, dv: Demand, m: int) -> int:
    """Guaranteed shared awake slots at zero shift: ceil(du*dv*m / 2R^2)."""
    return _ceil_frac(du.ratio * dv.ratio * m / 2)


def async_rendezvous_bound(du: Demand, dv: Demand, m: int) -> int:
    """Guaranteed shared awake slots at any shift: ceil(du*dv*m / 4R^2)."""
    return _ceil_frac(du.ratio * dv.ratio * m / 4)


def occupancy_threshold(di: Demand, dj: Demand, m: int) -> int:
    """Overlap above which one quorum counts as occupying another."""
    return _ceil_frac(di.ratio * dj.ratio * m / 2)


def is_occupied(qi: Quorum, qj: Quorum, di: Demand, dj: Demand) -> bool:
    """True when qi overlaps qj more than the zero-shift guarantee."""
    _require_same_period(qi, qj)
    return len(qi.slots & qj.slots) > occupancy_threshold(di, dj, qi.m)


def demand_sum_feasible(demands: Iterable[Demand], rho) -> bool:
    """True when the summed demand of co-located nodes fits 1/rho of R."""
    rho = _as_fraction(rho)
    if rho < 1:
        raise ValueError("interference constant must be at least 1")
    total = sum((d.ratio for d in demands), Fraction(0))
    return total <= 1 / rho


def demand_lower_bound(m: int) -> float:
    """Smallest demand/R ratio whose cross quorum can still close under rotation.

    Below this the quorum falls under sqrt(m) slots and some rotation of
    it misses itself.  Undefined for m == 1 (a single slot always meets).
    """
    if m <= 1:
        raise ValueError("bound undefined for a single-slot period")
    return 1.0 - math.sqrt(1.0 - 1.0 / math.sqrt(m))


@dataclass(frozen=True)
class LoadProfile:
    """Per-slot congestion induced by a quorum selection strategy.

    per_slot_load weights each pick by |Q|/m (expected share of the
    period the pick keeps busy); access_frequency is the plain
    probability that the strategy's quorum covers the slot.  The
    classical floor min|Q|/m applies to the frequency; size-weighted
    ceilings apply to the load.
    """

    per_slot_load: tuple[float, ...]
    access_frequency: tuple[float, ...]

    @property
    def m(self) -> int:
        return len(self.per_slot_load)

    @property
    def max_load(self) -> float:
        return max(self.per_slot_load)

    @property
    def max_access_frequency(self) -> float:
        return max(self.access_frequency)


def compute_load(quorums: Sequence[Quorum],
                 probabilities: Sequence[float]) -> LoadProfile:
    """Load profile of a strategy that picks quorums[i] with probabilities[i]."""
    if len(quorums) != len(probabilities):
        raise ValueError("need one probability per quorum")
    if not quorums:
        return LoadProfile((), ())
    m = quorums[0].m
    for q in quorums:
        if q.m != m:
            raise PeriodMismatchError("all quorums must share one period")
    total = math.fsum(probabilities)
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"probabilities must sum to 1, got {total}")
    load = [0.0] * m
    freq = [0.0] * m
    for q, p in zip(quorums, probabilities):
        w = p * len(q) / m
        for s in q.slots:
            load[s] += w
            freq[s] += p
    return LoadProfile(tuple(load), tuple(freq))


def selection_load_ceiling(rho, group_size: int) -> float:
    """Expected per-slot load ceiling for uniform anchor selection.

    group_size co-located nodes split a 1/rho demand budget; the bound
    is (x - x^2/4) / group_size with x = 1/rho.
    """
    if group_size < 1:
        raise ValueError("group size must be at least 1")
    x = 1.0 / float(rho)
    return (x - x * x / 4.0) / group_size


@dataclass(frozen=True)
class KRoundLoadEstimate:
    """Monte-Carlo result for k-round random anchor selection."""

    m: int
    bins: int
    n_selectors: int
    k: int
    trials: int
    seed: int
    mean_max_load: float
    worst_max_load: int

    def reference_bound(self) -> float:
        """log2 log2 sqrt(m) / log2 k, the analytic high-probability bound."""
        if self.k < 2:
            raise ValueError("reference bound needs a retry budget of at least 2")
        return math.log2(math.log2(self.bins)) / math.log2(self.k)


def estimate_k_round_max_load(m: int, n_selectors: int, k: int,
                              trials: int = 1000, seed: int = 0) -> KRoundLoadEstimate:
    """Simulate selectors picking among sqrt(m) anchor bins, k retries each.

    Selectors commit in sequence.  Each draws a uniform anchor, redraws
    while the draw is one an earlier selector took, up to k redraws,
    then keeps its last draw either way.  Returns the across-trial mean
    and worst of the per-trial maximum bin occupancy.
    """
    if k < 1 or trials < 1 or n_selectors < 0:
        raise ValueError("k and trials must be positive, selectors non-negative")
    bins = grid_side(m)
    rng = Random(seed)
    total = 0
    worst = 0
    for _ in range(trials):
        loads = [0] * bins
        occupied = [False] * bins
        for _ in range(n_selectors):
            pick = rng.randrange(bins)
            retries = 0
            while retries < k and occupied[pick]:
                pick = rng.randrange(bins)
                retries += 1
            loads[pick] += 1
            occupied[pick] = True
        peak = max(loads) if loads else 0
        total += peak
        worst = max(worst, peak)
    return KRoundLoadEstimate(m=m, bins=bins, n_selectors=n_selectors, k=k,
                              trials=trials, seed=seed,
                              mean_max_load=total / trials,
                              worst_max_load=worst)

"""Channel-mix planning that minimises link RSKR for a throughput demand.

Under one key policy the link RSKR is proportional to the channel count, so
the planner looks for the fewest channels whose total capacity covers the
demand and whose total occupancy fits in the band. Ties are broken by
smaller total occupancy, then by the count vector read from the lowest
capacity upwards (fewer low-capacity channels wins).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from qskr._validate import require_real
from qskr.core import DEFAULT_POLICY, KeyPolicy, rskr_homogeneous
from qskr.errors import Infeasible
from qskr.spectrum import (
    DEFAULT_TABLE,
    Band,
    CapacityOccupancyTable,
    band_width_mhz,
    max_channels,
)


@dataclass(frozen=True)
class Demand:
    throughput_gbps: float
    band: Band
    policy: KeyPolicy = DEFAULT_POLICY
    table: CapacityOccupancyTable = DEFAULT_TABLE

    def __post_init__(self):
        require_real(self.throughput_gbps, "throughput_gbps", positive=True)


@dataclass(frozen=True)
class Plan:
    counts: dict
    total_capacity_gbps: float
    total_occupancy_mhz: int
    rskr_bps: float

    @property
    def n_channels(self) -> int:
        return sum(self.counts.values())


def plan_key(counts: tuple[int, ...], table: CapacityOccupancyTable) -> tuple:
    """Ordering key of a count vector (aligned with ``table.entries``); smaller is better."""
    occupancy = sum(c * occ for c, (_, occ) in zip(counts, table.entries))
    return (sum(counts), occupancy, tuple(counts))


def _search(demand: float, table: CapacityOccupancyTable, band: Band) -> tuple[int, ...] | None:
    width = band_width_mhz(band)
    k = len(table.entries)
    caps = [Fraction(cap) for cap, _ in table.entries]
    occs = [occ for _, occ in table.entries]
    limits = [max_channels(band, occ) for occ in occs]
    # best capacity per MHz among entries 0..i bounds what leftover spectrum can carry
    density = []
    for cap, occ in zip(caps, occs):
        density.append(max(cap / occ, density[-1]) if density else cap / occ)
    best: list = [None]
    counts = [0] * k

    def visit(i: int, remaining: Fraction, n: int, used: int) -> None:
        # entries are assigned from the largest capacity down to index 0
        if remaining <= 0:
            key = (n, used, tuple(counts))
            if best[0] is None or key < best[0]:
                best[0] = key
            return
        if i < 0 or remaining > (width - used) * density[i]:
            return
        # still uncovered, so at least one more channel (and more spectrum) is needed
        lower = n + math.ceil(remaining / caps[i])
        if best[0] is not None and (lower, used) >= best[0][:2]:
            return
        top = min(limits[i], math.ceil(remaining / caps[i]), (width - used) // occs[i])
        for c in range(top, -1, -1):
            counts[i] = c
            visit(i - 1, remaining - c * caps[i], n + c, used + c * occs[i])
        counts[i] = 0

    visit(k - 1, Fraction(demand), 0, 0)
    return None if best[0] is None else best[0][2]


def plan_min_rskr(demand: Demand) -> Plan:
    table = demand.table
    counts = _search(demand.throughput_gbps, table, demand.band)
    if counts is None:
        raise Infeasible(
            f"no channel mix from the table carries {demand.throughput_gbps} Gbps within band {demand.band}"
        )
    return make_plan(counts, table, demand.policy)


def make_plan(counts, table: CapacityOccupancyTable, policy: KeyPolicy) -> Plan:
    mix = {cap: c for c, (cap, _) in zip(counts, table.entries) if c}
    return Plan(
        counts=mix,
        total_capacity_gbps=sum(c * cap for c, (cap, _) in zip(counts, table.entries)),
        total_occupancy_mhz=sum(c * occ for c, (_, occ) in zip(counts, table.entries)),
        rskr_bps=rskr_homogeneous(policy, sum(counts)),
    )

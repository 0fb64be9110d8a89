"""Optical bands, spectral occupancy and fix-grid channel counting.

All spectrum quantities are integer MHz, so the channel count of a fixed
grid is an exact integer division (112.5 GHz is stored as 112_500 MHz).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable, Sequence

from qskr._validate import require_int, require_real
from qskr.errors import UnknownCapacity

MHZ_PER_THZ = 1_000_000
MHZ_PER_GHZ = 1_000


@dataclass(frozen=True)
class Band:
    """An operational spectrum span made of one or more disjoint segments.

    ``segments`` holds ``(lower_mhz, upper_mhz)`` pairs sorted ascending.
    Adjacent segments may touch but must not overlap.
    """

    segments: tuple[tuple[int, int], ...]
    name: str | None = field(default=None, compare=False)

    def __post_init__(self):
        segs = tuple(tuple(s) for s in self.segments)
        if not segs:
            raise ValueError("band needs at least one segment")
        prev_upper = None
        for i, seg in enumerate(segs):
            if len(seg) != 2:
                raise ValueError(f"segment {i} must be a (lower_mhz, upper_mhz) pair")
            lo = require_int(seg[0], f"segments[{i}].lower_mhz", minimum=1)
            hi = require_int(seg[1], f"segments[{i}].upper_mhz", minimum=1)
            if hi <= lo:
                raise ValueError(f"segment {i}: upper_mhz {hi} must exceed lower_mhz {lo}")
            if prev_upper is not None and lo < prev_upper:
                raise ValueError(f"segment {i} overlaps or precedes segment {i - 1}")
            prev_upper = hi
        object.__setattr__(self, "segments", tuple((int(lo), int(hi)) for lo, hi in segs))

    @classmethod
    def from_thz(cls, lower_thz: str, upper_thz: str, name: str | None = None) -> "Band":
        """Single-segment band from decimal THz strings, converted exactly to MHz."""
        return cls(((_thz_to_mhz(lower_thz), _thz_to_mhz(upper_thz)),), name=name)

    @property
    def width_mhz(self) -> int:
        return band_width_mhz(self)

    def __str__(self):
        if self.name:
            return self.name
        return "+".join(f"[{lo},{hi}]" for lo, hi in self.segments)


def _thz_to_mhz(text: str) -> int:
    value = Decimal(text) * MHZ_PER_THZ
    if value != value.to_integral_value():
        raise ValueError(f"{text} THz is not a whole number of MHz")
    return int(value)


C_BAND = Band.from_thz("191.35", "196.10", name="C")
C_L_BAND = Band.from_thz("184.49", "196.10", name="C+L")

NAMED_BANDS = {"C": C_BAND, "C+L": C_L_BAND}


def named_band(name: str) -> Band:
    try:
        return NAMED_BANDS[name]
    except KeyError:
        raise ValueError(f"unknown band {name!r}; expected one of {sorted(NAMED_BANDS)}") from None


def band_width_mhz(band: Band) -> int:
    """Total usable spectrum of ``band`` in MHz (guard bands are not modelled)."""
    return sum(hi - lo for lo, hi in band.segments)


def max_channels(band: Band, occupancy_mhz: int) -> int:
    """Number of fixed-width channels that fit in ``band``.

    The floor is taken per segment: a channel cannot straddle the gap
    between two segments.
    """
    occupancy_mhz = require_int(occupancy_mhz, "occupancy_mhz", minimum=1)
    return sum((hi - lo) // occupancy_mhz for lo, hi in band.segments)


@dataclass(frozen=True)
class CapacityOccupancyTable:
    """Minimum spectral occupancy (MHz) for each supported channel capacity (Gbps)."""

    entries: tuple[tuple[float, int], ...]

    def __post_init__(self):
        entries = tuple(tuple(e) for e in self.entries)
        if not entries:
            raise ValueError("capacity/occupancy table must not be empty")
        checked = []
        for i, entry in enumerate(entries):
            if len(entry) != 2:
                raise ValueError(f"entry {i} must be a (capacity_gbps, occupancy_mhz) pair")
            cap = require_real(entry[0], f"entries[{i}].capacity_gbps", positive=True)
            occ = require_int(entry[1], f"entries[{i}].occupancy_mhz", minimum=1)
            if checked:
                prev_cap, prev_occ = checked[-1]
                if not cap > prev_cap:
                    raise ValueError(f"entry {i}: capacities must be strictly ascending")
                if not occ > prev_occ:
                    raise ValueError(f"entry {i}: occupancies must be strictly ascending")
            checked.append((cap, occ))
        object.__setattr__(self, "entries", tuple(checked))

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence]) -> "CapacityOccupancyTable":
        return cls(tuple(tuple(p) for p in pairs))

    @property
    def capacities(self) -> tuple[float, ...]:
        return tuple(cap for cap, _ in self.entries)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)


# Minimum spectral occupancy per channel capacity for currently deployed
# coherent optics (100G to 800G), extended to 1.6T.
DEFAULT_TABLE = CapacityOccupancyTable(
    (
        (100, 50 * MHZ_PER_GHZ),
        (400, 75 * MHZ_PER_GHZ),
        (800, 112_500),
        (1600, 225 * MHZ_PER_GHZ),
    )
)


def occupancy_for_capacity(table: CapacityOccupancyTable, capacity_gbps: float) -> int:
    """Exact-match lookup; raises :class:`UnknownCapacity` when absent (no interpolation)."""
    for cap, occ in table.entries:
        if cap == capacity_gbps:
            return occ
    raise UnknownCapacity(capacity_gbps)

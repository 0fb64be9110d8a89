"""Required secure key rate (RSKR) per channel and per link.

The per-channel rate is key length times refresh rate. A link's rate is
the sum over its channels; the homogeneous and fix-grid forms are thin
wrappers over the same two primitives, so every path agrees exactly.

Rates are returned in bits/s. With integral refresh rates every result is
a Python ``int``; fractional rates (``float`` or ``Fraction``) propagate
their own type.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Hashable

from qskr._validate import require_int, require_real
from qskr.errors import LinkError
from qskr.spectrum import Band, CapacityOccupancyTable, band_width_mhz, max_channels

AES256_KEY_BITS = 256


@dataclass(frozen=True)
class KeyPolicy:
    key_length_bits: int
    refresh_rate_hz: float = 1

    def __post_init__(self):
        require_int(self.key_length_bits, "key_length_bits", minimum=1)
        require_real(self.refresh_rate_hz, "refresh_rate_hz")


DEFAULT_POLICY = KeyPolicy(AES256_KEY_BITS, 1)


@dataclass(frozen=True)
class ChannelSpec:
    id: Hashable
    capacity_gbps: float
    occupancy_mhz: int
    policy: KeyPolicy = DEFAULT_POLICY

    def __post_init__(self):
        require_real(self.capacity_gbps, "capacity_gbps", positive=True)
        require_int(self.occupancy_mhz, "occupancy_mhz", minimum=1)
        if not isinstance(self.policy, KeyPolicy):
            raise TypeError(f"policy must be a KeyPolicy, got {self.policy!r}")


class Grid(str, enum.Enum):
    FIXED = "fixed"
    FLEX = "flex"


@dataclass(frozen=True)
class Link:
    """A band carrying a set of data channels on a fixed or flexible grid."""

    band: Band
    channels: tuple[ChannelSpec, ...] = ()
    grid: Grid = Grid.FIXED

    def __post_init__(self):
        channels = tuple(self.channels)
        object.__setattr__(self, "channels", channels)
        object.__setattr__(self, "grid", Grid(self.grid))
        ids = [ch.id for ch in channels]
        if len(set(ids)) != len(ids):
            raise LinkError("channel ids must be unique")
        if not channels:
            return
        if self.grid is Grid.FIXED:
            occupancies = {ch.occupancy_mhz for ch in channels}
            if len(occupancies) != 1:
                raise LinkError(f"fixed grid needs one shared occupancy, got {sorted(occupancies)}")
            (occ,) = occupancies
            limit = max_channels(self.band, occ)
            if len(channels) > limit:
                raise LinkError(
                    f"{len(channels)} channels of {occ} MHz exceed the {limit} that fit in band {self.band}"
                )
        else:
            used = sum(ch.occupancy_mhz for ch in channels)
            width = band_width_mhz(self.band)
            if used > width:
                raise LinkError(f"channels occupy {used} MHz but band {self.band} is {width} MHz wide")

    @classmethod
    def homogeneous(
        cls,
        band: Band,
        n_channels: int,
        capacity_gbps: float,
        occupancy_mhz: int,
        policy: KeyPolicy = DEFAULT_POLICY,
        grid: Grid = Grid.FIXED,
    ) -> "Link":
        channels = tuple(
            ChannelSpec(f"ch{i}", capacity_gbps, occupancy_mhz, policy) for i in range(n_channels)
        )
        return cls(band, channels, grid)


@dataclass(frozen=True)
class CurvePoint:
    capacity_gbps: float
    occupancy_mhz: int
    n_channels: int
    rskr_bps: float


def rskr_per_channel(policy: KeyPolicy):
    return policy.key_length_bits * policy.refresh_rate_hz


def rskr_per_link(link: Link):
    """Sum of per-channel rates; each channel may carry its own policy."""
    return sum((rskr_per_channel(ch.policy) for ch in link.channels), 0)


def rskr_homogeneous(policy: KeyPolicy, n_channels: int):
    n_channels = require_int(n_channels, "n_channels", minimum=0)
    return rskr_per_channel(policy) * n_channels


def rskr_fixgrid(policy: KeyPolicy, band: Band, occupancy_mhz: int):
    return rskr_homogeneous(policy, max_channels(band, occupancy_mhz))


def generate_curve(
    policy: KeyPolicy, band: Band, table: CapacityOccupancyTable
) -> list[CurvePoint]:
    """RSKR of a fully-filled fixed-grid link for each table capacity, ascending."""
    points = []
    for capacity, occupancy in table.entries:
        n = max_channels(band, occupancy)
        points.append(CurvePoint(capacity, occupancy, n, rskr_homogeneous(policy, n)))
    return points


def channel_breakdown(link: Link) -> list[tuple[Hashable, object]]:
    return [(ch.id, rskr_per_channel(ch.policy)) for ch in link.channels]


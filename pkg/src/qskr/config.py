"""JSON link configuration: parsing, validation, resolution and serialisation.

Document layout (all field names carry their unit)::

    {
      "band": "C" | "C+L" | [{"lower_mhz": int, "upper_mhz": int}, ...],
      "grid": "fixed" | "flex",                                   # default "fixed"
      "default_policy": {"key_length_bits": int, "refresh_rate_hz": number},
      "channels": [
        {"id": str, "capacity_gbps": number,
         "occupancy_mhz": int,                                     # optional, looked up in the table
         "policy": {"key_length_bits": int, "refresh_rate_hz": number}}   # optional
      ],
      "table": [{"capacity_gbps": number, "occupancy_mhz": int}, ...]      # optional
    }

``default_policy`` defaults to 256-bit keys refreshed once per second and
``table`` to the built-in capacity/occupancy table. A supplied ``table``
replaces the built-in one.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from numbers import Integral, Real
from typing import Any

from qskr.core import DEFAULT_POLICY, ChannelSpec, Grid, KeyPolicy, Link
from qskr.errors import LinkError, QskrError, UnknownCapacity
from qskr.spectrum import (
    DEFAULT_TABLE,
    NAMED_BANDS,
    Band,
    CapacityOccupancyTable,
    occupancy_for_capacity,
)

TABLE_ENV_VAR = "QSKR_TABLE"


class ConfigError(QskrError):
    """Problem with a user-supplied document; ``path`` locates the offending field."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(message)
        self.message = message
        self.path = path

    def __str__(self):
        return f"{self.path}: {self.message}" if self.path else self.message


class ParseError(ConfigError):
    """The document is not well-formed JSON."""


class ValidationError(ConfigError):
    """The document is well-formed but violates the schema or a domain invariant."""


@dataclass(frozen=True)
class ChannelEntry:
    id: str
    capacity_gbps: float
    occupancy_mhz: int | None = None
    policy: KeyPolicy | None = None


@dataclass(frozen=True)
class LinkConfigDocument:
    band: Band
    channels: tuple[ChannelEntry, ...]
    grid: Grid = Grid.FIXED
    default_policy: KeyPolicy = DEFAULT_POLICY
    table: CapacityOccupancyTable | None = field(default=None)

    @property
    def effective_table(self) -> CapacityOccupancyTable:
        return self.table if self.table is not None else default_table()

    def resolve(self) -> Link:
        table = self.effective_table
        channels = []
        for i, entry in enumerate(self.channels):
            occupancy = entry.occupancy_mhz
            if occupancy is None:
                try:
                    occupancy = occupancy_for_capacity(table, entry.capacity_gbps)
                except UnknownCapacity as exc:
                    raise ValidationError(str(exc), f"channels[{i}].capacity_gbps") from None
            channels.append(
                ChannelSpec(entry.id, entry.capacity_gbps, occupancy, entry.policy or self.default_policy)
            )
        try:
            return Link(self.band, tuple(channels), self.grid)
        except LinkError as exc:
            raise ValidationError(str(exc), "channels") from None

    def to_dict(self) -> dict:
        doc: dict[str, Any] = {
            "band": self.band.name
            if self.band.name in NAMED_BANDS and NAMED_BANDS[self.band.name] == self.band
            else [{"lower_mhz": lo, "upper_mhz": hi} for lo, hi in self.band.segments],
            "grid": self.grid.value,
            "default_policy": _policy_dict(self.default_policy),
            "channels": [],
        }
        for entry in self.channels:
            ch: dict[str, Any] = {"id": entry.id, "capacity_gbps": entry.capacity_gbps}
            if entry.occupancy_mhz is not None:
                ch["occupancy_mhz"] = entry.occupancy_mhz
            if entry.policy is not None:
                ch["policy"] = _policy_dict(entry.policy)
            doc["channels"].append(ch)
        if self.table is not None:
            doc["table"] = table_to_list(self.table)
        return doc

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _policy_dict(policy: KeyPolicy) -> dict:
    return {"key_length_bits": policy.key_length_bits, "refresh_rate_hz": policy.refresh_rate_hz}


def table_to_list(table: CapacityOccupancyTable) -> list[dict]:
    return [{"capacity_gbps": cap, "occupancy_mhz": occ} for cap, occ in table.entries]


# -- field readers ---------------------------------------------------------


def _object(value, path: str, required: set[str], optional: set[str] = frozenset()) -> dict:
    if not isinstance(value, dict):
        raise ValidationError("expected an object", path)
    for key in value:
        if key not in required and key not in optional:
            raise ValidationError("unknown field", _join(path, key))
    for key in sorted(required):
        if key not in value:
            raise ValidationError("missing required field", _join(path, key))
    return value


def _join(path: str, key: str) -> str:
    return f"{path}.{key}" if path else key


def _int(value, path: str, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, Integral):
        raise ValidationError(f"expected an integer, got {value!r}", path)
    if value < minimum:
        raise ValidationError(f"must be >= {minimum}, got {value}", path)
    return int(value)


def _number(value, path: str, *, positive: bool) -> float:
    if isinstance(value, bool) or not isinstance(value, Real):
        raise ValidationError(f"expected a number, got {value!r}", path)
    if not math.isfinite(value):
        raise ValidationError("must be finite", path)
    if positive and not value > 0:
        raise ValidationError(f"must be > 0, got {value}", path)
    if value < 0:
        raise ValidationError(f"must be >= 0, got {value}", path)
    return value


def _policy(value, path: str) -> KeyPolicy:
    obj = _object(value, path, {"key_length_bits", "refresh_rate_hz"})
    return KeyPolicy(
        _int(obj["key_length_bits"], _join(path, "key_length_bits"), 1),
        _number(obj["refresh_rate_hz"], _join(path, "refresh_rate_hz"), positive=False),
    )


def parse_band(value, path: str = "band") -> Band:
    if isinstance(value, str):
        if value not in NAMED_BANDS:
            raise ValidationError(f"unknown band {value!r}; expected one of {sorted(NAMED_BANDS)}", path)
        return NAMED_BANDS[value]
    if not isinstance(value, list) or not value:
        raise ValidationError("expected a band name or a non-empty list of segments", path)
    segments = []
    for i, seg in enumerate(value):
        seg_path = f"{path}[{i}]"
        obj = _object(seg, seg_path, {"lower_mhz", "upper_mhz"})
        segments.append(
            (
                _int(obj["lower_mhz"], f"{seg_path}.lower_mhz", 1),
                _int(obj["upper_mhz"], f"{seg_path}.upper_mhz", 1),
            )
        )
    try:
        return Band(tuple(segments))
    except ValueError as exc:
        raise ValidationError(str(exc), path) from None


def parse_table_value(value, path: str = "table") -> CapacityOccupancyTable:
    if not isinstance(value, list) or not value:
        raise ValidationError("expected a non-empty list of entries", path)
    pairs = []
    for i, item in enumerate(value):
        item_path = f"{path}[{i}]"
        obj = _object(item, item_path, {"capacity_gbps", "occupancy_mhz"})
        pairs.append(
            (
                _number(obj["capacity_gbps"], f"{item_path}.capacity_gbps", positive=True),
                _int(obj["occupancy_mhz"], f"{item_path}.occupancy_mhz", 1),
            )
        )
    try:
        return CapacityOccupancyTable.from_pairs(pairs)
    except ValueError as exc:
        raise ValidationError(str(exc), path) from None


def _loads(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg} at line {exc.lineno} column {exc.colno}") from None


def parse_config(text: str) -> LinkConfigDocument:
    """Parse and validate a JSON link document; the result is guaranteed to resolve."""
    raw = _object(
        _loads(text), "", {"band", "channels"}, {"grid", "default_policy", "table"}
    )
    band = parse_band(raw["band"])
    grid_value = raw.get("grid", Grid.FIXED.value)
    if grid_value not in {g.value for g in Grid}:
        raise ValidationError(f"expected 'fixed' or 'flex', got {grid_value!r}", "grid")
    default_policy = (
        _policy(raw["default_policy"], "default_policy") if "default_policy" in raw else DEFAULT_POLICY
    )
    table = parse_table_value(raw["table"]) if "table" in raw else None

    if not isinstance(raw["channels"], list):
        raise ValidationError("expected a list", "channels")
    entries = []
    for i, item in enumerate(raw["channels"]):
        path = f"channels[{i}]"
        obj = _object(item, path, {"id", "capacity_gbps"}, {"occupancy_mhz", "policy"})
        if not isinstance(obj["id"], str) or not obj["id"]:
            raise ValidationError("expected a non-empty string", f"{path}.id")
        entries.append(
            ChannelEntry(
                id=obj["id"],
                capacity_gbps=_number(obj["capacity_gbps"], f"{path}.capacity_gbps", positive=True),
                occupancy_mhz=_int(obj["occupancy_mhz"], f"{path}.occupancy_mhz", 1)
                if "occupancy_mhz" in obj
                else None,
                policy=_policy(obj["policy"], f"{path}.policy") if "policy" in obj else None,
            )
        )
    doc = LinkConfigDocument(band, tuple(entries), Grid(grid_value), default_policy, table)
    doc.resolve()
    return doc


def load_config(path: str | os.PathLike) -> LinkConfigDocument:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def parse_table(text: str) -> CapacityOccupancyTable:
    return parse_table_value(_loads(text))


def load_table(path: str | os.PathLike) -> CapacityOccupancyTable:
    with open(path, encoding="utf-8") as fh:
        return parse_table(fh.read())


def default_table() -> CapacityOccupancyTable:
    """Built-in table, or the file named by ``$QSKR_TABLE`` when set."""
    path = os.environ.get(TABLE_ENV_VAR)
    return load_table(path) if path else DEFAULT_TABLE

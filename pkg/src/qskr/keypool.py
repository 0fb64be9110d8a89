"""Deterministic key-pool simulation.

Key material enters the pool continuously at the secure key rate. Each
channel withdraws one whole key of ``key_length_bits`` at every refresh
instant ``n / refresh_rate_hz`` (n = 1, 2, ... up to the horizon). The pool
at an event includes production up to and including that instant, so a
pool fed at exactly the link RSKR never goes negative with zero initial
stock.

Events are ordered by time, then by channel id. The run is vectorised with
numpy; the semantics are those of a sequential event loop.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Integral, Rational
from typing import IO, Iterator, NamedTuple

import numpy as np

from qskr._validate import require_int, require_real
from qskr.core import Link, rskr_per_link
from qskr.errors import EventExplosion, InconclusiveHorizon

UNDERFLOW_TOLERANCE_BITS = 1e-6
DEFAULT_MAX_EVENTS = 10_000_000
DEFAULT_THRESHOLD_DELTA = 0.01

# float rates are matched to a fraction with a denominator up to this bound
# when computing the common refresh period
_MAX_RECOVERED_DENOMINATOR = 10**6


@dataclass(frozen=True)
class SimConfig:
    link: Link
    skr_bps: float
    horizon_s: float
    initial_pool_bits: float = 0.0
    max_events: int = DEFAULT_MAX_EVENTS

    def __post_init__(self):
        require_real(self.skr_bps, "skr_bps")
        require_real(self.horizon_s, "horizon_s", positive=True)
        require_real(self.initial_pool_bits, "initial_pool_bits")
        require_int(self.max_events, "max_events", minimum=0)


@dataclass(frozen=True)
class SimResult:
    min_pool_bits: float
    underflow_time_s: float | None
    final_pool_bits: float
    events_processed: int

    @property
    def underflow(self) -> bool:
        return self.underflow_time_s is not None


class TraceRow(NamedTuple):
    time_s: float
    channel_id: object
    pool_before: float
    pool_after: float


class ThresholdResult(NamedTuple):
    rskr: float
    verified: bool


def _event_count(rate, horizon) -> int:
    """Number of refresh instants n / rate within the horizon, decided in exact rational arithmetic."""
    if rate == 0:
        return 0
    return math.floor(Fraction(horizon) * Fraction(rate))


def _event_time(n: int, rate) -> float:
    if isinstance(rate, Rational):
        return n * rate.denominator / rate.numerator
    return n / rate


def _event_times(count: int, rate) -> np.ndarray:
    n = np.arange(1, count + 1, dtype=np.float64)
    if isinstance(rate, Rational):
        num, den = int(rate.numerator), int(rate.denominator)
        if count * den < 2**53 and num < 2**53:
            # exact integer products, one correctly rounded division: equal
            # rationals land on identical floats, so simultaneous refreshes tie
            return (n * den) / num
        return np.array([_event_time(int(k), rate) for k in n], dtype=np.float64)
    return n / float(rate)


def _run(config: SimConfig):
    channels = config.link.channels
    counts = [_event_count(ch.policy.refresh_rate_hz, config.horizon_s) for ch in channels]
    total = sum(counts)
    if total > config.max_events:
        raise EventExplosion(
            f"{total} events exceed the cap of {config.max_events}; shorten the horizon"
        )
    if total == 0:
        return None
    rank = {cid: i for i, cid in enumerate(sorted(ch.id for ch in channels))}
    times = np.concatenate(
        [_event_times(c, ch.policy.refresh_rate_hz) for c, ch in zip(counts, channels)]
    )
    ranks = np.concatenate(
        [np.full(c, rank[ch.id], dtype=np.int64) for c, ch in zip(counts, channels)]
    )
    bits = np.concatenate(
        [np.full(c, float(ch.policy.key_length_bits)) for c, ch in zip(counts, channels)]
    )
    order = np.lexsort((ranks, times))
    times, ranks, bits = times[order], ranks[order], bits[order]
    withdrawn = np.cumsum(bits)
    pool_after = float(config.initial_pool_bits) + float(config.skr_bps) * times - withdrawn
    return times, ranks, bits, withdrawn, pool_after


def simulate(config: SimConfig) -> SimResult:
    """Run the key-pool simulation to the horizon and summarise the trajectory."""
    initial = float(config.initial_pool_bits)
    produced = float(config.skr_bps) * float(config.horizon_s)
    run = _run(config)
    if run is None:
        return SimResult(initial, None, initial + produced, 0)
    times, _, _, withdrawn, pool_after = run
    under = np.flatnonzero(pool_after < -UNDERFLOW_TOLERANCE_BITS)
    underflow_time = float(times[under[0]]) if under.size else None
    return SimResult(
        min_pool_bits=float(pool_after.min()),
        underflow_time_s=underflow_time,
        final_pool_bits=initial + produced - float(withdrawn[-1]),
        events_processed=int(times.size),
    )


def event_trace(config: SimConfig) -> Iterator[TraceRow]:
    """Per-event pool levels in processing order."""
    run = _run(config)
    if run is None:
        return
    ids = sorted(ch.id for ch in config.link.channels)
    times, ranks, bits, _, pool_after = run
    for t, r, b, after in zip(times.tolist(), ranks.tolist(), bits.tolist(), pool_after.tolist()):
        yield TraceRow(t, ids[r], after + b, after)


def write_trace_csv(config: SimConfig, stream: IO[str]) -> int:
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(TraceRow._fields)
    n = 0
    for row in event_trace(config):
        writer.writerow([repr(row.time_s), row.channel_id, repr(row.pool_before), repr(row.pool_after)])
        n += 1
    return n


def as_fraction(rate) -> Fraction:
    """Exact rational value of a refresh rate, recovering short fractions from floats (0.1 -> 1/10)."""
    if isinstance(rate, (Integral, Rational)):
        return Fraction(rate)
    guess = Fraction(rate).limit_denominator(_MAX_RECOVERED_DENOMINATOR)
    return guess if float(guess) == float(rate) else Fraction(rate)


def common_period(link: Link) -> Fraction:
    """Smallest time T > 0 at which every firing channel has completed a whole number of refreshes.

    For rates a_k / b_k in lowest terms, T = lcm(b_k) / gcd(a_k).
    """
    rates = [as_fraction(ch.policy.refresh_rate_hz) for ch in link.channels]
    rates = [r for r in rates if r > 0]
    if not rates:
        raise ValueError("link has no channel with a positive refresh rate")
    return Fraction(
        math.lcm(*(r.denominator for r in rates)), math.gcd(*(r.numerator for r in rates))
    )


def underflow_bound(link: Link, skr_bps, initial_pool_bits=0) -> Fraction:
    """Latest time by which a pool fed below RSKR must underflow, as an exact Fraction.

    At every multiple of the common period the consumed total equals
    RSKR times elapsed time, so the deficit grows linearly there.
    """
    deficit = Fraction(rskr_per_link(link)) - Fraction(skr_bps)
    if deficit <= 0:
        raise ValueError("skr_bps must be below the link RSKR for an underflow bound")
    return Fraction(initial_pool_bits) / deficit + common_period(link)


def threshold_check(
    link: Link,
    horizon_s: float,
    initial_pool_bits: float = 0.0,
    delta: float = DEFAULT_THRESHOLD_DELTA,
    max_events: int = DEFAULT_MAX_EVENTS,
) -> ThresholdResult:
    """Confirm RSKR is the no-underflow threshold: no underflow at RSKR, underflow at (1 - delta) RSKR."""
    if not any(ch.policy.refresh_rate_hz > 0 for ch in link.channels):
        raise ValueError("threshold is undefined for a link without key demand")
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    rskr = rskr_per_link(link)
    low_skr = float(rskr) * (1 - delta)
    bound = underflow_bound(link, low_skr, initial_pool_bits)
    if Fraction(horizon_s) < bound:
        raise InconclusiveHorizon(
            f"horizon {horizon_s} s is shorter than the underflow bound {float(bound):.6g} s"
        )
    at = simulate(SimConfig(link, float(rskr), horizon_s, initial_pool_bits, max_events))
    below = simulate(SimConfig(link, low_skr, horizon_s, initial_pool_bits, max_events))
    # event times are correctly rounded, so comparing against the rounded bound is exact
    verified = not at.underflow and below.underflow and below.underflow_time_s <= float(bound)
    return ThresholdResult(rskr, verified)

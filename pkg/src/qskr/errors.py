"""Exception hierarchy shared by the qskr modules."""


class QskrError(Exception):
    """Base class for all errors raised by this package."""


class UnknownCapacity(QskrError, KeyError):
    """A capacity has no exact entry in a capacity/occupancy table."""

    def __init__(self, capacity_gbps):
        super().__init__(capacity_gbps)
        self.capacity_gbps = capacity_gbps

    def __str__(self):
        return f"no table entry for capacity {self.capacity_gbps} Gbps"


class LinkError(QskrError, ValueError):
    """A link violates its grid invariants."""


class EventExplosion(QskrError):
    """A simulation would process more events than the configured cap."""


class InconclusiveHorizon(QskrError):
    """The simulation horizon is too short to observe the expected underflow."""


class Infeasible(QskrError):
    """No channel mix satisfies a throughput demand within the band."""

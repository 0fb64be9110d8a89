"""Required secure key rate planning for quantum-secured DWDM optical links."""

__version__ = "0.1.0"

from qskr.core import (
    DEFAULT_POLICY,
    ChannelSpec,
    CurvePoint,
    Grid,
    KeyPolicy,
    Link,
    generate_curve,
    rskr_fixgrid,
    rskr_homogeneous,
    rskr_per_channel,
    rskr_per_link,
)
from qskr.errors import (
    EventExplosion,
    InconclusiveHorizon,
    Infeasible,
    LinkError,
    QskrError,
    UnknownCapacity,
)
from qskr.keypool import SimConfig, SimResult, simulate, threshold_check
from qskr.planner import Demand, Plan, plan_min_rskr
from qskr.spectrum import (
    C_BAND,
    C_L_BAND,
    DEFAULT_TABLE,
    Band,
    CapacityOccupancyTable,
    band_width_mhz,
    max_channels,
    occupancy_for_capacity,
)

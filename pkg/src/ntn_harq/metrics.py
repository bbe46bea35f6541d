"""Closed-form utilization, throughput, gain and delay-computation power.

The subframe utilization factor (SUF) is the fraction of a HARQ cycle
spent on unique payload; throughput is SUF scaled by the TB size over the
TB duration.  Cycle lengths are computed as exact integer subframe counts
so they can be compared slot-for-slot against built timelines.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .errors import InvalidInputError
from .harq import CycleParams, Direction, GrantMode


class SchedulingMode(Enum):
    LEGACY_FIXED = "legacy"
    PROPOSED_VARIABLE = "proposed"


@dataclass(frozen=True)
class MetricsReport:
    """Headline numbers for one scenario run."""

    suf: float
    throughput_bps: float
    gain_vs_baseline: float
    required_harq: int
    power_cost_w: float


@dataclass(frozen=True)
class ProcessorProfile:
    """UE processor model for the delay-computation power cost.

    efficiency_mops_per_mw: millions of operations per second per mW.
    op_rate_per_s: how often a delay value is recomputed (worst case once
        per subframe, 1000/s).
    op_count: arithmetic operations per delay evaluation.
    """

    efficiency_mops_per_mw: float
    op_rate_per_s: float
    op_count: float

    def __post_init__(self) -> None:
        if self.efficiency_mops_per_mw <= 0 or self.op_rate_per_s <= 0:
            raise InvalidInputError("processor efficiency and op rate must be positive")
        if self.op_count < 0:
            raise InvalidInputError("op count must be >= 0")


# Operations per delay evaluation, counted off the three delay formulas as
# written: two subtractions, two multiplications and two additions for the
# plain DL and UL forms; the bundled form adds a division and a floor.
DELAY_OP_COUNTS = {
    "dd2a": 6,
    "ug2d": 6,
    "dd2a_bundled": 8,
}

# Worst case: delays recomputed every subframe.
DEFAULT_OP_RATE_PER_S = 1000.0


def suf_generic(n_data: int, n_rep: int, n_hc: int) -> float:
    """Subframe utilization: data subframes over repetitions times cycle
    length (each TB's repetitions carry one TB of unique payload)."""
    if n_rep < 1 or n_hc < 1 or n_data < 1:
        raise InvalidInputError("n_data, n_rep and n_hc must be >= 1")
    if n_data > n_rep * n_hc:
        raise InvalidInputError("data subframes cannot exceed n_rep * n_hc")
    return n_data / (n_rep * n_hc)


def cycle_length_closed_form(
    params: CycleParams, direction: Direction, mode: SchedulingMode
) -> int:
    """Exact HARQ-cycle length in subframes for the given scheduling mode.

    Legacy fixed-delay cycles carry a single TB.  Variable-delay cycles
    account for every grant block (one per TB under STBG), the packed data
    region, the feedback chain and the mandatory-minimum guard, plus the
    two switch gaps.
    """
    n = params.n_tbphc
    p = params.rep_pdcch
    sw = params.n_switch
    if mode is SchedulingMode.LEGACY_FIXED:
        if n != 1:
            raise InvalidInputError("fixed-delay cycles schedule exactly one TB")
        if direction is Direction.DL:
            return (
                p
                + params.n_dg2d
                + params.pdsch_reps[0]
                + params.dd2a_min
                + params.rep_pucch
                + sw
            )
        return p + params.pusch_reps[0] + params.ug2d_min + sw
    if mode is not SchedulingMode.PROPOSED_VARIABLE:
        raise InvalidInputError(f"unknown scheduling mode: {mode}")
    if direction is Direction.DL:
        data = sum(params.pdsch_reps)
        grants = p if params.grant_mode is GrantMode.MTBG else n * p
        if params.ack_bundling:
            wait = ((n - 1) // params.n_bundle) * params.rep_pucch
        else:
            wait = (n - 1) * params.rep_pucch
        return (
            grants
            + params.n_dg2d
            + data
            + params.rep_pucch
            + max(params.dd2a_min, wait)
            + 2 * sw
        )
    if params.ack_bundling:
        raise InvalidInputError("feedback bundling applies to downlink cycles only")
    data = sum(params.pusch_reps)
    return p + max(params.ug2d_min, (n - 1) * p) + data + 2 * sw


def suf_closed_form(params: CycleParams, direction: Direction, mode: SchedulingMode) -> float:
    """SUF of one cycle: TBs per cycle over the cycle length."""
    length = cycle_length_closed_form(params, direction, mode)
    n = 1 if mode is SchedulingMode.LEGACY_FIXED else params.n_tbphc
    return n / length


def throughput(suf: float, tbs_bits: int, t_tb_s: float) -> float:
    """Useful data rate in bits/s for a utilization factor and TB size."""
    if tbs_bits <= 0 or t_tb_s <= 0:
        raise InvalidInputError("TB size and duration must be positive")
    return suf * (tbs_bits / t_tb_s)


def delay_power(profile: ProcessorProfile) -> float:
    """Extra power in watts spent recomputing scheduling delays.

    op_rate * ops-per-evaluation divided by the processor efficiency;
    MOPS/mW reconciles to 1e9 ops-per-second per watt.
    """
    return profile.op_rate_per_s * profile.op_count / (profile.efficiency_mops_per_mw * 1e9)

"""Delay calculus for HARQ cycles.

Positions and delays are integer subframes.  Fixed-delay positioning puts
the feedback (or the granted data) a constant number of subframes after
its anchor; the variable-delay formulas spread one cycle's transport
blocks so that data blocks and their feedback never collide on a
half-duplex UE.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

from .errors import InvalidInputError


class Direction(Enum):
    DL = "dl"
    UL = "ul"


class GrantMode(Enum):
    STBG = "stbg"  # one control grant per transport block
    MTBG = "mtbg"  # one control grant schedules the whole cycle


def _as_rep_tuple(value: int | Sequence[int], n_tbphc: int, name: str) -> tuple[int, ...]:
    if isinstance(value, int):
        reps = (value,) * n_tbphc
    else:
        reps = tuple(int(v) for v in value)
        if len(reps) != n_tbphc:
            raise InvalidInputError(
                f"{name} list must have one entry per TB ({n_tbphc}), got {len(reps)}"
            )
    if any(r < 1 for r in reps):
        raise InvalidInputError(f"{name} repetitions must be >= 1, got {reps}")
    return reps


@dataclass(frozen=True)
class CycleParams:
    """Everything needed to lay out one HARQ cycle.

    Data-channel repetitions may be a single count (uniform across the
    cycle's TBs) or a per-TB sequence of length ``n_tbphc``.
    """

    n_tbphc: int = 1
    rep_pdcch: int = 1
    rep_pdsch: int | tuple[int, ...] = 1
    rep_pusch: int | tuple[int, ...] = 1
    rep_pucch: int = 1
    n_switch: int = 1
    n_dg2d: int = 1
    dd2a_min: int = 3
    ug2d_min: int = 3
    n_bundle: int = 1
    grant_mode: GrantMode = GrantMode.STBG
    ack_bundling: bool = False

    def __post_init__(self) -> None:
        if self.n_tbphc < 1:
            raise InvalidInputError(f"n_tbphc must be >= 1, got {self.n_tbphc}")
        if self.n_bundle < 1:
            raise InvalidInputError(f"n_bundle must be >= 1, got {self.n_bundle}")
        for name in ("rep_pdcch", "rep_pucch"):
            if getattr(self, name) < 1:
                raise InvalidInputError(f"{name} must be >= 1")
        for name in ("n_switch", "n_dg2d", "dd2a_min", "ug2d_min"):
            if getattr(self, name) < 0:
                raise InvalidInputError(f"{name} must be >= 0")
        object.__setattr__(
            self, "rep_pdsch", _as_rep_tuple(self.rep_pdsch, self.n_tbphc, "rep_pdsch")
        )
        object.__setattr__(
            self, "rep_pusch", _as_rep_tuple(self.rep_pusch, self.n_tbphc, "rep_pusch")
        )

    @property
    def pdsch_reps(self) -> tuple[int, ...]:
        return self.rep_pdsch  # type: ignore[return-value]

    @property
    def pusch_reps(self) -> tuple[int, ...]:
        return self.rep_pusch  # type: ignore[return-value]

    def data_reps(self, direction: Direction) -> tuple[int, ...]:
        return self.pdsch_reps if direction is Direction.DL else self.pusch_reps


@dataclass(frozen=True)
class DelayPlan:
    """Per-TB scheduling delays for one cycle (data-to-feedback in the DL,
    grant-to-data in the UL), indexed by transmission order."""

    direction: Direction
    delays: tuple[int, ...] = field(default_factory=tuple)


def fixed_positions(direction: Direction, anchor_sf: int, fixed_delay: int) -> int:
    """Position scheduled a fixed delay after its anchor subframe.

    DL: feedback position from the last data subframe.  UL: first data
    subframe from the last grant subframe.
    """
    return anchor_sf + fixed_delay + 1


def required_harq_count(rtt_ms: float, t_tb_ms: float, rep_data: int) -> int:
    """Minimum number of HARQ processes that keeps a half-duplex sender
    busy across the whole round trip, given each TB occupies
    ``rep_data`` subframes of ``t_tb_ms`` each."""
    if rtt_ms <= 0 or t_tb_ms <= 0 or rep_data < 1:
        raise InvalidInputError("rtt, TB duration and repetitions must be positive")
    return math.ceil(rtt_ms / (rep_data * t_tb_ms))


def _check_position(params: CycleParams, j: int) -> None:
    if not 1 <= j <= params.n_tbphc:
        raise InvalidInputError(f"TB position {j} outside [1, {params.n_tbphc}]")


def dd2a_variable(params: CycleParams, j: int) -> int:
    """Data-to-feedback delay of the j-th DL TB: remaining data blocks,
    plus the feedback of all earlier TBs, plus the switching gap."""
    _check_position(params, j)
    reps = params.pdsch_reps
    remaining = sum(reps[j:])
    return remaining + (j - 1) * params.rep_pucch + params.n_switch


def ug2d_variable(params: CycleParams, j: int) -> int:
    """Grant-to-data delay of the j-th UL TB: remaining grant blocks,
    plus all earlier TBs' data, plus the switching gap."""
    _check_position(params, j)
    reps = params.pusch_reps
    return (
        (params.n_tbphc - j) * params.rep_pdcch
        + sum(reps[: j - 1])
        + params.n_switch
    )


def dd2a_bundled(params: CycleParams, j: int) -> int:
    """DL data-to-feedback delay when feedback is bundled: earlier TBs
    contribute one feedback block per bundle group instead of one each."""
    _check_position(params, j)
    reps = params.pdsch_reps
    remaining = sum(reps[j:])
    groups_before = (j - 1) // params.n_bundle
    return remaining + groups_before * params.rep_pucch + params.n_switch


def delay_plan(params: CycleParams, direction: Direction) -> DelayPlan:
    """All per-TB delays for one cycle under the configured scheme."""
    if direction is Direction.DL:
        formula = dd2a_bundled if params.ack_bundling else dd2a_variable
    else:
        if params.ack_bundling:
            raise InvalidInputError("feedback bundling applies to downlink cycles only")
        formula = ug2d_variable
    return DelayPlan(
        direction=direction,
        delays=tuple(formula(params, j) for j in range(1, params.n_tbphc + 1)),
    )


def harq_for_tbphc(params: CycleParams, rtt_ms: float, t_tb_ms: float, ack_proc_sf: int) -> int:
    """HARQ processes needed to sustain ``n_tbphc`` TBs per cycle across
    the round trip, including the scheduler's feedback-processing time
    (``ack_proc_sf`` subframes) before a process can be re-granted."""
    if rtt_ms < 0 or t_tb_ms <= 0 or ack_proc_sf < 0:
        raise InvalidInputError("rtt and ack processing must be >= 0, TB duration positive")
    n = params.n_tbphc
    data_and_feedback = sum(params.pdsch_reps) + n * params.rep_pucch
    cycle_ms = t_tb_ms * (
        params.rep_pdcch + params.n_dg2d + data_and_feedback
    ) + 2.0 * params.n_switch * t_tb_ms
    wait_ms = rtt_ms + ack_proc_sf * t_tb_ms
    return math.ceil(n * (1.0 + wait_ms / cycle_ms))

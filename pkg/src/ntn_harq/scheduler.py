"""Subframe timeline construction and checking for HARQ cycles.

Timelines are UE-perspective by default: each 1 ms slot holds at most one
activity on a half-duplex UE, and that single-occupancy rule is exactly
what conflict detection checks.  The legacy builder lays transport blocks
out contiguously with the fixed delays and reports any slot claimed twice;
the proposed builder uses the per-TB variable delays and is conflict-free
by construction.
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import Enum

from .errors import InvalidInputError, MinDelayViolationError
from .harq import CycleParams, Direction, GrantMode, delay_plan, fixed_positions

SF_MS = 1.0  # one subframe is one millisecond


class Activity(Enum):
    RX_PDCCH = "RxPDCCH"
    RX_PDSCH = "RxPDSCH"
    TX_PUCCH = "TxPUCCH"
    TX_PUSCH = "TxPUSCH"
    SWITCH = "Switch"
    IDLE = "Idle"


RX_ACTIVITIES = frozenset({Activity.RX_PDCCH, Activity.RX_PDSCH})
TX_ACTIVITIES = frozenset({Activity.TX_PUCCH, Activity.TX_PUSCH})


class Perspective(Enum):
    UE = "UE"
    BS = "BS"


@dataclass(frozen=True)
class SlotUse:
    """One activity claiming one subframe."""

    activity: Activity
    tb_index: int | None = None
    harq_id: int | None = None


@dataclass
class SubframeTimeline:
    """Ordered subframe slots; an empty slot is idle, two or more uses in
    one slot is the half-duplex conflict.  ``origin`` offsets slot list
    positions to time indices (BS views can start before the UE's SF 0)."""

    slots: list[tuple[SlotUse, ...]]
    perspective: Perspective = Perspective.UE
    cycle_boundaries: tuple[int, ...] = (0,)
    origin: int = 0

    def __len__(self) -> int:
        return len(self.slots)

    def uses(self) -> list[tuple[int, SlotUse]]:
        """All (time_index, use) pairs in slot order."""
        out = []
        for pos, uses in enumerate(self.slots):
            for use in uses:
                out.append((self.origin + pos, use))
        return out


@dataclass(frozen=True)
class Conflict:
    sf_index: int
    activities: tuple[str, ...]
    tb_indices: tuple[int | None, ...]
    kind: str = "double-booking"


@dataclass(frozen=True)
class ConflictReport:
    """Empty ``conflicts`` means the schedule is feasible for an HD-FDD UE.

    ``attempt`` carries the laid-out (possibly double-booked) timeline so
    callers can render what was tried.
    """

    conflicts: tuple[Conflict, ...]
    attempt: SubframeTimeline | None = None

    def __bool__(self) -> bool:
        return bool(self.conflicts)


# ---------------------------------------------------------------------------
# layout assembly


@dataclass(frozen=True)
class _Block:
    start: int
    width: int
    use: SlotUse

    @property
    def end(self) -> int:
        return self.start + self.width - 1


def _grid_from_blocks(blocks: list[_Block]) -> list[list[SlotUse]]:
    length = max(b.end for b in blocks) + 1
    grid: list[list[SlotUse]] = [[] for _ in range(length)]
    for block in blocks:
        for sf in range(block.start, block.start + block.width):
            grid[sf].append(block.use)
    return grid


def _collisions(grid: list[list[SlotUse]]) -> list[Conflict]:
    found = []
    for sf, uses in enumerate(grid):
        if len(uses) >= 2:
            found.append(
                Conflict(
                    sf_index=sf,
                    activities=tuple(u.activity.value for u in uses),
                    tb_indices=tuple(u.tb_index for u in uses),
                )
            )
    return found


def _insert_switches(grid: list[list[SlotUse]], n_switch: int) -> None:
    """Label free gap slots as Switch at every Rx<->Tx transition, plus a
    trailing switch block after the last activity.  Never overwrites an
    occupied slot; shortfalls are left for validate() to report."""
    occupied = [(sf, uses[0]) for sf, uses in enumerate(grid) if uses]
    switch_use = SlotUse(Activity.SWITCH)
    for (sf_a, use_a), (sf_b, use_b) in zip(occupied, occupied[1:]):
        a_rx = use_a.activity in RX_ACTIVITIES
        b_rx = use_b.activity in RX_ACTIVITIES
        if a_rx == b_rx:
            continue
        gap = range(sf_a + 1, sf_b)
        free = [sf for sf in gap if not grid[sf]]
        for sf in free[-n_switch:] if n_switch else []:
            grid[sf].append(switch_use)
    for _ in range(n_switch):
        grid.append([switch_use])


def _finish(grid: list[list[SlotUse]], perspective: Perspective = Perspective.UE) -> SubframeTimeline:
    return SubframeTimeline(
        slots=[tuple(uses) for uses in grid],
        perspective=perspective,
        cycle_boundaries=(0,),
    )


# ---------------------------------------------------------------------------
# legacy fixed-delay cycles


def _legacy_blocks(params: CycleParams, direction: Direction) -> list[_Block]:
    p = params.rep_pdcch
    blocks = []
    if direction is Direction.DL:
        reps = params.pdsch_reps
        blocks.append(_Block(0, p, SlotUse(Activity.RX_PDCCH)))
        start = p + params.n_dg2d
        ends = []
        for j, r in enumerate(reps, 1):
            blocks.append(_Block(start, r, SlotUse(Activity.RX_PDSCH, j, j)))
            ends.append(start + r - 1)
            start += r
        for j, data_end in enumerate(ends, 1):
            ack = fixed_positions(direction, data_end, params.dd2a_min)
            blocks.append(_Block(ack, params.rep_pucch, SlotUse(Activity.TX_PUCCH, j, j)))
    else:
        reps = params.pusch_reps
        grant_start = 0
        for j, r in enumerate(reps, 1):
            blocks.append(_Block(grant_start, p, SlotUse(Activity.RX_PDCCH, j, j)))
            data = fixed_positions(direction, grant_start + p - 1, params.ug2d_min)
            blocks.append(_Block(data, r, SlotUse(Activity.TX_PUSCH, j, j)))
            # grants are paced at the data period so the granted blocks
            # land back to back
            grant_start += r
    return blocks


def build_legacy_cycle(
    params: CycleParams, direction: Direction
) -> SubframeTimeline | ConflictReport:
    """Lay out one fixed-delay cycle.

    Transport blocks are scheduled contiguously and their feedback (DL) or
    granted data (UL) sits at the fixed delay.  If any two activities claim
    the same slot the attempt is returned as a ConflictReport instead of a
    timeline; with a single TB the cycle always succeeds.
    """
    grid = _grid_from_blocks(_legacy_blocks(params, direction))
    conflicts = _collisions(grid)
    if conflicts:
        attempt = _finish(grid)
        return ConflictReport(conflicts=tuple(conflicts), attempt=attempt)
    _insert_switches(grid, params.n_switch)
    return _finish(grid)


# ---------------------------------------------------------------------------
# proposed variable-delay cycles


def _ack_wait_sf(params: CycleParams) -> int:
    """Feedback subframes a DL TB may have to wait out before its own:
    one block per earlier TB, or per earlier bundle group."""
    n = params.n_tbphc
    if params.ack_bundling:
        return ((n - 1) // params.n_bundle) * params.rep_pucch
    return (n - 1) * params.rep_pucch


def build_proposed_cycle(params: CycleParams, direction: Direction) -> SubframeTimeline:
    """Lay out one variable-delay cycle.

    Grant blocks come first (one per TB under STBG, one per cycle under
    MTBG), data blocks sit back to back, and every feedback (DL) or data
    (UL) position is its anchor plus the per-TB variable delay.  When the
    packed delay of the tightest TB falls under the mandatory minimum, all
    delays are padded by the shortfall, which is exactly the guard term of
    the closed-form cycle length.

    Raises MinDelayViolationError when some TB's realized delay stays
    below the minimum even after that padding.
    """
    n = params.n_tbphc
    p = params.rep_pdcch
    sw = params.n_switch
    n_grants = 1 if params.grant_mode is GrantMode.MTBG else n
    plan = delay_plan(params, direction)
    blocks = []
    for g in range(n_grants):
        tb = None if params.grant_mode is GrantMode.MTBG else g + 1
        blocks.append(_Block(g * p, p, SlotUse(Activity.RX_PDCCH, tb, tb)))

    if direction is Direction.DL:
        pad = max(0, params.dd2a_min - _ack_wait_sf(params))
        start = n_grants * p + params.n_dg2d
        placed_acks = set()
        for j, r in enumerate(params.pdsch_reps, 1):
            blocks.append(_Block(start, r, SlotUse(Activity.RX_PDSCH, j, j)))
            data_end = start + r - 1
            realized = plan.delays[j - 1] + pad
            if realized < params.dd2a_min:
                raise MinDelayViolationError(
                    f"TB {j} data-to-feedback delay {realized} < minimum {params.dd2a_min}"
                )
            ack = fixed_positions(direction, data_end, realized)
            if params.ack_bundling:
                if ack not in placed_acks:  # one block acknowledges the bundle
                    blocks.append(_Block(ack, params.rep_pucch, SlotUse(Activity.TX_PUCCH)))
                    placed_acks.add(ack)
            else:
                blocks.append(_Block(ack, params.rep_pucch, SlotUse(Activity.TX_PUCCH, j, j)))
            start += r
    else:
        pad = max(0, params.ug2d_min - (n - 1) * p)
        for j, r in enumerate(params.pusch_reps, 1):
            # delays are defined against the j-th grant's end; an MTBG
            # cycle keeps the same clock, idling where those grants would
            # sit, so the anchor is the same in both modes
            anchor = j * p - 1
            realized = plan.delays[j - 1] + pad
            if realized < params.ug2d_min:
                raise MinDelayViolationError(
                    f"TB {j} grant-to-data delay {realized} < minimum {params.ug2d_min}"
                )
            blocks.append(
                _Block(fixed_positions(direction, anchor, realized), r, SlotUse(Activity.TX_PUSCH, j, j))
            )

    grid = _grid_from_blocks(blocks)
    conflicts = _collisions(grid)
    if conflicts:  # construction guarantees this never happens
        raise AssertionError(f"variable-delay layout double-booked: {conflicts[0]}")
    _insert_switches(grid, sw)
    return _finish(grid)


# ---------------------------------------------------------------------------
# checking


def _single_uses(timeline: SubframeTimeline) -> list[tuple[int, SlotUse]]:
    out = []
    for pos, uses in enumerate(timeline.slots):
        if len(uses) == 1:
            out.append((pos, uses[0]))
    return out


def validate(timeline: SubframeTimeline, params: CycleParams) -> ConflictReport:
    """Report every feasibility defect in a UE-perspective timeline:
    double-booked slots, data/feedback or grant/data separations below the
    mandatory minimums, and Rx<->Tx transitions short of switch slots."""
    if timeline.perspective is not Perspective.UE:
        raise InvalidInputError("validate() checks UE-perspective timelines")
    findings: list[Conflict] = []
    for pos, uses in enumerate(timeline.slots):
        if len(uses) >= 2:
            findings.append(
                Conflict(
                    sf_index=pos,
                    activities=tuple(u.activity.value for u in uses),
                    tb_indices=tuple(u.tb_index for u in uses),
                )
            )

    occupied = [
        (pos, use)
        for pos, use in _single_uses(timeline)
        if use.activity not in (Activity.IDLE, Activity.SWITCH)
    ]
    for (sf_a, use_a), (sf_b, use_b) in zip(occupied, occupied[1:]):
        a_rx = use_a.activity in RX_ACTIVITIES
        b_rx = use_b.activity in RX_ACTIVITIES
        if a_rx == b_rx:
            continue
        n_sw = sum(
            1
            for sf in range(sf_a + 1, sf_b)
            for use in timeline.slots[sf]
            if use.activity is Activity.SWITCH
        )
        if n_sw < params.n_switch:
            findings.append(
                Conflict(
                    sf_index=sf_b,
                    activities=(use_a.activity.value, use_b.activity.value),
                    tb_indices=(use_a.tb_index, use_b.tb_index),
                    kind="missing-switch",
                )
            )

    findings.extend(_delay_findings(timeline, params))
    findings.sort(key=lambda c: (c.sf_index, c.kind))
    return ConflictReport(conflicts=tuple(findings))


def _delay_findings(timeline: SubframeTimeline, params: CycleParams) -> list[Conflict]:
    uses = _single_uses(timeline)
    findings = []
    pdsch = [(pos, u) for pos, u in uses if u.activity is Activity.RX_PDSCH]
    pusch = [(pos, u) for pos, u in uses if u.activity is Activity.TX_PUSCH]
    if pdsch:
        pucch_runs = _runs(uses, Activity.TX_PUCCH)
        tagged = {
            u.tb_index: pos
            for pos, u in uses
            if u.activity is Activity.TX_PUCCH and u.tb_index is not None
        }
        for j in sorted({u.tb_index for _, u in pdsch if u.tb_index is not None}):
            data_end = max(pos for pos, u in pdsch if u.tb_index == j)
            if j in tagged:
                ack_start = tagged[j]
            else:
                group = (j - 1) // params.n_bundle
                if group >= len(pucch_runs):
                    continue
                ack_start = pucch_runs[group][0]
            sep = ack_start - data_end - 1
            if sep < params.dd2a_min:
                findings.append(
                    Conflict(
                        sf_index=ack_start,
                        activities=(Activity.RX_PDSCH.value, Activity.TX_PUCCH.value),
                        tb_indices=(j, j),
                        kind="min-delay",
                    )
                )
    if pusch:
        grants = [(pos, u) for pos, u in uses if u.activity is Activity.RX_PDCCH]
        shared_end = max((pos for pos, _ in grants), default=None)
        for j in sorted({u.tb_index for _, u in pusch if u.tb_index is not None}):
            data_start = min(pos for pos, u in pusch if u.tb_index == j)
            tagged_grant = [pos for pos, u in grants if u.tb_index == j]
            grant_end = max(tagged_grant) if tagged_grant else shared_end
            if grant_end is None:
                continue
            sep = data_start - grant_end - 1
            if sep < params.ug2d_min:
                findings.append(
                    Conflict(
                        sf_index=data_start,
                        activities=(Activity.RX_PDCCH.value, Activity.TX_PUSCH.value),
                        tb_indices=(j, j),
                        kind="min-delay",
                    )
                )
    return findings


def _runs(uses: list[tuple[int, SlotUse]], activity: Activity) -> list[tuple[int, int]]:
    """Maximal consecutive runs of one activity as (start, end) pairs."""
    positions = sorted(pos for pos, u in uses if u.activity is activity)
    runs = []
    for pos in positions:
        if runs and pos == runs[-1][1] + 1:
            runs[-1] = (runs[-1][0], pos)
        else:
            runs.append((pos, pos))
    return runs


# ---------------------------------------------------------------------------
# BS-side view


def bs_view(timeline: SubframeTimeline, rtt_ms: float) -> SubframeTimeline:
    """Shift a UE timeline to the BS clock: downlink activities happen
    half the round trip earlier at the BS, uplink arrivals half later.
    Switch and idle slots stay on the shared wall clock."""
    if timeline.perspective is not Perspective.UE:
        raise InvalidInputError("bs_view() expects a UE-perspective timeline")
    if rtt_ms < 0:
        raise InvalidInputError("rtt must be >= 0")
    shift = math.ceil(rtt_ms / 2.0 / SF_MS)
    length = len(timeline.slots) + 2 * shift
    origin = timeline.origin - shift
    grid: list[list[SlotUse]] = [[] for _ in range(length)]
    for pos, uses in enumerate(timeline.slots):
        time = timeline.origin + pos
        for use in uses:
            if use.activity in RX_ACTIVITIES:
                t = time - shift
            elif use.activity in TX_ACTIVITIES:
                t = time + shift
            else:
                t = time
            grid[t - origin].append(use)
    return SubframeTimeline(
        slots=[tuple(uses) for uses in grid],
        perspective=Perspective.BS,
        cycle_boundaries=timeline.cycle_boundaries,
        origin=origin,
    )


# ---------------------------------------------------------------------------
# plain-text export


def export_timeline(timeline: SubframeTimeline) -> str:
    """One ``index,perspective,activity,tb_index,harq_id`` line per SF
    (idle slots export as Idle; double-booked slots export one line per
    claiming activity)."""
    lines = []
    view = timeline.perspective.value
    for pos, uses in enumerate(timeline.slots):
        index = timeline.origin + pos
        if not uses:
            lines.append(f"{index},{view},Idle,,")
            continue
        for use in uses:
            tb = "" if use.tb_index is None else str(use.tb_index)
            hid = "" if use.harq_id is None else str(use.harq_id)
            lines.append(f"{index},{view},{use.activity.value},{tb},{hid}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Monte Carlo goodput


@dataclass(frozen=True)
class GoodputResult:
    goodput_bps: float
    retransmission_rate: float


def monte_carlo_goodput(
    params: CycleParams,
    direction: Direction,
    bler_per_attempt: list[float],
    n_cycles: int,
    seed: int,
    tbs_bits: int,
    t_tb_s: float = 0.001,
) -> GoodputResult:
    """Run ``n_cycles`` of the variable-delay schedule with per-attempt
    error probabilities.

    Attempt k of a TB fails with probability ``bler_per_attempt[k]`` (the
    last entry repeats for later attempts).  Failed TBs are rescheduled
    into fresh TB slots of subsequent cycles ahead of new traffic, so the
    cycle geometry stays identical to the analytical model.
    """
    if not bler_per_attempt:
        raise InvalidInputError("bler_per_attempt must not be empty")
    if any(not 0.0 <= p <= 1.0 for p in bler_per_attempt):
        raise InvalidInputError("attempt error probabilities must lie in [0, 1]")
    if n_cycles < 1:
        raise InvalidInputError("n_cycles must be >= 1")
    cycle = build_proposed_cycle(params, direction)
    cycle_len = len(cycle)
    n_slots = params.n_tbphc
    rng = random.Random(seed)
    pending: list[int] = []  # attempt indices of TBs awaiting retransmission
    successes = 0
    attempts = 0
    retransmissions = 0
    for _ in range(n_cycles):
        failed: list[int] = []
        for _ in range(n_slots):
            if pending:
                attempt = pending.pop(0)
                retransmissions += 1
            else:
                attempt = 0
            attempts += 1
            p_fail = bler_per_attempt[min(attempt, len(bler_per_attempt) - 1)]
            if rng.random() < p_fail:
                failed.append(attempt + 1)
            else:
                successes += 1
        pending.extend(failed)
    success_per_slot = successes / (n_cycles * cycle_len)
    goodput = success_per_slot * (tbs_bits / t_tb_s)
    rate = retransmissions / attempts if attempts else 0.0
    return GoodputResult(goodput_bps=goodput, retransmission_rate=rate)

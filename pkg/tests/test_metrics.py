import pytest

from ntn_harq.errors import InvalidInputError
from ntn_harq.harq import CycleParams, Direction, GrantMode
from ntn_harq.metrics import (
    DELAY_OP_COUNTS,
    ProcessorProfile,
    SchedulingMode,
    cycle_length_closed_form,
    delay_power,
    suf_closed_form,
    suf_generic,
    throughput,
)

LEGACY = SchedulingMode.LEGACY_FIXED
PROPOSED = SchedulingMode.PROPOSED_VARIABLE


# --- generic SUF ----------------------------------------------------------


@pytest.mark.parametrize(
    "n_data,n_rep,n_hc,expected",
    [(1, 4, 11, 1 / 44), (7, 1, 7, 1.0), (1, 1, 8, 0.125)],
)
def test_suf_generic(n_data, n_rep, n_hc, expected):
    assert suf_generic(n_data, n_rep, n_hc) == pytest.approx(expected, rel=1e-12)


def test_suf_generic_validation():
    with pytest.raises(InvalidInputError):
        suf_generic(1, 0, 8)
    with pytest.raises(InvalidInputError):
        suf_generic(0, 1, 8)
    with pytest.raises(InvalidInputError):
        suf_generic(9, 1, 8)  # more data SFs than the cycle can hold


# --- closed forms -----------------------------------------------------------


def test_legacy_ul_closed_form():
    params = CycleParams(n_tbphc=1, rep_pdcch=1, rep_pusch=12, ug2d_min=3, n_switch=1)
    assert suf_closed_form(params, Direction.UL, LEGACY) == pytest.approx(1 / 17)


def test_legacy_dl_closed_form():
    params = CycleParams(
        n_tbphc=1, rep_pdcch=1, n_dg2d=1, rep_pdsch=4, rep_pucch=1, dd2a_min=3, n_switch=1
    )
    assert suf_closed_form(params, Direction.DL, LEGACY) == pytest.approx(1 / 11)


def test_proposed_ul_closed_form():
    params = CycleParams(n_tbphc=5, rep_pdcch=1, rep_pusch=12, ug2d_min=3, n_switch=1)
    assert suf_closed_form(params, Direction.UL, PROPOSED) == pytest.approx(5 / 67)


def test_proposed_dl_closed_form_example():
    params = CycleParams(
        n_tbphc=4, rep_pdcch=1, n_dg2d=1, rep_pdsch=4, rep_pucch=1, dd2a_min=3,
        n_switch=1, grant_mode=GrantMode.MTBG,
    )
    assert cycle_length_closed_form(params, Direction.DL, PROPOSED) == 24


def test_single_tb_closed_form_consistent_with_generic():
    params = CycleParams(n_tbphc=1, rep_pdcch=1, rep_pusch=12, ug2d_min=3, n_switch=1)
    length = cycle_length_closed_form(params, Direction.UL, LEGACY)
    assert suf_closed_form(params, Direction.UL, LEGACY) == pytest.approx(
        suf_generic(12, 12, length)
    )


def test_legacy_closed_form_requires_single_tb():
    params = CycleParams(n_tbphc=2, rep_pusch=12)
    with pytest.raises(InvalidInputError):
        suf_closed_form(params, Direction.UL, LEGACY)


def test_closed_form_rejects_ul_bundling():
    params = CycleParams(n_tbphc=2, ack_bundling=True, n_bundle=2)
    with pytest.raises(InvalidInputError):
        suf_closed_form(params, Direction.UL, PROPOSED)


def test_stbg_dl_counts_per_tb_grants():
    base = dict(n_tbphc=4, rep_pdcch=2, n_dg2d=1, rep_pdsch=4, rep_pucch=1,
                dd2a_min=3, n_switch=1)
    mtbg = CycleParams(grant_mode=GrantMode.MTBG, **base)
    stbg = CycleParams(grant_mode=GrantMode.STBG, **base)
    diff = cycle_length_closed_form(stbg, Direction.DL, PROPOSED) - cycle_length_closed_form(
        mtbg, Direction.DL, PROPOSED
    )
    assert diff == (4 - 1) * 2


def test_ul_closed_form_mode_independent():
    base = dict(n_tbphc=5, rep_pdcch=2, rep_pusch=12, ug2d_min=3, n_switch=1)
    mtbg = CycleParams(grant_mode=GrantMode.MTBG, **base)
    stbg = CycleParams(grant_mode=GrantMode.STBG, **base)
    assert cycle_length_closed_form(stbg, Direction.UL, PROPOSED) == cycle_length_closed_form(
        mtbg, Direction.UL, PROPOSED
    )


def test_bundling_shortens_dl_cycle():
    base = dict(n_tbphc=8, rep_pdcch=1, n_dg2d=1, rep_pdsch=4, rep_pucch=2,
                dd2a_min=3, n_switch=1, grant_mode=GrantMode.MTBG)
    plain = CycleParams(**base)
    bundled = CycleParams(ack_bundling=True, n_bundle=4, **base)
    assert cycle_length_closed_form(bundled, Direction.DL, PROPOSED) < cycle_length_closed_form(
        plain, Direction.DL, PROPOSED
    )
    # bundle of one changes nothing
    bundle_one = CycleParams(ack_bundling=True, n_bundle=1, **base)
    assert cycle_length_closed_form(bundle_one, Direction.DL, PROPOSED) == cycle_length_closed_form(
        plain, Direction.DL, PROPOSED
    )


# --- throughput --------------------------------------------------------------


@pytest.mark.parametrize(
    "suf,tbs,t_tb,expected",
    [
        (1.0, 504, 0.001, 504000.0),
        (5 / 67, 504, 0.001, 37611.9),
        (1 / 17, 504, 0.001, 29647.1),
    ],
)
def test_throughput(suf, tbs, t_tb, expected):
    assert throughput(suf, tbs, t_tb) == pytest.approx(expected, abs=0.1)


def test_throughput_validation():
    with pytest.raises(InvalidInputError):
        throughput(0.5, 0, 0.001)
    with pytest.raises(InvalidInputError):
        throughput(0.5, 504, 0)


# --- monotonicity ------------------------------------------------------------


def test_proposed_suf_non_decreasing_in_tbphc():
    for rep in (4, 12, 24):
        sufs = [
            suf_closed_form(
                CycleParams(n_tbphc=n, rep_pdcch=1, rep_pusch=rep, ug2d_min=3, n_switch=1),
                Direction.UL,
                PROPOSED,
            )
            for n in range(1, 9)
        ]
        assert all(b >= a - 1e-12 for a, b in zip(sufs, sufs[1:]))


def test_proposed_beats_legacy_when_reps_exceed_delay():
    for n in range(2, 9):
        for rep in (4, 12, 24):
            proposed = suf_closed_form(
                CycleParams(n_tbphc=n, rep_pdcch=1, rep_pusch=rep, ug2d_min=3, n_switch=1),
                Direction.UL,
                PROPOSED,
            )
            legacy = suf_closed_form(
                CycleParams(n_tbphc=1, rep_pdcch=1, rep_pusch=rep, ug2d_min=3, n_switch=1),
                Direction.UL,
                LEGACY,
            )
            assert proposed > legacy


def test_gain_non_increasing_in_data_reps():
    def gain(rep, n=6):
        proposed = suf_closed_form(
            CycleParams(n_tbphc=n, rep_pdcch=1, rep_pusch=rep, ug2d_min=3, n_switch=1),
            Direction.UL,
            PROPOSED,
        )
        legacy = suf_closed_form(
            CycleParams(n_tbphc=1, rep_pdcch=1, rep_pusch=rep, ug2d_min=3, n_switch=1),
            Direction.UL,
            LEGACY,
        )
        return proposed / legacy - 1.0

    gains = [gain(rep) for rep in (1, 2, 4, 8, 12, 16, 24, 32)]
    assert all(b <= a + 1e-12 for a, b in zip(gains, gains[1:]))


# --- delay-computation power --------------------------------------------------


def test_delay_op_counts_documented():
    assert DELAY_OP_COUNTS == {"dd2a": 6, "ug2d": 6, "dd2a_bundled": 8}


@pytest.mark.parametrize(
    "ops,efficiency,expected_nw",
    [
        (6, 970.0, 6.19),
        (8, 144.0, 55.6),
    ],
)
def test_delay_power_values(ops, efficiency, expected_nw):
    profile = ProcessorProfile(
        efficiency_mops_per_mw=efficiency, op_rate_per_s=1000.0, op_count=ops
    )
    assert delay_power(profile) * 1e9 == pytest.approx(expected_nw, abs=0.05)


def test_delay_power_zero_ops():
    profile = ProcessorProfile(efficiency_mops_per_mw=144.0, op_rate_per_s=1000.0, op_count=0)
    assert delay_power(profile) == 0.0


def test_processor_profile_validation():
    with pytest.raises(InvalidInputError):
        ProcessorProfile(efficiency_mops_per_mw=0, op_rate_per_s=1000, op_count=6)
    with pytest.raises(InvalidInputError):
        ProcessorProfile(efficiency_mops_per_mw=144, op_rate_per_s=1000, op_count=-1)

"""BLER lookup tables and repetition selection.

Curves are consumed as data, one waterfall per (TBS, repetition count):
interpolation is log-linear in BLER against SNR in dB and clamps at the
curve endpoints.  The bundled table anchors the PUSCH operating points
used by the scenario runner; regenerating the underlying physical-layer
simulation is out of scope.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, TextIO

from .errors import CurveNotFoundError, InfeasibleLinkError, InvalidInputError

DEFAULT_TABLE_RESOURCE = "bler_pusch_ntn_tdla.csv"


@dataclass(frozen=True)
class BlerCurve:
    """One BLER-vs-SNR waterfall for a fixed (TBS, repetitions) pair."""

    tbs: int
    n_rep: int
    points: tuple[tuple[float, float], ...]  # (snr_db, bler), ascending snr


@dataclass(frozen=True)
class BlerTable:
    """Immutable set of BLER curves keyed by (TBS, repetitions)."""

    curves: dict[tuple[int, int], BlerCurve]

    def reps_for(self, tbs: int) -> list[int]:
        """Available repetition counts for a TBS, ascending."""
        return sorted(n for (t, n) in self.curves if t == tbs)

    def curve(self, tbs: int, n_rep: int) -> BlerCurve:
        try:
            return self.curves[(tbs, n_rep)]
        except KeyError:
            raise CurveNotFoundError(f"no BLER curve for tbs={tbs}, n_rep={n_rep}") from None


def _interp_log(points: tuple[tuple[float, float], ...], snr: float) -> float:
    if snr <= points[0][0]:
        return points[0][1]
    if snr >= points[-1][0]:
        return points[-1][1]
    for (s0, b0), (s1, b1) in zip(points, points[1:]):
        if s0 <= snr <= s1:
            t = (snr - s0) / (s1 - s0)
            return 10.0 ** ((1.0 - t) * math.log10(b0) + t * math.log10(b1))
    raise AssertionError("unreachable: snr inside curve range but no bracket found")


def bler_at(table: BlerTable, tbs: int, n_rep: int, snr: float) -> float:
    """Interpolated BLER for one curve, clamped outside the tabulated range."""
    return _interp_log(table.curve(tbs, n_rep).points, snr)


def select_repetitions(table: BlerTable, tbs: int, snr: float, target_bler: float) -> int:
    """Smallest available repetition count whose BLER at ``snr`` meets the target.

    Raises InfeasibleLinkError when even the largest tabulated repetition
    count misses the target, i.e. the link is too weak for this TBS.
    """
    reps = table.reps_for(tbs)
    if not reps:
        raise CurveNotFoundError(f"no BLER curves for tbs={tbs}")
    for n_rep in reps:
        if bler_at(table, tbs, n_rep, snr) <= target_bler:
            return n_rep
    raise InfeasibleLinkError(
        f"no repetition count reaches BLER {target_bler} at {snr:.1f} dB for tbs={tbs}"
    )


def spectral_efficiency(tbs: int, n_rep: int) -> float:
    """Payload bits per PRB-subframe when one TB spans one PRB per repetition."""
    if n_rep < 1:
        raise InvalidInputError(f"n_rep must be >= 1, got {n_rep}")
    return tbs / n_rep


def _validate_curve(curve: BlerCurve) -> None:
    if len(curve.points) < 1:
        raise InvalidInputError(f"empty curve for tbs={curve.tbs}, n_rep={curve.n_rep}")
    snrs = [s for s, _ in curve.points]
    blers = [b for _, b in curve.points]
    if any(s1 <= s0 for s0, s1 in zip(snrs, snrs[1:])):
        raise InvalidInputError(
            f"SNR points must strictly increase (tbs={curve.tbs}, n_rep={curve.n_rep})"
        )
    if any(not 0.0 < b <= 1.0 for b in blers):
        raise InvalidInputError(
            f"BLER values must lie in (0, 1] (tbs={curve.tbs}, n_rep={curve.n_rep})"
        )
    if any(b1 > b0 for b0, b1 in zip(blers, blers[1:])):
        raise InvalidInputError(
            f"BLER must be non-increasing in SNR (tbs={curve.tbs}, n_rep={curve.n_rep})"
        )


def _validate_cross_rep(table: BlerTable) -> None:
    # More redundancy must never raise the BLER.  Piecewise log-linear
    # curves only need checking at the union of their breakpoints.
    by_tbs: dict[int, list[BlerCurve]] = {}
    for curve in table.curves.values():
        by_tbs.setdefault(curve.tbs, []).append(curve)
    for tbs, curves in by_tbs.items():
        curves.sort(key=lambda c: c.n_rep)
        for low, high in zip(curves, curves[1:]):
            grid = sorted({s for s, _ in low.points} | {s for s, _ in high.points})
            for snr in grid:
                if _interp_log(high.points, snr) > _interp_log(low.points, snr) + 1e-12:
                    raise InvalidInputError(
                        f"BLER not non-increasing in n_rep at tbs={tbs}, snr={snr} "
                        f"(n_rep {low.n_rep} -> {high.n_rep})"
                    )


def load_bler_table(source: str | Path | TextIO | Iterable[str]) -> BlerTable:
    """Parse a ``tbs,n_rep,snr_db,bler`` CSV into a validated BlerTable.

    ``source`` may be a path, an open file, or an iterable of lines.
    Lines starting with ``#`` and blank lines are ignored.
    """
    if isinstance(source, (str, Path)):
        lines: Iterable[str] = Path(source).read_text().splitlines()
    elif hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        lines = source
    rows: dict[tuple[int, int], list[tuple[float, float]]] = {}
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise InvalidInputError(f"line {lineno}: expected 'tbs,n_rep,snr_db,bler', got {line!r}")
        try:
            tbs, n_rep = int(parts[0]), int(parts[1])
            snr, bler = float(parts[2]), float(parts[3])
        except ValueError as exc:
            raise InvalidInputError(f"line {lineno}: {exc}") from None
        rows.setdefault((tbs, n_rep), []).append((snr, bler))
    curves = {}
    for (tbs, n_rep), points in rows.items():
        curve = BlerCurve(tbs=tbs, n_rep=n_rep, points=tuple(sorted(points)))
        _validate_curve(curve)
        curves[(tbs, n_rep)] = curve
    table = BlerTable(curves=curves)
    _validate_cross_rep(table)
    return table


def default_table() -> BlerTable:
    """The packaged NTN TDL-A PUSCH table."""
    text = resources.files("ntn_harq").joinpath("data", DEFAULT_TABLE_RESOURCE).read_text()
    return load_bler_table(text.splitlines())

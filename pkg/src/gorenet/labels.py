"""Six-valued qualitative labels and the Sat/Den view.

The evaluation labels are S, PS, C, U, PD, D.  For deterministic min/max
combination they are totally ordered D < PD < U < C < PS < S, but U and C
are not truly comparable: whenever a min or max would be decided by the
U-vs-C comparison the combinators report an ambiguity instead of silently
picking a side.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable


class QualLabel(enum.Enum):
    S = "S"
    PS = "PS"
    C = "C"
    U = "U"
    PD = "PD"
    D = "D"

    def __str__(self) -> str:
        return self.value


# Total order used for min/max: index 0 is weakest.
LABEL_ORDER: tuple[QualLabel, ...] = (
    QualLabel.D,
    QualLabel.PD,
    QualLabel.U,
    QualLabel.C,
    QualLabel.PS,
    QualLabel.S,
)

_RANK = {label: i for i, label in enumerate(LABEL_ORDER)}


def rank(label: QualLabel) -> int:
    return _RANK[label]


def parse_label(text: str) -> QualLabel:
    try:
        return QualLabel(text.strip())
    except ValueError:
        raise ValueError(f"unknown label {text!r}; expected one of "
                         + ", ".join(l.value for l in LABEL_ORDER)) from None


HELP_MAP: dict[QualLabel, QualLabel] = {
    QualLabel.S: QualLabel.PS,
    QualLabel.PS: QualLabel.PS,
    QualLabel.C: QualLabel.C,
    QualLabel.U: QualLabel.U,
    QualLabel.PD: QualLabel.PD,
    QualLabel.D: QualLabel.PD,
}

HURT_MAP: dict[QualLabel, QualLabel] = {
    QualLabel.S: QualLabel.PD,
    QualLabel.PS: QualLabel.PD,
    QualLabel.C: QualLabel.C,
    QualLabel.U: QualLabel.U,
    QualLabel.PD: QualLabel.PS,
    QualLabel.D: QualLabel.PS,
}


@dataclass(frozen=True)
class Combined:
    """Result of an ordered combination, flagging U-vs-C ambiguity."""

    label: QualLabel
    ambiguous: bool


def _extremum(labels: Iterable[QualLabel], lowest: bool) -> Combined:
    pool = list(labels)
    if not pool:
        raise ValueError("cannot combine an empty label set")
    picked = min(pool, key=rank) if lowest else max(pool, key=rank)
    if QualLabel.U in pool and QualLabel.C in pool:
        # The pick is ambiguous only if it landed inside {U, C}; a strictly
        # stronger or weaker label dominates both regardless.
        if picked in (QualLabel.U, QualLabel.C):
            return Combined(picked, True)
    return Combined(picked, False)


def min_label(labels: Iterable[QualLabel]) -> Combined:
    """AND-decomposition combination: the weakest incoming label."""
    return _extremum(labels, lowest=True)


def max_label(labels: Iterable[QualLabel]) -> Combined:
    """Means-ends combination: the strongest incoming label."""
    return _extremum(labels, lowest=False)


class Evidence(enum.Enum):
    """Sat/Den evidence grades: Full, Partial, None."""

    F = "F"
    P = "P"
    N = "N"


@dataclass(frozen=True)
class SatDen:
    sat: Evidence
    den: Evidence


_TO_SATDEN: dict[QualLabel, SatDen] = {
    QualLabel.S: SatDen(Evidence.F, Evidence.N),
    QualLabel.PS: SatDen(Evidence.P, Evidence.N),
    QualLabel.C: SatDen(Evidence.P, Evidence.P),
    QualLabel.U: SatDen(Evidence.N, Evidence.N),
    QualLabel.PD: SatDen(Evidence.N, Evidence.P),
    QualLabel.D: SatDen(Evidence.N, Evidence.F),
}

_FROM_SATDEN = {v: k for k, v in _TO_SATDEN.items()}


def to_sat_den(label: QualLabel) -> SatDen:
    return _TO_SATDEN[label]


class UnrepresentableError(ValueError):
    pass


def from_sat_den(pair: SatDen) -> QualLabel:
    try:
        return _FROM_SATDEN[pair]
    except KeyError:
        raise UnrepresentableError(
            f"({pair.sat.value}, {pair.den.value}) has no six-valued counterpart"
        ) from None

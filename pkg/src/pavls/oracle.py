"""Independent brute-force ground truth for small instances.

Everything here recomputes scores from scratch (never through the
incremental delta path), so agreement with the engine is a genuine
cross-check rather than a tautology.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional

from .constructions import ConstructionError, LayeredParams, gain_holds
from .core import Election, Epsilon, PavlsError, Swap, pav_score, validate_committee


class EnumerationCapError(PavlsError):
    def __init__(self, required: int, cap: int):
        super().__init__(
            f"enumeration needs {required} committees but the cap is {cap}; "
            "raise the cap explicitly to proceed"
        )
        self.required = required
        self.cap = cap


DEFAULT_ENUMERATION_CAP = 10**6


@dataclass
class OracleReport:
    optimum_score: Fraction
    optimum_committees: list[frozenset[int]]
    enumerated: int


def brute_force_optimum(
    election: Election, enumeration_cap: int = DEFAULT_ENUMERATION_CAP
) -> OracleReport:
    """Enumerate all size-k committees; return all maximizers."""
    k = election.require_committee_size()
    total = math.comb(election.m, k)
    if total > enumeration_cap:
        raise EnumerationCapError(total, enumeration_cap)
    best_score: Optional[Fraction] = None
    best: list[frozenset[int]] = []
    for combo in itertools.combinations(range(election.m), k):
        score = pav_score(election, combo)
        if best_score is None or score > best_score:
            best_score, best = score, [frozenset(combo)]
        elif score == best_score:
            best.append(frozenset(combo))
    return OracleReport(optimum_score=best_score, optimum_committees=best, enumerated=total)


def is_locally_optimal(
    election: Election, committee: Iterable[int], epsilon: Epsilon
) -> tuple[bool, Optional[Swap], Optional[Fraction]]:
    """Exhaustive scan of all k(m-k) swaps via from-scratch score
    differences; returns (flag, witnessing swap, its gain)."""
    members = validate_committee(election, committee)
    base = pav_score(election, members)
    outside = [c for c in range(election.m) if c not in members]
    for a in sorted(members):
        for b in outside:
            gain = pav_score(election, (members - {a}) | {b}) - base
            if gain >= epsilon.value:
                return False, Swap(a, b), gain
    return True, None, None


@dataclass
class GainSearchEntry:
    k: int
    levels: Optional[int]  # None: params invalid at this k
    outcome: str  # "pass" | "fail" | "invalid"
    margins: dict[int, tuple[Fraction, Fraction]]


@dataclass
class GainSearchReport:
    entries: list[GainSearchEntry]
    first_pass: Optional[int]


def min_k_gain_search(
    k_range: Iterable[int], levels: Optional[int] = None
) -> GainSearchReport:
    """Scan k ascending for the first k where the layered gain
    inequality holds at every level.

    ``levels=None`` uses the asymptotic rule ceil(log2 k) per k; a
    fixed integer pins the level count.  Monotonicity is not assumed:
    every k's outcome is reported individually.
    """
    entries: list[GainSearchEntry] = []
    first_pass: Optional[int] = None
    for k in sorted(set(k_range)):
        lv = levels if levels is not None else LayeredParams.asymptotic_levels(k)
        try:
            params = LayeredParams(levels=lv, k=k)
        except ConstructionError:
            entries.append(GainSearchEntry(k=k, levels=None, outcome="invalid", margins={}))
            continue
        report = gain_holds(params)
        outcome = "pass" if report.passed else "fail"
        entries.append(GainSearchEntry(k=k, levels=lv, outcome=outcome, margins=report.margins))
        if outcome == "pass" and first_pass is None:
            first_pass = k
    return GainSearchReport(entries=entries, first_pass=first_pass)

"""Exact approval elections and incremental PAV scoring.

Every score, score difference, and threshold in this module is a
`fractions.Fraction`.  No floating point enters any scoring path; the
search thresholds used elsewhere (in particular 1/lcm(1..k)) are far
below float resolution for realistic committee sizes.

Voters with identical ballots are stored once as a weighted ballot
class.  This keeps the adversarial instances (whose blocker groups
contain hundreds of thousands of identical voters) small in memory
without changing any score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Iterable, NamedTuple, Optional, Sequence


class PavlsError(Exception):
    """Base class for errors raised by this package."""


class InvalidCommitteeError(PavlsError):
    pass


class InvalidSwapError(PavlsError):
    pass


def harmonic(t: int) -> Fraction:
    """Exact t-th harmonic number 1 + 1/2 + ... + 1/t, with harmonic(0) == 0."""
    if t < 0:
        raise ValueError(f"harmonic() needs t >= 0, got {t}")
    return _harmonic(t)


@lru_cache(maxsize=None)
def _harmonic(t: int) -> Fraction:
    total = Fraction(0)
    for j in range(1, t + 1):
        total += Fraction(1, j)
    return total


def lcm_range(k: int) -> int:
    """Least common multiple of {1, ..., k}."""
    if k < 1:
        raise ValueError(f"lcm_range() needs k >= 1, got {k}")
    return math.lcm(*range(1, k + 1))


class Swap(NamedTuple):
    out_candidate: int
    in_candidate: int


#: A swap sequence is an ordered list of swaps.  Concatenation is list
#: concatenation; validity is relative to a start committee and is
#: checked by :func:`validate_sequence`.
SwapSequence = list


def inverse_sequence(seq: Sequence[Swap]) -> list[Swap]:
    """Reverse the sequence and flip each swap."""
    return [Swap(s.in_candidate, s.out_candidate) for s in reversed(seq)]


@dataclass(frozen=True)
class BallotClass:
    """A set of voters sharing one approval ballot."""

    approves: frozenset[int]
    weight: int

    def __post_init__(self):
        if self.weight < 1:
            raise ValueError(f"ballot class weight must be positive, got {self.weight}")


@dataclass
class Election:
    """A weighted approval election with target committee size.

    ``committee_size`` may be None for elections whose committee size is
    attached later (e.g. parsed preference data); scoring operations
    require it to be set.
    """

    candidate_names: tuple[str, ...]
    ballot_classes: tuple[BallotClass, ...]
    committee_size: Optional[int] = None

    def __post_init__(self):
        self.candidate_names = tuple(self.candidate_names)
        self.ballot_classes = tuple(self.ballot_classes)
        m = len(self.candidate_names)
        if m < 1:
            raise ValueError("election needs at least one candidate")
        if len(set(self.candidate_names)) != m:
            raise ValueError("candidate names must be distinct")
        if not self.ballot_classes:
            raise ValueError("election needs at least one ballot class")
        for bc in self.ballot_classes:
            bad = [c for c in bc.approves if not 0 <= c < m]
            if bad:
                raise ValueError(f"ballot entry out of range: {bad[0]} (m={m})")
        k = self.committee_size
        if k is not None and not 1 <= k <= m:
            raise ValueError(f"committee size {k} not in [1, {m}]")

    @property
    def m(self) -> int:
        return len(self.candidate_names)

    @property
    def n(self) -> int:
        """Total voter count (sum of class weights)."""
        return sum(bc.weight for bc in self.ballot_classes)

    def with_committee_size(self, k: int) -> "Election":
        return replace(self, committee_size=k)

    def require_committee_size(self) -> int:
        if self.committee_size is None:
            raise InvalidCommitteeError("election has no committee size set")
        return self.committee_size

    # Derived indexes below are built once and shared; the election is
    # treated as immutable after construction.

    @cached_property
    def approval_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(bc.approves for bc in self.ballot_classes)

    @cached_property
    def weights(self) -> tuple[int, ...]:
        return tuple(bc.weight for bc in self.ballot_classes)

    @cached_property
    def approvers(self) -> tuple[tuple[int, ...], ...]:
        """Per-candidate tuple of ballot-class indices approving it."""
        by_cand: list[list[int]] = [[] for _ in range(self.m)]
        for ci, bc in enumerate(self.ballot_classes):
            for c in bc.approves:
                by_cand[c].append(ci)
        return tuple(tuple(lst) for lst in by_cand)

    @cached_property
    def _delta_scale(self) -> tuple[int, tuple[int, ...]]:
        # Common denominator for all per-voter delta terms.  Hit counts
        # during a swap stay in [1, k]; the extra slot k+1 is defensive.
        k = self.require_committee_size()
        scale = math.lcm(*range(1, k + 2))
        table = (0,) + tuple(scale // d for d in range(1, k + 2))
        return scale, table

    @cached_property
    def zero_plus_lcm(self) -> int:
        return lcm_range(self.require_committee_size())


def validate_committee(election: Election, committee: Iterable[int]) -> frozenset[int]:
    members = frozenset(committee)
    k = election.require_committee_size()
    if len(members) != k:
        raise InvalidCommitteeError(f"committee has {len(members)} members, expected {k}")
    bad = [c for c in members if not 0 <= c < election.m]
    if bad:
        raise InvalidCommitteeError(f"committee member out of range: {bad[0]}")
    return members


@dataclass(frozen=True)
class Epsilon:
    """Swap-acceptance threshold, always a positive exact rational."""

    kind: str  # "threshold" | "zero-plus" | "custom"
    value: Fraction

    def __post_init__(self):
        if self.value <= 0:
            raise ValueError(f"epsilon must be positive, got {self.value}")

    @staticmethod
    def threshold(election: Election) -> "Epsilon":
        """n/k^2, the polynomial-runtime threshold."""
        k = election.require_committee_size()
        return Epsilon("threshold", Fraction(election.n, k * k))

    @staticmethod
    def zero_plus(k: int) -> "Epsilon":
        """1/lcm(1..k): with this threshold, "delta >= eps" coincides with
        "delta > 0" (a quantization fact asserted at runtime, see
        :func:`assert_quantized`)."""
        return Epsilon("zero-plus", Fraction(1, lcm_range(k)))

    @staticmethod
    def custom(value: Fraction) -> "Epsilon":
        return Epsilon("custom", Fraction(value))


class SatisfactionState:
    """Mutable per-run cache: committee plus per-class intersection sizes.

    Owned by exactly one run at a time; concurrent runs over the same
    election each build their own state.
    """

    __slots__ = ("election", "committee", "hits")

    def __init__(self, election: Election, committee: Iterable[int]):
        members = validate_committee(election, committee)
        self.election = election
        self.committee = set(members)
        self.hits = [len(bc.approves & members) for bc in election.ballot_classes]

    def copy(self) -> "SatisfactionState":
        dup = object.__new__(SatisfactionState)
        dup.election = self.election
        dup.committee = set(self.committee)
        dup.hits = list(self.hits)
        return dup

    def score(self) -> Fraction:
        total = Fraction(0)
        weights = self.election.weights
        for ci, h in enumerate(self.hits):
            if h:
                total += weights[ci] * _harmonic(h)
        return total


def pav_score(election: Election, committee: Iterable[int]) -> Fraction:
    """PAV score of a committee: sum of weight * harmonic(|ballot & W|)."""
    members = validate_committee(election, committee)
    total = Fraction(0)
    for bc in election.ballot_classes:
        h = len(bc.approves & members)
        if h:
            total += bc.weight * _harmonic(h)
    return total


def delta(election: Election, state: SatisfactionState, a: int, b: int) -> Fraction:
    """Exact PAV-score change of swapping committee member ``a`` for ``b``.

    Visits only ballot classes approving exactly one of {a, b}: a class
    approving b but not a gains 1/(hits+1) per voter, a class approving
    a but not b loses 1/hits per voter.  Classes approving both or
    neither cancel and are skipped, which is what lets the heavyweight
    blocker groups of the hardened instances cost nothing here.
    """
    committee = state.committee
    if a not in committee:
        raise InvalidSwapError(f"outgoing candidate {a} not in committee")
    if b in committee:
        raise InvalidSwapError(f"incoming candidate {b} already in committee")
    hits = state.hits
    sets = election.approval_sets
    weights = election.weights
    scale, table = election._delta_scale
    # Signed per-denominator weight totals; index d collects all +-w/d terms.
    acc = [0] * len(table)
    for ci in election.approvers[b]:
        if a not in sets[ci]:
            acc[hits[ci] + 1] += weights[ci]
    for ci in election.approvers[a]:
        if b not in sets[ci]:
            acc[hits[ci]] -= weights[ci]
    num = 0
    for d in range(1, len(table)):
        w = acc[d]
        if w:
            num += w * table[d]
    return Fraction(num, scale)


def apply_swap(state: SatisfactionState, swap: Swap) -> SatisfactionState:
    """Apply a swap in place; the state is untouched if the swap is invalid."""
    a, b = swap.out_candidate, swap.in_candidate
    if a not in state.committee:
        raise InvalidSwapError(f"outgoing candidate {a} not in committee")
    if b in state.committee or not 0 <= b < state.election.m:
        raise InvalidSwapError(f"incoming candidate {b} invalid for committee")
    hits = state.hits
    for ci in state.election.approvers[a]:
        hits[ci] -= 1
    for ci in state.election.approvers[b]:
        hits[ci] += 1
    state.committee.discard(a)
    state.committee.add(b)
    return state


def assert_quantized(election: Election, value: Fraction) -> None:
    """Check the quantization fact backing the 0+ threshold.

    Any delta of a valid swap is an integer multiple of 1/lcm(1..k):
    loss terms have denominators in [1, k], and a gain denominator of
    k+1 would need a voter approving all of W plus the incoming
    candidate but not the outgoing one, which is contradictory.  The
    argument is asserted here on every value rather than assumed.
    """
    if election.zero_plus_lcm % value.denominator != 0:
        raise PavlsError(
            f"delta {value} is not a multiple of 1/lcm(1..k); "
            "zero-plus threshold assumption violated"
        )


@dataclass
class SequenceCertificate:
    """Replay report for a swap sequence from a start committee."""

    structurally_valid: bool
    first_invalid_step: Optional[int]
    step_deltas: list[Fraction]
    certified_good: bool
    total_gain: Fraction
    final_committee: frozenset[int]
    epsilon: Fraction

    @property
    def steps(self) -> int:
        return len(self.step_deltas)


def validate_sequence(
    election: Election,
    start: Iterable[int],
    seq: Iterable[Swap],
    epsilon: Epsilon,
) -> SequenceCertificate:
    """Replay ``seq`` from ``start``; certify it good iff every step has
    delta >= epsilon.

    A structural violation (outgoing candidate missing, incoming already
    seated) stops the replay and is reported by index; a step with
    delta < epsilon is a certification outcome, not an error.
    """
    state = SatisfactionState(election, start)
    check_quantized = epsilon.kind == "zero-plus"
    deltas: list[Fraction] = []
    total = Fraction(0)
    good = True
    for idx, swap in enumerate(seq):
        a, b = swap.out_candidate, swap.in_candidate
        if a not in state.committee or b in state.committee or not 0 <= b < election.m:
            return SequenceCertificate(
                structurally_valid=False,
                first_invalid_step=idx,
                step_deltas=deltas,
                certified_good=False,
                total_gain=total,
                final_committee=frozenset(state.committee),
                epsilon=epsilon.value,
            )
        d = delta(election, state, a, b)
        if check_quantized:
            assert_quantized(election, d)
        deltas.append(d)
        total += d
        if d < epsilon.value:
            good = False
        apply_swap(state, swap)
    return SequenceCertificate(
        structurally_valid=True,
        first_invalid_step=None,
        step_deltas=deltas,
        certified_good=good,
        total_gain=total,
        final_committee=frozenset(state.committee),
        epsilon=epsilon.value,
    )

"""Synthetic approval election samplers.

Three models: impartial culture, resampling around a central ballot,
and Euclidean proximity.  All are deterministic functions of their
config (including the seed); the generator is `random.Random`, i.e.
the Mersenne Twister, which is documented, seedable, and stable across
platforms and Python versions.

Sampled elections carry no committee size; callers attach one.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from typing import Union

from .core import BallotClass, Election, PavlsError


class SamplerError(PavlsError):
    pass


@dataclass(frozen=True)
class ImpartialCulture:
    """Each voter approves each candidate independently with probability p."""

    p: float

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise SamplerError(f"approval probability must be in [0, 1], got {self.p}")


@dataclass(frozen=True)
class Resampling:
    """A central ballot of size floor(p*m) is drawn uniformly; every voter
    starts from it and each candidate's approval is resampled (kept with
    probability 1-phi, redrawn as Bernoulli(p) with probability phi)."""

    p: float
    phi: float

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise SamplerError(f"approval probability must be in [0, 1], got {self.p}")
        if not 0 <= self.phi <= 1:
            raise SamplerError(f"resampling probability must be in [0, 1], got {self.phi}")


@dataclass(frozen=True)
class Euclidean:
    """Voters and candidates get uniform positions in [0,1]^d; a voter
    approves a candidate iff their distance is strictly below r."""

    d: int
    r: float

    def __post_init__(self):
        if self.d not in (1, 2):
            raise SamplerError(f"dimension must be 1 or 2, got {self.d}")
        if not self.r > 0:
            raise SamplerError(f"radius must be positive, got {self.r}")


Model = Union[ImpartialCulture, Resampling, Euclidean]


@dataclass(frozen=True)
class SamplerConfig:
    model: Model
    n: int
    m: int
    seed: int

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise SamplerError(f"need n, m >= 1, got n={self.n}, m={self.m}")


def _candidate_names(m: int) -> tuple[str, ...]:
    return tuple(f"c{i}" for i in range(1, m + 1))


def _pack(ballots: list[frozenset[int]], m: int) -> Election:
    # One class per voter, in sampling order; no merging, so voter
    # indices in the sampled election are stable.
    classes = tuple(BallotClass(ballot, 1) for ballot in ballots)
    return Election(_candidate_names(m), classes, None)


def sample_ic(config: SamplerConfig) -> Election:
    model = config.model
    if not isinstance(model, ImpartialCulture):
        raise SamplerError(f"sample_ic needs an ImpartialCulture model, got {model!r}")
    rng = random.Random(config.seed)
    ballots = [
        frozenset(c for c in range(config.m) if rng.random() < model.p)
        for _ in range(config.n)
    ]
    return _pack(ballots, config.m)


def sample_resampling(config: SamplerConfig) -> Election:
    model = config.model
    if not isinstance(model, Resampling):
        raise SamplerError(f"sample_resampling needs a Resampling model, got {model!r}")
    rng = random.Random(config.seed)
    central = set(rng.sample(range(config.m), int(model.p * config.m)))
    ballots = []
    for _ in range(config.n):
        approved = set()
        for c in range(config.m):
            if rng.random() < model.phi:
                if rng.random() < model.p:
                    approved.add(c)
            elif c in central:
                approved.add(c)
        ballots.append(frozenset(approved))
    return _pack(ballots, config.m)


def sample_euclidean(config: SamplerConfig) -> Election:
    model = config.model
    if not isinstance(model, Euclidean):
        raise SamplerError(f"sample_euclidean needs a Euclidean model, got {model!r}")
    rng = random.Random(config.seed)
    dims = range(model.d)
    voters = [tuple(rng.random() for _ in dims) for _ in range(config.n)]
    cands = [tuple(rng.random() for _ in dims) for _ in range(config.m)]
    ballots = [
        frozenset(c for c, pos in enumerate(cands) if math.dist(v, pos) < model.r)
        for v in voters
    ]
    return _pack(ballots, config.m)


def sample(config: SamplerConfig) -> Election:
    """Dispatch on the config's model."""
    if isinstance(config.model, ImpartialCulture):
        return sample_ic(config)
    if isinstance(config.model, Resampling):
        return sample_resampling(config)
    if isinstance(config.model, Euclidean):
        return sample_euclidean(config)
    raise SamplerError(f"unknown sampler model: {config.model!r}")

import pytest

from pavls import BallotClass, Election


@pytest.fixture
def fig1a() -> Election:
    """Five candidates, two voter blocs (60 and 30), committee size 3."""
    classes = (
        BallotClass(frozenset({0, 1, 2}), 60),
        BallotClass(frozenset({3, 4}), 30),
    )
    return Election(("c1", "c2", "c3", "c4", "c5"), classes, 3)


@pytest.fixture
def fig1b() -> Election:
    """As fig1a scaled to 56/28 plus six singleton self-voters; n = 90."""
    classes = [
        BallotClass(frozenset({0, 1, 2}), 56),
        BallotClass(frozenset({3, 4}), 28),
    ]
    classes += [BallotClass(frozenset({5 + i}), 1) for i in range(6)]
    return Election(tuple(f"c{i}" for i in range(1, 12)), tuple(classes), 3)

from __future__ import annotations

import itertools
from datetime import datetime, timedelta, timezone
from pathlib import Path

import pytest

from meshreview.acts import (
    ContentKind,
    ForceKind,
    IllocutionaryForce,
    Polarity,
    RefKind,
    Role,
    Sphere,
    Utterance,
)
from meshreview.geometry import MeshFormat, load_mesh
from meshreview.store import Store

FIXTURES = Path(__file__).parent / "fixtures"

FIG2A_TEXT = "interference at the exhaust tubes level"
FIG2B_TEXT = (
    "Idem for the tire suspension, move the tubes of 40mm (or more), "
    "in order to avoid the interference and to keep a minimum tolerance of 30mm"
)

FIG2A_FORCE = IllocutionaryForce(ForceKind.EVALUATION, polarity=Polarity.NEGATIVE)
FIG2A_UTTERANCE = Utterance(FIG2A_TEXT, ContentKind.CONSTRAINT)
FIG2B_FORCE = IllocutionaryForce(ForceKind.PROPOSITION)
FIG2B_UTTERANCE = Utterance(FIG2B_TEXT, ContentKind.ACTION)


@pytest.fixture(scope="session")
def cube():
    return load_mesh((FIXTURES / "cube.obj").read_bytes(), MeshFormat.OBJ)


@pytest.fixture(scope="session")
def icosphere():
    return load_mesh((FIXTURES / "icosphere.obj").read_bytes(), MeshFormat.OBJ)


class TickingClock:
    """Deterministic clock: each call advances one second."""

    def __init__(self, start=datetime(2024, 3, 1, 9, 0, 0, tzinfo=timezone.utc)):
        self._ticks = itertools.count()
        self._start = start

    def __call__(self) -> datetime:
        return self._start + timedelta(seconds=next(self._ticks))


def sequential_ids(prefix: str = "ann"):
    counter = itertools.count(1)
    return lambda: f"00000000-0000-4000-8000-{prefix[:4]:>04}{next(counter):08d}"


@pytest.fixture
def clock():
    return TickingClock()


@pytest.fixture
def store(clock):
    return Store(clock=clock, id_factory=sequential_ids())


@pytest.fixture
def cube_doc(store, cube):
    return store.put_document("exhaust-tubes", cube)


def make_fig2a(store, doc, anchor, author="meera", sphere=Sphere.PUBLIC):
    return store.create_annotation(
        author, Role.INDUSTRIAL, doc.id, 1, FIG2A_FORCE, FIG2A_UTTERANCE, anchor, sphere
    )


def make_fig2b(store, doc, anchor, target_id, author="dev", sphere=Sphere.PUBLIC):
    return store.create_annotation(
        author,
        Role.DESIGNER,
        doc.id,
        1,
        FIG2B_FORCE,
        FIG2B_UTTERANCE,
        anchor,
        sphere,
        references=[(target_id, RefKind.ANSWERS)],
    )

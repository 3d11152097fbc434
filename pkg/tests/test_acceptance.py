"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion
lines. Tolerances and sample counts are pinned here and must not drift.
"""

import base64
import json
import random
import threading
import time
from contextlib import contextmanager

import numpy as np
import pytest
from fastapi.testclient import TestClient

from meshreview.acts import (
    ClarificationKind,
    ContentKind,
    ForceKind,
    IllocutionaryForce,
    Polarity,
    RefKind,
    Role,
    Sphere,
    Status,
    Utterance,
    validate_act,
)
from meshreview.geometry import (
    Anchor,
    Ray,
    anchor_to_point,
    face_normal,
    nearest_anchor,
    resolve_anchor,
)
from meshreview.minutes import render_minute
from meshreview.service import build_app
from meshreview.sessions import SessionManager
from meshreview.store import Query, Region, Store

from conftest import (
    FIG2A_FORCE,
    FIG2A_TEXT,
    FIG2A_UTTERANCE,
    FIG2B_FORCE,
    FIG2B_TEXT,
    FIG2B_UTTERANCE,
    FIXTURES,
    TickingClock,
    sequential_ids,
)
from oracles import naive_query, oracle_bary_of_point, oracle_nearest, oracle_resolve
from test_acts import expected_violations, random_candidate

EDGE_TOL = 1e-6
DIST_TOL = 1e-9


@contextmanager
def criterion(name: str, budget: float | None = None):
    started = time.perf_counter()
    try:
        yield
    except BaseException:
        print(f"\nACCEPTANCE {name}: FAIL ({time.perf_counter() - started:.2f}s)")
        raise
    elapsed = time.perf_counter() - started
    print(f"\nACCEPTANCE {name}: PASS ({elapsed:.2f}s)")
    if budget is not None:
        assert elapsed < budget, f"{name} exceeded its {budget}s runtime budget"


def test_act_grammar_soundness():
    with criterion("act-grammar-soundness", budget=1.0):
        rng = random.Random(2024)
        for i in range(1000):
            force, utterance, refs = random_candidate(rng, force_valid=i % 2 == 0)
            got = set(validate_act(force, utterance, refs).violations)
            assert got == expected_violations(force, utterance, refs), (force, utterance, refs)


def test_fig2_fixture_flow(cube):
    with criterion("fig2-fixture-flow"):
        store = Store(clock=TickingClock(), id_factory=sequential_ids())
        manager = SessionManager(store, clock=TickingClock(), id_factory=sequential_ids("s"))
        doc = store.put_document("truck-exhaust", cube)
        session = manager.open_session(doc.id, 1, "arch", Role.ARCHITECT, "pat", Role.PMS)
        manager.join(session.id, "meera", Role.INDUSTRIAL)
        manager.join(session.id, "dev", Role.DESIGNER)

        anchor_2a = nearest_anchor(cube, (0.1, 0.1, 0.6))
        event_a = manager.act_create_annotation(
            session.id, "meera", FIG2A_FORCE, FIG2A_UTTERANCE, anchor_2a, Sphere.PUBLIC
        )
        fig2a_id = event_a.payload["annotation"]["id"]
        anchor_2b = nearest_anchor(cube, (0.6, 0.1, 0.1))
        event_b = manager.act_create_annotation(
            session.id,
            "dev",
            FIG2B_FORCE,
            FIG2B_UTTERANCE,
            anchor_2b,
            Sphere.PUBLIC,
            references=[(fig2a_id, RefKind.ANSWERS)],
        )
        fig2b_id = event_b.payload["annotation"]["id"]

        evaluations = store.query(Query(force_kind=ForceKind.EVALUATION))
        propositions = store.query(Query(force_kind=ForceKind.PROPOSITION))
        assert [a.id for a in evaluations] == [fig2a_id]
        assert [a.id for a in propositions] == [fig2b_id]
        assert evaluations[0].utterance.text == FIG2A_TEXT
        assert propositions[0].utterance.text == FIG2B_TEXT
        assert evaluations[0].force.polarity is Polarity.NEGATIVE
        assert evaluations[0].utterance.content_kind is ContentKind.CONSTRAINT
        assert propositions[0].utterance.content_kind is ContentKind.ACTION

        manager.close(session.id, "pat")
        minute = manager.minute_for(session.id)
        sections = dict(minute.sections)
        assert [e.annotation.id for e in sections[ForceKind.EVALUATION]] == [fig2a_id]
        assert [e.annotation.id for e in sections[ForceKind.PROPOSITION]] == [fig2b_id]
        assert sections[ForceKind.EVALUATION][0].annotation.utterance.text == FIG2A_TEXT
        assert sections[ForceKind.PROPOSITION][0].annotation.utterance.text == FIG2B_TEXT
        html = render_minute(minute, "html").decode("utf-8")
        assert FIG2A_TEXT in html and FIG2B_TEXT in html


def _random_rays(rng, mesh, count):
    center, radius = mesh.bounding_sphere()
    origins = center + rng.normal(size=(count, 3)) * 4.0 * radius
    targets = center + rng.normal(size=(count, 3)) * 0.6 * radius
    directions = targets - origins
    directions /= np.linalg.norm(directions, axis=1)[:, None]
    return origins, directions


def test_geometry_oracle_equivalence(cube, icosphere):
    with criterion("geometry-oracle", budget=30.0):
        rng = np.random.default_rng(8)
        for mesh in (cube, icosphere):
            origins, directions = _random_rays(rng, mesh, 5000)
            for origin, direction in zip(origins, directions):
                got = resolve_anchor(mesh, Ray(tuple(origin), tuple(direction)))
                want = oracle_resolve(mesh, origin, direction)
                if want is None:
                    assert got is None
                    continue
                face, t, bary = want
                assert got is not None
                got_point = anchor_to_point(mesh, got)
                want_point = origin + t * direction
                assert float(np.linalg.norm(got_point - want_point)) < DIST_TOL
                if min(bary) > EDGE_TOL:
                    assert got.face == face

            center, radius = mesh.bounding_sphere()
            queries = center + rng.normal(size=(5000, 3)) * 1.5 * radius
            for query in queries:
                got = nearest_anchor(mesh, query)
                face, point, distance = oracle_nearest(mesh, query)
                got_distance = float(np.linalg.norm(anchor_to_point(mesh, got) - query))
                assert abs(got_distance - distance) < DIST_TOL
                if min(oracle_bary_of_point(mesh, face, point)) > EDGE_TOL:
                    assert got.face == face


def test_anchor_round_trip(cube, icosphere):
    with criterion("anchor-round-trip"):
        rng = np.random.default_rng(404)
        for mesh in (cube, icosphere):
            sampled = 0
            while sampled < 5000:
                face = int(rng.integers(0, len(mesh.faces)))
                bary = rng.dirichlet((1.0, 1.0, 1.0))
                if bary.min() <= EDGE_TOL:  # edge-tolerance exclusion
                    continue
                sampled += 1
                anchor = Anchor(face, (float(bary[0]), float(bary[1]), float(bary[2])), 0.0)
                point = anchor_to_point(mesh, anchor)
                normal = face_normal(mesh, face)
                ray = Ray(tuple(point + normal), tuple(-normal))
                got = resolve_anchor(mesh, ray)
                assert got is not None
                assert got.face == face
                assert max(abs(g - b) for g, b in zip(got.bary, anchor.bary)) < DIST_TOL


def test_lifetime_cascade(cube):
    with criterion("lifetime-cascade"):
        rng = random.Random(55)
        for trial in range(100):
            store = Store(clock=TickingClock(), id_factory=sequential_ids())
            doomed = store.put_document("doomed", cube)
            keeper = store.put_document("keeper", cube)
            doomed_count = rng.randrange(0, 15)
            keeper_ids = []
            for i in range(doomed_count):
                store.create_annotation(
                    f"p{i % 4}",
                    Role.DESIGNER,
                    doomed.id,
                    1,
                    IllocutionaryForce(ForceKind.PROPOSITION),
                    Utterance(f"trial {trial} note {i}"),
                    Anchor(rng.randrange(12), (0.4, 0.3, 0.3), 0.0),
                    rng.choice([Sphere.PUBLIC, Sphere.PRIVATE]),
                )
            for i in range(rng.randrange(0, 4)):
                keeper_ids.append(
                    store.create_annotation(
                        "k",
                        Role.DESIGNER,
                        keeper.id,
                        1,
                        IllocutionaryForce(ForceKind.PROPOSITION),
                        Utterance("keep me"),
                        Anchor(0, (0.4, 0.3, 0.3), 0.0),
                        Sphere.PUBLIC,
                    ).id
                )
            assert store.retire_document(doomed.id) == doomed_count
            survivors = store.query(Query())
            assert all(a.document != doomed.id for a in survivors)
            assert sorted(a.id for a in survivors) == sorted(keeper_ids)


def _populate_store(count, cube):
    rng = random.Random(1337)
    store = Store(clock=TickingClock(), id_factory=sequential_ids())
    docs = [store.put_document(f"assembly-{i}", cube) for i in range(3)]
    authors = [f"p{i}" for i in range(10)]
    texts = [
        "interference at the exhaust tubes level",
        "move the tubes of 40mm",
        "minimum tolerance of 30mm",
        "routing unchanged",
        "bracket needs a stiffener",
        "approuvé ✓",
    ]
    annotations = []
    for i in range(count):
        kind = rng.choice(list(ForceKind))
        force = IllocutionaryForce(
            kind,
            clarification_kind=rng.choice(list(ClarificationKind)) if kind is ForceKind.CLARIFICATION else None,
            polarity=rng.choice([None, *Polarity]) if kind is ForceKind.EVALUATION else None,
        )
        refs = []
        if kind is ForceKind.PROPOSITION and annotations and rng.random() < 0.3:
            refs = [(rng.choice(annotations).id, RefKind.ANSWERS)]
        doc = rng.choice(docs)
        ann = store.create_annotation(
            rng.choice(authors),
            Role.DESIGNER,
            doc.id,
            1,
            force,
            Utterance(rng.choice(texts), rng.choice(list(ContentKind))),
            Anchor(rng.randrange(12), _random_bary(rng), 0.0),
            Sphere.PUBLIC if rng.random() < 0.7 else Sphere.PRIVATE,
            references=refs,
        )
        if rng.random() < 0.15:
            replier = ann.author if ann.sphere is Sphere.PRIVATE else rng.choice(authors)
            ann = store.append_reply(ann.id, replier, f"thread note {i}")
        annotations.append(ann)
    return store, docs, authors, annotations


def _random_bary(rng):
    a, b = sorted([rng.random(), rng.random()])
    return (a, b - a, 1.0 - b)


def test_query_oracle_equivalence(cube):
    store, docs, authors, _ = _populate_store(10_000, cube)
    with criterion("query-oracle", budget=60.0):
        rng = random.Random(31415)
        universe = store.query(Query())  # privileged full scan, canonical order
        points = {a.id: anchor_to_point(cube, a.anchor) for a in universe}
        for _ in range(1000):
            q = _random_acceptance_query(rng, docs, authors)
            viewer = rng.choice(authors + [None])
            got = store.query(q, viewer=viewer)
            want = naive_query(universe, q, points, viewer)
            assert [a.id for a in got] == [a.id for a in want]


def _random_acceptance_query(rng, docs, authors):
    kwargs = {}
    for field in rng.sample(
        ["force_kind", "clarification_kind", "polarity", "content_kind", "author", "status",
         "sphere", "document", "text_substring", "region"],
        k=rng.randrange(0, 4),
    ):
        if field == "force_kind":
            kwargs[field] = rng.choice(list(ForceKind))
        elif field == "clarification_kind":
            kwargs[field] = rng.choice(list(ClarificationKind))
        elif field == "polarity":
            kwargs[field] = rng.choice(list(Polarity))
        elif field == "content_kind":
            kwargs[field] = rng.choice(list(ContentKind))
        elif field == "author":
            kwargs[field] = rng.choice(authors)
        elif field == "status":
            kwargs[field] = rng.choice([Status.OPEN, Status.DRAFT])
        elif field == "sphere":
            kwargs[field] = rng.choice(list(Sphere))
        elif field == "document":
            kwargs[field] = rng.choice(docs).id
        elif field == "text_substring":
            kwargs[field] = rng.choice(["40MM", "tolerance", "exhaust", "xyzzy", "✓"])
        elif field == "region":
            kwargs["document"] = rng.choice(docs).id
            kwargs["revision"] = 1
            kwargs["region"] = Region(
                (rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8)),
                rng.uniform(0.1, 1.2),
            )
    return Query(**kwargs)


def test_concurrency(cube):
    with criterion("concurrency"):
        # 8 writers x 100 replies on one annotation
        store = Store(clock=TickingClock(), id_factory=sequential_ids())
        doc = store.put_document("contended", cube)
        ann = store.create_annotation(
            "owner",
            Role.DESIGNER,
            doc.id,
            1,
            IllocutionaryForce(ForceKind.PROPOSITION),
            Utterance("contended thread"),
            Anchor(0, (0.4, 0.3, 0.3), 0.0),
            Sphere.PUBLIC,
        )
        barrier = threading.Barrier(8)

        def writer(tag):
            barrier.wait()
            for i in range(100):
                store.append_reply(ann.id, tag, f"{tag}#{i}")

        threads = [threading.Thread(target=writer, args=(f"w{k}",)) for k in range(8)]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        final = store.get_annotation(ann.id)
        texts = [e.text for e in final.thread]
        assert len(texts) == 800
        assert len(set(texts)) == 800
        for k in range(8):
            mine = [t for t in texts if t.startswith(f"w{k}#")]
            assert mine == [f"w{k}#{i}" for i in range(100)]
        stamps = [e.at for e in final.thread]
        assert stamps == sorted(stamps)

        # session event log: gap-free, identical across 4 subscribers
        manager = SessionManager(store, clock=TickingClock(), id_factory=sequential_ids("s"))
        session = manager.open_session(doc.id, 1, "arch", Role.ARCHITECT, "pat", Role.PMS)
        for p in ("e0", "e1"):
            manager.join(session.id, p, Role.INDUSTRIAL)
        streams = [manager.subscribe(session.id, p) for p in ("arch", "pat", "e0", "e1")]
        received = [[] for _ in streams]

        def consume(idx):
            for event in streams[idx]:
                received[idx].append(event)

        consumers = [threading.Thread(target=consume, args=(i,)) for i in range(4)]
        for t in consumers:
            t.start()

        def producer(tag):
            for i in range(50):
                manager.act_reply(session.id, tag, ann.id, f"live {tag} {i}")

        producers = [threading.Thread(target=producer, args=(p,)) for p in ("arch", "pat", "e0")]
        for t in producers:
            t.start()
        for t in producers:
            t.join()
        manager.close(session.id, "pat")
        for t in consumers:
            t.join(timeout=30)
        assert all(not t.is_alive() for t in consumers)
        assert received[0] == received[1] == received[2] == received[3]
        seqs = [e["seq"] for e in received[0]]
        assert seqs == list(range(1, 154))  # 2 joins + 150 replies + SessionClosed
        assert received[0][-1]["kind"] == "SessionClosed"


def test_round_trip_stability(cube):
    store, docs, *_ = _populate_store(500, cube)
    with criterion("round-trip-stability"):
        for doc in docs:
            first = store.export_set(doc.id)
            fresh = Store(clock=TickingClock(), id_factory=sequential_ids("im"))
            imported, skipped = fresh.import_set(first)
            assert skipped == []
            second = fresh.export_set(doc.id)
            assert second == first
            third_store = Store(clock=TickingClock(), id_factory=sequential_ids("im2"))
            third_store.import_set(second)
            assert third_store.export_set(doc.id) == first
        total = sum(len(json.loads(store.export_set(d.id))["annotations"]) for d in docs)
        assert total == 500


def test_visibility_no_private_leaks(cube):
    with criterion("visibility-no-leaks"):
        participants = [f"p{i}" for i in range(10)]
        tokens = {f"tok-{p}": (p, Role.DESIGNER) for p in participants}
        tokens["tok-arch"] = ("arch", Role.ARCHITECT)
        tokens["tok-pat"] = ("pat", Role.PMS)
        store = Store(clock=TickingClock(), id_factory=sequential_ids())
        manager = SessionManager(store, clock=TickingClock(), id_factory=sequential_ids("s"))
        app = build_app(store, manager, tokens)
        client = TestClient(app)

        doc = client.post(
            "/documents",
            json={
                "name": "shared-model",
                "format": "obj",
                "data_base64": base64.b64encode((FIXTURES / "cube.obj").read_bytes()).decode(),
            },
            headers={"Authorization": "Bearer tok-arch"},
        ).json()

        session = client.post(
            "/sessions",
            json={"document": doc["id"], "revision": 1, "chair": "arch", "minute_taker": "pat"},
            headers={"Authorization": "Bearer tok-arch"},
        ).json()
        for p in participants:
            client.post(f"/sessions/{session['id']}/join", headers={"Authorization": f"Bearer tok-{p}"})

        rng = random.Random(606)
        secrets = {p: [] for p in participants}
        for i in range(1000):
            author = rng.choice(participants)
            private = rng.random() < 0.4
            text = f"SECRET::{author}::{i}" if private else f"public remark {i}"
            body = {
                "force": {"kind": "Proposition"},
                "utterance": {"text": text, "content_kind": "Other"},
                "anchor": {"face": rng.randrange(12), "bary": [0.4, 0.3, 0.3], "normal_offset": 0.0},
                "sphere": "Private" if private else "Public",
            }
            if private:
                secrets[author].append(text)
            if rng.random() < 0.5:
                response = client.post(
                    f"/sessions/{session['id']}/events",
                    json={"action": "create_annotation", **body},
                    headers={"Authorization": f"Bearer tok-{author}"},
                )
            else:
                response = client.post(
                    "/annotations",
                    json={**body, "document": doc["id"], "revision": 1},
                    headers={"Authorization": f"Bearer tok-{author}"},
                )
            assert response.status_code == 200, response.text
        client.post(f"/sessions/{session['id']}/close", headers={"Authorization": "Bearer tok-pat"})

        leaks = 0
        all_secret_texts = {p: set(texts) for p, texts in secrets.items()}
        for p in participants:
            headers = {"Authorization": f"Bearer tok-{p}"}
            foreign = set().union(*(v for q, v in all_secret_texts.items() if q != p))

            listing = client.get("/annotations", headers=headers)
            leaks += sum(s in listing.text for s in foreign)
            mine = client.get("/annotations", params={"sphere": "Private"}, headers=headers)
            assert all(a["author"] == p for a in mine.json())
            leaks += sum(s in mine.text for s in foreign)

            with client.stream("GET", f"/sessions/{session['id']}/stream", headers=headers) as stream:
                body = "".join(stream.iter_lines())
            leaks += sum(s in body for s in foreign)

            minute = client.get(f"/sessions/{session['id']}/minute", headers=headers)
            leaks += sum(s in minute.text for s in foreign)
            # the minute is a public record: no private content at all
            leaks += sum(s in minute.text for s in all_secret_texts[p])
        assert leaks == 0

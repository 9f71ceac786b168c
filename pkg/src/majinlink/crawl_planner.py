"""Frontier-expansion planner: seeds, then per-depth recommendation and
author-catalogue pulls until a depth adds nothing new or max_depth is hit.

Runs only against a Provider abstraction; the shipped implementation reads
local fixture files. No network code lives here.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol, Sequence

log = logging.getLogger(__name__)

DEFAULT_MAX_DEPTH = 5


@dataclass(frozen=True)
class WorkStub:
    """Just enough of a catalogue record to drive expansion decisions."""

    work_id: str
    ratings_count: int = 0
    edition_count: int = 0
    author_ids: tuple[str, ...] = ()


class Provider(Protocol):
    def seeds(self) -> Sequence[WorkStub]: ...

    def recommendations(self, work_id: str) -> Sequence[WorkStub]: ...

    def author_works(self, author_id: str) -> Sequence[WorkStub]: ...


def author_work_qualifies(stub: WorkStub) -> bool:
    """Keep an author's other work only with at least one rating and two editions."""
    return stub.ratings_count >= 1 and stub.edition_count >= 2


@dataclass
class DepthStats:
    works: int = 0
    editions: int = 0
    authors: int = 0
    recommendations: int = 0


@dataclass
class FrontierState:
    depth: int = 0
    known_work_ids: set[str] = field(default_factory=set)
    known_author_ids: set[str] = field(default_factory=set)
    new_by_depth: list[DepthStats] = field(default_factory=list)
    failures: list[tuple[str, str]] = field(default_factory=list)  # (id, error)

    @property
    def works_series(self) -> list[int]:
        return [d.works for d in self.new_by_depth]


def _admit(state: FrontierState, stubs: Iterable[WorkStub], stats: DepthStats,
           via_recommendation: bool) -> tuple[list[WorkStub], list[str]]:
    """Deduplicate stubs against the known sets and update depth counters.

    Returns the works and author ids first seen through this batch.
    """
    fresh_works = []
    fresh_authors = []
    for stub in stubs:
        if stub.work_id in state.known_work_ids:
            continue
        state.known_work_ids.add(stub.work_id)
        fresh_works.append(stub)
        stats.works += 1
        stats.editions += stub.edition_count
        if via_recommendation:
            stats.recommendations += 1
        for author_id in stub.author_ids:
            if author_id not in state.known_author_ids:
                state.known_author_ids.add(author_id)
                fresh_authors.append(author_id)
                stats.authors += 1
    return fresh_works, fresh_authors


def expand(provider: Provider, max_depth: int = DEFAULT_MAX_DEPTH) -> FrontierState:
    """Run the frontier to exhaustion or max_depth.

    Depth 0 admits the seeds; each later depth pulls recommendations of the
    works admitted at the previous depth and the qualifying works of authors
    first seen there. Expansion stops after any depth that admits nothing.
    Provider failures are recorded and the offending id skipped. The output
    series does not depend on provider enumeration order.
    """
    state = FrontierState()
    stats0 = DepthStats()
    frontier, new_authors = _admit(
        state, sorted(provider.seeds(), key=lambda s: s.work_id), stats0, via_recommendation=False
    )
    state.new_by_depth.append(stats0)
    if not frontier:
        return state

    for depth in range(1, max_depth + 1):
        state.depth = depth
        stats = DepthStats()
        gathered: list[tuple[WorkStub, bool]] = []
        for stub in sorted(frontier, key=lambda s: s.work_id):
            try:
                recs = provider.recommendations(stub.work_id)
            except Exception as exc:  # provider failure: skip this id
                state.failures.append((stub.work_id, str(exc)))
                continue
            gathered.extend((rec, True) for rec in sorted(recs, key=lambda s: s.work_id))
        for author_id in sorted(new_authors):
            try:
                catalog = provider.author_works(author_id)
            except Exception as exc:
                state.failures.append((author_id, str(exc)))
                continue
            gathered.extend(
                (stub, False)
                for stub in sorted(catalog, key=lambda s: s.work_id)
                if author_work_qualifies(stub)
            )

        frontier, new_authors = [], []
        for stub, via_rec in gathered:
            works, authors = _admit(state, [stub], stats, via_recommendation=via_rec)
            frontier.extend(works)
            new_authors.extend(authors)
        state.new_by_depth.append(stats)
        if stats.works == 0:
            break
    return state


class FixtureProvider:
    """Provider over a fixture directory.

    Layout: seeds.txt (one work id per line), works.tsv (work_id, ratings,
    editions, comma-separated author ids), recs.tsv (work_id -> recommended
    work_id), author_works.tsv (author_id -> work_id).
    """

    def __init__(self, fixture_dir: Path) -> None:
        fixture_dir = Path(fixture_dir)
        self._works: dict[str, WorkStub] = {}
        works_path = fixture_dir / "works.tsv"
        if works_path.exists():
            for row in _read_tsv(works_path):
                author_ids = tuple(a for a in row[3].split(",") if a) if len(row) > 3 else ()
                self._works[row[0]] = WorkStub(
                    work_id=row[0],
                    ratings_count=int(row[1]) if len(row) > 1 and row[1] else 0,
                    edition_count=int(row[2]) if len(row) > 2 and row[2] else 0,
                    author_ids=author_ids,
                )
        self._seeds = [
            self._stub(line) for line in (fixture_dir / "seeds.txt").read_text().split() if line
        ]
        self._recs: dict[str, list[str]] = {}
        recs_path = fixture_dir / "recs.tsv"
        if recs_path.exists():
            for row in _read_tsv(recs_path):
                self._recs.setdefault(row[0], []).append(row[1])
        self._author_works: dict[str, list[str]] = {}
        aw_path = fixture_dir / "author_works.tsv"
        if aw_path.exists():
            for row in _read_tsv(aw_path):
                self._author_works.setdefault(row[0], []).append(row[1])

    def _stub(self, work_id: str) -> WorkStub:
        return self._works.get(work_id, WorkStub(work_id=work_id))

    def seeds(self) -> list[WorkStub]:
        return list(self._seeds)

    def recommendations(self, work_id: str) -> list[WorkStub]:
        return [self._stub(w) for w in self._recs.get(work_id, [])]

    def author_works(self, author_id: str) -> list[WorkStub]:
        return [self._stub(w) for w in self._author_works.get(author_id, [])]


def _read_tsv(path: Path) -> list[list[str]]:
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line and not line.startswith("#"):
                rows.append(line.split("\t"))
    return rows


def write_crawl_series_csv(path: Path, state: FrontierState) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["depth", "new_works", "new_editions", "new_authors", "new_recommendations"])
        for depth, stats in enumerate(state.new_by_depth):
            writer.writerow([depth, stats.works, stats.editions, stats.authors, stats.recommendations])

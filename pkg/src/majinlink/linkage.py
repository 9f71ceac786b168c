"""Candidate generation by identifier overlap and matrix-mean fuzzy title
scoring, plus threshold filtering.

The similarity primitive is indel-based: ratio = 100 * (1 - d/(|a|+|b|))
where d counts insertions+deletions only (a substitution costs 2). The
partial ratio slides the shorter string across the longer one, including
shorter windows hanging off both edges and the full-string comparison, and
keeps the best window score.
"""
from __future__ import annotations

import json
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .dedup import Cluster
from .ingest import normalize_text
from .records import EditionRecord, Identifier, WorkRecord, identifiers_from_json, work_identifier_set

log = logging.getLogger(__name__)

DEFAULT_TITLE_THRESHOLD = 80.0


def _lcs_length(a: str, b: str) -> int:
    """Bit-parallel longest common subsequence length (O(|b|) word ops)."""
    if not a or not b:
        return 0
    masks: dict[str, int] = defaultdict(int)
    for i, ch in enumerate(a):
        masks[ch] |= 1 << i
    width = (1 << len(a)) - 1
    state = width
    for ch in b:
        matches = state & masks[ch]
        state = ((state + matches) | (state - matches)) & width
    return len(a) - state.bit_count()


def indel_distance(a: str, b: str) -> int:
    """Minimum insertions+deletions transforming a into b."""
    return len(a) + len(b) - 2 * _lcs_length(a, b)


def ratio(a: str, b: str) -> float:
    """Indel similarity scaled to [0, 100]; two empty strings score 100."""
    total = len(a) + len(b)
    if total == 0:
        return 100.0
    return 100.0 * (1.0 - indel_distance(a, b) / total)


def _windows(longer: str, m: int) -> Iterable[str]:
    """Length-m substrings, shorter edge windows, and the full string."""
    for i in range(len(longer) - m + 1):
        yield longer[i : i + m]
    for k in range(1, m):
        yield longer[:k]
        yield longer[len(longer) - k :]
    yield longer


def partial_ratio(a: str, b: str) -> float:
    """Best ratio of the shorter string against windows of the longer.

    Equal-length inputs reduce to ratio(a, b). The full-string comparison is
    part of the window set, so the result never falls below ratio(a, b); an
    exact substring scores 100.
    """
    if len(a) == len(b):
        return ratio(a, b)
    shorter, longer = (a, b) if len(a) < len(b) else (b, a)
    if not shorter or shorter in longer:
        return 100.0
    best = 0.0
    for window in _windows(longer, len(shorter)):
        score = ratio(shorter, window)
        if score > best:
            best = score
            if best == 100.0:
                break
    return best


class NoTitleBasis(ValueError):
    """Raised when either side of a title comparison has no usable titles."""


def title_score(cluster_titles: Sequence[str], work_edition_titles: Sequence[str]) -> float:
    """Mean partial ratio over the full Cartesian product of normalized titles.

    Titles that normalize to the empty string are ignored; if either side
    ends up empty the score is undefined and NoTitleBasis is raised.
    """
    left = [t for t in (normalize_text(t) for t in cluster_titles) if t]
    right = [t for t in (normalize_text(t) for t in work_edition_titles) if t]
    if not left or not right:
        raise NoTitleBasis("no usable titles on one side of the comparison")
    total = 0.0
    for lt in left:
        for rt in right:
            total += partial_ratio(lt, rt)
    return total / (len(left) * len(right))


@dataclass(frozen=True)
class Candidate:
    cluster_id: str
    work_id: str
    language: str
    title_score: float
    shared_identifiers: frozenset[Identifier]

    def __post_init__(self) -> None:
        if not self.shared_identifiers:
            raise ValueError(f"candidate ({self.cluster_id}, {self.work_id}): shared_identifiers empty")

    @property
    def key(self) -> tuple[str, str]:
        return (self.cluster_id, self.work_id)


@dataclass
class LinkageResult:
    candidates: list[Candidate] = field(default_factory=list)
    no_title_basis: list[tuple[str, str]] = field(default_factory=list)
    no_edition_in_language: list[tuple[str, str]] = field(default_factory=list)


def link_clusters(
    clusters: Sequence[Cluster],
    works: Sequence[WorkRecord],
    editions: Sequence[EditionRecord],
    language: Optional[str] = None,
) -> LinkageResult:
    """Pair clusters with works sharing at least one identifier and score them.

    Edition titles are restricted to the cluster's language; pairs without a
    title basis are dropped into the matching report bucket. Pass language to
    restrict to clusters of that language.
    """
    editions_by_work: dict[str, list[EditionRecord]] = defaultdict(list)
    for edition in editions:
        editions_by_work[edition.work_id].append(edition)
    work_ids_by_identifier: dict[Identifier, set[str]] = defaultdict(set)
    identifier_sets = {
        w.work_id: work_identifier_set(w, editions_by_work.get(w.work_id, ()))
        for w in works
    }
    for work_id, idents in identifier_sets.items():
        for ident in idents:
            work_ids_by_identifier[ident].add(work_id)

    result = LinkageResult()
    for c in clusters:
        if language is not None and c.language != language:
            continue
        linked_works: set[str] = set()
        for ident in c.identifiers:
            linked_works.update(work_ids_by_identifier.get(ident, ()))
        for work_id in sorted(linked_works):
            shared = c.identifiers & identifier_sets[work_id]
            edition_titles = [
                e.title for e in editions_by_work[work_id] if e.language == c.language
            ]
            if not edition_titles:
                result.no_edition_in_language.append((c.cluster_id, work_id))
                continue
            try:
                score = title_score(c.titles, edition_titles)
            except NoTitleBasis:
                result.no_title_basis.append((c.cluster_id, work_id))
                continue
            result.candidates.append(
                Candidate(
                    cluster_id=c.cluster_id,
                    work_id=work_id,
                    language=c.language,
                    title_score=score,
                    shared_identifiers=shared,
                )
            )
    log.info(
        "linkage: %d candidates (%d without title basis, %d without same-language edition)",
        len(result.candidates), len(result.no_title_basis), len(result.no_edition_in_language),
    )
    return result


def generate_candidates(
    clusters: Sequence[Cluster],
    works: Sequence[WorkRecord],
    editions: Sequence[EditionRecord],
    language: Optional[str] = None,
) -> list[Candidate]:
    """One scored Candidate per (cluster, work) pair sharing an identifier."""
    return link_clusters(clusters, works, editions, language).candidates


def apply_threshold(
    candidates: Iterable[Candidate], threshold: float = DEFAULT_TITLE_THRESHOLD
) -> tuple[list[Candidate], list[Candidate]]:
    """Partition candidates into (accepted, rejected); the boundary is accepted."""
    accepted, rejected = [], []
    for c in candidates:
        (accepted if c.title_score >= threshold else rejected).append(c)
    return accepted, rejected


def candidate_to_json(c: Candidate) -> dict:
    return {
        "cluster_id": c.cluster_id,
        "work_id": c.work_id,
        "language": c.language,
        "title_score": round(c.title_score, 4),
        "shared_identifiers": [
            {"kind": i.kind.value, "value": i.value}
            for i in sorted(c.shared_identifiers, key=lambda i: (i.kind.value, i.value))
        ],
    }


def candidate_from_json(obj: dict) -> Candidate:
    return Candidate(
        cluster_id=obj["cluster_id"],
        work_id=obj["work_id"],
        language=obj.get("language", "und"),
        title_score=obj["title_score"],
        shared_identifiers=identifiers_from_json(obj["shared_identifiers"]),
    )


def write_candidates(path: Path, candidates: Iterable[Candidate]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for c in candidates:
            fh.write(json.dumps(candidate_to_json(c), ensure_ascii=False) + "\n")


def read_candidates(path: Path) -> list[Candidate]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(candidate_from_json(json.loads(line)))
    return out

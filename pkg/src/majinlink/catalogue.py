"""Final catalogue emission and corpus statistics: language shares,
Herfindahl concentration, and per-decade temporal histograms."""
from __future__ import annotations

import csv
import json
import logging
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .dedup import Cluster
from .evaluation import median_iqr
from .linkage import Candidate
from .records import WorkRecord

__all__ = [
    "CatalogueEntry", "CoverageReport", "emit_catalogue", "herfindahl",
    "decade_histogram", "median_iqr", "LanguageShareTable",
    "write_catalogue", "read_language_shares", "write_language_shares_csv",
    "write_decades_csv", "write_herfindahl_csv",
]

log = logging.getLogger(__name__)


class CatalogueError(ValueError):
    """Referential-integrity failure while assembling the catalogue."""


@dataclass(frozen=True)
class CatalogueEntry:
    work_id: str
    first_publication_year: int
    title: str
    author_names: tuple[str, ...]
    author_ids: tuple[str, ...]
    language: str
    shadow_item_ids: tuple[str, ...]
    avg_rating: Optional[float] = None
    ratings_count: Optional[int] = None
    reviews_count: Optional[int] = None
    genres: Optional[tuple[str, ...]] = None
    experimental: bool = False

    def __post_init__(self) -> None:
        if not self.shadow_item_ids:
            raise ValueError(f"entry {self.work_id}: shadow_item_ids must be non-empty")


@dataclass
class CoverageReport:
    entries: int = 0
    with_genres: int = 0
    with_reviews_count: int = 0
    undated_works_skipped: int = 0

    @property
    def genres_fraction(self) -> float:
        return self.with_genres / self.entries if self.entries else 0.0

    @property
    def reviews_fraction(self) -> float:
        return self.with_reviews_count / self.entries if self.entries else 0.0


def emit_catalogue(
    accepted_candidates: Sequence[Candidate],
    works: Sequence[WorkRecord],
    clusters: Sequence[Cluster],
    language: str,
    experimental: Optional[bool] = None,
) -> tuple[list[CatalogueEntry], CoverageReport]:
    """One entry per work in the requested language, merging the shadow items
    of every accepted cluster linked to it.

    An accepted candidate naming an unknown work or cluster is a hard error.
    Works without a first publication year cannot be anchored in time and are
    skipped with a count (upstream filtering should have removed them).
    """
    if experimental is None:
        experimental = language != "en"
    works_by_id = {w.work_id: w for w in works}
    clusters_by_id = {c.cluster_id: c for c in clusters}

    items_by_work: dict[str, set[str]] = defaultdict(set)
    for cand in accepted_candidates:
        if cand.language != language:
            continue
        if cand.work_id not in works_by_id:
            raise CatalogueError(f"accepted candidate references unknown work {cand.work_id!r}")
        if cand.cluster_id not in clusters_by_id:
            raise CatalogueError(f"accepted candidate references unknown cluster {cand.cluster_id!r}")
        items_by_work[cand.work_id].update(clusters_by_id[cand.cluster_id].item_ids)

    entries = []
    report = CoverageReport()
    for work_id in sorted(items_by_work):
        work = works_by_id[work_id]
        if work.first_publication_year is None:
            report.undated_works_skipped += 1
            continue
        entry = CatalogueEntry(
            work_id=work.work_id,
            first_publication_year=work.first_publication_year,
            title=work.title,
            author_names=work.author_names,
            author_ids=work.author_ids,
            language=language,
            shadow_item_ids=tuple(sorted(items_by_work[work_id])),
            avg_rating=work.avg_rating,
            ratings_count=work.ratings_count,
            reviews_count=work.reviews_count,
            genres=work.genres,
            experimental=experimental,
        )
        entries.append(entry)
        report.entries += 1
        if entry.genres is not None:
            report.with_genres += 1
        if entry.reviews_count is not None:
            report.with_reviews_count += 1
    log.info(
        "catalogue %s: %d entries; genres %.2f%%, reviews_count %.2f%%",
        language, report.entries, 100 * report.genres_fraction, 100 * report.reviews_fraction,
    )
    return entries, report


def entry_to_json(entry: CatalogueEntry) -> dict:
    return {
        "work_id": entry.work_id,
        "first_publication_year": entry.first_publication_year,
        "title": entry.title,
        "author_names": list(entry.author_names),
        "author_ids": list(entry.author_ids),
        "language": entry.language,
        "shadow_item_ids": list(entry.shadow_item_ids),
        "avg_rating": entry.avg_rating,
        "ratings_count": entry.ratings_count,
        "reviews_count": entry.reviews_count,
        "genres": list(entry.genres) if entry.genres is not None else None,
        "experimental": entry.experimental,
    }


def write_catalogue(path: Path, entries: Iterable[CatalogueEntry]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(json.dumps(entry_to_json(entry), ensure_ascii=False) + "\n")


# --- Concentration and temporal statistics ---------------------------------------

def herfindahl(shares: Sequence[float], normalized: bool = False) -> float:
    """Sum of squared shares; optionally rescaled so a uniform split gives 0.

    Shares are fractions in [0, 1]. With a single category the index is 1 by
    convention, normalized or not.
    """
    if len(shares) == 0:
        raise ValueError("need at least one share")
    if any(s < 0 for s in shares):
        raise ValueError("shares must be non-negative")
    n = len(shares)
    h = sum(s * s for s in shares)
    if not normalized:
        return h
    if n == 1:
        return 1.0
    return (h - 1.0 / n) / (1.0 - 1.0 / n)


@dataclass
class LanguageShareTable:
    rows: list[tuple[str, float]] = field(default_factory=list)  # (language, share in percent)

    def fractions(self, renormalize: bool = True) -> list[float]:
        """Listed shares as fractions, optionally renormalized over the listed
        rows (the long tail of unlisted languages is excluded)."""
        values = [share / 100.0 for _, share in self.rows]
        if not renormalize:
            return values
        total = sum(values)
        if total == 0:
            return values
        return [v / total for v in values]


def language_shares_from_items(languages: Iterable[str]) -> LanguageShareTable:
    counts = Counter(languages)
    total = sum(counts.values())
    rows = [
        (lang, 100.0 * count / total)
        for lang, count in sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    ]
    return LanguageShareTable(rows=rows)


Decade = Union[int, str]


def _year_of(record, year_field: str):
    if isinstance(record, dict):
        return record.get(year_field)
    return getattr(record, year_field, None)


def decade_histogram(records: Iterable, year_field: str = "first_publication_year") -> list[tuple[Decade, int]]:
    """Counts per publication decade, ascending; records without a year land
    in a trailing "und" bucket."""
    counts: Counter[int] = Counter()
    undated = 0
    for record in records:
        year = _year_of(record, year_field)
        if year is None:
            undated += 1
        else:
            counts[(int(year) // 10) * 10] += 1
    out: list[tuple[Decade, int]] = sorted(counts.items())
    if undated:
        out.append(("und", undated))
    return out


# --- CSV outputs ------------------------------------------------------------------

def write_language_shares_csv(path: Path, table: LanguageShareTable) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["language", "share"])
        for lang, share in table.rows:
            writer.writerow([lang, f"{share:.4f}"])


def read_language_shares(path: Path) -> LanguageShareTable:
    """Read a (language, share-in-percent) CSV; blank shares are dropped."""
    rows = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header and header[0].strip().lower() != "language":
            fh.seek(0)
            reader = csv.reader(fh)
        for row in reader:
            if len(row) >= 2 and row[1].strip():
                rows.append((row[0].strip(), float(row[1])))
    return LanguageShareTable(rows=rows)


def write_decades_csv(path: Path, histogram: Sequence[tuple[Decade, int]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["decade", "count"])
        for decade, count in histogram:
            writer.writerow([decade, count])


def write_herfindahl_csv(path: Path, rows: Sequence[tuple[str, float, float]]) -> None:
    """Rows of (corpus, plain H, normalized H*)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["corpus", "herfindahl", "herfindahl_normalized"])
        for corpus, plain, norm in rows:
            writer.writerow([corpus, f"{plain:.4f}", f"{norm:.4f}"])

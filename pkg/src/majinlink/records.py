"""Work/edition bibliographic scaffold and book-identifier normalization.

A *work* is the abstract text; an *edition* is one published version of it.
Identifiers (ISBN, ASIN) are canonicalized so that linkage can rely on plain
set intersection: every valid ISBN-10 is rewritten as its ISBN-13 form.
"""
from __future__ import annotations

import json
import logging
import re
from dataclasses import dataclass, field
from datetime import date
from enum import Enum
from pathlib import Path
from typing import Iterable, Iterator, Optional

log = logging.getLogger(__name__)

_SEPARATORS = re.compile(r"[\s\-_.:/]+")
_ASIN_RE = re.compile(r"^B[0-9A-Z]{9}$")
_LANG_PRIMARY = re.compile(r"^[A-Za-z]{2}$")


class IdentifierKind(Enum):
    ISBN13 = "isbn13"
    ASIN = "asin"


@dataclass(frozen=True)
class Identifier:
    """A canonical book identifier: 13-digit ISBN or 10-char ASIN."""

    kind: IdentifierKind
    value: str

    def __post_init__(self) -> None:
        if self.kind is IdentifierKind.ISBN13:
            if not (len(self.value) == 13 and self.value.isdigit() and isbn13_check_ok(self.value)):
                raise ValueError(f"invalid ISBN-13 value: {self.value!r}")
        else:
            # Amazon reuses ISBN-10s as ASINs for books, so both shapes are legal.
            if not (_ASIN_RE.match(self.value) or isbn10_check_ok(self.value)):
                raise ValueError(f"invalid ASIN value: {self.value!r}")

    def as_str(self) -> str:
        return f"{self.kind.value}:{self.value}"

    @classmethod
    def from_str(cls, text: str) -> "Identifier":
        kind, _, value = text.partition(":")
        return cls(IdentifierKind(kind), value)


def isbn10_check_ok(candidate: str) -> bool:
    """Mod-11 weighted checksum; 'X' allowed as the final check digit."""
    if len(candidate) != 10:
        return False
    body, check = candidate[:9], candidate[9]
    if not body.isdigit() or not (check.isdigit() or check == "X"):
        return False
    total = sum((10 - i) * int(d) for i, d in enumerate(body))
    total += 10 if check == "X" else int(check)
    return total % 11 == 0


def isbn13_check_ok(candidate: str) -> bool:
    """Mod-10 checksum with alternating 1/3 weights."""
    if len(candidate) != 13 or not candidate.isdigit():
        return False
    total = sum((1 if i % 2 == 0 else 3) * int(d) for i, d in enumerate(candidate[:12]))
    return (10 - total % 10) % 10 == int(candidate[12])


def isbn13_check_digit(first12: str) -> str:
    total = sum((1 if i % 2 == 0 else 3) * int(d) for i, d in enumerate(first12))
    return str((10 - total % 10) % 10)


def isbn10_to_isbn13(isbn10: str) -> str:
    """Prefix 978 and recompute the check digit. Caller validates the input."""
    first12 = "978" + isbn10[:9]
    return first12 + isbn13_check_digit(first12)


def normalize_identifier(raw: str) -> Optional[Identifier]:
    """Canonicalize a raw identifier string, or return None if it is not one.

    Strips separators and upcases, then tries in order: ISBN-13 (mod-10
    checksum), ISBN-10 (mod-11 checksum, converted to ISBN-13), ASIN
    (B followed by 9 alphanumerics). Idempotent on its own output.
    """
    if raw is None:
        return None
    cleaned = _SEPARATORS.sub("", raw).upper()
    # catalogue and OPF metadata habitually prefix the scheme, e.g. urn:isbn:
    for prefix in ("URNISBN", "ISBN13", "ISBN10", "ISBN", "URNASIN", "ASIN"):
        if cleaned.startswith(prefix) and len(cleaned) > len(prefix):
            cleaned = cleaned[len(prefix):]
            break
    if len(cleaned) == 13 and cleaned.isdigit():
        if isbn13_check_ok(cleaned):
            return Identifier(IdentifierKind.ISBN13, cleaned)
        log.debug("rejected ISBN-13 (bad checksum): %r", raw)
        return None
    if len(cleaned) == 10:
        if isbn10_check_ok(cleaned):
            return Identifier(IdentifierKind.ISBN13, isbn10_to_isbn13(cleaned))
        if _ASIN_RE.match(cleaned):
            return Identifier(IdentifierKind.ASIN, cleaned)
        log.debug("rejected 10-char identifier: %r", raw)
        return None
    log.debug("rejected identifier: %r", raw)
    return None


def normalize_language(code: Optional[str]) -> str:
    """Lowercase two-letter primary subtag, or "und" when not detectable."""
    if not code:
        return "und"
    primary = re.split(r"[-_]", code.strip(), maxsplit=1)[0]
    if _LANG_PRIMARY.match(primary):
        return primary.lower()
    return "und"


@dataclass(frozen=True)
class WorkRecord:
    work_id: str
    title: str
    author_ids: tuple[str, ...] = ()
    author_names: tuple[str, ...] = ()
    first_publication_year: Optional[int] = None
    genres: Optional[tuple[str, ...]] = None
    avg_rating: Optional[float] = None
    ratings_count: Optional[int] = None
    reviews_count: Optional[int] = None
    edition_ids: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if not self.edition_ids:
            raise ValueError(f"work {self.work_id}: edition_ids must be non-empty")
        if self.first_publication_year is not None and self.first_publication_year > date.today().year:
            raise ValueError(f"work {self.work_id}: first_publication_year is in the future")
        if self.ratings_count is not None and self.ratings_count < 0:
            raise ValueError(f"work {self.work_id}: ratings_count must be >= 0")
        if self.avg_rating is not None and not 0.0 <= self.avg_rating <= 5.0:
            raise ValueError(f"work {self.work_id}: avg_rating must be in [0, 5]")


@dataclass(frozen=True)
class EditionRecord:
    edition_id: str
    work_id: str
    title: str
    language: str = "und"
    identifiers: frozenset[Identifier] = frozenset()
    publication_year: Optional[int] = None


@dataclass(frozen=True)
class AuthorRecord:
    author_id: str
    name: str
    ratings_count: Optional[int] = None
    work_ids: tuple[str, ...] = ()


class ContractViolation(ValueError):
    """An input breaks a cross-record precondition (e.g. dangling work_id)."""


def work_identifier_set(work: WorkRecord, editions: Iterable[EditionRecord]) -> frozenset[Identifier]:
    """Union of identifiers over the work's editions.

    Every edition must belong to the work; a mismatched work_id raises
    ContractViolation.
    """
    out: set[Identifier] = set()
    for edition in editions:
        if edition.work_id != work.work_id:
            raise ContractViolation(
                f"edition {edition.edition_id} belongs to {edition.work_id}, not {work.work_id}"
            )
        out.update(edition.identifiers)
    return frozenset(out)


@dataclass
class DatableSplit:
    retained: list[WorkRecord] = field(default_factory=list)
    discarded: list[WorkRecord] = field(default_factory=list)

    @property
    def retained_fraction(self) -> float:
        total = len(self.retained) + len(self.discarded)
        return len(self.retained) / total if total else 0.0


def filter_datable_works(works: Iterable[WorkRecord]) -> DatableSplit:
    """Partition works by presence of a first publication year."""
    split = DatableSplit()
    for work in works:
        (split.retained if work.first_publication_year is not None else split.discarded).append(work)
    log.info(
        "datable works: retained %d, discarded %d", len(split.retained), len(split.discarded)
    )
    return split


# --- JSON Lines serialization ------------------------------------------------

def _identifiers_to_json(identifiers: frozenset[Identifier]) -> list[dict]:
    return [
        {"kind": i.kind.value, "value": i.value}
        for i in sorted(identifiers, key=lambda i: (i.kind.value, i.value))
    ]


def identifiers_from_json(items: Iterable) -> frozenset[Identifier]:
    out = set()
    for item in items:
        if isinstance(item, str):
            out.add(Identifier.from_str(item))
        else:
            out.add(Identifier(IdentifierKind(item["kind"]), item["value"]))
    return frozenset(out)


def work_to_json(work: WorkRecord) -> dict:
    return {
        "work_id": work.work_id,
        "title": work.title,
        "author_ids": list(work.author_ids),
        "author_names": list(work.author_names),
        "first_publication_year": work.first_publication_year,
        "genres": list(work.genres) if work.genres is not None else None,
        "avg_rating": work.avg_rating,
        "ratings_count": work.ratings_count,
        "reviews_count": work.reviews_count,
        "edition_ids": list(work.edition_ids),
    }


def work_from_json(obj: dict) -> WorkRecord:
    return WorkRecord(
        work_id=obj["work_id"],
        title=obj["title"],
        author_ids=tuple(obj.get("author_ids") or ()),
        author_names=tuple(obj.get("author_names") or ()),
        first_publication_year=obj.get("first_publication_year"),
        genres=tuple(obj["genres"]) if obj.get("genres") is not None else None,
        avg_rating=obj.get("avg_rating"),
        ratings_count=obj.get("ratings_count"),
        reviews_count=obj.get("reviews_count"),
        edition_ids=tuple(obj.get("edition_ids") or ()),
    )


def edition_to_json(edition: EditionRecord) -> dict:
    return {
        "edition_id": edition.edition_id,
        "work_id": edition.work_id,
        "title": edition.title,
        "language": edition.language,
        "identifiers": _identifiers_to_json(edition.identifiers),
        "publication_year": edition.publication_year,
    }


def edition_from_json(obj: dict) -> EditionRecord:
    return EditionRecord(
        edition_id=obj["edition_id"],
        work_id=obj["work_id"],
        title=obj["title"],
        language=normalize_language(obj.get("language")),
        identifiers=identifiers_from_json(obj.get("identifiers") or ()),
        publication_year=obj.get("publication_year"),
    )


def author_to_json(author: AuthorRecord) -> dict:
    return {
        "author_id": author.author_id,
        "name": author.name,
        "ratings_count": author.ratings_count,
        "work_ids": list(author.work_ids),
    }


def author_from_json(obj: dict) -> AuthorRecord:
    return AuthorRecord(
        author_id=obj["author_id"],
        name=obj["name"],
        ratings_count=obj.get("ratings_count"),
        work_ids=tuple(obj.get("work_ids") or ()),
    )


def write_jsonl(path: Path, objs: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for obj in objs:
            fh.write(json.dumps(obj, ensure_ascii=False) + "\n")


def read_jsonl(path: Path) -> Iterator[dict]:
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


def load_works(path: Path) -> list[WorkRecord]:
    return [work_from_json(obj) for obj in read_jsonl(path)]


def load_editions(path: Path) -> list[EditionRecord]:
    return [edition_from_json(obj) for obj in read_jsonl(path)]


def load_authors(path: Path) -> list[AuthorRecord]:
    authors = [author_from_json(obj) for obj in read_jsonl(path)]
    seen: set[str] = set()
    for author in authors:
        if author.author_id in seen:
            raise ContractViolation(f"duplicate author_id {author.author_id!r} in {path}")
        seen.add(author.author_id)
    return authors

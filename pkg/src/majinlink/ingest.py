"""Catalogue ingestion: format triage, size filtering, EPUB text extraction,
and text normalization/shingling for the dedup stage.

Extraction walks the EPUB spine in order and strips markup down to
newline-delimited paragraphs; anything structurally broken raises
ExtractionError and the caller discards the item.
"""
from __future__ import annotations

import csv
import json
import logging
import posixpath
import re
import unicodedata
import zipfile
from dataclasses import dataclass, field
from enum import Enum
from html.parser import HTMLParser
from io import BytesIO
from pathlib import Path
from typing import Iterable, Optional
from xml.etree import ElementTree

import numpy as np

from .records import Identifier, identifiers_from_json, normalize_identifier

log = logging.getLogger(__name__)

# Seed for the 64-bit FNV-1a shingle hash. Fixed so that shingle sets and the
# MinHash signatures built on them are reproducible across runs and machines.
SHINGLE_HASH_SEED = 0x9E3779B97F4A7C15

SIZE_MIN_BYTES = 10 * 1024          # 10 KB, binary; boundary retained
SIZE_MAX_BYTES = 10 * 1024 * 1024   # 10 MB, binary; boundary retained

_EPUB_CONVERTIBLE = {"epub", "mobi", "azw", "azw3", "fb2"}


class FormatClass(Enum):
    EPUB = "epub"
    PDF = "pdf"
    DISCARD = "discard"


def classify_format(extension: str) -> FormatClass:
    """Total, case-insensitive triage of a file extension."""
    ext = extension.lower().lstrip(".")
    if ext in _EPUB_CONVERTIBLE:
        return FormatClass.EPUB
    if ext == "pdf":
        return FormatClass.PDF
    return FormatClass.DISCARD


@dataclass(frozen=True)
class ShadowItem:
    """One file's metadata from a shadow-library catalogue."""

    item_id: str
    extension: str
    size_bytes: int
    declared_title: Optional[str] = None
    declared_language: Optional[str] = None
    identifiers: frozenset[Identifier] = frozenset()
    text_ref: Optional[str] = None

    def __post_init__(self) -> None:
        if self.extension.startswith("."):
            raise ValueError(f"item {self.item_id}: extension must not carry a leading dot")
        if self.size_bytes < 0:
            raise ValueError(f"item {self.item_id}: size_bytes must be non-negative")


def shadow_item_to_json(item: ShadowItem) -> dict:
    return {
        "item_id": item.item_id,
        "declared_title": item.declared_title,
        "declared_language": item.declared_language,
        "extension": item.extension,
        "size_bytes": item.size_bytes,
        "identifiers": [
            {"kind": i.kind.value, "value": i.value}
            for i in sorted(item.identifiers, key=lambda i: (i.kind.value, i.value))
        ],
        "text_ref": item.text_ref,
    }


def shadow_item_from_json(obj: dict) -> ShadowItem:
    return ShadowItem(
        item_id=obj["item_id"],
        declared_title=obj.get("declared_title"),
        declared_language=obj.get("declared_language"),
        extension=obj["extension"],
        size_bytes=obj["size_bytes"],
        identifiers=identifiers_from_json(obj.get("identifiers") or ()),
        text_ref=obj.get("text_ref"),
    )


def load_shadow_items(path: Path) -> list[ShadowItem]:
    items = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                items.append(shadow_item_from_json(json.loads(line)))
    return items


@dataclass
class SizeSplit:
    retained: list[ShadowItem] = field(default_factory=list)
    too_small: list[ShadowItem] = field(default_factory=list)
    too_large: list[ShadowItem] = field(default_factory=list)


def size_filter(items: Iterable[ShadowItem]) -> SizeSplit:
    """Keep items within [10 KB, 10 MB]; boundaries are retained."""
    split = SizeSplit()
    for item in items:
        if item.size_bytes < SIZE_MIN_BYTES:
            split.too_small.append(item)
        elif item.size_bytes > SIZE_MAX_BYTES:
            split.too_large.append(item)
        else:
            split.retained.append(item)
    return split


# --- EPUB extraction ---------------------------------------------------------

class ExtractionError(Exception):
    """Structural failure while reading an EPUB; the item should be discarded."""


_BLOCK_TAGS = {
    "p", "div", "br", "li", "ul", "ol", "dl", "dt", "dd", "table", "tr",
    "h1", "h2", "h3", "h4", "h5", "h6", "blockquote", "pre", "hr",
    "section", "article", "aside", "header", "footer", "figure", "figcaption",
}
_SKIP_TAGS = {"script", "style", "head"}


class _TextExtractor(HTMLParser):
    """Collects text nodes into paragraphs, breaking at block elements."""

    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.paragraphs: list[str] = []
        self._chunks: list[str] = []
        self._skip_depth = 0

    def _flush(self) -> None:
        text = re.sub(r"\s+", " ", "".join(self._chunks)).strip()
        self._chunks = []
        if text:
            self.paragraphs.append(text)

    def handle_starttag(self, tag, attrs):
        if tag in _SKIP_TAGS:
            self._skip_depth += 1
        elif tag in _BLOCK_TAGS:
            self._flush()

    def handle_endtag(self, tag):
        if tag in _SKIP_TAGS:
            self._skip_depth = max(0, self._skip_depth - 1)
        elif tag in _BLOCK_TAGS:
            self._flush()

    def handle_data(self, data):
        if not self._skip_depth:
            self._chunks.append(data)

    def close(self):
        super().close()
        self._flush()


def _xhtml_to_paragraphs(document: bytes) -> list[str]:
    try:
        text = document.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ExtractionError(f"undecodable document: {exc}") from exc
    extractor = _TextExtractor()
    extractor.feed(text)
    extractor.close()
    return extractor.paragraphs


def _opf_path(archive: zipfile.ZipFile) -> str:
    try:
        container = archive.read("META-INF/container.xml")
    except KeyError as exc:
        raise ExtractionError("missing META-INF/container.xml") from exc
    try:
        root = ElementTree.fromstring(container)
    except ElementTree.ParseError as exc:
        raise ExtractionError(f"unparseable container.xml: {exc}") from exc
    for rootfile in root.iterfind(".//{*}rootfile"):
        path = rootfile.get("full-path")
        if path:
            return path
    raise ExtractionError("container.xml names no rootfile")


def _spine_documents(archive: zipfile.ZipFile) -> list[bytes]:
    opf_name = _opf_path(archive)
    try:
        opf = ElementTree.fromstring(archive.read(opf_name))
    except KeyError as exc:
        raise ExtractionError(f"missing OPF package {opf_name}") from exc
    except ElementTree.ParseError as exc:
        raise ExtractionError(f"unparseable OPF: {exc}") from exc
    hrefs = {
        item.get("id"): item.get("href")
        for item in opf.iterfind(".//{*}manifest/{*}item")
        if item.get("id") and item.get("href")
    }
    base = posixpath.dirname(opf_name)
    documents = []
    for itemref in opf.iterfind(".//{*}spine/{*}itemref"):
        href = hrefs.get(itemref.get("idref"))
        if href is None:
            raise ExtractionError(f"spine references unknown manifest id {itemref.get('idref')!r}")
        name = posixpath.normpath(posixpath.join(base, href)) if base else href
        try:
            documents.append(archive.read(name))
        except KeyError as exc:
            raise ExtractionError(f"spine document {name} missing from archive") from exc
    if not documents:
        raise ExtractionError("empty spine")
    return documents


def extract_epub_text(epub_bytes: bytes) -> str:
    """Extract plain text from an EPUB container, spine order preserved.

    Paragraphs are newline-delimited; spine items are joined with a blank
    line. Non-spine resources (images, fonts, nav) are ignored.
    """
    try:
        archive = zipfile.ZipFile(BytesIO(epub_bytes))
    except zipfile.BadZipFile as exc:
        raise ExtractionError(f"bad zip container: {exc}") from exc
    with archive:
        parts = []
        for document in _spine_documents(archive):
            paragraphs = _xhtml_to_paragraphs(document)
            if paragraphs:
                parts.append("\n".join(paragraphs))
    return "\n\n".join(parts)


def harvest_epub_identifiers(epub_bytes: bytes) -> frozenset[Identifier]:
    """Pull dc:identifier values out of the OPF metadata, canonicalized.

    Best-effort companion to the catalogue-declared identifiers; failures
    yield an empty set rather than an error, since text extraction already
    gates item validity.
    """
    try:
        with zipfile.ZipFile(BytesIO(epub_bytes)) as archive:
            opf = ElementTree.fromstring(archive.read(_opf_path(archive)))
    except (ExtractionError, zipfile.BadZipFile, KeyError, ElementTree.ParseError):
        return frozenset()
    found = set()
    for node in opf.iter("{http://purl.org/dc/elements/1.1/}identifier"):
        ident = normalize_identifier(node.text or "")
        if ident is not None:
            found.add(ident)
    return frozenset(found)


# --- Normalization and shingling ----------------------------------------------

_NON_WORD_RUNS = re.compile(r"[\W_]+", re.UNICODE)


def normalize_text(text: str) -> str:
    """NFKC, lowercase, runs of whitespace/punctuation collapsed to one space.

    Symbols and other non-alphanumerics are treated as separators too, so the
    output is purely words of letters/digits separated by single spaces.
    """
    folded = unicodedata.normalize("NFKC", text).lower()
    return _NON_WORD_RUNS.sub(" ", folded).strip()


def fnv1a64(data: bytes, seed: int = SHINGLE_HASH_SEED) -> int:
    """Seeded 64-bit FNV-1a; the scalar reference for the vectorized path."""
    h = 0xCBF29CE484222325 ^ (seed & 0xFFFFFFFFFFFFFFFF)
    for byte in data:
        h ^= byte
        h = (h * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def _fnv1a64_batch(shingles: list[str], seed: int) -> np.ndarray:
    """Vectorized FNV-1a over a batch of strings (column-wise over bytes)."""
    encoded = [s.encode("utf-8") for s in shingles]
    lengths = np.array([len(b) for b in encoded], dtype=np.int64)
    width = int(lengths.max(initial=0))
    table = np.zeros((len(encoded), width), dtype=np.uint64)
    for row, raw in enumerate(encoded):
        table[row, : len(raw)] = np.frombuffer(raw, dtype=np.uint8)
    h = np.full(len(encoded), 0xCBF29CE484222325 ^ (seed & 0xFFFFFFFFFFFFFFFF), dtype=np.uint64)
    prime = np.uint64(0x100000001B3)
    for col in range(width):
        active = lengths > col
        h[active] ^= table[active, col]
        h[active] *= prime
    return h


@dataclass(frozen=True)
class ShingleSet:
    item_id: str
    hashes: frozenset[int]


def shingle(normalized_text: str, k: int = 3, item_id: str = "", seed: int = SHINGLE_HASH_SEED) -> ShingleSet:
    """Hash overlapping k-word windows of normalized text.

    Texts shorter than k words contribute the hash of the whole text as a
    single shingle, so the result is never empty.
    """
    words = normalized_text.split()
    if len(words) < k:
        return ShingleSet(item_id, frozenset([fnv1a64(normalized_text.encode("utf-8"), seed)]))
    windows = [" ".join(words[i : i + k]) for i in range(len(words) - k + 1)]
    hashes = _fnv1a64_batch(windows, seed)
    return ShingleSet(item_id, frozenset(int(h) for h in hashes))


def write_shingles(path: Path, shingles: ShingleSet) -> None:
    """Little-endian u64 array, sorted ascending."""
    arr = np.array(sorted(shingles.hashes), dtype="<u8")
    path.write_bytes(arr.tobytes())


def read_shingles(path: Path, item_id: str) -> ShingleSet:
    arr = np.frombuffer(path.read_bytes(), dtype="<u8")
    return ShingleSet(item_id, frozenset(int(h) for h in arr))


# --- Directory-level ingest run -----------------------------------------------

@dataclass
class TriageRow:
    item_id: str
    format_class: str
    size_bytes: int
    decision: str


@dataclass
class IngestResult:
    retained: list[ShadowItem] = field(default_factory=list)
    triage: list[TriageRow] = field(default_factory=list)
    epub_identifier_items: int = 0


def _resolve_payload(payload_dir: Path, item: ShadowItem) -> tuple[Optional[Path], str]:
    """Locate the extractable payload: an EPUB (native or pre-converted) or
    plain text. MOBI/AZW/FB2 binaries are not parsed here; triage accepts
    them but they must have been converted to .epub or .txt upstream.
    """
    epub = payload_dir / f"{item.item_id}.epub"
    if epub.exists():
        return epub, "epub"
    textual = payload_dir / f"{item.item_id}.txt"
    if textual.exists():
        return textual, "txt"
    return None, "missing"


def run_ingest(
    items: Iterable[ShadowItem],
    payload_dir: Path,
    out_dir: Path,
    k: int = 3,
    seed: int = SHINGLE_HASH_SEED,
) -> IngestResult:
    """Triage items, extract text, and write texts/, shingles/, triage.csv."""
    texts_dir = out_dir / "texts"
    shingles_dir = out_dir / "shingles"
    texts_dir.mkdir(parents=True, exist_ok=True)
    shingles_dir.mkdir(parents=True, exist_ok=True)
    result = IngestResult()

    for item in items:
        fmt = classify_format(item.extension)
        if fmt is not FormatClass.EPUB:
            result.triage.append(TriageRow(item.item_id, fmt.value, item.size_bytes, "discarded"))
            continue
        if item.size_bytes < SIZE_MIN_BYTES:
            result.triage.append(TriageRow(item.item_id, fmt.value, item.size_bytes, "too_small"))
            continue
        if item.size_bytes > SIZE_MAX_BYTES:
            result.triage.append(TriageRow(item.item_id, fmt.value, item.size_bytes, "too_large"))
            continue

        payload, payload_kind = _resolve_payload(payload_dir, item)
        if payload is None:
            result.triage.append(TriageRow(item.item_id, fmt.value, item.size_bytes, "missing_payload"))
            continue
        harvested: frozenset[Identifier] = frozenset()
        if payload_kind == "epub":
            raw = payload.read_bytes()
            try:
                text = extract_epub_text(raw)
            except ExtractionError as exc:
                log.debug("extraction failed for %s: %s", item.item_id, exc)
                result.triage.append(TriageRow(item.item_id, fmt.value, item.size_bytes, "extract_error"))
                continue
            harvested = harvest_epub_identifiers(raw)
        else:
            text = payload.read_text(encoding="utf-8")

        normalized = normalize_text(text)
        if not normalized:
            result.triage.append(TriageRow(item.item_id, fmt.value, item.size_bytes, "empty_text"))
            continue

        text_path = texts_dir / f"{item.item_id}.txt"
        text_path.write_text(text, encoding="utf-8")
        write_shingles(shingles_dir / f"{item.item_id}.bin", shingle(normalized, k, item.item_id, seed))

        if harvested - item.identifiers:
            result.epub_identifier_items += 1
        enriched = ShadowItem(
            item_id=item.item_id,
            declared_title=item.declared_title,
            declared_language=item.declared_language,
            extension=item.extension,
            size_bytes=item.size_bytes,
            identifiers=item.identifiers | harvested,
            text_ref=str(text_path),
        )
        result.retained.append(enriched)
        result.triage.append(TriageRow(item.item_id, fmt.value, item.size_bytes, "retained"))

    with open(out_dir / "triage.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["item_id", "format_class", "size_bytes", "decision"])
        for row in result.triage:
            writer.writerow([row.item_id, row.format_class, row.size_bytes, row.decision])

    log.info(
        "ingest: %d retained of %d; %d items carried extra identifiers inside the EPUB",
        len(result.retained), len(result.triage), result.epub_identifier_items,
    )
    return result

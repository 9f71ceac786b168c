#!/usr/bin/env python3
"""Regenerate the demo inputs in this directory (seeded, deterministic).

Produces a miniature corpus the CLI can chew through end to end: six works
with editions and identifiers, ten EPUB payloads forming five near-duplicate
pairs, a couple of triage rejects, and a small recommendation graph for the
crawl simulator.
"""
from __future__ import annotations

import json
import random
import zipfile
from io import BytesIO
from pathlib import Path

HERE = Path(__file__).parent

WORKS = [
    ("w_marlow", "The Lighthouse of Marlow Sound", "H. Calloway", 1921),
    ("w_orchard", "Letters from the Stone Orchard", "M. Venn", 1954),
    ("w_tides", "A Field Guide to Vanishing Tides", "R. Oduya", 1998),
    ("w_clockmaker", "The Clockmaker's Apprentice", "E. Brandt", 1889),
    ("w_meridian", "Meridian Nights", "S. Ferro", 2011),
    ("w_unlinked", "An Unlinked Curiosity", "T. Nobody", 1977),
]

SYLLABLES = ["ba", "ce", "di", "fo", "gu", "ha", "ki", "lo", "ma", "ne",
             "or", "pe", "qui", "ra", "su", "ta", "ve", "wi", "xa", "zo"]


def isbn13(rng: random.Random) -> str:
    first12 = "978" + "".join(str(rng.randrange(10)) for _ in range(9))
    total = sum(int(d) for d in first12[0::2]) + 3 * sum(int(d) for d in first12[1::2])
    return first12 + str((10 - total % 10) % 10)


def prose(rng: random.Random, n_paragraphs: int = 60) -> list[str]:
    """Word-salad prose over a per-book vocabulary, so distinct books share
    almost no 3-word shingles while copies of one book stay near-identical."""
    vocab = ["".join(rng.choice(SYLLABLES) for _ in range(rng.randrange(2, 4)))
             for _ in range(300)]
    paragraphs = []
    for _ in range(n_paragraphs):
        sentences = []
        for _ in range(rng.randrange(3, 6)):
            words = [rng.choice(vocab) for _ in range(rng.randrange(6, 14))]
            sentences.append(" ".join(words).capitalize())
        paragraphs.append(". ".join(sentences) + ".")
    return paragraphs


def make_epub(title: str, paragraphs: list[str], identifier: str | None) -> bytes:
    container = (
        '<?xml version="1.0"?>'
        '<container version="1.0" xmlns="urn:oasis:names:tc:opendocument:xmlns:container">'
        '<rootfiles><rootfile full-path="OEBPS/content.opf" '
        'media-type="application/oebps-package+xml"/></rootfiles></container>'
    )
    ident = f"<dc:identifier>urn:isbn:{identifier}</dc:identifier>" if identifier else ""
    opf = (
        '<?xml version="1.0"?>'
        '<package xmlns="http://www.idpf.org/2007/opf" '
        'xmlns:dc="http://purl.org/dc/elements/1.1/" version="2.0">'
        f"<metadata><dc:title>{title}</dc:title>{ident}</metadata>"
        '<manifest><item id="c1" href="chapter1.xhtml" media-type="application/xhtml+xml"/>'
        '</manifest><spine><itemref idref="c1"/></spine></package>'
    )
    body = "".join(f"<p>{p}</p>" for p in paragraphs)
    doc = (
        '<?xml version="1.0" encoding="utf-8"?>'
        '<html xmlns="http://www.w3.org/1999/xhtml"><head><title>1</title></head>'
        f"<body>{body}</body></html>"
    )
    buf = BytesIO()
    # stored, not deflated: keeps the payload above the 10 KB triage floor
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_STORED) as zf:
        zf.writestr("mimetype", "application/epub+zip")
        zf.writestr("META-INF/container.xml", container)
        zf.writestr("OEBPS/content.opf", opf)
        zf.writestr("OEBPS/chapter1.xhtml", doc)
    return buf.getvalue()


def main() -> None:
    rng = random.Random(4)
    payloads = HERE / "payloads"
    payloads.mkdir(exist_ok=True)

    works_rows, edition_rows, item_rows = [], [], []
    for w, (work_id, title, author, year) in enumerate(WORKS):
        isbns = [isbn13(rng) for _ in range(2)]
        edition_ids = [f"{work_id}_e{j}" for j in range(2)]
        works_rows.append({
            "work_id": work_id, "title": title,
            "author_ids": [f"a{w}"], "author_names": [author],
            "first_publication_year": year, "genres": ["fiction"],
            "avg_rating": round(rng.uniform(3.2, 4.8), 2),
            "ratings_count": rng.randrange(40, 4000),
            "reviews_count": rng.randrange(5, 400),
            "edition_ids": edition_ids,
        })
        for j, (edition_id, isbn) in enumerate(zip(edition_ids, isbns)):
            edition_rows.append({
                "edition_id": edition_id, "work_id": work_id,
                "title": title if j == 0 else f"{title} (Penguin Classics)",
                "language": "en",
                "identifiers": [{"kind": "isbn13", "value": isbn}],
                "publication_year": year + j * 7,
            })
        if work_id == "w_unlinked":
            continue  # no shadow items for this one: it stays uncatalogued
        paragraphs = prose(rng)
        for copy in range(2):
            item_id = f"{work_id}_copy{copy}"
            copy_paragraphs = list(paragraphs)
            if copy == 1:
                del copy_paragraphs[rng.randrange(len(copy_paragraphs))]
            declared = title.upper() if copy else f"{title}: A Novel"
            epub = make_epub(title, copy_paragraphs, isbns[0] if copy == 0 else None)
            (payloads / f"{item_id}.epub").write_bytes(epub)
            item_rows.append({
                "item_id": item_id,
                "declared_title": declared,
                "declared_language": "en",
                "extension": "epub",
                "size_bytes": len(epub),
                "identifiers": [{"kind": "isbn13", "value": isbns[0]}] if copy == 0 else [],
                "text_ref": None,
            })
    item_rows.append({
        "item_id": "scan_only", "declared_title": "Scanned Facsimile",
        "declared_language": "en", "extension": "pdf", "size_bytes": 300_000,
        "identifiers": [], "text_ref": None,
    })
    item_rows.append({
        "item_id": "too_tiny", "declared_title": "Pamphlet",
        "declared_language": "en", "extension": "epub", "size_bytes": 2_000,
        "identifiers": [], "text_ref": None,
    })

    for name, rows in [("works.jsonl", works_rows), ("editions.jsonl", edition_rows),
                       ("shadow_items.jsonl", item_rows)]:
        with open(HERE / name, "w", encoding="utf-8") as fh:
            for row in rows:
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")

    graph = HERE / "fixture_graph"
    graph.mkdir(exist_ok=True)
    (graph / "seeds.txt").write_text("w_marlow\n")
    works_tsv = ["w_marlow\t120\t2\ta0"]
    recs = []
    layer = ["w_orchard", "w_tides", "w_clockmaker", "w_meridian"]
    for work_id in layer:
        works_tsv.append(f"{work_id}\t60\t2\t")
        recs.append(f"w_marlow\t{work_id}")
    recs += [f"{w}\tw_unlinked" for w in layer[:2]]
    works_tsv.append("w_unlinked\t1\t2\t")
    works_tsv.append("aw_bonus\t9\t3\ta0")
    (graph / "works.tsv").write_text("\n".join(works_tsv) + "\n")
    (graph / "recs.tsv").write_text("\n".join(recs) + "\n")
    (graph / "author_works.tsv").write_text("a0\taw_bonus\n")

    sizes = [p.stat().st_size for p in payloads.glob("*.epub")]
    print(f"demo inputs written: {len(works_rows)} works, {len(edition_rows)} editions, "
          f"{len(item_rows)} items, {len(sizes)} payloads "
          f"({min(sizes)}-{max(sizes)} bytes)")


if __name__ == "__main__":
    main()

"""Synthetic desk-scale corpus with planted links and controlled title noise.

Layout (seeded, deterministic):
- 200 works / 600 editions; 160 dated works carry planted item groups.
- 500 shadow items: near-duplicate copies per planted work (1% word noise),
  decoy items whose identifiers point at the wrong work, identifier-less
  noise items, and triage junk (pdf/iso/size violations).
- Title noise: most groups get mild variants (case, subtitles) that should
  clear the operating threshold; a "heavy" slice gets mangled titles that
  should fall below it and drag recall under 1.0.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field

from majinlink.ingest import ShadowItem
from majinlink.records import EditionRecord, Identifier, WorkRecord, normalize_identifier

from conftest import random_isbn13

VOCAB_SIZE = 4000
BOOK_WORDS = 700
NOISE_RATE = 0.01

N_WORKS = 200
N_EDITIONS = 600
N_ITEMS = 500
N_PLANTED = 160
N_HEAVY = 20
N_DECOY_ITEMS = 40


@dataclass
class SyntheticCorpus:
    works: list[WorkRecord] = field(default_factory=list)
    editions: list[EditionRecord] = field(default_factory=list)
    items: list[ShadowItem] = field(default_factory=list)
    texts: dict[str, str] = field(default_factory=dict)  # item_id -> raw text
    planted_work_by_item: dict[str, str] = field(default_factory=dict)
    planted_works: set[str] = field(default_factory=set)
    heavy_noise_works: set[str] = field(default_factory=set)


def _mk_word(rng: random.Random) -> str:
    return "".join(rng.choice("abcdefghijklmnopqrstuvwxyz") for _ in range(rng.randrange(3, 9)))


def _title_case(words: list[str]) -> str:
    return " ".join(w.capitalize() for w in words)


def _mild_variant(rng: random.Random, title_words: list[str]) -> str:
    roll = rng.random()
    if roll < 0.3:
        return " ".join(title_words)
    if roll < 0.55:
        return _title_case(title_words).upper()
    if roll < 0.8:
        return _title_case(title_words) + rng.choice(
            [": A Novel", " (Annotated)", " - Illustrated", ", Vol. 1"]
        )
    return _title_case(title_words) + "!"


def _heavy_variant(rng: random.Random, title_words: list[str], vocab: list[str]) -> str:
    mangled = [rng.choice(vocab) if rng.random() < 0.6 else w for w in title_words]
    mangled += [rng.choice(vocab), rng.choice(vocab)]
    return _title_case(mangled)


def _book_text(rng: random.Random, vocab: list[str]) -> list[str]:
    return [rng.choice(vocab) for _ in range(BOOK_WORDS)]


def _noisy_copy(rng: random.Random, master: list[str], vocab: list[str]) -> str:
    words = list(master)
    n_edits = max(1, int(len(words) * NOISE_RATE))
    for pos in rng.sample(range(len(words)), n_edits):
        words[pos] = rng.choice(vocab)
    return " ".join(words)


def _ident(raw: str) -> Identifier:
    out = normalize_identifier(raw)
    assert out is not None
    return out


def build_corpus(seed: int = 20260301) -> SyntheticCorpus:
    rng = random.Random(seed)
    vocab = sorted({_mk_word(rng) for _ in range(VOCAB_SIZE)})
    title_vocab = sorted({_mk_word(rng) for _ in range(600)})
    corpus = SyntheticCorpus()

    # works and editions; editions distribute so the total is exactly 600
    titles = {}
    isbns_by_work: dict[str, list[str]] = {}
    edition_budget = N_EDITIONS
    for i in range(N_WORKS):
        work_id = f"w{i:04d}"
        title_words = [rng.choice(title_vocab) for _ in range(rng.randrange(2, 5))]
        titles[work_id] = title_words
        remaining_works = N_WORKS - i
        max_here = edition_budget - (remaining_works - 1)
        n_editions = 1 if remaining_works == 1 else rng.randrange(1, min(6, max_here) + 1)
        if i == N_WORKS - 1:
            n_editions = edition_budget
        edition_budget -= n_editions
        edition_ids = tuple(f"e{i:04d}_{j}" for j in range(n_editions))
        year = None if i >= N_WORKS - 15 else rng.randrange(1850, 2021)
        work = WorkRecord(
            work_id=work_id,
            title=_title_case(title_words),
            author_ids=(f"a{i:04d}",),
            author_names=(_title_case([rng.choice(title_vocab), rng.choice(title_vocab)]),),
            first_publication_year=year,
            genres=("fiction",) if rng.random() < 0.8 else None,
            avg_rating=round(rng.uniform(2.5, 5.0), 2),
            ratings_count=rng.randrange(0, 5000),
            reviews_count=rng.randrange(0, 900) if rng.random() < 0.95 else None,
            edition_ids=edition_ids,
        )
        corpus.works.append(work)
        isbns = []
        for j, edition_id in enumerate(edition_ids):
            isbn = random_isbn13(rng)
            isbns.append(isbn)
            suffix = rng.choice(["", "", "", " Classics", " Edition", " Paperback"])
            corpus.editions.append(EditionRecord(
                edition_id=edition_id,
                work_id=work_id,
                title=_title_case(title_words) + suffix,
                language="en" if rng.random() < 0.9 else "fr",
                identifiers=frozenset({_ident(isbn)}),
                publication_year=rng.randrange(1850, 2026),
            ))
        isbns_by_work[work_id] = isbns
    assert edition_budget == 0 and len(corpus.editions) == N_EDITIONS

    dated_works = [w for w in corpus.works if w.first_publication_year is not None]
    en_works = [
        w for w in dated_works
        if any(e.work_id == w.work_id and e.language == "en" for e in corpus.editions)
    ]
    planted = rng.sample(en_works, N_PLANTED)
    corpus.planted_works = {w.work_id for w in planted}
    corpus.heavy_noise_works = {w.work_id for w in rng.sample(planted, N_HEAVY)}

    item_counter = 0

    def next_item_id() -> str:
        nonlocal item_counter
        item_counter += 1
        return f"item{item_counter:05d}"

    # planted near-duplicate groups
    for work in planted:
        master = _book_text(rng, vocab)
        n_copies = rng.randrange(2, 4)
        group_isbns = rng.sample(isbns_by_work[work.work_id],
                                 min(2, len(isbns_by_work[work.work_id])))
        heavy = work.work_id in corpus.heavy_noise_works
        for copy in range(n_copies):
            item_id = next_item_id()
            if heavy:
                declared = _heavy_variant(rng, titles[work.work_id], title_vocab)
            else:
                declared = _mild_variant(rng, titles[work.work_id])
            idents = set()
            if copy < len(group_isbns):
                idents.add(_ident(group_isbns[copy]))
            corpus.items.append(ShadowItem(
                item_id=item_id,
                declared_title=declared,
                declared_language="en",
                extension="epub",
                size_bytes=rng.randrange(20_000, 2_000_000),
                identifiers=frozenset(idents),
            ))
            corpus.texts[item_id] = _noisy_copy(rng, master, vocab)
            corpus.planted_work_by_item[item_id] = work.work_id

    # decoys: identifier of one work, title and text of another
    for _ in range(N_DECOY_ITEMS):
        target = rng.choice(en_works)
        other = rng.choice([w for w in corpus.works if w.work_id != target.work_id])
        item_id = next_item_id()
        corpus.items.append(ShadowItem(
            item_id=item_id,
            declared_title=_title_case(titles[other.work_id]),
            declared_language="en",
            extension="epub",
            size_bytes=rng.randrange(20_000, 2_000_000),
            identifiers=frozenset({_ident(rng.choice(isbns_by_work[target.work_id]))}),
        ))
        corpus.texts[item_id] = " ".join(_book_text(rng, vocab))

    # triage junk: wrong formats and size violations
    junk = [("pdf", 50_000), ("iso", 50_000), ("exe", 50_000), ("txt", 50_000),
            ("epub", 900), ("epub", 20_000_000)]
    for ext, size in junk * 3 + [("doc", 50_000), ("rtf", 50_000)]:
        corpus.items.append(ShadowItem(
            item_id=next_item_id(),
            declared_title="Junk",
            declared_language="en",
            extension=ext,
            size_bytes=size,
            identifiers=frozenset(),
        ))

    # identifier-less noise items fill up to exactly N_ITEMS
    while len(corpus.items) < N_ITEMS:
        item_id = next_item_id()
        corpus.items.append(ShadowItem(
            item_id=item_id,
            declared_title=_title_case([rng.choice(title_vocab) for _ in range(3)]),
            declared_language="en",
            extension="epub",
            size_bytes=rng.randrange(20_000, 2_000_000),
            identifiers=frozenset(),
        ))
        corpus.texts[item_id] = " ".join(_book_text(rng, vocab))

    assert len(corpus.items) == N_ITEMS
    assert len(corpus.works) == N_WORKS
    return corpus

import random
import string

import pytest

from majinlink.records import (
    ContractViolation,
    EditionRecord,
    Identifier,
    IdentifierKind,
    WorkRecord,
    edition_from_json,
    edition_to_json,
    filter_datable_works,
    normalize_identifier,
    normalize_language,
    work_identifier_set,
)
from conftest import isbn10_valid_partial_sums, isbn13_valid_full_sum, random_isbn10


def ident(value: str) -> Identifier:
    out = normalize_identifier(value)
    assert out is not None
    return out


class TestNormalizeIdentifier:
    def test_isbn10_with_hyphens_converts(self):
        got = normalize_identifier("0-306-40615-2")
        assert got == Identifier(IdentifierKind.ISBN13, "9780306406157")

    def test_isbn13_canonical_is_fixed_point(self):
        got = normalize_identifier("9780306406157")
        assert got == Identifier(IdentifierKind.ISBN13, "9780306406157")

    def test_asin(self):
        got = normalize_identifier("B00ABC1234")
        assert got == Identifier(IdentifierKind.ASIN, "B00ABC1234")
        # not a valid ISBN-10 (letters beyond the check position)
        assert not isbn10_valid_partial_sums("B00ABC1234")

    def test_lowercase_asin_upcased(self):
        got = normalize_identifier("b00abc1234")
        assert got == Identifier(IdentifierKind.ASIN, "B00ABC1234")

    def test_too_short_is_absent(self):
        assert normalize_identifier("123") is None

    def test_bad_checksums_absent(self):
        assert normalize_identifier("0306406153") is None  # ISBN-10 off by one
        assert normalize_identifier("9780306406158") is None  # ISBN-13 off by one

    def test_isbn10_with_x_check_digit(self):
        # 097522980X is the well-known X-check example
        got = normalize_identifier("0-9752298-0-X")
        assert got is not None and got.kind is IdentifierKind.ISBN13
        assert isbn13_valid_full_sum(got.value)

    def test_idempotent_on_fuzzed_strings(self, rng):
        alphabet = string.ascii_letters + string.digits + "-_ ./:"
        for _ in range(10_000):
            raw = "".join(rng.choice(alphabet) for _ in range(rng.randrange(0, 20)))
            first = normalize_identifier(raw)
            if first is not None:
                again = normalize_identifier(first.value)
                assert again == first

    def test_isbn10_prefix_property(self, rng):
        for _ in range(200):
            ten = random_isbn10(rng)
            got = normalize_identifier(ten)
            assert got is not None and got.kind is IdentifierKind.ISBN13
            assert got.value[:12] == "978" + ten[:9]
            assert isbn13_valid_full_sum(got.value)


class TestIdentifierType:
    def test_rejects_checksum_failing_isbn13(self):
        with pytest.raises(ValueError):
            Identifier(IdentifierKind.ISBN13, "9780306406158")

    def test_asin_may_be_isbn10_shaped(self):
        # direct construction allows the Amazon ISBN-10-as-ASIN form
        Identifier(IdentifierKind.ASIN, "0306406152")
        with pytest.raises(ValueError):
            Identifier(IdentifierKind.ASIN, "0306406153")

    def test_roundtrip_string_form(self):
        one = ident("0-306-40615-2")
        assert Identifier.from_str(one.as_str()) == one


def make_work(work_id="w1", year=1999, editions=("e1",)):
    return WorkRecord(work_id=work_id, title="t", first_publication_year=year,
                      edition_ids=tuple(editions))


def make_edition(edition_id, work_id, idents=(), language="en"):
    return EditionRecord(
        edition_id=edition_id, work_id=work_id, title="t", language=language,
        identifiers=frozenset(idents),
    )


class TestWorkIdentifierSet:
    def setup_method(self):
        self.a = ident("9780306406157")
        self.b = ident("B00ABC1234")
        self.c = ident("0-9752298-0-X")

    def test_union(self):
        work = make_work(editions=("e1", "e2"))
        editions = [
            make_edition("e1", "w1", {self.a}),
            make_edition("e2", "w1", {self.a, self.b}),
        ]
        assert work_identifier_set(work, editions) == {self.a, self.b}

    def test_empty(self):
        work = make_work(editions=("e1",))
        assert work_identifier_set(work, [make_edition("e1", "w1")]) == frozenset()

    def test_disjoint_singletons(self):
        work = make_work(editions=("e1", "e2", "e3"))
        editions = [
            make_edition("e1", "w1", {self.a}),
            make_edition("e2", "w1", {self.b}),
            make_edition("e3", "w1", {self.c}),
        ]
        assert len(work_identifier_set(work, editions)) == 3

    def test_mismatched_work_raises(self):
        work = make_work()
        with pytest.raises(ContractViolation):
            work_identifier_set(work, [make_edition("e9", "other")])

    def test_order_invariant(self):
        work = make_work(editions=("e1", "e2"))
        editions = [
            make_edition("e1", "w1", {self.a}),
            make_edition("e2", "w1", {self.b}),
        ]
        assert work_identifier_set(work, editions) == work_identifier_set(work, editions[::-1])


class TestFilterDatableWorks:
    def test_partition(self):
        works = [make_work(f"w{i}", year=(1990 if i < 6 else None)) for i in range(10)]
        split = filter_datable_works(works)
        assert (len(split.retained), len(split.discarded)) == (6, 4)

    def test_all_dated(self):
        works = [make_work(f"w{i}", year=1990) for i in range(5)]
        split = filter_datable_works(works)
        assert len(split.retained) == 5 and not split.discarded

    def test_fixture_at_reported_ratio(self):
        # 609 dated out of 1000 mimics the published retention fraction
        works = [make_work(f"w{i}", year=(2000 if i < 609 else None)) for i in range(1000)]
        split = filter_datable_works(works)
        assert split.retained_fraction == pytest.approx(0.609)


class TestRecordInvariants:
    def test_edition_ids_required(self):
        with pytest.raises(ValueError):
            WorkRecord(work_id="w", title="t", edition_ids=())

    def test_future_year_rejected(self):
        with pytest.raises(ValueError):
            make_work(year=3000)

    def test_bce_year_allowed(self):
        assert make_work(year=-750).first_publication_year == -750

    def test_negative_ratings_rejected(self):
        with pytest.raises(ValueError):
            WorkRecord(work_id="w", title="t", edition_ids=("e",), ratings_count=-1)


class TestLanguageNormalization:
    def test_primary_subtag(self):
        assert normalize_language("EN-us") == "en"
        assert normalize_language("fr") == "fr"

    def test_unknown_forms(self):
        assert normalize_language(None) == "und"
        assert normalize_language("") == "und"
        assert normalize_language("eng") == "und"
        assert normalize_language("123") == "und"


class TestJsonRoundTrip:
    def test_edition(self):
        edition = make_edition("e1", "w1", {ident("9780306406157")})
        assert edition_from_json(edition_to_json(edition)) == edition

    def test_duplicate_author_ids_rejected(self, tmp_path):
        from majinlink.records import load_authors, write_jsonl

        rows = [{"author_id": "a1", "name": "X"}, {"author_id": "a1", "name": "Y"}]
        path = tmp_path / "authors.jsonl"
        write_jsonl(path, rows)
        with pytest.raises(ContractViolation):
            load_authors(path)

import numpy as np
import pytest

from majinlink.dedup import (
    Cluster,
    LshParams,
    SignatureMismatch,
    _weighted_error,
    cluster,
    estimate_jaccard,
    lsh_index,
    lsh_query,
    minhash,
    optimal_params,
    read_clusters,
    read_signatures,
    write_clusters,
    write_signatures,
)
from majinlink.ingest import ShadowItem, ShingleSet
from majinlink.records import normalize_identifier


def random_set(rng, n, item_id="x"):
    return ShingleSet(item_id, frozenset(rng.sample(range(1, 2**63), n)))


def exact_jaccard_pair(rng, jaccard: float, universe: int = 200):
    """Two sets with exactly the requested Jaccard similarity."""
    m = round(jaccard * universe)
    only = (universe - m) // 2
    assert m + 2 * only == universe and m / universe == jaccard
    elems = rng.sample(range(1, 2**63), m + 2 * only)
    a = frozenset(elems[: m + only])
    b = frozenset(elems[:m] + elems[m + only :])
    assert len(a & b) / len(a | b) == jaccard
    return ShingleSet("a", a), ShingleSet("b", b)


class TestModularArithmetic:
    """Pin the uint64 limb-split arithmetic against Python big integers."""

    def test_affine_mod_mersenne_exact(self, rng):
        from majinlink.dedup import MERSENNE_PRIME, _affine_mod_mersenne

        for _ in range(500):
            a = rng.randrange(1, MERSENNE_PRIME)
            b = rng.randrange(0, MERSENNE_PRIME)
            h = np.array([rng.randrange(0, MERSENNE_PRIME) for _ in range(8)], dtype=np.uint64)
            got = _affine_mod_mersenne(a, b, h)
            want = [(a * int(x) + b) % MERSENNE_PRIME for x in h]
            assert list(map(int, got)) == want

    def test_fold_reduces_full_uint64_range(self, rng):
        from majinlink.dedup import MERSENNE_PRIME, _fold61

        edge_cases = [0, 1, MERSENNE_PRIME - 1, MERSENNE_PRIME, MERSENNE_PRIME + 1, 2**64 - 1]
        values = edge_cases + [rng.randrange(0, 2**64) for _ in range(500)]
        got = _fold61(np.array(values, dtype=np.uint64))
        for x, g in zip(values, got):
            assert int(g) == x % MERSENNE_PRIME

    def test_minhash_matches_bigint_reference(self, rng):
        from majinlink.dedup import MERSENNE_PRIME, _permutation_params

        hashes = frozenset(rng.randrange(0, 2**64) for _ in range(30))
        sig = minhash(ShingleSet("x", hashes), num_perm=16, seed=99)
        a, b = _permutation_params(16, 99)
        for i in range(16):
            want = min((int(a[i]) * (h % MERSENNE_PRIME) + int(b[i])) % MERSENNE_PRIME
                       for h in hashes)
            assert int(sig.slots[i]) == want


class TestMinhash:
    def test_identical_sets_identical_signatures(self, rng):
        s = random_set(rng, 500)
        one = minhash(s, seed=7)
        two = minhash(ShingleSet("y", s.hashes), seed=7)
        assert np.array_equal(one.slots, two.slots)

    def test_empty_set_rejected(self):
        with pytest.raises(ValueError):
            minhash(ShingleSet("e", frozenset()))

    def test_disjoint_sets_estimate_near_zero(self, rng):
        low = 0
        for seed in range(100):
            a = random_set(rng, 1000, "a")
            b = random_set(rng, 1000, "b")
            assert not (a.hashes & b.hashes)
            est = estimate_jaccard(minhash(a, seed=seed), minhash(b, seed=seed))
            if est <= 0.05:
                low += 1
        assert low >= 99

    def test_half_jaccard_mean_error(self, rng):
        errs = []
        for seed in range(100):
            a, b = exact_jaccard_pair(rng, 0.5)
            errs.append(abs(estimate_jaccard(minhash(a, seed=seed), minhash(b, seed=seed)) - 0.5))
        assert np.mean(errs) <= 0.09

    def test_slots_below_prime(self, rng):
        sig = minhash(random_set(rng, 100))
        assert sig.slots.max() < (1 << 61) - 1
        assert len(sig.slots) == 128


class TestEstimateJaccard:
    def test_reflexive(self, rng):
        sig = minhash(random_set(rng, 100))
        assert estimate_jaccard(sig, sig) == 1.0

    def test_symmetric(self, rng):
        a, b = exact_jaccard_pair(rng, 0.5)
        sa, sb = minhash(a), minhash(b)
        assert estimate_jaccard(sa, sb) == estimate_jaccard(sb, sa)

    def test_point_eight_within_binomial_ci(self, rng):
        inside = 0
        for seed in range(100):
            a, b = exact_jaccard_pair(rng, 0.8)
            est = estimate_jaccard(minhash(a, seed=seed), minhash(b, seed=seed))
            if 0.71 <= est <= 0.89:
                inside += 1
        assert inside >= 95

    def test_mismatched_num_perm_rejected(self, rng):
        s = random_set(rng, 50)
        with pytest.raises(SignatureMismatch):
            estimate_jaccard(minhash(s, num_perm=128), minhash(s, num_perm=64))

    def test_mismatched_seed_rejected(self, rng):
        s = random_set(rng, 50)
        with pytest.raises(SignatureMismatch):
            estimate_jaccard(minhash(s, seed=1), minhash(s, seed=2))


class TestOptimalParams:
    def test_reference_optimum(self):
        params = optimal_params(0.8, 128)
        assert (params.bands, params.rows) == (9, 13)

    def test_two_permutations_enumerated_by_hand(self):
        params = optimal_params(0.5, 2)
        feasible = [(1, 1), (1, 2), (2, 1)]
        errors = {
            (b, r): _weighted_error(0.5, b, r, 0.5, 0.5) for b, r in feasible
        }
        assert errors[(params.bands, params.rows)] == min(errors.values())

    def test_more_permutations_never_hurt(self):
        objectives = []
        for num_perm in (16, 32, 64, 128):
            p = optimal_params(0.8, num_perm)
            objectives.append(_weighted_error(0.8, p.bands, p.rows, 0.5, 0.5))
        assert all(b <= a + 1e-12 for a, b in zip(objectives, objectives[1:]))

    def test_invalid_threshold(self):
        with pytest.raises(ValueError):
            optimal_params(0.0)

    def test_params_validation(self):
        with pytest.raises(ValueError):
            LshParams(bands=10, rows=13, threshold=0.8, num_perm=128)


class TestLsh:
    def test_identical_signatures_always_candidates(self, rng):
        params = LshParams(9, 13, 0.8, 128)
        s = random_set(rng, 300, "a")
        sigs = [minhash(s, seed=3), minhash(ShingleSet("b", s.hashes), seed=3)]
        index = lsh_index(sigs, params)
        assert lsh_query(index, sigs[0]) == {"b"}
        assert lsh_query(index, sigs[1]) == {"a"}

    def test_disjoint_rarely_candidates(self, rng):
        params = LshParams(9, 13, 0.8, 128)
        hits = 0
        trials = 200
        for seed in range(trials):
            a = minhash(random_set(rng, 200, "a"), seed=11)
            b = minhash(random_set(rng, 200, "b"), seed=11)
            index = lsh_index([a, b], params)
            if lsh_query(index, a):
                hits += 1
        assert hits / trials <= 0.01

    def test_wrong_num_perm_rejected(self, rng):
        params = LshParams(9, 13, 0.8, 128)
        index = lsh_index([minhash(random_set(rng, 50, "a"), seed=1)], params)
        with pytest.raises(SignatureMismatch):
            lsh_query(index, minhash(random_set(rng, 50, "b"), num_perm=64, seed=1))


def _item(item_id, title=None, language="en", isbn=None):
    idents = frozenset({normalize_identifier(isbn)} if isbn else set())
    return ShadowItem(item_id=item_id, extension="epub", size_bytes=20_000,
                      declared_title=title, declared_language=language, identifiers=idents)


class TestCluster:
    # dense banding makes every true near-duplicate pair an LSH candidate;
    # exact shingle verification then pins the edge set deterministically
    dense = LshParams(bands=32, rows=4, threshold=0.8, num_perm=128)

    def test_chain_forms_one_cluster(self, rng):
        base = rng.sample(range(1, 2**63), 232)
        mid = frozenset(base[:200])
        left = frozenset(base[16:200] + base[200:216])
        right = frozenset(base[:184] + base[216:232])
        shingles = {
            "a": ShingleSet("a", left),
            "b": ShingleSet("b", mid),
            "c": ShingleSet("c", right),
        }
        j = lambda x, y: len(shingles[x].hashes & shingles[y].hashes) / len(shingles[x].hashes | shingles[y].hashes)
        assert j("a", "b") >= 0.8 and j("b", "c") >= 0.8 and j("a", "c") < 0.8
        items = [_item(i) for i in "abc"]
        sigs = [minhash(shingles[i.item_id], seed=5) for i in items]
        got = cluster(items, sigs, self.dense, s_star=0.8, exact_shingles=shingles)
        assert len(got) == 1 and got[0].item_ids == ("a", "b", "c")

    def test_no_edges_all_singletons(self, rng):
        items = [_item(f"i{k}") for k in range(4)]
        shingles = {i.item_id: random_set(rng, 150, i.item_id) for i in items}
        sigs = [minhash(shingles[i.item_id], seed=2) for i in items]
        got = cluster(items, sigs, self.dense, exact_shingles=shingles)
        assert len(got) == 4 and all(c.is_singleton for c in got)

    def test_planted_books_recovered_exactly(self, rng):
        items, shingles, sigs = [], {}, []
        for book in range(10):
            base = rng.sample(range(1, 2**63), 230)
            for copy in range(3):
                item_id = f"b{book}c{copy}"
                removed = set(base[copy * 5 : copy * 5 + 5])
                kept = [h for h in base[:200] if h not in removed]
                added = base[200 + copy * 10 : 205 + copy * 10]
                shingles[item_id] = ShingleSet(item_id, frozenset(kept + list(added)))
                items.append(_item(item_id, title=f"Book {book}", language="en"))
        for item in items:
            sigs.append(minhash(shingles[item.item_id], seed=9))
        got = cluster(items, sigs, self.dense, s_star=0.8, exact_shingles=shingles)
        multi = [c for c in got if not c.is_singleton]
        assert len(multi) == 10
        assert all(len(c.item_ids) == 3 for c in multi)
        assert {c.item_ids[0][:2] for c in multi} == {f"b{k}" for k in range(10)}

    def test_partition_property(self, rng):
        items = [_item(f"i{k}") for k in range(6)]
        shingles = {i.item_id: random_set(rng, 100, i.item_id) for i in items}
        sigs = [minhash(shingles[i.item_id], seed=4) for i in items]
        got = cluster(items, sigs, self.dense, exact_shingles=shingles)
        seen = [m for c in got for m in c.item_ids]
        assert sorted(seen) == sorted(i.item_id for i in items)

    def test_majority_language_and_metadata(self, rng):
        base = rng.sample(range(1, 2**63), 200)
        shingles = {
            "a": ShingleSet("a", frozenset(base)),
            "b": ShingleSet("b", frozenset(base)),
            "c": ShingleSet("c", frozenset(base)),
        }
        items = [
            _item("a", title="Dracula", language="en", isbn="9780306406157"),
            _item("b", title="Dracula (1897)", language="en"),
            _item("c", title=None, language="fr"),
        ]
        sigs = [minhash(shingles[i.item_id], seed=6) for i in items]
        got = cluster(items, sigs, self.dense, exact_shingles=shingles)
        assert len(got) == 1
        c = got[0]
        assert c.language == "en"
        assert c.titles == ("Dracula", "Dracula (1897)")
        assert {i.value for i in c.identifiers} == {"9780306406157"}

    def test_min_cluster_size_filters_singletons(self, rng):
        items = [_item(f"i{k}") for k in range(3)]
        shingles = {i.item_id: random_set(rng, 100, i.item_id) for i in items}
        sigs = [minhash(shingles[i.item_id], seed=8) for i in items]
        got = cluster(items, sigs, self.dense, exact_shingles=shingles, min_cluster_size=2)
        assert got == []


class TestPersistence:
    def test_signature_roundtrip(self, tmp_path, rng):
        sigs = [minhash(random_set(rng, 80, f"i{k}"), seed=13) for k in range(5)]
        path = tmp_path / "signatures.bin"
        write_signatures(path, sigs)
        loaded = read_signatures(path)
        assert [s.item_id for s in loaded] == [s.item_id for s in sigs]
        assert all(np.array_equal(a.slots, b.slots) for a, b in zip(loaded, sigs))
        assert all(s.seed == 13 for s in loaded)

    def test_cluster_roundtrip(self, tmp_path):
        c = Cluster(
            cluster_id="c000000",
            item_ids=("a", "b"),
            language="en",
            identifiers=frozenset({normalize_identifier("9780306406157")}),
            titles=("T1", "T2"),
        )
        path = tmp_path / "clusters.jsonl"
        write_clusters(path, [c])
        assert read_clusters(path) == [c]

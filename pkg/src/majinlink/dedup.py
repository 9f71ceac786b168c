"""MinHash signatures, LSH banding with optimal-parameter search, and
connected-component clustering of near-duplicate items.

Signatures use the universal family slot_i = min_h (a_i*h + b_i) mod p with
p = 2^61 - 1. Products are computed exactly in uint64 via 31-bit limb splits
and Mersenne folding, so results are reproducible and bias-free.
"""
from __future__ import annotations

import json
import logging
import struct
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .ingest import ShadowItem, ShingleSet
from .records import Identifier, identifiers_from_json, normalize_language

log = logging.getLogger(__name__)

MERSENNE_PRIME = (1 << 61) - 1
DEFAULT_NUM_PERM = 128
DEFAULT_SEED = 1

_M61 = np.uint64(MERSENNE_PRIME)
_U61 = np.uint64(61)
_U31 = np.uint64(31)
_U30 = np.uint64(30)
_MASK31 = np.uint64((1 << 31) - 1)


class SignatureMismatch(ValueError):
    """Signatures built with different num_perm/seed cannot be compared."""


@dataclass(eq=False)
class MinHashSignature:
    item_id: str
    slots: np.ndarray  # uint64, length num_perm, values < 2^61 - 1
    seed: int = DEFAULT_SEED

    @property
    def num_perm(self) -> int:
        return len(self.slots)


@dataclass(frozen=True)
class LshParams:
    bands: int
    rows: int
    threshold: float
    num_perm: int = DEFAULT_NUM_PERM

    def __post_init__(self) -> None:
        if self.bands < 1 or self.rows < 1:
            raise ValueError("bands and rows must be positive")
        if self.bands * self.rows > self.num_perm:
            raise ValueError(f"bands*rows = {self.bands * self.rows} exceeds num_perm = {self.num_perm}")
        if not 0.0 < self.threshold < 1.0:
            raise ValueError("threshold must lie in (0, 1)")


def _fold61(x: np.ndarray) -> np.ndarray:
    """Reduce uint64 values modulo 2^61 - 1 (one fold + conditional subtract)."""
    x = (x & _M61) + (x >> _U61)
    return np.where(x >= _M61, x - _M61, x)


def _affine_mod_mersenne(a: int, b: int, h: np.ndarray) -> np.ndarray:
    """Exact (a*h + b) mod (2^61 - 1) for h < 2^61, a and b < 2^61.

    Splits both operands into 31-bit limbs; 2^62 = 2 and multiplication by
    2^31 is a 61-bit rotation modulo the Mersenne prime.
    """
    a1, a0 = np.uint64(a >> 31), np.uint64(a & ((1 << 31) - 1))
    h1, h0 = h >> _U31, h & _MASK31
    # a1*h1*2^62 = 2*a1*h1, below 2^61
    t1 = a1 * h1 * np.uint64(2)
    # cross terms * 2^31: fold below 2^61, then rotate left by 31
    mid = _fold61(a1 * h0 + a0 * h1)
    t2 = ((mid << _U31) & _M61) | (mid >> _U30)
    t3 = _fold61(a0 * h0)
    return _fold61(t1 + t2 + t3 + np.uint64(b))


def _permutation_params(num_perm: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw (a_i, b_i) deterministically from the seed; a odd and nonzero."""
    rng = np.random.default_rng(seed)
    a = rng.integers(0, MERSENNE_PRIME // 2, size=num_perm, dtype=np.int64) * 2 + 1
    b = rng.integers(0, MERSENNE_PRIME, size=num_perm, dtype=np.int64)
    return a.astype(np.uint64), b.astype(np.uint64)


def minhash(shingles: ShingleSet, num_perm: int = DEFAULT_NUM_PERM, seed: int = DEFAULT_SEED) -> MinHashSignature:
    """Compute the num_perm-slot signature of a non-empty shingle set."""
    if not shingles.hashes:
        raise ValueError(f"item {shingles.item_id!r}: cannot minhash an empty shingle set")
    hashes = _fold61(np.fromiter(shingles.hashes, dtype=np.uint64, count=len(shingles.hashes)))
    a, b = _permutation_params(num_perm, seed)
    slots = np.empty(num_perm, dtype=np.uint64)
    for i in range(num_perm):
        slots[i] = _affine_mod_mersenne(int(a[i]), int(b[i]), hashes).min()
    return MinHashSignature(shingles.item_id, slots, seed)


def estimate_jaccard(sig_a: MinHashSignature, sig_b: MinHashSignature) -> float:
    """Fraction of equal slots; unbiased estimate of the true Jaccard."""
    if sig_a.num_perm != sig_b.num_perm or sig_a.seed != sig_b.seed:
        raise SignatureMismatch(
            f"cannot compare signatures: num_perm {sig_a.num_perm}/{sig_b.num_perm}, "
            f"seed {sig_a.seed}/{sig_b.seed}"
        )
    return float(np.count_nonzero(sig_a.slots == sig_b.slots) / sig_a.num_perm)


# --- Optimal banding parameters ------------------------------------------------

def _candidate_probability(s: np.ndarray, bands: int, rows: int) -> np.ndarray:
    """P(at least one of b bands of r rows matches) at similarity s."""
    return 1.0 - (1.0 - s**rows) ** bands


def _weighted_error(threshold: float, bands: int, rows: int,
                    fp_weight: float, fn_weight: float, step: float = 0.001) -> float:
    xs_fp = np.arange(step / 2, threshold, step)
    xs_fn = np.arange(threshold + step / 2, 1.0, step)
    fp = _candidate_probability(xs_fp, bands, rows).sum() * step
    fn = (1.0 - _candidate_probability(xs_fn, bands, rows)).sum() * step
    return fp_weight * fp + fn_weight * fn


def optimal_params(threshold: float = 0.8, num_perm: int = DEFAULT_NUM_PERM,
                   fp_weight: float = 0.5, fn_weight: float = 0.5) -> LshParams:
    """Search all (b, r) with b*r <= num_perm for the minimum weighted error.

    Error = fp_weight * integral of the candidate probability below the
    threshold + fn_weight * integral of the miss probability above it,
    midpoint rule with step 0.001. Ties break toward fewer bands.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must lie in (0, 1)")
    best: Optional[tuple[float, int, int]] = None
    for bands in range(1, num_perm + 1):
        for rows in range(1, num_perm // bands + 1):
            err = _weighted_error(threshold, bands, rows, fp_weight, fn_weight)
            if best is None or err < best[0]:
                best = (err, bands, rows)
    assert best is not None
    return LshParams(bands=best[1], rows=best[2], threshold=threshold, num_perm=num_perm)


# --- LSH index -------------------------------------------------------------------

@dataclass
class LshIndex:
    params: LshParams
    seed: int
    tables: list[dict[bytes, list[str]]] = field(default_factory=list)
    item_ids: set[str] = field(default_factory=set)

    def _band_keys(self, sig: MinHashSignature) -> list[bytes]:
        if sig.num_perm != self.params.num_perm or sig.seed != self.seed:
            raise SignatureMismatch(
                f"signature {sig.item_id!r} does not match index parameters"
            )
        r = self.params.rows
        return [sig.slots[band * r : (band + 1) * r].tobytes() for band in range(self.params.bands)]


def lsh_index(signatures: Iterable[MinHashSignature], params: LshParams) -> LshIndex:
    """Build a banded index; items sharing any band become query candidates."""
    signatures = list(signatures)
    seed = signatures[0].seed if signatures else DEFAULT_SEED
    index = LshIndex(params=params, seed=seed, tables=[defaultdict(list) for _ in range(params.bands)])
    for sig in signatures:
        for band, key in enumerate(index._band_keys(sig)):
            index.tables[band][key].append(sig.item_id)
        index.item_ids.add(sig.item_id)
    index.tables = [dict(t) for t in index.tables]
    return index


def lsh_query(index: LshIndex, sig: MinHashSignature) -> set[str]:
    """All indexed items colliding with sig in at least one band, minus itself."""
    found: set[str] = set()
    for band, key in enumerate(index._band_keys(sig)):
        found.update(index.tables[band].get(key, ()))
    found.discard(sig.item_id)
    return found


# --- Clustering ---------------------------------------------------------------

@dataclass(frozen=True)
class Cluster:
    cluster_id: str
    item_ids: tuple[str, ...]
    language: str
    identifiers: frozenset[Identifier]
    titles: tuple[str, ...]

    @property
    def is_singleton(self) -> bool:
        return len(self.item_ids) == 1


class _UnionFind:
    def __init__(self, keys: Iterable[str]) -> None:
        self.parent = {k: k for k in keys}

    def find(self, k: str) -> str:
        root = k
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[k] != root:
            self.parent[k], k = root, self.parent[k]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[rb] = ra


def _majority_language(items: Sequence[ShadowItem]) -> str:
    votes = Counter(
        normalize_language(item.declared_language)
        for item in items
        if item.declared_language
    )
    votes.pop("und", None)
    if not votes:
        return "und"
    ranked = votes.most_common()
    if len(ranked) > 1 and ranked[0][1] == ranked[1][1]:
        return "und"
    return ranked[0][0]


def exact_jaccard(a: ShingleSet, b: ShingleSet) -> float:
    union = len(a.hashes | b.hashes)
    return len(a.hashes & b.hashes) / union if union else 1.0


def cluster(
    items: Sequence[ShadowItem],
    signatures: Sequence[MinHashSignature],
    params: LshParams,
    s_star: float = 0.8,
    exact_shingles: Optional[dict[str, ShingleSet]] = None,
    min_cluster_size: int = 1,
) -> list[Cluster]:
    """Group near-duplicates: LSH candidates verified at Jaccard >= s_star,
    then connected components.

    Verification uses the signature estimate by default; pass exact_shingles
    to verify against exact shingle-set Jaccard instead. Singletons are kept
    unless min_cluster_size excludes them.
    """
    by_id = {item.item_id: item for item in items}
    sigs = {sig.item_id: sig for sig in signatures}
    index = lsh_index(signatures, params)
    uf = _UnionFind(sigs.keys())

    seen_pairs: set[tuple[str, str]] = set()
    for sig in signatures:
        for other_id in lsh_query(index, sig):
            pair = (sig.item_id, other_id) if sig.item_id < other_id else (other_id, sig.item_id)
            if pair in seen_pairs:
                continue
            seen_pairs.add(pair)
            if exact_shingles is not None:
                similar = exact_jaccard(exact_shingles[pair[0]], exact_shingles[pair[1]]) >= s_star
            else:
                similar = estimate_jaccard(sig, sigs[other_id]) >= s_star
            if similar:
                uf.union(*pair)

    components: dict[str, list[str]] = defaultdict(list)
    for item_id in sigs:
        components[uf.find(item_id)].append(item_id)

    clusters = []
    ordered = sorted(components.values(), key=min)
    for i, member_ids in enumerate(ordered):
        member_ids.sort()
        if len(member_ids) < min_cluster_size:
            continue
        members = [by_id[m] for m in member_ids if m in by_id]
        identifiers: set[Identifier] = set()
        titles = []
        for member in members:
            identifiers.update(member.identifiers)
            if member.declared_title:
                titles.append(member.declared_title)
        clusters.append(
            Cluster(
                cluster_id=f"c{i:06d}",
                item_ids=tuple(member_ids),
                language=_majority_language(members),
                identifiers=frozenset(identifiers),
                titles=tuple(titles),
            )
        )
    n_multi = sum(1 for c in clusters if not c.is_singleton)
    log.info("clustering: %d clusters (%d multi-item, %d singletons)",
             len(clusters), n_multi, len(clusters) - n_multi)
    return clusters


# --- Persistence -----------------------------------------------------------------

_SIG_MAGIC = b"MJLSIG\x00\x01"
_SIG_VERSION = 1


def write_signatures(path: Path, signatures: Sequence[MinHashSignature]) -> None:
    """Binary signature file: header (magic, version, num_perm, seed), then
    length-prefixed item_id plus little-endian u64 slots per record."""
    if not signatures:
        raise ValueError("refusing to write an empty signature file")
    num_perm = signatures[0].num_perm
    seed = signatures[0].seed
    with open(path, "wb") as fh:
        fh.write(_SIG_MAGIC)
        fh.write(struct.pack("<IIQ", _SIG_VERSION, num_perm, seed))
        for sig in signatures:
            if sig.num_perm != num_perm or sig.seed != seed:
                raise SignatureMismatch("all signatures in one file must share num_perm and seed")
            encoded = sig.item_id.encode("utf-8")
            fh.write(struct.pack("<I", len(encoded)))
            fh.write(encoded)
            fh.write(sig.slots.astype("<u8").tobytes())


def read_signatures(path: Path) -> list[MinHashSignature]:
    with open(path, "rb") as fh:
        magic = fh.read(len(_SIG_MAGIC))
        if magic != _SIG_MAGIC:
            raise ValueError(f"{path}: not a signature file")
        version, num_perm, seed = struct.unpack("<IIQ", fh.read(16))
        if version != _SIG_VERSION:
            raise ValueError(f"{path}: unsupported signature file version {version}")
        out = []
        while True:
            raw_len = fh.read(4)
            if not raw_len:
                break
            (id_len,) = struct.unpack("<I", raw_len)
            item_id = fh.read(id_len).decode("utf-8")
            slots = np.frombuffer(fh.read(8 * num_perm), dtype="<u8").astype(np.uint64)
            out.append(MinHashSignature(item_id, slots, seed))
    return out


def cluster_to_json(c: Cluster) -> dict:
    return {
        "cluster_id": c.cluster_id,
        "item_ids": list(c.item_ids),
        "language": c.language,
        "identifiers": [
            {"kind": i.kind.value, "value": i.value}
            for i in sorted(c.identifiers, key=lambda i: (i.kind.value, i.value))
        ],
        "titles": list(c.titles),
    }


def cluster_from_json(obj: dict) -> Cluster:
    return Cluster(
        cluster_id=obj["cluster_id"],
        item_ids=tuple(obj["item_ids"]),
        language=obj.get("language", "und"),
        identifiers=identifiers_from_json(obj.get("identifiers") or ()),
        titles=tuple(obj.get("titles") or ()),
    )


def write_clusters(path: Path, clusters: Iterable[Cluster]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for c in clusters:
            fh.write(json.dumps(cluster_to_json(c), ensure_ascii=False) + "\n")


def read_clusters(path: Path) -> list[Cluster]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(cluster_from_json(json.loads(line)))
    return out

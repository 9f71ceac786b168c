"""Shared fixtures and independent oracles.

The oracles here deliberately use different algorithms than the library:
indel distance via the classic DP table (substitution = 2), ISBN-10 via the
partial-sums check, quantiles via a pure-Python sort-based type-7 routine.
"""
from __future__ import annotations

import math
import random
import zipfile
from io import BytesIO

import pytest


# --- EPUB fixture builder -------------------------------------------------------

def make_epub(spine: list[tuple[str, str]], title: str = "Fixture Book",
              identifiers: tuple[str, ...] = (), extra_files: dict[str, str] | None = None) -> bytes:
    """Build a minimal EPUB: container.xml -> OPF -> spine documents."""
    container = (
        '<?xml version="1.0"?>'
        '<container version="1.0" xmlns="urn:oasis:names:tc:opendocument:xmlns:container">'
        '<rootfiles><rootfile full-path="OEBPS/content.opf" '
        'media-type="application/oebps-package+xml"/></rootfiles></container>'
    )
    manifest = "".join(
        f'<item id="doc{i}" href="{name}" media-type="application/xhtml+xml"/>'
        for i, (name, _) in enumerate(spine)
    )
    itemrefs = "".join(f'<itemref idref="doc{i}"/>' for i in range(len(spine)))
    idents = "".join(f"<dc:identifier>{v}</dc:identifier>" for v in identifiers)
    opf = (
        '<?xml version="1.0"?>'
        '<package xmlns="http://www.idpf.org/2007/opf" '
        'xmlns:dc="http://purl.org/dc/elements/1.1/" version="2.0">'
        f"<metadata><dc:title>{title}</dc:title>{idents}</metadata>"
        f"<manifest>{manifest}</manifest><spine>{itemrefs}</spine></package>"
    )
    buf = BytesIO()
    with zipfile.ZipFile(buf, "w") as zf:
        zf.writestr("mimetype", "application/epub+zip")
        zf.writestr("META-INF/container.xml", container)
        zf.writestr("OEBPS/content.opf", opf)
        for name, body in spine:
            zf.writestr(f"OEBPS/{name}", body)
        for name, body in (extra_files or {}).items():
            zf.writestr(name, body)
    return buf.getvalue()


def xhtml_doc(body: str) -> str:
    return (
        '<?xml version="1.0" encoding="utf-8"?>'
        '<html xmlns="http://www.w3.org/1999/xhtml"><head><title>c</title></head>'
        f"<body>{body}</body></html>"
    )


# --- ISBN oracles ----------------------------------------------------------------

def isbn10_valid_partial_sums(s: str) -> bool:
    """ISBN-10 check via the running partial-sums method (independent of the
    weighted-sum formula in the library)."""
    if len(s) != 10:
        return False
    values = []
    for i, ch in enumerate(s):
        if ch == "X" and i == 9:
            values.append(10)
        elif ch.isdigit():
            values.append(int(ch))
        else:
            return False
    running = 0
    total = 0
    for v in values:
        running += v
        total += running
    return total % 11 == 0


def isbn13_valid_full_sum(s: str) -> bool:
    """ISBN-13 check as the full 13-digit congruence (check digit included)."""
    if len(s) != 13 or not s.isdigit():
        return False
    total = sum(int(d) for d in s[0::2]) + 3 * sum(int(d) for d in s[1::2])
    return total % 10 == 0


def random_isbn10(rng: random.Random) -> str:
    body = [rng.randrange(10) for _ in range(9)]
    check = (11 - sum((10 - i) * d for i, d in enumerate(body)) % 11) % 11
    return "".join(map(str, body)) + ("X" if check == 10 else str(check))


def random_isbn13(rng: random.Random) -> str:
    first12 = "978" + "".join(str(rng.randrange(10)) for _ in range(9))
    total = sum(int(d) for d in first12[0::2]) + 3 * sum(int(d) for d in first12[1::2])
    return first12 + str((10 - total % 10) % 10)


# --- Fuzzy-matching oracles ---------------------------------------------------------

def dp_indel(a: str, b: str) -> int:
    """Wagner-Fischer with substitution cost 2 == pure insert/delete distance."""
    m = len(b)
    prev = list(range(m + 1))
    for i, ca in enumerate(a, 1):
        row = [i] * (m + 1)
        left = i
        diag = prev[0]
        for j in range(1, m + 1):
            up = prev[j]
            best = diag if ca == b[j - 1] else diag + 2
            if up + 1 < best:
                best = up + 1
            if left + 1 < best:
                best = left + 1
            row[j] = best
            left = best
            diag = up
        prev = row
    return prev[m]


def oracle_ratio(a: str, b: str) -> float:
    total = len(a) + len(b)
    if total == 0:
        return 100.0
    return 100.0 * (1.0 - dp_indel(a, b) / total)


def oracle_partial_ratio(a: str, b: str) -> float:
    """Brute force over every window of the longer string: all length-m
    substrings, the shorter prefix/suffix edge windows, and the full string."""
    if len(a) == len(b):
        return oracle_ratio(a, b)
    shorter, longer = (a, b) if len(a) < len(b) else (b, a)
    m = len(shorter)
    if m == 0:
        return 100.0
    windows = {longer[i : i + m] for i in range(len(longer) - m + 1)}
    for k in range(1, m):
        windows.add(longer[:k])
        windows.add(longer[-k:])
    windows.add(longer)
    return max(oracle_ratio(shorter, w) for w in windows)


# --- Quantile oracle ---------------------------------------------------------------

def oracle_quantile_type7(values, q: float) -> float:
    """Sort-based type-7 quantile with the standard linear-interpolation
    convention (mirrors the documented definition, coded independently)."""
    ordered = sorted(float(v) for v in values)
    n = len(ordered)
    if n == 1:
        return ordered[0]
    pos = q * (n - 1)
    lo = math.floor(pos)
    hi = math.ceil(pos)
    t = pos - lo
    a, b = ordered[lo], ordered[hi]
    if t >= 0.5:
        return b - (b - a) * (1 - t)
    return a + (b - a) * t


def oracle_median_iqr(values) -> tuple[float, float, float]:
    return (
        oracle_quantile_type7(values, 0.5),
        oracle_quantile_type7(values, 0.25),
        oracle_quantile_type7(values, 0.75),
    )


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20260810)


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when != "call" or "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    outcome = "PASS" if report.passed else "FAIL"
    print(f"\n[ACCEPTANCE] {name}: {outcome} ({report.duration:.2f}s)", flush=True)

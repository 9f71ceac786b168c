"""Bibliographic record linkage at desk scale.

Pipeline: ingest shadow-library items (triage, EPUB text extraction,
shingling), cluster near-duplicates with MinHash/LSH, link clusters to a
work/edition scaffold via identifier overlap plus fuzzy title scores, pick
the operating threshold with human evaluation, and emit the final catalogue
with corpus statistics.
"""

__version__ = "0.1.0"

from .records import (  # noqa: F401
    AuthorRecord,
    EditionRecord,
    Identifier,
    IdentifierKind,
    WorkRecord,
    filter_datable_works,
    normalize_identifier,
    work_identifier_set,
)
from .ingest import (  # noqa: F401
    FormatClass,
    ShadowItem,
    ShingleSet,
    classify_format,
    extract_epub_text,
    normalize_text,
    shingle,
    size_filter,
)
from .dedup import (  # noqa: F401
    Cluster,
    LshParams,
    MinHashSignature,
    cluster,
    estimate_jaccard,
    lsh_index,
    lsh_query,
    minhash,
    optimal_params,
)
from .linkage import (  # noqa: F401
    Candidate,
    apply_threshold,
    generate_candidates,
    partial_ratio,
    ratio,
    title_score,
)
from .evaluation import (  # noqa: F401
    EvalLabel,
    Label,
    PrCurve,
    StratifiedPlan,
    ambiguous_subset_report,
    median_iqr,
    pr_curve,
    score_distribution_stats,
    stratified_sample,
)
from .catalogue import (  # noqa: F401
    CatalogueEntry,
    decade_histogram,
    emit_catalogue,
    herfindahl,
)
from .crawl_planner import (  # noqa: F401
    FixtureProvider,
    FrontierState,
    WorkStub,
    author_work_qualifies,
    expand,
)

"""HTTP service backing the human-evaluation workflow: serves candidates to
label (work metadata beside a text excerpt), records labels append-only, and
reports live progress and precision/recall at the operating threshold.
"""
from __future__ import annotations

import json
import logging
import random
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional, Sequence

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel

from .dedup import Cluster
from .evaluation import (
    CandidateKey,
    EvalLabel,
    Label,
    StratifiedPlan,
    append_label,
    pr_curve,
    read_labels,
    resolve_labels,
)
from .linkage import Candidate
from .records import WorkRecord

log = logging.getLogger(__name__)

LEASE_SECONDS = 600  # serve a task to one evaluator at a time, 10-minute lease
EXCERPT_PARAGRAPHS = 100


@dataclass(frozen=True)
class ScoredKey:
    """Minimal candidate view for curve math: key plus score."""

    cluster_id: str
    work_id: str
    title_score: float

    @property
    def key(self) -> CandidateKey:
        return (self.cluster_id, self.work_id)


def build_plan(
    keys: Sequence[CandidateKey],
    candidates: Sequence[Candidate],
    works: Sequence[WorkRecord],
    clusters: Sequence[Cluster],
    texts_dir: Path,
    plan: StratifiedPlan = StratifiedPlan(),
    seed: int = 0,
    operating_threshold: float = 80.0,
) -> dict:
    """Assemble the labeling plan: one task per sampled candidate.

    The excerpt is the first 100 newline-delimited blocks of one uniformly
    random item from the cluster, drawn here once so it stays stable across
    serving sessions.
    """
    by_key = {c.key: c for c in candidates}
    works_by_id = {w.work_id: w for w in works}
    clusters_by_id = {c.cluster_id: c for c in clusters}
    rng = random.Random(seed)
    tasks = []
    for key in keys:
        cand = by_key[key]
        work = works_by_id[cand.work_id]
        cluster = clusters_by_id[cand.cluster_id]
        item_id = rng.choice(sorted(cluster.item_ids))
        excerpt: list[str] = []
        text_path = Path(texts_dir) / f"{item_id}.txt"
        if text_path.exists():
            blocks = [b for b in text_path.read_text(encoding="utf-8").splitlines() if b.strip()]
            excerpt = blocks[:EXCERPT_PARAGRAPHS]
        tasks.append({
            "cluster_id": cand.cluster_id,
            "work_id": cand.work_id,
            "work_title": work.title,
            "author_names": list(work.author_names),
            "title_score": round(cand.title_score, 4),
            "bin": plan.bin_index(cand.title_score),
            "excerpt_item_id": item_id,
            "excerpt": excerpt,
        })
    return {"operating_threshold": operating_threshold, "tasks": tasks}


class _CandidateRef(BaseModel):
    cluster_id: str
    work_id: str


class _LabelSubmission(BaseModel):
    candidate: _CandidateRef
    label: Literal["yes", "no", "unknown"]
    evaluator_id: str


@dataclass
class ServiceState:
    plan: Optional[dict] = None
    labels_path: Optional[Path] = None
    labels: list[EvalLabel] = field(default_factory=list)
    leases: dict[CandidateKey, float] = field(default_factory=dict)
    lock: threading.Lock = field(default_factory=threading.Lock)
    bin_cursor: int = 0

    @property
    def tasks(self) -> list[dict]:
        return self.plan["tasks"] if self.plan else []

    def scored(self) -> list[ScoredKey]:
        return [ScoredKey(t["cluster_id"], t["work_id"], t["title_score"]) for t in self.tasks]

    def labeled_keys(self) -> set[CandidateKey]:
        return {lab.key for lab in self.labels}


def create_app(
    plan_path: Optional[Path] = None,
    labels_path: Optional[Path] = None,
    lease_seconds: float = LEASE_SECONDS,
    cors_origins: Sequence[str] = ("*",),
) -> FastAPI:
    """Build the service; labels persist to labels_path as append-only JSONL."""
    state = ServiceState()
    if plan_path is not None:
        state.plan = json.loads(Path(plan_path).read_text(encoding="utf-8"))
    if labels_path is not None:
        state.labels_path = Path(labels_path)
        state.labels = read_labels(state.labels_path)

    app = FastAPI(title="majinlink evaluation service")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins),
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.service = state

    def _task_bins() -> list[Optional[int]]:
        return sorted({t["bin"] for t in state.tasks}, key=lambda b: (b is None, b))

    @app.get("/api/tasks/next")
    def next_task():
        with state.lock:
            if state.plan is None:
                raise HTTPException(status_code=409, detail="no sampling plan loaded")
            now = time.monotonic()
            labeled = state.labeled_keys()
            open_tasks = [
                t for t in state.tasks
                if (t["cluster_id"], t["work_id"]) not in labeled
            ]
            if not open_tasks:
                # every sampled candidate has at least one label: evaluation done
                return Response(status_code=204)
            available = [
                t for t in open_tasks
                if state.leases.get((t["cluster_id"], t["work_id"]), 0.0) <= now
            ]
            if not available:
                # everything outstanding is leased to other evaluators
                return Response(status_code=204)
            bins = _task_bins()
            chosen = None
            for offset in range(len(bins)):
                bin_id = bins[(state.bin_cursor + offset) % len(bins)]
                in_bin = [t for t in available if t["bin"] == bin_id]
                if in_bin:
                    chosen = in_bin[0]
                    state.bin_cursor = (state.bin_cursor + offset + 1) % len(bins)
                    break
            assert chosen is not None
            state.leases[(chosen["cluster_id"], chosen["work_id"])] = now + lease_seconds
            return chosen

    @app.post("/api/labels", status_code=201)
    def submit_label(submission: _LabelSubmission):
        key = (submission.candidate.cluster_id, submission.candidate.work_id)
        with state.lock:
            if state.plan is None:
                raise HTTPException(status_code=409, detail="no sampling plan loaded")
            if not any(t["cluster_id"] == key[0] and t["work_id"] == key[1] for t in state.tasks):
                raise HTTPException(status_code=404, detail="candidate not in plan")
            label = EvalLabel(
                cluster_id=key[0],
                work_id=key[1],
                label=Label(submission.label),
                evaluator_id=submission.evaluator_id,
                timestamp=time.time(),
            )
            # latest (candidate, evaluator) wins; the on-disk store stays append-only
            state.labels = [
                existing for existing in state.labels
                if not (existing.key == key and existing.evaluator_id == label.evaluator_id)
            ] + [label]
            if state.labels_path is not None:
                append_label(state.labels_path, label)
            state.leases.pop(key, None)
        return {"stored": True}

    @app.get("/api/stats")
    def stats():
        with state.lock:
            labels = list(state.labels)
            tasks = list(state.tasks)
            scored = state.scored()
            threshold = state.plan.get("operating_threshold", 80.0) if state.plan else 80.0
        labeled = {lab.key for lab in labels}
        per_bin: dict[str, dict[str, int]] = {}
        for t in tasks:
            bucket = per_bin.setdefault(str(t["bin"]), {"total": 0, "labeled": 0})
            bucket["total"] += 1
            if (t["cluster_id"], t["work_id"]) in labeled:
                bucket["labeled"] += 1
        resolved = resolve_labels(labels)
        n_conclusive = sum(1 for v in resolved.values() if v is not Label.UNKNOWN)
        payload = {
            "total_tasks": len(tasks),
            "labeled": len(labeled),
            "complete": bool(tasks) and len(labeled) == len(tasks),
            "per_bin": per_bin,
            "operating_threshold": threshold,
            "n_conclusive": n_conclusive,
            "n_unknown": sum(1 for v in resolved.values() if v is Label.UNKNOWN),
            "precision_at_threshold": None,
            "recall_at_threshold": None,
        }
        if n_conclusive:
            curve = pr_curve(labels, scored, threshold_grid=[threshold], bootstrap_B=1)
            precision = curve.precision[0]
            recall = curve.recall[0]
            payload["precision_at_threshold"] = None if precision != precision else float(precision)
            payload["recall_at_threshold"] = None if recall != recall else float(recall)
        return payload

    return app


def run_service(plan_path: Path, labels_path: Path, port: int = 8765, host: str = "127.0.0.1") -> None:
    import uvicorn

    app = create_app(plan_path=plan_path, labels_path=labels_path)
    uvicorn.run(app, host=host, port=port, log_level="warning")

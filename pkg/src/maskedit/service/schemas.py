"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, Field

Direction = Literal["source-to-target", "target-to-source"]


class HealthResponse(BaseModel):
    status: str
    model_loaded: bool


class ModelLoadRequest(BaseModel):
    path: str


class ModelInfo(BaseModel):
    path: Optional[str] = None
    vocab_size: int
    n_p: int
    k_ctx: int
    alpha: float
    min_count: int
    seed: int


class TrainRequest(BaseModel):
    source_lines: list[str]
    target_lines: list[str]
    n_p: int = 4
    k_ctx: int = 2
    alpha: float = 0.1
    min_count: int = 2
    seed: int = 0
    spans_per_example: Optional[int] = None
    save_path: Optional[str] = None


class SpanScoreOut(BaseModel):
    start: int
    del_len: int
    replacement: list[str]
    l1: float
    l2: float
    l3: float
    l4: float
    target_score: float
    source_score: float
    score: float


class EditRequest(BaseModel):
    text: str
    direction: Direction
    include_table: bool = False


class EditResponse(BaseModel):
    input_text: str
    output_text: str
    identity: bool
    winner: SpanScoreOut
    table: Optional[list[SpanScoreOut]] = None


class BatchEditRequest(BaseModel):
    lines: list[str]
    direction: Direction
    workers: int = Field(default=1, ge=1)


class BatchEditResponse(BaseModel):
    outputs: list[str]


class ScoreTableRequest(BaseModel):
    text: str
    direction: Direction


class ScoreTableResponse(BaseModel):
    rows: list[SpanScoreOut]
    winner: SpanScoreOut
    tsv: str


class SilverRequest(BaseModel):
    lines: list[str]
    direction: Direction
    keep_identity: bool = True
    workers: int = Field(default=1, ge=1)


class SilverMetaOut(BaseModel):
    line: int
    start: int
    del_len: int
    replacement: list[str]
    score: float
    identity: bool


class SilverPairOut(BaseModel):
    source: str
    target: str
    meta: SilverMetaOut


class SilverResponse(BaseModel):
    pairs: list[SilverPairOut]
    skipped: int


class PairedMetricRequest(BaseModel):
    predictions: list[str]
    references: list[str]


class MetricResponse(BaseModel):
    metric: str
    value: float


class TransferAccuracyRequest(BaseModel):
    predictions: list[str]
    corpus_a: list[str]
    corpus_b: list[str]
    intended: Literal["a", "b"] = "b"
    smoothing: float = 1.0

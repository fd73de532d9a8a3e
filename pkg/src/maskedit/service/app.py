"""FastAPI application exposing the editing pipeline over HTTP.

The service holds one active model (loaded from disk or trained in-place);
it is immutable, so request handlers can share it freely. Run with:

    maskedit serve --model model.mlm --port 8000
    # or: uvicorn maskedit.service.app:app
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from ..editor import EditDirection, edit
from ..metrics import bleu, exact_score, train_classifier, transfer_accuracy
from ..mlm import MlmConfig, ModelFormatError, PaddedMlm, train
from ..pipeline import batch_edit, generate_silver
from ..scoring import best_span, table_tsv
from ..tokenizer import tokenize
from . import schemas


def _span_out(entry) -> schemas.SpanScoreOut:
    return schemas.SpanScoreOut(
        start=entry.candidate.start,
        del_len=entry.candidate.del_len,
        replacement=list(entry.replacement_slots),
        l1=entry.l1,
        l2=entry.l2,
        l3=entry.l3,
        l4=entry.l4,
        target_score=entry.target_score,
        source_score=entry.source_score,
        score=entry.score,
    )


def create_app(model_path: str | None = None) -> FastAPI:
    app = FastAPI(
        title="maskedit",
        description="Span editing with padded masked language models.",
    )
    app.state.model = None
    app.state.model_path = None
    if model_path:
        app.state.model = PaddedMlm.load(model_path)
        app.state.model_path = model_path

    def current_model() -> PaddedMlm:
        model = app.state.model
        if model is None:
            raise HTTPException(status_code=409, detail="no model loaded")
        return model

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", model_loaded=app.state.model is not None)

    @app.get("/model", response_model=schemas.ModelInfo)
    def model_info():
        model = current_model()
        cfg = model.config
        return schemas.ModelInfo(
            path=app.state.model_path,
            vocab_size=len(model.vocab),
            n_p=cfg.n_p,
            k_ctx=cfg.k_ctx,
            alpha=cfg.alpha,
            min_count=cfg.min_count,
            seed=cfg.seed,
        )

    @app.post("/model", response_model=schemas.ModelInfo)
    def model_load(request: schemas.ModelLoadRequest):
        try:
            model = PaddedMlm.load(request.path)
        except (OSError, ModelFormatError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        app.state.model = model
        app.state.model_path = request.path
        return model_info()

    @app.post("/train", response_model=schemas.ModelInfo)
    def model_train(request: schemas.TrainRequest):
        source = [t for t in (tokenize(s) for s in request.source_lines) if t]
        target = [t for t in (tokenize(s) for s in request.target_lines) if t]
        try:
            config = MlmConfig(
                n_p=request.n_p,
                k_ctx=request.k_ctx,
                alpha=request.alpha,
                min_count=request.min_count,
                seed=request.seed,
                spans_per_example=request.spans_per_example,
            )
            model = train(source, target, config)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        if request.save_path:
            try:
                model.save(request.save_path)
            except OSError as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from exc
        app.state.model = model
        app.state.model_path = request.save_path
        return model_info()

    @app.post("/edit", response_model=schemas.EditResponse)
    def edit_text(request: schemas.EditRequest):
        model = current_model()
        try:
            result = edit(
                model,
                request.text,
                EditDirection(request.direction),
                include_table=request.include_table,
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return schemas.EditResponse(
            input_text=result.input_text,
            output_text=result.output_text,
            identity=result.is_identity,
            winner=_span_out(result.winner),
            table=[_span_out(e) for e in result.table] if result.table else None,
        )

    @app.post("/edit/batch", response_model=schemas.BatchEditResponse)
    def edit_batch(request: schemas.BatchEditRequest):
        model = current_model()
        direction = EditDirection(request.direction)
        try:
            results = batch_edit(
                model, request.lines, direction, workers=request.workers
            )
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return schemas.BatchEditResponse(outputs=[r.output_text for r in results])

    @app.post("/score-table", response_model=schemas.ScoreTableResponse)
    def score_table(request: schemas.ScoreTableRequest):
        model = current_model()
        tokens = tokenize(request.text)
        if not tokens:
            raise HTTPException(status_code=400, detail="input text is empty")
        direction = EditDirection(request.direction)
        winner, table = best_span(
            model,
            tokens,
            target_domain=direction.destination,
            source_domain=direction.origin,
        )
        return schemas.ScoreTableResponse(
            rows=[_span_out(e) for e in table],
            winner=_span_out(winner),
            tsv=table_tsv(table),
        )

    @app.post("/silver", response_model=schemas.SilverResponse)
    def silver(request: schemas.SilverRequest):
        model = current_model()
        result = generate_silver(
            model,
            request.lines,
            EditDirection(request.direction),
            workers=request.workers,
        )
        pairs = [
            schemas.SilverPairOut(
                source=p.source_text,
                target=p.target_text,
                meta=schemas.SilverMetaOut(
                    line=p.meta.line,
                    start=p.meta.start,
                    del_len=p.meta.del_len,
                    replacement=list(p.meta.replacement),
                    score=p.meta.score,
                    identity=p.meta.identity,
                ),
            )
            for p in result.pairs
            if request.keep_identity or not p.meta.identity
        ]
        return schemas.SilverResponse(pairs=pairs, skipped=result.skipped)

    @app.post("/eval/exact", response_model=schemas.MetricResponse)
    def eval_exact(request: schemas.PairedMetricRequest):
        try:
            value = exact_score(request.predictions, request.references)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return schemas.MetricResponse(metric="exact", value=value)

    @app.post("/eval/bleu", response_model=schemas.MetricResponse)
    def eval_bleu(request: schemas.PairedMetricRequest):
        try:
            value = bleu(request.predictions, request.references)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return schemas.MetricResponse(metric="bleu", value=value)

    @app.post("/eval/transfer-accuracy", response_model=schemas.MetricResponse)
    def eval_transfer_accuracy(request: schemas.TransferAccuracyRequest):
        try:
            clf = train_classifier(
                request.corpus_a, request.corpus_b, smoothing=request.smoothing
            )
            value = transfer_accuracy(clf, request.predictions, request.intended)
        except ValueError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        return schemas.MetricResponse(metric="acc", value=value)

    return app


app = create_app()

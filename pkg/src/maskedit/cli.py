"""Command-line interface.

Subcommands cover the whole pipeline: ``synth`` writes task corpora,
``train`` fits a model, ``edit``/``score-table``/``silver`` run inference,
``eval`` computes metrics, and ``serve`` starts the HTTP service. The
inference and eval subcommands accept ``--server URL`` to run as a thin
client against an already-running service instead of loading a model
locally.

A ``--config FILE`` of ``key=value`` lines supplies defaults; explicit
flags always win. Exit codes: 0 on success, 1 on runtime and I/O errors,
2 on usage errors. Output files are written atomically.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .editor import EditDirection, edit
from .metrics import bleu, exact_score, train_classifier, transfer_accuracy
from .mlm import MlmConfig, PaddedMlm, train
from .pipeline import (
    batch_edit,
    generate_silver,
    read_lines,
    silver_meta_jsonl,
    silver_tsv,
    write_text,
)
from .scoring import TABLE_COLUMNS, best_span, table_rows, table_tsv
from .synth import SynthConfig, generate
from .tokenizer import tokenize


class CliError(Exception):
    """Fatal runtime error: printed to stderr, exit code 1."""


def _load_config_file(path: str) -> dict[str, str]:
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise CliError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, value = line.split("=", 1)
                values[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise CliError(f"cannot read config file: {exc}") from exc
    return values


def _resolve(args: argparse.Namespace, defaults: dict) -> argparse.Namespace:
    """Layer explicit flags over config-file values over built-in defaults."""
    config = _load_config_file(args.config) if getattr(args, "config", None) else {}
    for key, default in defaults.items():
        if getattr(args, key, None) is not None:
            continue
        if key in config:
            raw = config[key]
            caster = type(default) if default is not None else str
            if caster is bool:
                value = raw.lower() in ("1", "true", "yes", "on")
            else:
                try:
                    value = caster(raw)
                except ValueError as exc:
                    raise CliError(f"config value {key}={raw!r}: {exc}") from exc
            setattr(args, key, value)
        else:
            setattr(args, key, default)
    return args


def _mlm_config(args: argparse.Namespace) -> MlmConfig:
    return MlmConfig(
        n_p=args.np,
        k_ctx=args.k_ctx,
        alpha=args.alpha,
        spans_per_example=args.spans_per_example or None,
        min_count=args.min_count,
        seed=args.seed,
    )


def _read_corpus(path: str) -> list[str]:
    try:
        return read_lines(path)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from exc


def _tokenized_corpus(path: str) -> list[list[str]]:
    lines = [tokenize(line) for line in _read_corpus(path)]
    return [line for line in lines if line]


def _load_model(path: str | None) -> PaddedMlm:
    if not path:
        raise CliError("either --model or --server is required")
    try:
        return PaddedMlm.load(path)
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot load model {path}: {exc}") from exc


def _direction(value: str) -> EditDirection:
    return EditDirection(value)


def _post(server: str, route: str, payload: dict) -> dict:
    import httpx

    try:
        response = httpx.post(server.rstrip("/") + route, json=payload, timeout=600.0)
        response.raise_for_status()
        return response.json()
    except httpx.HTTPError as exc:
        raise CliError(f"server request failed: {exc}") from exc


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

SYNTH_DEFAULTS = {
    "task": "fusion",
    "seed": 0,
    "n_train": 5000,
    "n_test": 200,
    "distractor_rate": 0.0,
}


def cmd_synth(args: argparse.Namespace) -> int:
    args = _resolve(args, SYNTH_DEFAULTS)
    config = SynthConfig(
        n_train=args.n_train,
        n_test=args.n_test,
        seed=args.seed,
        task=args.task,
        distractor_rate=args.distractor_rate,
    )
    data = generate(config)
    os.makedirs(args.out_dir, exist_ok=True)
    if config.task == "fusion":
        source, target = data.source_corpus, data.target_corpus
    else:
        source, target = data.negative_corpus, data.positive_corpus
    write_text(os.path.join(args.out_dir, "source.txt"), "".join(s + "\n" for s in source))
    write_text(os.path.join(args.out_dir, "target.txt"), "".join(t + "\n" for t in target))
    write_text(
        os.path.join(args.out_dir, "gold.tsv"),
        "".join(f"{a}\t{b}\n" for a, b in data.gold_pairs),
    )
    print(
        f"wrote {len(source)} source, {len(target)} target, "
        f"{len(data.gold_pairs)} gold pairs to {args.out_dir}"
    )
    return 0


TRAIN_DEFAULTS = {
    "np": 4,
    "k_ctx": 2,
    "alpha": 0.1,
    "min_count": 2,
    "seed": 0,
    "spans_per_example": 0,
}


def cmd_train(args: argparse.Namespace) -> int:
    args = _resolve(args, TRAIN_DEFAULTS)
    source = _tokenized_corpus(args.source)
    target = _tokenized_corpus(args.target)
    if not source or not target:
        raise CliError("both corpora must contain at least one non-empty line")
    model = train(source, target, _mlm_config(args))
    try:
        model.save(args.out)
    except OSError as exc:
        raise CliError(f"cannot write model {args.out}: {exc}") from exc
    print(f"trained on {len(source)}+{len(target)} lines, vocab {len(model.vocab)}, saved to {args.out}")
    return 0


EDIT_DEFAULTS = {"workers": 1}


def cmd_edit(args: argparse.Namespace) -> int:
    args = _resolve(args, EDIT_DEFAULTS)
    corpus = _read_corpus(args.input)
    usable = [(i, line) for i, line in enumerate(corpus) if tokenize(line)]
    if args.server:
        if args.emit_table:
            raise CliError("--emit-table is only available with a local --model")
        data = _post(
            args.server,
            "/edit/batch",
            {
                "lines": [line for _, line in usable],
                "direction": args.direction,
            },
        )
        outputs = data["outputs"]
        tables = None
    else:
        model = _load_model(args.model)
        direction = _direction(args.direction)
        if args.emit_table:
            results = [
                edit(model, line, direction, include_table=True)
                for _, line in usable
            ]
            tables = [r.table for r in results]
        else:
            results = batch_edit(
                model, [line for _, line in usable], direction, workers=args.workers
            )
            tables = None
        outputs = [r.output_text for r in results]
    write_text(args.output, "".join(line + "\n" for line in outputs))
    if args.emit_table and tables is not None:
        lines = ["line\t" + "\t".join(TABLE_COLUMNS)]
        for (index, _), table in zip(usable, tables):
            for row in table_rows(table):
                cells = [
                    f"{row[col]:.6f}" if isinstance(row[col], float) else str(row[col])
                    for col in TABLE_COLUMNS
                ]
                lines.append("\t".join([str(index)] + cells))
        write_text(args.emit_table, "\n".join(lines) + "\n")
    skipped = len(corpus) - len(usable)
    print(f"edited {len(outputs)} lines ({skipped} empty skipped) -> {args.output}")
    return 0


def cmd_score_table(args: argparse.Namespace) -> int:
    args = _resolve(args, {})
    if args.server:
        data = _post(
            args.server, "/score-table", {"text": args.text, "direction": args.direction}
        )
        sys.stdout.write(data["tsv"])
        return 0
    model = _load_model(args.model)
    direction = _direction(args.direction)
    tokens = tokenize(args.text)
    if not tokens:
        raise CliError("input text is empty")
    _, table = best_span(
        model,
        tokens,
        target_domain=direction.destination,
        source_domain=direction.origin,
    )
    sys.stdout.write(table_tsv(table))
    return 0


SILVER_DEFAULTS = {"workers": 1, "keep_identity": True}


def cmd_silver(args: argparse.Namespace) -> int:
    args = _resolve(args, SILVER_DEFAULTS)
    corpus = _read_corpus(args.corpus)
    if args.server:
        data = _post(
            args.server,
            "/silver",
            {
                "lines": corpus,
                "direction": args.direction,
                "keep_identity": args.keep_identity,
            },
        )
        tsv = "".join(f"{p['source']}\t{p['target']}\n" for p in data["pairs"])
        meta = "".join(json.dumps(p["meta"]) + "\n" for p in data["pairs"])
        skipped = data["skipped"]
        kept = len(data["pairs"])
    else:
        model = _load_model(args.model)
        result = generate_silver(
            model, corpus, _direction(args.direction), workers=args.workers
        )
        pairs = [
            p for p in result.pairs if args.keep_identity or not p.meta.identity
        ]
        tsv = silver_tsv(pairs)
        meta = silver_meta_jsonl(pairs)
        skipped = result.skipped
        kept = len(pairs)
    write_text(args.out, tsv)
    if args.meta:
        write_text(args.meta, meta)
    print(f"wrote {kept} pairs ({skipped} lines skipped) -> {args.out}")
    return 0


EVAL_DEFAULTS = {"intended": "b", "smoothing": 1.0}


def cmd_eval(args: argparse.Namespace) -> int:
    args = _resolve(args, EVAL_DEFAULTS)
    predictions = _read_corpus(args.pred)
    if args.metric in ("exact", "bleu"):
        if not args.ref:
            raise CliError(f"--metric {args.metric} requires --ref")
        references = _read_corpus(args.ref)
        if args.server:
            data = _post(
                args.server,
                f"/eval/{args.metric}",
                {"predictions": predictions, "references": references},
            )
            value = data["value"]
        else:
            try:
                fn = exact_score if args.metric == "exact" else bleu
                value = fn(predictions, references)
            except ValueError as exc:
                raise CliError(str(exc)) from exc
        print(f"{args.metric}\t{value}")
        return 0
    # accuracy: needs the two classifier training corpora
    if not args.clf_a or not args.clf_b:
        raise CliError("--metric acc requires --clf-a and --clf-b")
    if args.server:
        data = _post(
            args.server,
            "/eval/transfer-accuracy",
            {
                "predictions": predictions,
                "corpus_a": _read_corpus(args.clf_a),
                "corpus_b": _read_corpus(args.clf_b),
                "intended": args.intended,
                "smoothing": args.smoothing,
            },
        )
        value = data["value"]
    else:
        try:
            clf = train_classifier(
                _read_corpus(args.clf_a),
                _read_corpus(args.clf_b),
                smoothing=args.smoothing,
            )
            value = transfer_accuracy(clf, predictions, args.intended)
        except ValueError as exc:
            raise CliError(str(exc)) from exc
    print(f"acc\t{value}")
    return 0


SERVE_DEFAULTS = {"host": "127.0.0.1", "port": 8000}


def cmd_serve(args: argparse.Namespace) -> int:
    args = _resolve(args, SERVE_DEFAULTS)
    import uvicorn

    from .service.app import create_app

    app = create_app(model_path=args.model)
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maskedit",
        description="Unsupervised text editing with padded masked language models.",
    )
    parser.add_argument("--version", action="version", version=f"maskedit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="key=value file supplying flag defaults")

    p = sub.add_parser("synth", help="generate a synthetic task dataset")
    common(p)
    p.add_argument("--task", choices=("fusion", "polarity"))
    p.add_argument("--seed", type=int)
    p.add_argument("--n-train", type=int, dest="n_train")
    p.add_argument("--n-test", type=int, dest="n_test")
    p.add_argument("--distractor-rate", type=float, dest="distractor_rate")
    p.add_argument("--out-dir", required=True, dest="out_dir")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a model on two nonparallel corpora")
    common(p)
    p.add_argument("--source", required=True, help="source-domain corpus, one line per example")
    p.add_argument("--target", required=True, help="target-domain corpus, one line per example")
    p.add_argument("--np", type=int, dest="np", help="mask block length (default 4)")
    p.add_argument("--k-ctx", type=int, dest="k_ctx", help="context tokens per side (default 2)")
    p.add_argument("--alpha", type=float, help="additive smoothing (default 0.1)")
    p.add_argument("--min-count", type=int, dest="min_count", help="vocab threshold (default 2)")
    p.add_argument("--seed", type=int)
    p.add_argument(
        "--spans-per-example", type=int, dest="spans_per_example",
        help="cap on sampled spans per line; 0 = all (default)",
    )
    p.add_argument("--out", required=True, help="model file to write")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("edit", help="edit each line of a corpus once")
    common(p)
    p.add_argument("--model")
    p.add_argument("--server", help="base URL of a running maskedit service")
    p.add_argument(
        "--direction", required=True,
        choices=[d.value for d in EditDirection],
    )
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--emit-table", dest="emit_table", help="also write the full score table TSV here")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_edit)

    p = sub.add_parser("score-table", help="print the full span score table for one line")
    common(p)
    p.add_argument("--model")
    p.add_argument("--server")
    p.add_argument(
        "--direction", required=True,
        choices=[d.value for d in EditDirection],
    )
    p.add_argument("--text", required=True)
    p.set_defaults(func=cmd_score_table)

    p = sub.add_parser("silver", help="generate aligned silver pairs from a corpus")
    common(p)
    p.add_argument("--model")
    p.add_argument("--server")
    p.add_argument(
        "--direction", required=True,
        choices=[d.value for d in EditDirection],
    )
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="TSV of source<TAB>target pairs")
    p.add_argument("--meta", help="optional JSONL sidecar with edit provenance")
    p.add_argument(
        "--keep-identity", dest="keep_identity", action="store_true", default=None,
        help="keep identity pairs (default)",
    )
    p.add_argument(
        "--drop-identity", dest="keep_identity", action="store_false", default=None,
        help="drop pairs whose edit changed nothing",
    )
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_silver)

    p = sub.add_parser("eval", help="compute a metric over prediction files")
    common(p)
    p.add_argument("--metric", required=True, choices=("exact", "bleu", "acc"))
    p.add_argument("--server")
    p.add_argument("--pred", required=True, help="predictions, one per line")
    p.add_argument("--ref", help="references, one per line (exact/bleu)")
    p.add_argument("--clf-a", dest="clf_a", help="class-a training corpus (acc)")
    p.add_argument("--clf-b", dest="clf_b", help="class-b training corpus (acc)")
    p.add_argument("--intended", choices=("a", "b"), help="intended label for acc (default b)")
    p.add_argument("--smoothing", type=float)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="run the HTTP service")
    common(p)
    p.add_argument("--model", help="model file to preload")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"maskedit: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"maskedit: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

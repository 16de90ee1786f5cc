"""maqa command line: every workflow as a subcommand.

Exit codes: 0 success, 1 data errors, 2 usage errors. Data outputs go to
--out or stdout and never contain timestamps; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import os
import sys

from maqa import __version__
from maqa.core import Instance, PredictionSet


class DataError(Exception):
    """Wraps input-data failures so main() can exit 1 with a clean message."""


def _read_input(path: str | None) -> bytes:
    if path is None or path == "-":
        return sys.stdin.buffer.read()
    try:
        with open(path, "rb") as f:
            return f.read()
    except OSError as e:
        raise DataError(f"{path}: {e.strerror}") from e


def _write_output(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text)
    except OSError as e:
        raise DataError(f"{path}: {e.strerror}") from e


def _load_corpus(path: str, fmt: str = "unified"):
    from maqa import ingest

    try:
        corpus, report = ingest.load(fmt, _read_input(path))
    except ingest.LoadError as e:
        raise DataError(str(e)) from e
    if report.skipped_non_span or report.skipped_malformed:
        print(
            f"{path}: loaded {report.loaded}, skipped {report.skipped_non_span} "
            f"non-span and {report.skipped_malformed} malformed records",
            file=sys.stderr,
        )
    return corpus, report


def _load_lexicon(path: str | None):
    from maqa import taxonomy

    if path is None:
        return taxonomy.default_lexicon()
    try:
        return taxonomy.load_lexicon(path)
    except (OSError, taxonomy.LexiconError) as e:
        raise DataError(f"lexicon {path}: {e}") from e


# ----------------------------------------------------------------- subcommands


def cmd_ingest(args) -> int:
    from maqa import ingest

    corpus, report = _load_corpus(args.input, args.format)
    _write_output(args.out, ingest.export(corpus))
    print(
        f"ingest: {report.loaded} instances from {report.source_format} "
        f"({report.skipped_non_span} non-span, {report.skipped_malformed} malformed skipped)",
        file=sys.stderr,
    )
    return 0


def _attach_labels(corpus, annotations_path):
    from maqa import ingest

    try:
        labels = ingest.load_annotations(_read_input(annotations_path))
    except ingest.LoadError as e:
        raise DataError(str(e)) from e
    corpus, unknown = ingest.attach_annotations(corpus, labels)
    if unknown:
        print(
            f"annotations: {len(unknown)} label ids match no instance "
            f"(first: {unknown[0]})",
            file=sys.stderr,
        )
    return corpus


def cmd_evaluate(args) -> int:
    from maqa import pred_io, reporting
    from maqa.metrics import evaluate

    corpus, _ = _load_corpus(args.gold)
    if not corpus:
        raise DataError(f"{args.gold}: gold corpus is empty")
    try:
        preds = pred_io.parse_predictions(_read_input(args.pred).decode("utf-8"))
    except ValueError as e:
        raise DataError(str(e)) from e
    pred_map = {iid: list(p.spans) for iid, p in preds.items()}
    mode = "char" if args.char_lcs else "token"

    if args.by_type:
        corpus = _attach_labels(corpus, args.by_type)
        reports = reporting.breakdown_report(corpus, pred_map, mode=mode)
    else:
        reports = {"all": evaluate(corpus, pred_map, mode=mode)}

    if args.json:
        payload = {
            name: None if r is None else r.to_dict() for name, r in reports.items()
        }
        _write_output(args.out, json.dumps(payload, indent=2) + "\n")
    else:
        _write_output(args.out, reporting.render_score_table(reports))
    return 0


def cmd_classify(args) -> int:
    from maqa.taxonomy import detect_clue_words, recall_stage1

    corpus, _ = _load_corpus(args.corpus)
    lexicon = _load_lexicon(args.lexicon)
    lines = []
    n_recalled = 0
    for inst in corpus:
        marks = detect_clue_words(inst.question, lexicon)
        if marks:
            n_recalled += 1
        lines.append(
            json.dumps(
                {
                    "id": inst.id,
                    "recalled": bool(marks),
                    "clues": [
                        {
                            "text": m.text,
                            "type": m.type,
                            "token_start": m.token_range[0],
                            "token_end": m.token_range[1],
                        }
                        for m in marks
                    ],
                },
                ensure_ascii=False,
            )
        )
    _write_output(args.out, "\n".join(lines) + ("\n" if lines else ""))
    print(f"classify: {n_recalled}/{len(corpus)} instances recalled", file=sys.stderr)
    return 0


def _make_client(endpoint: str, corpus):
    from maqa import model_client

    if endpoint.startswith("mock:"):
        parts = endpoint.split(":", 2)
        kind = parts[1]
        fixtures = None
        if kind == "scripted":
            if len(parts) < 3:
                raise DataError("scripted mock needs a fixture file: mock:scripted:FILE")
            with open(parts[2], encoding="utf-8") as f:
                fixtures = json.load(f)
        try:
            return model_client.make_mock(kind, corpus=corpus, fixtures=fixtures)
        except ValueError as e:
            raise DataError(str(e)) from e
    if endpoint.startswith("cmd:"):
        import shlex

        return model_client.SubprocessClient(shlex.split(endpoint[4:]))
    if endpoint.startswith("http://") or endpoint.startswith("https://"):
        return model_client.HTTPClient(endpoint)
    raise DataError(
        f"unknown endpoint {endpoint!r}; use mock:KIND, cmd:ARGV, or http(s)://..."
    )


def _decode_one(paradigm, client, inst, threshold, k_max) -> PredictionSet:
    from maqa import model_client, paradigms

    def ask(mode, suffix):
        return client.query(
            model_client.ModelRequest(
                request_id=f"{inst.id}#{suffix}",
                mode=mode,
                question=inst.question.raw,
                passage=inst.passage.raw,
            )
        )

    if paradigm == "tagging":
        probs = ask("tag", "tag").probs
        spans = paradigms.tagging_decode_texts(inst.passage, probs, threshold)
        return PredictionSet(inst.id, tuple(spans), producer="tagging")
    if paradigm == "numpred":
        cands = ask("candidates", "cand").candidates
        dist = ask("count", "count").distribution
        k = max(range(len(dist)), key=lambda i: dist[i]) + 1
        k = min(k, k_max)
        chosen = paradigms.numpred_select(cands, k)
        texts = [inst.passage.slice((c.start, c.end)) for c in chosen]
        return PredictionSet(inst.id, tuple(texts), producer="numpred")
    if paradigm == "iterative":
        return paradigms.iterative_run(client, inst, max_iters=k_max)
    if paradigm == "generation":
        out = paradigms.gen_parse(ask("generate", "gen").text)
        return PredictionSet(inst.id, out.answers, producer="generation")
    raise DataError(f"unknown paradigm: {paradigm!r}")


def cmd_decode(args) -> int:
    from maqa import model_client, pred_io

    if args.k_max < 1:
        raise DataError("--k-max must be >= 1")
    corpus, _ = _load_corpus(args.corpus)
    client = _make_client(args.model_endpoint, corpus)
    jobs = args.jobs or os.cpu_count() or 1

    results: dict[str, PredictionSet] = {}
    try:
        if jobs == 1:
            for inst in corpus:
                results[inst.id] = _decode_one(
                    args.paradigm, client, inst, args.threshold, args.k_max
                )
        else:
            with concurrent.futures.ThreadPoolExecutor(max_workers=jobs) as pool:
                futures = {
                    pool.submit(
                        _decode_one, args.paradigm, client, inst, args.threshold, args.k_max
                    ): inst.id
                    for inst in corpus
                }
                for fut in concurrent.futures.as_completed(futures):
                    results[futures[fut]] = fut.result()
    except (model_client.TransportError, model_client.ProtocolError) as e:
        raise DataError(f"model endpoint failed: {e}") from e
    finally:
        if hasattr(client, "close"):
            client.close()

    _write_output(args.out, pred_io.format_predictions(results))
    return 0


def cmd_ensemble(args) -> int:
    from maqa import ensemble, pred_io

    if len(args.pred) < 2:
        raise DataError("ensemble needs at least two --pred files")
    maps = []
    for path in args.pred:
        try:
            maps.append(pred_io.parse_predictions(_read_input(path).decode("utf-8")))
        except ValueError as e:
            raise DataError(str(e)) from e
    merged = ensemble.vote_corpus(maps)
    _write_output(args.out, pred_io.format_predictions(merged))
    return 0


def cmd_report(args) -> int:
    from maqa import pred_io, reporting

    corpus, _ = _load_corpus(args.corpus)
    if not corpus:
        raise DataError(f"{args.corpus}: corpus is empty")
    if args.annotations:
        corpus = _attach_labels(corpus, args.annotations)

    if args.what == "stats":
        groups: dict[str, list[Instance]] = {}
        for inst in corpus:
            groups.setdefault(inst.dataset, []).append(inst)
        stats = {name: reporting.corpus_stats(g) for name, g in sorted(groups.items())}
        if len(stats) > 1:
            stats["Total"] = reporting.corpus_stats(corpus)
        if args.format == "json":
            _write_output(
                args.out,
                json.dumps({k: v.to_dict() for k, v in stats.items()}, indent=2) + "\n",
            )
        elif args.format == "csv":
            _write_output(args.out, reporting.stats_to_csv(stats))
        else:
            _write_output(args.out, reporting.render_stats(stats))
        return 0

    if args.what == "breakdown":
        if not args.pred:
            raise DataError("report --what breakdown requires --pred")
        try:
            preds = pred_io.parse_predictions(_read_input(args.pred).decode("utf-8"))
        except ValueError as e:
            raise DataError(str(e)) from e
        pred_map = {iid: list(p.spans) for iid, p in preds.items()}
        reports = reporting.breakdown_report(corpus, pred_map)
        if args.format == "json":
            payload = {
                name: None if r is None else r.to_dict() for name, r in reports.items()
            }
            _write_output(args.out, json.dumps(payload, indent=2) + "\n")
        elif args.format == "csv":
            _write_output(args.out, reporting.scores_to_csv(reports))
        else:
            _write_output(args.out, reporting.render_score_table(reports))
        return 0

    tables = reporting.distribution(corpus, args.what)
    if args.format == "json":
        _write_output(args.out, reporting.distribution_to_json(tables) + "\n")
    elif args.format == "csv":
        _write_output(args.out, reporting.distribution_to_csv(tables))
    else:
        _write_output(args.out, "\n".join(reporting.render_distribution(t) for t in tables))
    return 0


def cmd_annotate_serve(args) -> int:
    import uvicorn

    from maqa.annotation_service import AnnotationStore, create_app

    corpus, _ = _load_corpus(args.corpus)
    lexicon = _load_lexicon(args.lexicon)
    store = AnnotationStore.replay(corpus, args.log, lexicon=lexicon, seed=args.seed)
    app = create_app(store, ui_dir=args.ui_dir)
    print(
        f"annotation service: {len(corpus)} instances, log={args.log}, "
        f"http://{args.host}:{args.port}",
        file=sys.stderr,
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


# ----------------------------------------------------------------------- main


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maqa",
        description="Multi-answer reading comprehension toolkit.",
    )
    parser.add_argument("--version", action="version", version=f"maqa {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("ingest", help="convert a dataset to the unified corpus format")
    p.add_argument("--format", required=True, choices=["drop", "quoref", "multispanqa", "unified"])
    p.add_argument("--input", required=True, help="source file ('-' for stdin)")
    p.add_argument("--out", help="unified JSONL output (default stdout)")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("evaluate", help="score predictions with EM and PM metrics")
    p.add_argument("--gold", required=True, help="unified corpus JSONL")
    p.add_argument("--pred", required=True, help="predictions JSONL")
    p.add_argument("--by-type", help="taxonomy annotations JSONL for per-type breakdown")
    p.add_argument("--char-lcs", action="store_true", help="character-level LCS (diagnostics)")
    p.add_argument("--json", action="store_true", help="emit JSON instead of a table")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("classify", help="detect clue words over a corpus")
    p.add_argument("--corpus", required=True, help="unified corpus JSONL")
    p.add_argument("--lexicon", help="clue lexicon TSV (default: bundled)")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("decode", help="produce predictions via a model endpoint")
    p.add_argument("--paradigm", required=True, choices=["tagging", "numpred", "iterative", "generation"])
    p.add_argument("--corpus", required=True, help="unified corpus JSONL")
    p.add_argument(
        "--model-endpoint",
        required=True,
        help="mock:{oracle|degenerate}, mock:scripted:FILE, cmd:ARGV, or http(s)://HOST",
    )
    p.add_argument("--threshold", type=float, default=0.5, help="tagging threshold")
    p.add_argument("--k-max", type=int, default=8, help="answer-count cap")
    p.add_argument("--jobs", type=int, help="worker threads (default: CPU count)")
    p.add_argument("--out", help="predictions JSONL output (default stdout)")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("ensemble", help="vote over several prediction files")
    p.add_argument("--pred", action="append", required=True, help="predictions JSONL (repeat)")
    p.add_argument("--out", help="ensembled predictions output (default stdout)")
    p.set_defaults(func=cmd_ensemble)

    p = sub.add_parser("report", help="distribution tables and corpus statistics")
    p.add_argument("--what", required=True, choices=["types", "clues", "counts", "stats", "breakdown"])
    p.add_argument("--corpus", required=True, help="unified corpus JSONL")
    p.add_argument("--annotations", help="taxonomy annotations JSONL to attach")
    p.add_argument("--pred", help="predictions JSONL (breakdown only)")
    p.add_argument("--format", choices=["table", "json", "csv"], default="table")
    p.add_argument("--out", help="output path (default stdout)")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("annotate-serve", help="run the annotation workbench service")
    p.add_argument("--corpus", required=True, help="unified corpus JSONL")
    p.add_argument("--log", required=True, help="append-only annotation log (JSONL)")
    p.add_argument("--lexicon", help="clue lexicon TSV for stage-1 recall")
    p.add_argument("--ui-dir", help="directory with the built web UI")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8400)
    p.add_argument("--seed", type=int, default=0, help="task-assignment RNG seed")
    p.set_defaults(func=cmd_annotate_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as e:
        print(f"maqa {args.command}: error: {e}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        return 1


if __name__ == "__main__":
    raise SystemExit(main())

"""Command-line entry point.

Subcommands mirror the batch workflow: validate a corpus, mine tuples, fit
a reference backend, generate, evaluate, serve. Progress goes to stderr;
data goes to files (or stdout for `generate`). Exit codes: 0 success,
1 domain error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Optional

from . import corpus as corpus_mod
from . import mining, reporting, synth
from .backends import (
    BackendFailure,
    EmptyTrainingSet,
    NgramEventModel,
    fit_reference_backend,
    load_backend,
)
from .events import (
    MalformedEvent,
    agent_question,
    entity_mention,
    generic_question,
    parse_event_text,
    serialize_event,
)
from .generation import (
    ContextOverflow,
    DecodeConfig,
    Variant,
    assemble_input,
    beam_events,
    export_training_file,
    sample_events,
)
from .metrics import (
    ControlProbe,
    EmptyQuestionSet,
    TooFewDocuments,
    TooFewSequences,
    controllability_eval,
    diversity_protocol,
    narrative_cloze,
    perplexity,
    read_gold_schemas,
    read_synonym_map,
    schema_overlap,
)
from .session import (
    ActionKind,
    InvalidAction,
    SessionConfig,
    SessionFinished,
    SessionState,
    UserAction,
    apply_action,
    current_metrics,
    propose_candidates,
    start_session,
    write_log,
)

logger = logging.getLogger("eventsmith")

DOMAIN_ERRORS = (
    corpus_mod.CorpusFormatError,
    corpus_mod.ValidationError,
    MalformedEvent,
    BackendFailure,
    EmptyTrainingSet,
    EmptyQuestionSet,
    TooFewDocuments,
    TooFewSequences,
    ContextOverflow,
    FileNotFoundError,
    ValueError,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eventsmith")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a corpus file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--out", help="write the normalized corpus back out")

    p = sub.add_parser("build-tuples", help="mine (context, question, answer) instances")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--strict", action="store_true")
    p.add_argument("--all-matches", action="store_true")
    p.add_argument("--no-fallback", action="store_true")
    p.add_argument("--min-context-len", type=int, default=1)

    p = sub.add_parser("train", help="fit the reference n-gram backend")
    p.add_argument("--instances", required=True)
    p.add_argument("--variant", required=True, choices=Variant.ALL)
    p.add_argument("--out", required=True)
    p.add_argument("--order", type=int, default=3)
    p.add_argument("--alpha", type=float, default=0.01)
    p.add_argument("--export", help="also write {input, target} JSONL for external training")

    p = sub.add_parser("generate", help="decode continuations for a context")
    p.add_argument("--backend", required=True)
    p.add_argument("--variant", required=True, choices=Variant.ALL)
    p.add_argument("--context", required=True, help="file with one event text per line")
    p.add_argument("--entity")
    p.add_argument("--question")
    p.add_argument("--mode", choices=["sample", "beam"], default="sample")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)

    for name, extra in (
        ("eval-diversity", "self-BLEU over sampled sequences"),
        ("eval-control", "entity controllability"),
        ("eval-ppl", "per-token perplexity"),
        ("eval-cloze", "narrative cloze accuracy"),
    ):
        p = sub.add_parser(name, help=extra)
        p.add_argument("--backend", required=True)
        p.add_argument("--instances", required=True)
        p.add_argument("--variant", required=True, choices=Variant.ALL)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", required=True, help="report JSON path; CSV and PNG land beside it")
        if name == "eval-diversity":
            p.add_argument("--lengths", type=int, default=10)
            p.add_argument("--k", type=int, default=5)
            p.add_argument("--max-contexts", type=int, default=25)
        if name == "eval-control":
            p.add_argument("--mode", choices=["sampling", "beam"], default="sampling")
            p.add_argument(
                "--criterion", choices=["any_presence", "role_specific"], default="any_presence"
            )
            p.add_argument("--budget", type=int, default=40)
            p.add_argument("--max-probes", type=int, default=100)
        if name == "eval-ppl":
            p.add_argument("--mode", choices=["guided", "marginalized"], default="guided")
        if name == "eval-cloze":
            p.add_argument("--confounders", type=int, default=5)

    p = sub.add_parser("eval-overlap", help="predicate overlap against gold schemas")
    p.add_argument("--gold", required=True)
    p.add_argument("--generated", required=True, help="file with one generated event per line")
    p.add_argument("--synonyms")
    p.add_argument("--seed", type=int, default=0, help="accepted for uniformity; overlap is deterministic")
    p.add_argument("--out", required=True)

    p = sub.add_parser("serve", help="run the session service (HTTP, or --tty for a terminal loop)")
    p.add_argument("--tty", action="store_true")
    p.add_argument("--backend", default=os.environ.get("EVENTSMITH_BACKEND"))
    p.add_argument("--variant", choices=Variant.ALL, default="qgelm")
    p.add_argument("--host", default=os.environ.get("EVENTSMITH_HOST", "127.0.0.1"))
    p.add_argument("--port", type=int, default=int(os.environ.get("EVENTSMITH_PORT", "8870")))
    p.add_argument(
        "--time-budget",
        type=float,
        default=float(os.environ.get("EVENTSMITH_TIME_BUDGET", "240")),
    )
    p.add_argument("--log-dir", default=os.environ.get("EVENTSMITH_LOG_DIR", "session-logs"))
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("make-demo-corpus", help="write a synthetic corpus for trying the tool")
    p.add_argument("--out", required=True)
    p.add_argument("--docs", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)

    return parser


def _read_context(path: str) -> list[str]:
    with open(path, encoding="utf-8") as handle:
        return [line.strip() for line in handle if line.strip()]


def _warn_variant_mismatch(backend, variant: str) -> None:
    fitted = getattr(backend, "variant", None)
    if fitted is not None and fitted != variant:
        logger.warning(
            "backend was fitted for %r but %r was requested; prompts will "
            "miss the model's conditioning keys",
            fitted,
            variant,
        )


def _instances_and_backend(args) -> tuple[list, NgramEventModel]:
    instances = mining.read_instances(args.instances)
    backend = load_backend(args.backend)
    _warn_variant_mismatch(backend, args.variant)
    return instances, backend


def _cmd_ingest(args) -> int:
    documents = corpus_mod.load_corpus(args.corpus, strict=args.strict)
    n_events = sum(len(s.events) for d in documents for s in d.sentences)
    n_clusters = sum(len(d.clusters) for d in documents)
    print(
        f"loaded {len(documents)} documents, {n_events} events, {n_clusters} clusters",
        file=sys.stderr,
    )
    if args.out:
        corpus_mod.write_corpus(documents, args.out)
        print(f"wrote normalized corpus to {args.out}", file=sys.stderr)
    return 0


def _cmd_build_tuples(args) -> int:
    documents = corpus_mod.load_corpus(args.corpus, strict=args.strict)
    cfg = mining.PipelineConfig(
        min_context_len=args.min_context_len,
        answer_scope=mining.AnswerScope.ALL_MATCHES
        if args.all_matches
        else mining.AnswerScope.FIRST_MATCH,
        emit_fallback=not args.no_fallback,
    )
    instances = []
    for document in documents:
        instances.extend(mining.build_instances(document, cfg))
    mining.write_instances(instances, args.out)
    stats = mining.corpus_stats(instances)
    print(json.dumps(stats), file=sys.stderr)
    return 0


def _cmd_train(args) -> int:
    instances = mining.read_instances(args.instances)
    if args.export:
        rows = export_training_file(instances, args.variant, args.export)
        print(f"exported {rows} training rows to {args.export}", file=sys.stderr)
    model = fit_reference_backend(instances, args.variant, order=args.order, alpha=args.alpha)
    model.save(args.out)
    print(
        f"fitted {args.variant} backend on {len(instances)} instances -> {args.out}",
        file=sys.stderr,
    )
    return 0


def _cmd_generate(args) -> int:
    backend = load_backend(args.backend)
    _warn_variant_mismatch(backend, args.variant)
    context_texts = [
        serialize_event(parse_event_text(line, i, i))
        for i, line in enumerate(_read_context(args.context))
    ]
    if not context_texts:
        raise ValueError("context file holds no events")
    if args.variant == Variant.ELM:
        guidance = None
    elif args.variant == Variant.EGELM:
        if not args.entity:
            raise ValueError("entity-guided generation needs --entity")
        guidance = args.entity
    else:
        if args.question:
            guidance = args.question
        elif args.entity:
            guidance = agent_question(entity_mention(args.entity)).surface
        else:
            guidance = generic_question().surface
    cfg = DecodeConfig(beam_size=args.n, num_samples=args.n, random_seed=args.seed)
    prompt = assemble_input(context_texts, guidance, cfg)
    if args.mode == "sample":
        outputs = sample_events(backend, prompt, args.n, cfg)
    else:
        outputs = beam_events(backend, prompt, cfg)
    for text in outputs:
        print(text)
    return 0


def _cmd_eval_diversity(args) -> int:
    instances, backend = _instances_and_backend(args)
    contexts = []
    seen = set()
    for instance in instances:
        if len(instance.context) != 1:
            continue
        key = serialize_event(instance.context[0])
        if key not in seen:
            seen.add(key)
            contexts.append(instance.context)
        if len(contexts) >= args.max_contexts:
            break
    if not contexts:
        raise ValueError("no single-event contexts in the instance file")
    report = diversity_protocol(
        backend,
        contexts,
        args.variant,
        lengths=range(1, args.lengths + 1),
        k=args.k,
        seed=args.seed,
    )
    reporting.write_json(report.to_dict(), args.out)
    reporting.write_csv(reporting.diversity_rows(report), reporting.sibling(args.out, ".csv"))
    reporting.render_diversity(report, reporting.sibling(args.out, ".png"))
    print(f"diversity report -> {args.out}", file=sys.stderr)
    return 0


def _cmd_eval_control(args) -> int:
    instances, backend = _instances_and_backend(args)
    probes = []
    for instance in instances:
        role = instance.question.role
        if role is None or instance.question.entity is None:
            continue
        probes.append(
            ControlProbe(
                context=instance.context,
                entity=instance.question.entity.text,
                role=role,
            )
        )
        if len(probes) >= args.max_probes:
            break
    if not probes:
        raise ValueError("no role questions in the instance file to probe with")
    report = controllability_eval(
        backend,
        probes,
        mode=args.mode,
        criterion=args.criterion,
        variant=args.variant,
        budget=args.budget,
        cfg=DecodeConfig(random_seed=args.seed),
    )
    reporting.write_json(report.to_dict(), args.out)
    reporting.write_csv([report.to_dict()], reporting.sibling(args.out, ".csv"))
    reporting.render_control(report, reporting.sibling(args.out, ".png"))
    print(f"controllability report -> {args.out}", file=sys.stderr)
    return 0


def _cmd_eval_ppl(args) -> int:
    instances, backend = _instances_and_backend(args)
    report = perplexity(
        backend, instances, mode=args.mode, variant=args.variant, cfg=DecodeConfig(random_seed=args.seed)
    )
    reporting.write_json(report.to_dict(), args.out)
    reporting.write_csv([report.to_dict()], reporting.sibling(args.out, ".csv"))
    reporting.render_perplexity(report, reporting.sibling(args.out, ".png"))
    print(f"perplexity report -> {args.out}", file=sys.stderr)
    return 0


def _cmd_eval_cloze(args) -> int:
    instances, backend = _instances_and_backend(args)
    accuracy = narrative_cloze(
        backend,
        instances,
        variant=args.variant,
        confounders=args.confounders,
        seed=args.seed,
    )
    n_documents = len({i.document_id for i in instances})
    payload = {
        "accuracy": accuracy,
        "documents": n_documents,
        "confounders": args.confounders,
        "seed": args.seed,
    }
    reporting.write_json(payload, args.out)
    reporting.write_csv([payload], reporting.sibling(args.out, ".csv"))
    reporting.render_cloze(accuracy, n_documents, reporting.sibling(args.out, ".png"))
    print(f"cloze report -> {args.out}", file=sys.stderr)
    return 0


def _cmd_eval_overlap(args) -> int:
    schemas = read_gold_schemas(args.gold)
    generated = _read_context(args.generated)
    synonym_map = read_synonym_map(args.synonyms) if args.synonyms else None
    per_domain = {}
    matched_total = 0.0
    gold_total = 0
    for schema in schemas:
        pct = schema_overlap(generated, list(schema.events), synonym_map)
        per_domain[schema.domain] = pct
        matched_total += pct * len(schema.events) / 100.0
        gold_total += len(schema.events)
    overall = 100.0 * matched_total / gold_total if gold_total else 0.0
    payload = {"per_domain": per_domain, "overall": overall}
    reporting.write_json(payload, args.out)
    reporting.write_csv(
        [{"domain": d, "overlap_pct": v} for d, v in per_domain.items()]
        + [{"domain": "overall", "overlap_pct": overall}],
        reporting.sibling(args.out, ".csv"),
    )
    reporting.render_overlap(per_domain, overall, reporting.sibling(args.out, ".png"))
    print(f"overlap report -> {args.out}", file=sys.stderr)
    return 0


def _cmd_make_demo_corpus(args) -> int:
    documents = synth.scenario_corpus(args.docs, seed=args.seed)
    corpus_mod.write_corpus(documents, args.out)
    print(f"wrote {len(documents)} synthetic documents to {args.out}", file=sys.stderr)
    return 0


def _run_tty(args) -> int:
    if not args.backend:
        raise ValueError("serve needs --backend (or EVENTSMITH_BACKEND)")
    backend = load_backend(args.backend)
    _warn_variant_mismatch(backend, args.variant)
    config = SessionConfig(time_budget=args.time_budget, rng_seed=args.seed)
    seed_event = input("seed event> ").strip()
    session = start_session(seed_event, args.variant, backend, config)
    log_dir = Path(args.log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)

    while session.state is not SessionState.FINISHED:
        try:
            if session.state is SessionState.AWAITING_ENTITY:
                entity = input("entity of interest (or 'none')> ").strip()
                propose_candidates(session, None if entity.lower() in ("", "none") else entity)
                continue
            print(f"\n[{session.seconds_remaining():.0f}s left] context: "
                  + " . ".join(session.context_texts()), file=sys.stderr)
            for i, text in enumerate(session.pending_candidates):
                print(f"  {i}. {text}")
            choice = input("pick 0-3, r(egenerate), b <step>, q(uit)> ").strip().lower()
            if choice == "q":
                apply_action(session, UserAction(ActionKind.STOP))
            elif choice == "r":
                apply_action(session, UserAction(ActionKind.REGENERATE))
            elif choice.startswith("b"):
                apply_action(session, UserAction(ActionKind.RETURN, step=int(choice[1:].strip())))
            elif choice.isdigit():
                apply_action(session, UserAction(ActionKind.SELECT, index=int(choice)))
            else:
                print("unrecognized input", file=sys.stderr)
        except InvalidAction as exc:
            print(f"invalid: {exc}", file=sys.stderr)
        except SessionFinished:
            print("time is up", file=sys.stderr)
            break

    log_path = log_dir / f"{session.session_id}.jsonl"
    write_log(session, log_path)
    print(json.dumps(current_metrics(session).to_dict(), indent=2))
    print(f"action log -> {log_path}", file=sys.stderr)
    return 0


def _cmd_serve(args) -> int:
    if args.tty:
        return _run_tty(args)
    if not args.backend:
        raise ValueError("serve needs --backend (or EVENTSMITH_BACKEND)")
    import uvicorn

    from .service import create_app

    backend = load_backend(args.backend)
    app = create_app(
        backend,
        args.log_dir,
        SessionConfig(time_budget=args.time_budget, rng_seed=args.seed),
    )
    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


COMMANDS = {
    "ingest": _cmd_ingest,
    "build-tuples": _cmd_build_tuples,
    "train": _cmd_train,
    "generate": _cmd_generate,
    "eval-diversity": _cmd_eval_diversity,
    "eval-control": _cmd_eval_control,
    "eval-ppl": _cmd_eval_ppl,
    "eval-cloze": _cmd_eval_cloze,
    "eval-overlap": _cmd_eval_overlap,
    "make-demo-corpus": _cmd_make_demo_corpus,
    "serve": _cmd_serve,
}


def run(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except DOMAIN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()

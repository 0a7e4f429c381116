"""Command-line entry points.

Each tool is also installed as its own console script (`lake`,
`index`, `qa`, `nl2sql`, `harvest`, `summarize`, `paraphrase`,
`report`); the `maris` umbrella command exposes them as subcommands
plus `serve` for the chat service.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from .config import AppConfig, load_config


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lake", default=None,
                        help="data lake directory (default: config/env)")
    parser.add_argument("--config", default=None, help="config YAML file")


def _setup(args: argparse.Namespace) -> tuple[AppConfig, "object"]:
    from .datalake import DataLake

    cfg = load_config(args.config)
    lake_path = args.lake or cfg.lake_path
    return cfg, DataLake(lake_path, stream_schemas=cfg.stream_schemas)


def _build_lake_index(lake, cfg: AppConfig):
    from .retriever import build_index

    docs = lake.list_documents()
    if not docs:
        sys.exit("error: the data lake holds no documents; ingest first")
    return build_index({d.id: d.body for d in docs},
                       stopwords=cfg.retriever.stopwords)


# -- lake ---------------------------------------------------------------------


def lake_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="lake", description="Ingest and inspect the data lake.")
    _add_common(parser)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_ingest = sub.add_parser("ingest", help="ingest a corpus file")
    p_ingest.add_argument("--kind", required=True)
    p_ingest.add_argument("file")

    p_ls = sub.add_parser("ls", help="list documents")
    p_ls.add_argument("--kind", default=None)
    p_ls.add_argument("--language", default=None)

    p_struct = sub.add_parser("ingest-structured",
                              help="ingest structured records")
    p_struct.add_argument("--stream", required=True)
    p_struct.add_argument("file")

    p_wiki = sub.add_parser("ingest-wiki", help="ingest wiki entries")
    p_wiki.add_argument("file")

    p_qa = sub.add_parser("ingest-qa", help="ingest QA sets")
    p_qa.add_argument("file")

    args = parser.parse_args(argv)
    _, lake = _setup(args)
    if args.cmd == "ingest":
        print(lake.ingest_documents(args.file, args.kind))
    elif args.cmd == "ls":
        for doc in lake.list_documents(kind=args.kind,
                                       language=args.language):
            print(f"{doc.id}\t{doc.kind}\t{doc.language}\t{doc.title}")
    elif args.cmd == "ingest-structured":
        print(lake.ingest_structured(args.file, args.stream))
    elif args.cmd == "ingest-wiki":
        print(lake.ingest_wiki(args.file))
    elif args.cmd == "ingest-qa":
        print(lake.ingest_qasets(args.file))
    return 0


# -- index --------------------------------------------------------------------


def index_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="index", description="Build and query the inverted index.")
    _add_common(parser)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_build = sub.add_parser("build", help="index all lake documents")
    p_build.add_argument("--out", default=None,
                         help="index file (default <lake>/index.json)")

    p_search = sub.add_parser("search", help="BM25 search")
    p_search.add_argument("--k", type=int, default=None)
    p_search.add_argument("--index", default=None)
    p_search.add_argument("query")

    args = parser.parse_args(argv)
    cfg, lake = _setup(args)
    from .retriever import InvertedIndex, RetrievalQuery, bm25_search

    if args.cmd == "build":
        index = _build_lake_index(lake, cfg)
        out = Path(args.out) if args.out else lake.root / "index.json"
        index.save(out)
        print(f"indexed {index.doc_count} documents -> {out}")
    elif args.cmd == "search":
        path = Path(args.index) if args.index else lake.root / "index.json"
        index = (InvertedIndex.load(path) if path.exists()
                 else _build_lake_index(lake, cfg))
        k = args.k or cfg.retriever.k
        hits = bm25_search(index, RetrievalQuery(args.query, k=k),
                           k1=cfg.retriever.k1, b=cfg.retriever.b)
        for rank, (doc_id, score) in enumerate(hits, start=1):
            print(f"{rank}\t{doc_id}\t{score:.6f}")
    return 0


# -- qa -----------------------------------------------------------------------


def qa_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="qa", description="Question answering over the data lake.")
    _add_common(parser)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_ask = sub.add_parser("ask", help="answer a question")
    p_ask.add_argument("--k", type=int, default=None)
    p_ask.add_argument("--locale", default="en")
    p_ask.add_argument("question")

    p_bench = sub.add_parser("bench", help="run a benchmark task")
    p_bench.add_argument("--task", required=True)
    p_bench.add_argument("--dataset", required=True,
                         help="QA sets as JSON lines")
    p_bench.add_argument("--k", type=int, default=None)
    p_bench.add_argument("--lang", default="en")

    args = parser.parse_args(argv)
    cfg, lake = _setup(args)
    from .qa import answer_question, run_benchmark

    if args.cmd == "ask":
        index = _build_lake_index(lake, cfg)
        answer = answer_question(args.question, index, lake,
                                 k=args.k or cfg.retriever.k, cfg=cfg.qa,
                                 refusal=cfg.refusal_message(args.locale))
        print(answer.text)
        for src in answer.sources:
            print(f"  source: {src.origin_name} "
                  f"{src.origin_url_or_citation}".rstrip())
    elif args.cmd == "bench":
        from .datalake import QASet, read_jsonl

        qasets = [QASet.from_dict(raw)
                  for _, raw in read_jsonl(args.dataset)]
        report = run_benchmark(args.task, qasets,
                               k=args.k or cfg.retriever.k, cfg=cfg.qa,
                               lang=args.lang)
        print(json.dumps(report.to_dict(), ensure_ascii=False))
    return 0


# -- nl2sql ---------------------------------------------------------------------


def nl2sql_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="nl2sql", description="Translate questions to SQL and run them.")
    _add_common(parser)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_ask = sub.add_parser("ask", help="translate and execute a question")
    p_ask.add_argument("--schema", required=True, help="schema YAML file")
    p_ask.add_argument("--store", required=True,
                       help="directory of <table>.jsonl fixture rows")
    p_ask.add_argument("--grammar", default=None)
    p_ask.add_argument("question")

    args = parser.parse_args(argv)
    cfg, _ = _setup(args)
    from .nl2sql import (DomainSchema, Grammar, SqlStore, classify_question,
                         default_grammar, execute, render_result, translate)

    schema = DomainSchema.load(args.schema)
    store = SqlStore.load(schema, args.store)
    grammar = Grammar.load(args.grammar) if args.grammar else default_grammar()
    routing = classify_question(args.question, schema, cfg.sql_cues)
    if routing != "sql-type":
        print(f"open-type question; route to QA: {args.question}")
        return 1
    query = translate(args.question, schema, store, grammar,
                      cfg.where_prepositions)
    print(query.text)
    print(render_result(execute(query, store)))
    return 0


# -- harvest --------------------------------------------------------------------


def harvest_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="harvest",
        description="Offline harvesters: knowledge graphs and topics.")
    _add_common(parser)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_kg = sub.add_parser("kg", help="build a knowledge graph")
    p_kg.add_argument("--in", dest="corpus", default=None,
                      help="corpus JSONL (default: all lake documents)")
    p_kg.add_argument("--out", required=True)
    p_kg.add_argument("--embeddings", default=None,
                      help="embedding file (default: co-occurrence vectors)")

    p_topics = sub.add_parser("topics", help="co-cluster lake documents")
    p_topics.add_argument("--k", type=int, required=True)
    p_topics.add_argument("--l", type=int, required=True)
    p_topics.add_argument("--iters", type=int, default=200)
    p_topics.add_argument("--seed", type=int, default=0)
    p_topics.add_argument("--top-words", type=int, default=8)
    p_topics.add_argument("--out-prefix", default="topics")

    args = parser.parse_args(argv)
    cfg, lake = _setup(args)

    if args.cmd == "kg":
        from .datalake import Document, read_jsonl
        from .embeddings import EmbeddingStore, cooccurrence_embeddings
        from .kg import extract_triples, harvest_graph, save_graph

        if args.corpus:
            docs = [Document.from_dict(raw, default_kind="article")
                    for _, raw in read_jsonl(args.corpus)]
        else:
            docs = lake.list_documents()
        if not docs:
            sys.exit("error: no documents to harvest")
        if args.embeddings:
            embeddings = EmbeddingStore.load(args.embeddings)
        else:
            entities = {e for d in docs for t in extract_triples(
                d, cfg.kg.verbs) for e in (t.subject, t.object)}
            embeddings = cooccurrence_embeddings(
                {d.id: d.body for d in docs}, entities,
                dim=cfg.kg.embedding_dim, window=cfg.kg.window)
        graph = harvest_graph(docs, embeddings,
                              synonym_threshold=cfg.kg.synonym_threshold,
                              link_threshold=cfg.kg.link_threshold,
                              verbs=cfg.kg.verbs)
        save_graph(graph, args.out)
        print(f"{len(graph.nodes)} nodes, {len(graph.edges)} edges, "
              f"{len(graph.bridges)} bridges -> {args.out}")
    elif args.cmd == "topics":
        from .topics import (assign_topics, build_doc_term_matrix, factorize,
                             top_words)

        docs = lake.list_documents()
        if not docs:
            sys.exit("error: no documents to cluster")
        matrix = build_doc_term_matrix({d.id: d.body for d in docs})
        model = factorize(matrix, k=args.k, l=args.l, max_iter=args.iters,
                          seed=args.seed)
        assignments = assign_topics(model)
        assign_path = Path(f"{args.out_prefix}_assignments.tsv")
        with open(assign_path, "w", encoding="utf-8") as handle:
            for doc_id in sorted(assignments):
                handle.write(f"{doc_id}\t{assignments[doc_id]}\n")
        words_path = Path(f"{args.out_prefix}_words.tsv")
        with open(words_path, "w", encoding="utf-8") as handle:
            for topic in range(model.G.shape[1]):
                words = top_words(model, topic, args.top_words)
                handle.write(f"{topic}\t{' '.join(words)}\n")
        print(f"{len(assignments)} assignments -> {assign_path}; "
              f"topic words -> {words_path}")
    return 0


# -- summarize ------------------------------------------------------------------


def summarize_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="summarize", description="Query-focused extractive summary.")
    _add_common(parser)
    parser.add_argument("--title", required=True)
    parser.add_argument("--L", type=int, default=3)
    parser.add_argument("--n", type=int, default=120)
    parser.add_argument("doc_ids", nargs="+")

    args = parser.parse_args(argv)
    cfg, lake = _setup(args)
    from .summarizer import SummaryRequest, summarize

    index = _build_lake_index(lake, cfg)
    summary = summarize(SummaryRequest(title=args.title,
                                       doc_ids=tuple(args.doc_ids),
                                       L=args.L, n=args.n), lake, index)
    print(summary.text)
    for entry in summary.provenance:
        print(f"  [{entry.doc_id}#{entry.sentence_index}] "
              f"score={entry.score:.4f}")
    return 0


# -- paraphrase -------------------------------------------------------------------


def paraphrase_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="paraphrase", description="Lexical paraphrases with metrics.")
    parser.add_argument("--lexicon", required=True)
    parser.add_argument("--max", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--lang", default="en")
    parser.add_argument("sentence")

    args = parser.parse_args(argv)
    from .paraphrase import (SynonymLexicon, evaluate_paraphrases,
                             generate_paraphrases)

    lexicon = SynonymLexicon.load(args.lexicon)
    pset = generate_paraphrases(args.sentence, lexicon,
                                max_variants=args.max, seed=args.seed,
                                lang=args.lang)
    evaluate_paraphrases(pset)
    for variant, metrics in zip(pset.variants, pset.metrics):
        rendered = " ".join(f"{k}={v:.4f}" for k, v in sorted(metrics.items()))
        print(f"{variant}\t{rendered}")
    return 0


# -- report ---------------------------------------------------------------------


def report_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="report", description="Data-to-text bulletin publisher.")
    _add_common(parser)
    sub = parser.add_subparsers(dest="cmd", required=True)

    p_run = sub.add_parser("run", help="generate one bulletin")
    p_run.add_argument("--intent", required=True)
    p_run.add_argument("--seed", type=int, default=0)
    p_run.add_argument("--templates", default=None)
    p_run.add_argument("--dry-run", action="store_true")

    p_daemon = sub.add_parser("daemon", help="run bulletins on a schedule")
    p_daemon.add_argument("--every", type=float, required=True,
                          help="interval in seconds")
    p_daemon.add_argument("--intent", required=True)
    p_daemon.add_argument("--runs", type=int, default=0,
                          help="stop after N runs (0 = forever)")
    p_daemon.add_argument("--templates", default=None)

    args = parser.parse_args(argv)
    cfg, lake = _setup(args)
    from .reporter import (INTENT_STREAMS, OutboxPublisher, TemplateLexicon,
                           default_lexicon, generate_report, publish,
                           select_content)

    lexicon = (TemplateLexicon.load(args.templates) if args.templates
               else default_lexicon())
    publisher = OutboxPublisher(lake.root / "outbox.jsonl")

    def run_once(seed: int) -> None:
        records = lake.query_structured(INTENT_STREAMS[args.intent])
        now = datetime.now(timezone.utc)
        selection = select_content(records, args.intent, now,
                                   freshness_hours=cfg.reporter.freshness_hours)
        if not selection:
            print("no fresh records; skipping publication")
            return
        plan = generate_report(selection, args.intent, lexicon, seed=seed,
                               max_chars=cfg.reporter.max_chars)
        if getattr(args, "dry_run", False):
            print(plan.realized)
        else:
            receipt = publish(plan, publisher,
                              max_chars=cfg.reporter.max_chars)
            print(f"published receipt {receipt}: {plan.realized}")

    if args.cmd == "run":
        run_once(args.seed)
    elif args.cmd == "daemon":
        runs = 0
        while True:
            run_once(runs)
            runs += 1
            if args.runs and runs >= args.runs:
                break
            time.sleep(args.every)
    return 0


# -- serve ----------------------------------------------------------------------


def serve_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="maris serve", description="Run the chat service.")
    _add_common(parser)
    parser.add_argument("--schema", default=None)
    parser.add_argument("--store", default=None)
    parser.add_argument("--host", default=None)
    parser.add_argument("--http-port", type=int, default=None)
    parser.add_argument("--line-port", type=int, default=None)

    args = parser.parse_args(argv)
    cfg, lake = _setup(args)
    import asyncio

    from .controller import ChatService
    from .nl2sql import DomainSchema, SqlStore, default_grammar
    from .server import run_servers

    index = _build_lake_index(lake, cfg) if lake.document_count() else None
    schema = DomainSchema.load(args.schema) if args.schema else None
    store = (SqlStore.load(schema, args.store)
             if schema and args.store else None)
    service = ChatService(lake, index, schema, store,
                          default_grammar() if schema else None, cfg)
    asyncio.run(run_servers(
        service, args.host or cfg.server.host,
        args.http_port or cfg.server.http_port,
        args.line_port or cfg.server.line_port))
    return 0


_SUBCOMMANDS = {
    "lake": lake_main, "index": index_main, "qa": qa_main,
    "nl2sql": nl2sql_main, "harvest": harvest_main,
    "summarize": summarize_main, "paraphrase": paraphrase_main,
    "report": report_main, "serve": serve_main,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv or argv[0] in ("-h", "--help"):
        names = ", ".join(sorted(_SUBCOMMANDS))
        print(f"usage: maris <command> [...]\ncommands: {names}")
        return 0 if argv else 2
    command = argv[0]
    if command not in _SUBCOMMANDS:
        print(f"unknown command {command!r}", file=sys.stderr)
        return 2
    return _SUBCOMMANDS[command](argv[1:])


if __name__ == "__main__":
    sys.exit(main())

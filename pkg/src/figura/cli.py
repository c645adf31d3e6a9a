"""Command-line pipeline driver.

Subcommands: freq (chat log -> frequency TSV), lexicon (build target and
source lists), connect (rank connecting words for one pair), generate
(batch metaphor generation to JSON-lines), export-annotations (blank
annotation sheet CSV), replay (follow-up metrics from an event log), and
serve (launch the HTTP service). Exit codes: 0 success, 1 usage error,
2 data error.
"""
from __future__ import annotations

import argparse
import csv
import sys
from collections import Counter
from pathlib import Path
from typing import Optional

from . import resources
from .config import Config, load_config
from .connector import rank_connecting_words
from .dialogue import FORMS, record_and_report, tokenize
from .embeddings import load_embeddings
from .errors import DataError, FiguraError, UnknownTokenError, UsageError
from .events import read_events
from .evidence import build_corpus_index
from .generator import DEFAULT_MASS_NOUNS, load_templates
from .lexicon import (
    read_concreteness_tsv,
    read_frequency_tsv,
    read_pos_tsv,
    read_token_file,
    select_sources,
    select_targets,
)
from .pipeline import generate_metaphors, read_records, write_records

ANNOTATION_HEADER = ["id", "text", "smoothness", "properness", "novelty"]


class _Parser(argparse.ArgumentParser):
    """argparse variant whose errors become UsageError (exit code 1)."""

    def error(self, message: str):
        raise UsageError(message)


def _require_file(path: Optional[str], what: str) -> Path:
    if not path:
        raise DataError(f"no {what} given (flag or config)")
    p = Path(path)
    if not p.exists():
        raise DataError(f"{what} not found: {p}")
    return p


def build_parser() -> _Parser:
    parser = _Parser(prog="figura", description=__doc__)
    parser.add_argument("--config", help="configuration file (key = value lines)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("freq", parents=[], help="compute utterance-containment frequencies")
    p.add_argument("--chatlog", required=True, help="plain text, one utterance per line")
    p.add_argument("--out", required=True, help="output frequency TSV")

    p = sub.add_parser("lexicon", help="build target and source word lists")
    p.add_argument("--themes", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--freq", required=True)
    p.add_argument("--pos", required=True)
    p.add_argument("--concreteness", required=True)
    p.add_argument("--out-targets", required=True)
    p.add_argument("--out-sources", required=True)
    p.add_argument("--expansion-k", type=int)
    p.add_argument("--min-freq", type=float)
    p.add_argument("--top-by-freq", type=int)
    p.add_argument("--top-by-conc", type=int)

    p = sub.add_parser("connect", help="rank connecting words for one (target, source) pair")
    p.add_argument("--embeddings", required=True)
    p.add_argument("--pos-table", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--source", required=True)
    p.add_argument("--pos", required=True, choices=["adjective", "verb", "noun"])
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--beta", type=float)

    p = sub.add_parser("generate", help="batch-generate metaphors to JSON lines")
    p.add_argument("--targets", required=True, help="token file, one target per line")
    p.add_argument("--sources", required=True, help="token file, one source per line")
    p.add_argument("--corpus", required=True, help="CoNLL-U corpus")
    p.add_argument("--embeddings", help="embedding table (or config embeddings_path)")
    p.add_argument("--pos-table", help="POS TSV (or config pos_path)")
    p.add_argument("--stopwords", help="stopword file (default: packaged list)")
    p.add_argument("--pos", action="append", choices=["adjective", "verb", "noun"],
                   help="restrict POS categories (repeatable)")
    p.add_argument("--limit", type=int)
    p.add_argument("--out", required=True)

    p = sub.add_parser("export-annotations", help="blank annotation sheet from generate output")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("replay", help="follow-up metrics from an event log")
    p.add_argument("--log", required=True)

    p = sub.add_parser("serve", help="launch the HTTP chat service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--embeddings")
    p.add_argument("--inventory", help="generate output used as the metaphor inventory")
    p.add_argument("--corpus")
    p.add_argument("--pos-table")
    p.add_argument("--stopwords")
    p.add_argument("--event-log")
    p.add_argument("--seed", type=int)

    return parser


def _config_for(args: argparse.Namespace) -> Config:
    overrides = {}
    for cli_name, key in (
        ("expansion_k", "expansion_k"),
        ("min_freq", "min_freq"),
        ("top_by_freq", "top_by_freq"),
        ("top_by_conc", "top_by_conc"),
        ("beta", "beta"),
        ("embeddings", "embeddings_path"),
        ("pos_table", "pos_path"),
        ("stopwords", "stopwords_path"),
        ("corpus", "corpus_path"),
        ("inventory", "inventory_path"),
        ("event_log", "event_log_path"),
        ("seed", "seed"),
    ):
        if getattr(args, cli_name, None) is not None:
            overrides[key] = getattr(args, cli_name)
    return load_config(path=args.config, overrides=overrides)


def cmd_freq(args: argparse.Namespace, config: Config) -> str:
    chatlog = _require_file(args.chatlog, "chat log")
    utterances = 0
    containing: Counter = Counter()
    with open(chatlog, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            utterances += 1
            for token in set(tokenize(line)):
                containing[token] += 1
    if utterances == 0:
        raise DataError(f"chat log is empty: {chatlog}")
    with open(args.out, "w", encoding="utf-8") as out:
        for token in sorted(containing):
            out.write(f"{token}\t{containing[token] / utterances:.10g}\n")
    return f"freq: {len(containing)} tokens from {utterances} utterances -> {args.out}"


def cmd_lexicon(args: argparse.Namespace, config: Config) -> str:
    themes = read_token_file(_require_file(args.themes, "theme file"))
    store = load_embeddings(_require_file(args.embeddings, "embedding file"),
                            lowercase=config.lowercase)
    freq = read_frequency_tsv(_require_file(args.freq, "frequency TSV"))
    pos = read_pos_tsv(_require_file(args.pos, "POS TSV"))
    conc = read_concreteness_tsv(_require_file(args.concreteness, "concreteness TSV"))
    targets = select_targets(themes, store, freq,
                             expansion_k=config.expansion_k, min_freq=config.min_freq, pos=pos)
    sources = select_sources(freq, pos, conc,
                             top_by_freq=config.top_by_freq, top_by_conc=config.top_by_conc)
    with open(args.out_targets, "w", encoding="utf-8") as fh:
        for entry in targets.entries:
            fh.write(f"{entry.word}\n")
    with open(args.out_sources, "w", encoding="utf-8") as fh:
        for entry in sources.entries:
            fh.write(f"{entry.word}\n")
    return (
        f"lexicon: {len(targets)} targets -> {args.out_targets}, "
        f"{len(sources)} sources -> {args.out_sources}"
    )


def cmd_connect(args: argparse.Namespace, config: Config) -> str:
    store = load_embeddings(_require_file(args.embeddings, "embedding file"),
                            lowercase=config.lowercase)
    pos_table = read_pos_tsv(_require_file(args.pos_table, "POS TSV"))
    try:
        ranked = rank_connecting_words(
            store, args.target, args.source, args.pos, pos_table,
            k=args.k, beta=config.beta,
        )
    except UnknownTokenError as exc:
        raise DataError(str(exc)) from exc
    for cand in ranked:
        s = cand.score
        print(f"{cand.word}\t{s.dist_target:.6f}\t{s.dist_source:.6f}"
              f"\t{s.imbalance:.6f}\t{s.total:.6f}")
    return (
        f"connect: {len(ranked)} {args.pos} connectors for "
        f"({args.target}, {args.source})"
    )


def _load_stopwords(path: Optional[str]) -> frozenset:
    if path:
        return frozenset(read_token_file(_require_file(path, "stopword file")))
    return resources.default_stopwords()


def _load_render_resources(config: Config):
    """Optional template and mass-noun overrides named in the configuration."""
    templates = None
    if config.templates_path:
        templates = load_templates(_require_file(config.templates_path, "template file"))
    mass_nouns = DEFAULT_MASS_NOUNS
    if config.mass_nouns_path:
        mass_nouns = frozenset(read_token_file(_require_file(config.mass_nouns_path, "mass-noun file")))
    return templates, mass_nouns


def cmd_generate(args: argparse.Namespace, config: Config) -> str:
    targets = read_token_file(_require_file(args.targets, "target file"))
    sources = read_token_file(_require_file(args.sources, "source file"))
    store = load_embeddings(_require_file(config.embeddings_path, "embedding file"),
                            lowercase=config.lowercase)
    pos_table = read_pos_tsv(_require_file(config.pos_path, "POS TSV"))
    index = build_corpus_index(_require_file(args.corpus, "corpus file"))
    stopwords = _load_stopwords(args.stopwords or config.stopwords_path)
    templates, mass_nouns = _load_render_resources(config)
    records = generate_metaphors(
        store, index, pos_table, targets, sources, stopwords, config,
        pos_filter=args.pos, limit=args.limit,
        templates=templates, mass_nouns=mass_nouns,
    )
    n = write_records(args.out, records)
    return f"generate: {n} metaphors -> {args.out}"


def cmd_export_annotations(args: argparse.Namespace, config: Config) -> str:
    records = read_records(_require_file(args.infile, "metaphor file"))
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ANNOTATION_HEADER)
        for record in records:
            writer.writerow([record.metaphor.id, record.metaphor.text, "", "", ""])
    return f"export-annotations: {len(records)} rows -> {args.out}"


def cmd_replay(args: argparse.Namespace, config: Config) -> str:
    events = read_events(_require_file(args.log, "event log"))
    stats = record_and_report(events, follow_up_window=config.follow_up_window)
    parts = []
    for form in FORMS:
        s = stats.forms[form]
        parts.append(f"{form}={s.followed_up}/{s.delivered} ({s.rate:.2f})")
    return "replay: " + " ".join(parts)


def cmd_serve(args: argparse.Namespace, config: Config) -> str:
    import uvicorn

    from .service import ChatEngine, create_app

    store = None
    if config.embeddings_path:
        store = load_embeddings(_require_file(config.embeddings_path, "embedding file"),
                                lowercase=config.lowercase)
    inventory = ()
    if config.inventory_path:
        inventory = read_records(_require_file(config.inventory_path, "inventory file"))
        inventory = tuple(r.metaphor for r in inventory)
    corpus = None
    if config.corpus_path:
        corpus = build_corpus_index(_require_file(config.corpus_path, "corpus file"))
    pos_table = {}
    if config.pos_path:
        pos_table = read_pos_tsv(_require_file(config.pos_path, "POS TSV"))
    templates, mass_nouns = _load_render_resources(config)
    engine = ChatEngine(
        config=config,
        store=store,
        inventory=inventory,
        stopwords=_load_stopwords(config.stopwords_path),
        corpus=corpus,
        pos_table=pos_table,
        event_log_path=config.event_log_path,
        templates=templates,
        mass_nouns=mass_nouns,
    )
    app = create_app(engine)
    print(f"serve: listening on http://{args.host}:{args.port}")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return "serve: stopped"


_COMMANDS = {
    "freq": cmd_freq,
    "lexicon": cmd_lexicon,
    "connect": cmd_connect,
    "generate": cmd_generate,
    "export-annotations": cmd_export_annotations,
    "replay": cmd_replay,
    "serve": cmd_serve,
}


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    try:
        config = _config_for(args)
        summary = _COMMANDS[args.command](args, config)
    except (FiguraError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if summary:
        print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())

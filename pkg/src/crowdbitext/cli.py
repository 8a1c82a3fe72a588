"""Command line front end: model training, file-level pipeline stages, the
HTTP service, and report analysis.

Data goes to stdout or the requested output file; diagnostics go to stderr.
Exit status is 0 only when the command succeeded. Every command is
deterministic given its config file and inputs.
"""

from __future__ import annotations

import argparse
import json
import sys
import urllib.error
import urllib.parse
import urllib.request

import uvicorn

from . import pipeline
from .align import align_documents, extract_pairs, format_path
from .config import ConfigError, RunConfig, load_run_config
from .embed import embed_overlaps
from .fetch import FetchError, fetch_url
from .ngram_lm import (
    load_lm,
    ml_score,
    partition_by_score,
    perplexity,
    save_lm,
    select_lowest,
    train_lm,
)
from .service import Service, Store, create_app
from .service.app import format_export, format_stats_csv
from .textkit import Sentence, classify_lang, load_lid, save_lid, train_lid


class CommandError(Exception):
    """Raised for expected operational failures; message goes to stderr."""


def _read_sentences(path: str) -> list[Sentence]:
    with open(path, encoding="utf-8") as fh:
        return pipeline.sentences_from_lines(fh.read().splitlines())


def _write_data(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _heldout_split(sents: list[Sentence]) -> tuple[list[Sentence], list[Sentence]]:
    """Deterministic 90/10 split for the training-time quality report."""
    train = [s for i, s in enumerate(sents) if i % 10 != 9]
    held = [s for i, s in enumerate(sents) if i % 10 == 9]
    return train, held


# model training


def cmd_train_lid(args: argparse.Namespace, config: RunConfig) -> int:
    corpora: dict[str, list[Sentence]] = {}
    for spec in args.corpora:
        lang, sep, path = spec.partition("=")
        if not sep:
            raise CommandError(f"corpus argument {spec!r} is not lang=path")
        corpora[lang] = _read_sentences(path)
    model = train_lid(
        {lang: [s.text for s in sents] for lang, sents in corpora.items()},
        order=config.lid_order(),
    )
    save_lid(model, args.out)

    splits = {lang: _heldout_split(sents) for lang, sents in corpora.items()}
    held_total = sum(len(held) for _, held in splits.values())
    if held_total:
        eval_model = train_lid(
            {lang: [s.text for s in train] for lang, (train, _) in splits.items()},
            order=config.lid_order(),
        )
        correct = sum(
            classify_lang(eval_model, s)[0] == lang
            for lang, (_, held) in splits.items()
            for s in held
        )
        print(
            f"held-out accuracy: {correct / held_total:.3f} ({held_total} sentences)",
            file=sys.stderr,
        )
    else:
        print("held-out accuracy: n/a (corpus too small)", file=sys.stderr)
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


def cmd_train_lm(args: argparse.Namespace, config: RunConfig) -> int:
    corpus = _read_sentences(args.corpus)
    mode = args.tokenizer_mode or config.lm_tokenizer_mode()
    model = train_lm(corpus, order=config.lm_order(), tokenizer_mode=mode)
    save_lm(model, args.out)

    train, held = _heldout_split(corpus)
    if train and held:
        eval_model = train_lm(train, order=config.lm_order(), tokenizer_mode=mode)
        print(
            f"held-out perplexity: {perplexity(eval_model, held):.2f}"
            f" ({len(held)} sentences)",
            file=sys.stderr,
        )
    else:
        print("held-out perplexity: n/a (corpus too small)", file=sys.stderr)
    print(f"wrote {args.out}", file=sys.stderr)
    return 0


# file-level pipeline stages


def cmd_align(args: argparse.Namespace, config: RunConfig) -> int:
    src = _read_sentences(args.src)
    tgt = _read_sentences(args.tgt)
    params = config.align_params()
    embed_config = config.embedder_config()
    max_overlap = max(max(m, n) for m, n in params.allowed_beads)
    src_table = embed_overlaps(embed_config, src, max_overlap)
    tgt_table = embed_overlaps(embed_config, tgt, max_overlap)
    path = align_documents(src_table, tgt_table, len(src), len(tgt), params)
    with open(args.out_beads, "w", encoding="utf-8") as fh:
        fh.write(format_path(path))
    pairs = extract_pairs(path, src, tgt, threshold=params.cost_threshold)
    with open(args.out_pairs, "w", encoding="utf-8") as fh:
        for pair in pairs:
            fh.write(f"{pair.src_text}\t{pair.tgt_text}\t{pair.cost:.6f}\n")
    print(f"{len(path.beads)} beads, {len(pairs)} pairs kept", file=sys.stderr)
    return 0


def cmd_ml_select(args: argparse.Namespace, config: RunConfig) -> int:
    dev = _read_sentences(args.dev)
    general = _read_sentences(args.general)
    if args.k > len(general):
        raise CommandError(
            f"k={args.k} exceeds general corpus size {len(general)}"
        )
    mode = config.lm_tokenizer_mode()
    in_model = train_lm(dev, order=config.lm_order(), tokenizer_mode=mode)
    gen_model = train_lm(general, order=config.lm_order(), tokenizer_mode=mode)
    scores = [ml_score(in_model, gen_model, s) for s in general]
    selected = select_lowest(general, scores, args.k)
    by_index = {m.sentence_ref.index: m.score for m in scores}
    lines = [f"{s.text}\t{by_index[s.index]:.6f}\n" for s in selected]
    _write_data("".join(lines), args.out)
    print(f"selected {len(selected)} of {len(general)}", file=sys.stderr)
    return 0


def cmd_extract_url_pair(args: argparse.Namespace, config: RunConfig) -> int:
    artifacts = pipeline.CampaignArtifacts(
        src_lang=args.src_lang,
        tgt_lang=args.tgt_lang,
        lid=load_lid(args.lid),
        lm_in=load_lm(args.lm_in),
        lm_gen=load_lm(args.lm_gen),
        embed_config=config.embedder_config(),
        align_params=config.align_params(),
        reward_params=config.reward_params(),
        min_lang_conf=config.min_lang_conf(),
    )
    policy = config.fetch_policy()
    src_doc = fetch_url(args.url_a, policy)
    tgt_doc = fetch_url(args.url_b, policy)
    if src_doc.text is None or tgt_doc.text is None:
        raise CommandError("a fetched document has no extractable text")
    result = pipeline.extract_and_score(src_doc.text, tgt_doc.text, artifacts)
    lines = ["src\ttgt\tcost\ts_a\ts_d\tscore\n"]
    for p in result.pairs:
        lines.append(
            f"{p.src_text}\t{p.tgt_text}\t{p.cost:.6f}"
            f"\t{p.s_a:.6f}\t{p.s_d:.6f}\t{p.s_a + p.s_d:.6f}\n"
        )
    _write_data("".join(lines), args.out)
    breakdown = result.breakdown
    print(
        f"{len(result.pairs)} pairs from {result.src_sentences}x"
        f"{result.tgt_sentences} sentences; reward[{breakdown.mode}]:"
        f" {breakdown.final}",
        file=sys.stderr,
    )
    return 0


def cmd_partition(args: argparse.Namespace) -> int:
    with open(args.pairs, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise CommandError(f"{args.pairs}: empty pairs file")
    header = lines[0].split("\t")
    if "score" not in header:
        raise CommandError(f"{args.pairs}: header has no 'score' column")
    score_col = header.index("score")
    rows = []
    scores = []
    for lineno, line in enumerate(lines[1:], start=2):
        fields = line.split("\t")
        if len(fields) != len(header):
            raise CommandError(f"{args.pairs}:{lineno}: wrong field count")
        try:
            scores.append(float(fields[score_col]))
        except ValueError as err:
            raise CommandError(f"{args.pairs}:{lineno}: bad score: {err}") from err
        rows.append(line)
    top, middle, bottom = partition_by_score(rows, scores, args.fraction)
    for name, part in (("top", top), ("middle", middle), ("bottom", bottom)):
        out = f"{args.out_prefix}.{name}.tsv"
        with open(out, "w", encoding="utf-8") as fh:
            fh.write("\n".join([lines[0], *part]) + "\n")
        print(f"wrote {out} ({len(part)} rows)", file=sys.stderr)
    return 0


# service and report analysis


def serve_app(service: Service, assets: str | None = None):
    """The HTTP app, optionally also serving a compiled web UI.

    The /v1 routes are registered first, so the static mount at / only sees
    paths the API does not claim.
    """
    app = create_app(service)
    if assets is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=assets, html=True), name="webui")
    return app


def cmd_serve(args: argparse.Namespace, config: RunConfig) -> int:
    store = Store(args.db)
    service = Service(
        store,
        fetch_policy=config.fetch_policy(),
        pool_size=config.service_pool_size(),
    )
    first_boot = store.first_admin() is None
    admin = service.bootstrap_admin()
    if first_boot:
        # shown once; afterwards the token lives only in the database
        print(f"created admin token: {admin['token']}", file=sys.stderr)
    service.start()
    try:
        uvicorn.run(
            serve_app(service, args.assets),
            host=config.service_host(),
            port=config.service_port(),
            log_level="warning",
        )
    finally:
        service.stop()
    return 0


def _api_get(base_url: str, token: str, path: str) -> bytes:
    request = urllib.request.Request(
        base_url.rstrip("/") + path, headers={"Authorization": f"Bearer {token}"}
    )
    try:
        with urllib.request.urlopen(request) as resp:
            return resp.read()
    except urllib.error.HTTPError as err:
        detail = err.read().decode("utf-8", "replace")
        try:
            detail = json.loads(detail)["error"]["message"]
        except (ValueError, KeyError):
            pass
        raise CommandError(f"{path}: {err.code} {detail}") from err
    except urllib.error.URLError as err:
        raise CommandError(f"{base_url}: {err.reason}") from err


def _require_source(args: argparse.Namespace) -> None:
    if bool(args.db) == bool(args.url):
        raise CommandError("pass exactly one of --db or --url")
    if args.url and not args.token:
        raise CommandError("--url needs --token")


def cmd_stats(args: argparse.Namespace) -> int:
    _require_source(args)
    if args.db:
        store = Store(args.db)
        try:
            store.get_campaign(args.campaign)
        except KeyError:
            raise CommandError(f"unknown campaign {args.campaign}") from None
        csv = format_stats_csv(store.stats_rows(args.campaign))
    else:
        body = _api_get(args.url, args.token, f"/v1/campaigns/{args.campaign}/stats")
        csv = format_stats_csv(json.loads(body)["series"])
    _write_data(csv, args.out)
    return 0


def cmd_export(args: argparse.Namespace) -> int:
    _require_source(args)
    if args.db:
        store = Store(args.db)
        try:
            store.get_campaign(args.campaign)
        except KeyError:
            raise CommandError(f"unknown campaign {args.campaign}") from None
        tsv = format_export(store.export_rows(args.campaign, args.max_cost))
    else:
        query = urllib.parse.urlencode({"max_cost": args.max_cost})
        body = _api_get(
            args.url, args.token, f"/v1/campaigns/{args.campaign}/export?{query}"
        )
        tsv = body.decode("utf-8")
    _write_data(tsv, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crowdbitext",
        description="crowd-sourced bitext mining: train, align, serve, analyze",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(p: argparse.ArgumentParser) -> argparse.ArgumentParser:
        p.add_argument("--config", required=True, help="key=value config file")
        p.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override one config key (repeatable)",
        )
        return p

    p = with_config(sub.add_parser("train-lid", help="train the language identifier"))
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("corpora", nargs="+", metavar="LANG=PATH")
    p.set_defaults(func=cmd_train_lid, needs_config=True)

    p = with_config(sub.add_parser("train-lm", help="train an n-gram language model"))
    p.add_argument("--out", required=True, help="model file to write")
    p.add_argument("--tokenizer-mode", choices=["whitespace", "character"])
    p.add_argument("corpus", help="one sentence per line")
    p.set_defaults(func=cmd_train_lm, needs_config=True)

    p = with_config(sub.add_parser("align", help="align two sentence files"))
    p.add_argument("--src", required=True)
    p.add_argument("--tgt", required=True)
    p.add_argument("--out-beads", required=True, help="bead path file to write")
    p.add_argument("--out-pairs", required=True, help="src/tgt/cost TSV to write")
    p.set_defaults(func=cmd_align, needs_config=True)

    p = with_config(
        sub.add_parser("ml-select", help="pick in-domain sentences from a corpus")
    )
    p.add_argument("--dev", required=True, help="in-domain corpus")
    p.add_argument("--general", required=True, help="corpus to select from")
    p.add_argument("-k", type=int, required=True, help="how many to select")
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_ml_select, needs_config=True)

    p = with_config(
        sub.add_parser("extract-url-pair", help="mine one URL pair end to end")
    )
    p.add_argument("--lid", required=True, help="language-ID model file")
    p.add_argument("--lm-in", required=True, help="in-domain LM file")
    p.add_argument("--lm-gen", required=True, help="general-domain LM file")
    p.add_argument("--src-lang", required=True)
    p.add_argument("--tgt-lang", required=True)
    p.add_argument("--out", help="scored pairs TSV (default stdout)")
    p.add_argument("url_a")
    p.add_argument("url_b")
    p.set_defaults(func=cmd_extract_url_pair, needs_config=True)

    p = with_config(sub.add_parser("serve", help="run the HTTP service"))
    p.add_argument("--db", required=True, help="sqlite database path")
    p.add_argument("--assets", help="directory with the compiled web UI")
    p.set_defaults(func=cmd_serve, needs_config=True)

    p = sub.add_parser("stats", help="daily collection time series as CSV")
    p.add_argument("--db", help="sqlite database path")
    p.add_argument("--url", help="service base URL")
    p.add_argument("--token", help="bearer token for --url")
    p.add_argument("--campaign", required=True)
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_stats, needs_config=False)

    p = sub.add_parser("export", help="deduplicated pairs under a cost ceiling")
    p.add_argument("--db", help="sqlite database path")
    p.add_argument("--url", help="service base URL")
    p.add_argument("--token", help="bearer token for --url")
    p.add_argument("--campaign", required=True)
    p.add_argument("--max-cost", type=float, required=True)
    p.add_argument("--out", help="output file (default stdout)")
    p.set_defaults(func=cmd_export, needs_config=False)

    p = sub.add_parser("partition", help="split scored pairs into score tiers")
    p.add_argument("--fraction", type=float, default=0.2)
    p.add_argument("--out-prefix", required=True)
    p.add_argument("pairs", help="TSV with a header naming a 'score' column")
    p.set_defaults(func=cmd_partition, needs_config=False)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.needs_config:
            config = load_run_config(args.config, args.set)
            return args.func(args, config)
        return args.func(args)
    except (CommandError, ConfigError, FetchError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Command-line entry point orchestrating the pipeline end to end.

Subcommands: annotate | match | build | pairs | baseline | stats.
Exit codes: 0 success, 2 input/config errors, 3 pair-audit failures,
4 corpus multiset-verification failures.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import baseline as bl
from . import corpus_builder as cb
from . import ingest
from . import inventory as inv
from . import matcher
from . import pair_sampler as ps
from .errors import CxgError, InputError
from .workspace import (
    ANNOTATE_KEYS,
    BUILD_KEYS,
    DEFAULT_BAND_EDGES,
    PAIRS_KEYS,
    STATS_KEYS,
    TABLE_KEYS,
    EffectiveConfig,
    check_sidecar,
    parse_band,
    write_sidecar,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_AUDIT = 3
EXIT_MULTISET = 4


def _effective_config(args) -> EffectiveConfig:
    overrides = {
        "seed": getattr(args, "seed", None),
        "band": parse_band(args.band) if getattr(args, "band", None) else None,
        "max_gap": getattr(args, "max_gap", None),
        "strictness": getattr(args, "strictness", None),
        "band_edges": (
            tuple(int(x) for x in args.band_edges.split(","))
            if getattr(args, "band_edges", None)
            else None
        ),
    }
    return EffectiveConfig.from_sources(getattr(args, "config", None), overrides)


def _load_resources(args) -> ingest.AnnotationResources:
    if args.lexicon or args.suffixes or args.clusters:
        if not (args.lexicon and args.suffixes):
            raise InputError("--lexicon and --suffixes must be given together")
        return ingest.AnnotationResources.load(
            args.lexicon, args.suffixes, args.clusters, args.tagset
        )
    return ingest.AnnotationResources.default()


def cmd_annotate(args) -> int:
    config = _effective_config(args)
    resources = _load_resources(args)
    abbreviations = (
        ingest.load_abbreviations(args.abbreviations)
        if args.abbreviations
        else ingest.DEFAULT_ABBREVIATIONS
    )
    stream = ingest.iter_raw_lines(args.input)
    sentences = ingest.annotate_corpus(stream, resources, args.mode, abbreviations)
    count = ingest.write_annotated(sentences, args.out)
    write_sidecar(args.out, config, "annotate", ANNOTATE_KEYS)
    print(f"annotated {count} sentences -> {args.out}")
    return EXIT_OK


def cmd_match(args) -> int:
    config = _effective_config(args)
    check_sidecar(args.annotated, config, ANNOTATE_KEYS)
    inventory = inv.load_inventory(args.inventory)
    index = matcher.build_index(inventory)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(args.annotated, encoding="utf-8") as fh:
        corpus = ingest.read_annotated(fh)
        table = matcher.match_corpus(index, corpus, config.max_gap, jobs=args.jobs)
    table_path = out / "table.tsv"
    discards_path = out / "discards.txt"
    table.write(table_path, discards_path)
    stats = matcher.occurrence_stats(table, config.band_edges)
    stats_path = out / "stats.tsv"
    matcher.write_stats(stats, stats_path)
    write_sidecar(table_path, config, "match", TABLE_KEYS)
    write_sidecar(discards_path, config, "match", TABLE_KEYS)
    write_sidecar(stats_path, config, "match", STATS_KEYS)
    matched = len(table.sentence_ids)
    print(
        f"matched {matched} sentences against {index.size} constructions "
        f"({len(table.discarded)} discarded) -> {table_path}"
    )
    return EXIT_OK


def cmd_stats(args) -> int:
    config = _effective_config(args)
    check_sidecar(args.table, config, TABLE_KEYS)
    table = matcher.OccurrenceTable.read(args.table)
    stats = matcher.occurrence_stats(table, config.band_edges)
    matcher.write_stats(stats, args.out)
    write_sidecar(args.out, config, "stats", STATS_KEYS)
    for band in stats.bands:
        hi = "inf" if band.hi is None else band.hi
        print(f"band {band.lo}..{hi}: {band.count} constructions")
    print(f"below {config.band_edges[0]}: {stats.below_min} constructions")
    return EXIT_OK


def cmd_build(args) -> int:
    config = _effective_config(args)
    check_sidecar(args.annotated, config, ANNOTATE_KEYS)
    check_sidecar(args.table, config, TABLE_KEYS)
    corpus = []
    texts = {}
    for ref, text in ingest.scan_annotated(args.annotated):
        corpus.append(ref)
        texts[ref.sentence_id] = text
    table = matcher.OccurrenceTable.read(args.table)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    band = config.band

    want = ("cxg", "base", "random") if args.variant == "all" else (args.variant,)
    built: dict[str, list[cb.CorpusDocument]] = {}

    cxg_docs, cxg_manifest = cb.build_cxg_corpus(table, band)
    target = cxg_manifest.total_occurrences
    if "cxg" in want:
        built["cxg"] = cxg_docs
        _write_variant(out, "cxg", cxg_docs, cxg_manifest, texts, config)
    if "base" in want or "random" in want:
        base_docs, base_manifest = cb.build_base_clone(corpus, table, band, target)
        if "base" in want:
            built["base"] = base_docs
            _write_variant(out, "base", base_docs, base_manifest, texts, config)
        if "random" in want:
            random_docs, random_manifest = cb.build_random(base_docs, config.seed, band)
            built["random"] = random_docs
            _write_variant(out, "random", random_docs, random_manifest, texts, config)

    if args.variant == "all":
        report_cxg = cb.verify_multiset(built["cxg"], built["base"])
        report_rand = cb.verify_multiset(built["base"], built["random"])
        verify_path = out / "verify.txt"
        verify_path.write_text(
            f"cxg vs base: {report_cxg.summary()}\n"
            f"base vs random: {report_rand.summary()}\n",
            encoding="utf-8",
        )
        write_sidecar(verify_path, config, "build", BUILD_KEYS)
        if not report_cxg.equal_totals or not report_rand.equal_multisets:
            print("multiset verification FAILED", file=sys.stderr)
            return EXIT_MULTISET
        print(f"multiset verification ok (T={target})")
    return EXIT_OK


def _write_variant(out, name, docs, manifest, texts, config) -> None:
    corpus_path = out / f"{name}.txt"
    manifest_path = out / f"{name}.manifest"
    cb.write_pretraining_file(docs, texts, corpus_path)
    manifest.write(manifest_path)
    write_sidecar(corpus_path, config, "build", BUILD_KEYS)
    write_sidecar(manifest_path, config, "build", BUILD_KEYS)
    print(
        f"built {name}: {manifest.n_documents} documents, "
        f"{manifest.total_occurrences} sentence occurrences -> {corpus_path}"
    )


def cmd_pairs(args) -> int:
    config = _effective_config(args)
    check_sidecar(args.annotated, config, ANNOTATE_KEYS)
    check_sidecar(args.table, config, TABLE_KEYS)
    texts = {ref.sentence_id: text for ref, text in ingest.scan_annotated(args.annotated)}
    table = matcher.OccurrenceTable.read(args.table)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    sizes: tuple[int, ...]
    if args.inoculation_sizes is None:
        sizes = ps.SamplerConfig().inoculation_sizes
    elif args.inoculation_sizes.strip() == "":
        sizes = ()
    else:
        sizes = tuple(int(x) for x in args.inoculation_sizes.split(","))

    sampler_config = ps.SamplerConfig(
        seed=config.seed, strictness=config.strictness, inoculation_sizes=sizes
    )
    sampled = ps.sample_pairs(table, config.band, sampler_config)

    report = ps.audit_pairs(
        {"train": sampled.train, "dev": sampled.dev, "test": sampled.test},
        table,
        config.strictness,
    )
    audit_path = out / "audit.txt"
    audit_path.write_text(report.summary() + "\n", encoding="utf-8")
    write_sidecar(audit_path, config, "pairs", PAIRS_KEYS)
    if not report.ok:
        print(f"pair audit FAILED: {report.summary()}", file=sys.stderr)
        return EXIT_AUDIT

    for name in ps.SPLITS:
        path = out / f"{name}.tsv"
        ps.write_pairs(sampled.split(name), texts, path)
        write_sidecar(path, config, "pairs", PAIRS_KEYS)
    shortfall_path = out / "shortfall.tsv"
    ps.write_shortfalls(sampled.shortfalls, shortfall_path)
    write_sidecar(shortfall_path, config, "pairs", PAIRS_KEYS)

    subsets = ps.make_inoculation_subsets(sampled.train, sizes, config.seed)
    for size, subset in subsets.items():
        path = out / f"inoculation_{size}.tsv"
        ps.write_pairs(subset, texts, path)
        write_sidecar(path, config, "pairs", PAIRS_KEYS)

    print(
        f"sampled pairs: train={len(sampled.train)} dev={len(sampled.dev)} "
        f"test={len(sampled.test)}, {len(sampled.shortfalls)} shortfall entries, audit ok"
    )
    return EXIT_OK


def cmd_baseline(args) -> int:
    config = _effective_config(args)
    for path in (args.train, args.dev, args.test):
        if path:
            check_sidecar(path, config, PAIRS_KEYS)
    train_pairs = ps.read_pairs(args.train)
    test_pairs = ps.read_pairs(args.test)
    hyper = bl.Hyperparams(
        dim=args.dim, learning_rate=args.learning_rate,
        epochs=args.epochs, l2=args.l2, seed=config.seed,
    )
    model = bl.train(train_pairs, hyper)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    if args.dev:
        dev_result = bl.evaluate(model, ps.read_pairs(args.dev))
        dev_path = out / "metrics_dev.tsv"
        bl.write_metrics(dev_result, dev_path)
        write_sidecar(dev_path, config, "baseline", PAIRS_KEYS)
    result = bl.evaluate(model, test_pairs)
    metrics_path = out / "metrics.tsv"
    bl.write_metrics(result, metrics_path)
    write_sidecar(metrics_path, config, "baseline", PAIRS_KEYS)
    model_path = out / "model.bin"
    bl.save_model(model, model_path)
    write_sidecar(model_path, config, "baseline", PAIRS_KEYS)
    print(
        f"baseline: train_acc={model.train_accuracy:.4f} "
        f"test_acc={result.accuracy:.4f} ({result.n_pairs} pairs) -> {metrics_path}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cxgcorpus",
        description="Construction-grammar corpus engine: annotate, match, "
        "build pre-training corpora, sample probe pairs, run the baseline.",
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, band=False):
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--seed", type=int)
        p.add_argument("--max-gap", type=int, dest="max_gap")
        p.add_argument("--strictness", choices=["anchor", "disjoint"])
        p.add_argument("--band-edges", dest="band_edges",
                       help=f"comma list, default {','.join(map(str, DEFAULT_BAND_EDGES))}")
        if band:
            p.add_argument("--band", help="LO:HI (HI may be inf)")

    p = sub.add_parser("annotate", help="parse and annotate a raw corpus")
    p.add_argument("input")
    p.add_argument("out")
    p.add_argument("--mode", choices=["raw", "pre-split", "pre-annotated"], default="raw")
    p.add_argument("--lexicon")
    p.add_argument("--suffixes")
    p.add_argument("--clusters")
    p.add_argument("--tagset")
    p.add_argument("--abbreviations")
    common(p)
    p.set_defaults(func=cmd_annotate)

    p = sub.add_parser("match", help="match an inventory against an annotated corpus")
    p.add_argument("annotated")
    p.add_argument("inventory")
    p.add_argument("out", help="output directory")
    p.add_argument("--jobs", type=int, default=1)
    common(p)
    p.set_defaults(func=cmd_match)

    p = sub.add_parser("stats", help="frequency bands of an occurrence table")
    p.add_argument("table")
    p.add_argument("out")
    common(p)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("build", help="build pre-training corpus variants")
    p.add_argument("annotated")
    p.add_argument("table")
    p.add_argument("out", help="output directory")
    p.add_argument("--variant", choices=["cxg", "base", "random", "all"], default="all")
    common(p, band=True)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("pairs", help="sample same-construction pair datasets")
    p.add_argument("annotated")
    p.add_argument("table")
    p.add_argument("out", help="output directory")
    p.add_argument("--inoculation-sizes", dest="inoculation_sizes",
                   help="comma list; empty string disables subsets")
    common(p, band=True)
    p.set_defaults(func=cmd_pairs)

    p = sub.add_parser("baseline", help="train/evaluate the pair-probe baseline")
    p.add_argument("train")
    p.add_argument("test")
    p.add_argument("out", help="output directory")
    p.add_argument("--dev")
    p.add_argument("--dim", type=int, default=2 ** 20)
    p.add_argument("--learning-rate", type=float, default=0.1, dest="learning_rate")
    p.add_argument("--epochs", type=int, default=8)
    p.add_argument("--l2", type=float, default=1e-6)
    common(p)
    p.set_defaults(func=cmd_baseline)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (CxgError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())

"""Command-line pipeline: extract, embed, fit, estimate, test, report.

Every subcommand reads an optional flat config file (``--config``), lets
flags override file values, resolves a single global seed, and records the
fully resolved options plus their hash next to its outputs so a run can be
reproduced from the artifacts alone.  Exit codes: 0 success, 2 contract
violations (missing inputs, dimension mismatches, empty vocabularies).
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .config import config_hash, parse_bool, read_config
from .conllu import ParseDiagnostics, open_conllu, parse_conllu
from .estimators import mi_do, model_mi, plugin_mi
from .extraction import (
    ExtractionTally,
    GenderInventory,
    InanimateLexicon,
    corpus_stats,
    extract_pairs,
    read_pairs_tsv,
    sentence_lemmas,
    strip_adjectives,
    write_pairs_tsv,
)
from .graphvec import build_graph_vectors, read_relations_tsv
from .model import (
    AdjectiveVocab,
    TrainConfig,
    build_dataset,
    empirical_gender_marginal,
    load_checkpoint,
    save_checkpoint,
    train_classifier,
)
from .permtest import (
    PermTestConfig,
    ReportRow,
    run_permutation_test,
    save_result,
    summarize,
    write_summary_csv,
)
from .seeds import child_seed
from .sgns import SgnsConfig, train_sgns
from .synth import SynthConfig, generate_world
from .vectors import evaluate_similarity, load_vectors_file, read_similarity_tsv, save_vectors_file

log = logging.getLogger("cgmi")


class CliError(Exception):
    def __init__(self, message, code=2):
        super().__init__(message)
        self.code = code


def _none_or(cast):
    def parse(value):
        if value is None or str(value).strip().lower() in ("none", ""):
            return None
        return cast(value)

    parse.__name__ = f"optional_{cast.__name__}"
    return parse


def _csv_tuple(value):
    items = tuple(part.strip() for part in str(value).split(",") if part.strip())
    if not items:
        raise ValueError("expected a comma-separated list")
    return items


@dataclass
class Opt:
    name: str
    cast: object = str
    default: object = None
    required: bool = False
    help: str = ""
    flag: bool = False       # boolean option (--name / --no-name)
    choices: tuple = None


_COMMON = [
    Opt("out", cast=str, default=".", help="output directory"),
    Opt("seed", cast=int, default=0, help="global random seed"),
]


def _add_options(parser, opts):
    parser.add_argument("--config", help="key = value config file; flags win")
    for opt in opts:
        flag = f"--{opt.name}"
        if opt.flag:
            parser.add_argument(flag, action=argparse.BooleanOptionalAction, default=None, help=opt.help)
        else:
            parser.add_argument(
                flag,
                type=str,
                default=None,
                help=opt.help,
                choices=opt.choices,
            )


def _resolve(args, opts):
    file_cfg = read_config(args.config) if args.config else {}
    known = {opt.name for opt in opts} | {"config"}
    for key in file_cfg:
        if key not in known:
            raise CliError(f"unknown config key {key!r}")
    resolved = {}
    for opt in opts:
        attr = opt.name.replace("-", "_")
        raw = getattr(args, attr)
        if raw is None and opt.name in file_cfg:
            raw = file_cfg[opt.name]
        if raw is None:
            value = opt.default
        elif opt.flag:
            value = parse_bool(raw)
        else:
            value = opt.cast(raw)
        if value is None and opt.required:
            raise CliError(f"missing required option --{opt.name}")
        resolved[attr] = value
    return resolved


def _write_run_record(command, out_dir, options):
    payload = {
        "command": command,
        "version": __version__,
        "options": {k: (list(v) if isinstance(v, tuple) else v) for k, v in options.items()},
    }
    payload["config_hash"] = config_hash(payload["options"])
    path = Path(out_dir) / f"{command}.run.json"
    with open(path, "w", encoding="utf-8") as stream:
        json.dump(payload, stream, sort_keys=True, indent=1)
        stream.write("\n")


def _ensure_out(options):
    out = Path(options["out"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(path, payload):
    with open(path, "w", encoding="utf-8") as stream:
        json.dump(payload, stream, sort_keys=True, indent=1)
        stream.write("\n")


# ---------------------------------------------------------------- extract

EXTRACT_OPTS = _COMMON + [
    Opt("treebank", required=True, help="CoNLL-U file (.gz supported)"),
    Opt("lexicon", required=True, help="inanimate noun lemma list"),
    Opt("language", help="language code with a stock gender inventory"),
    Opt("genders", cast=_csv_tuple, help="explicit gender labels, e.g. FEM,MSC"),
    Opt("strict", flag=True, default=False, help="fail on any malformed sentence"),
]


def cmd_extract(args):
    options = _resolve(args, EXTRACT_OPTS)
    out = _ensure_out(options)
    if options["genders"]:
        inventory = GenderInventory("custom", options["genders"])
    elif options["language"]:
        inventory = GenderInventory.for_language(options["language"])
    else:
        raise CliError("missing required option --language (or --genders)")
    lexicon = InanimateLexicon.from_file(options["lexicon"])
    diagnostics = ParseDiagnostics()
    tally = ExtractionTally()
    with open_conllu(options["treebank"]) as stream:
        sentences = parse_conllu(stream, diagnostics, strict=options["strict"])
        pair_corpus = extract_pairs(sentences, lexicon, inventory, tally=tally)
    with open(out / "pairs.tsv", "w", encoding="utf-8") as stream:
        write_pairs_tsv(pair_corpus, stream)
    stats = corpus_stats(pair_corpus).as_dict()
    stats["extraction"] = tally.as_dict()
    stats["sentences_ok"] = diagnostics.sentences_ok
    stats["sentences_skipped"] = diagnostics.sentences_skipped
    stats["parse_warnings"] = list(diagnostics.warnings)
    _write_json(out / "stats.json", stats)
    _write_run_record("extract", out, options)
    log.info("extract: %d pair tokens -> %s", pair_corpus.token_count(), out / "pairs.tsv")
    return 0


# ------------------------------------------------------------------ embed

EMBED_OPTS = _COMMON + [
    Opt("treebank", required=True, help="CoNLL-U file (.gz supported)"),
    Opt("target", default="both", choices=("nouns", "adjectives", "both"),
        help="which vector set to train"),
    Opt("dim", cast=int, default=200),
    Opt("window", cast=int, default=5),
    Opt("min-count", cast=int, default=5),
    Opt("negatives", cast=int, default=10),
    Opt("epochs", cast=int, default=5),
    Opt("learning-rate", cast=float, default=0.025),
    Opt("learning-rate-end", cast=float, default=1e-4),
    Opt("subsample", cast=float, default=0.0),
    Opt("threads", cast=int, default=1),
]


def _sgns_config(options, seed):
    return SgnsConfig(
        dim=options["dim"],
        window=options["window"],
        min_count=options["min_count"],
        negatives=options["negatives"],
        epochs=options["epochs"],
        learning_rate=options["learning_rate"],
        learning_rate_end=options["learning_rate_end"],
        subsample=options["subsample"],
        seed=seed,
        threads=options["threads"],
    )


def cmd_embed(args):
    options = _resolve(args, EMBED_OPTS)
    out = _ensure_out(options)
    with open_conllu(options["treebank"]) as stream:
        sentences = list(parse_conllu(stream, ParseDiagnostics()))
    targets = ("nouns", "adjectives") if options["target"] == "both" else (options["target"],)
    for target in targets:
        if target == "nouns":
            stream = list(strip_adjectives(sentences))
        else:
            stream = list(sentence_lemmas(sentences))
        try:
            table = train_sgns(stream, _sgns_config(options, child_seed(options["seed"], "embed", target)))
        except ValueError as err:
            raise CliError(f"{target}: {err}") from err
        save_vectors_file(table, out / f"vectors_{target}.txt")
        log.info("embed: %s -> %d vectors", target, len(table))
    _write_run_record("embed", out, options)
    return 0


# --------------------------------------------------------------- graphvec

GRAPHVEC_OPTS = _COMMON + [
    Opt("relations", required=True, help="TSV: lemma<TAB>relation<TAB>lemma"),
    Opt("dim", cast=int, default=200),
    Opt("decay", cast=float, default=0.75),
    Opt("hops", cast=int, default=4),
]


def cmd_graphvec(args):
    options = _resolve(args, GRAPHVEC_OPTS)
    out = _ensure_out(options)
    graph = read_relations_tsv(options["relations"])
    table = build_graph_vectors(
        graph, options["dim"], decay=options["decay"], hops=options["hops"]
    )
    save_vectors_file(table, out / "vectors_graph.txt")
    _write_run_record("graphvec", out, options)
    log.info("graphvec: %d nodes -> %s", len(graph), out / "vectors_graph.txt")
    return 0


# ---------------------------------------------------------------- evalsim

EVALSIM_OPTS = _COMMON + [
    Opt("vectors", required=True, help="vector file to evaluate"),
    Opt("similarity", required=True, help="TSV: word1<TAB>word2<TAB>score"),
]


def cmd_evalsim(args):
    options = _resolve(args, EVALSIM_OPTS)
    out = _ensure_out(options)
    table = load_vectors_file(options["vectors"])
    with open(options["similarity"], encoding="utf-8") as stream:
        pairs = read_similarity_tsv(stream)
    rho, coverage = evaluate_similarity(table, pairs)
    covered = sum(1 for w1, w2, _ in pairs if w1 in table and w2 in table)
    report = {
        "spearman_rho": rho,
        "coverage": coverage,
        "coverage_percent": round(100.0 * coverage, 1),
        "pairs_total": len(pairs),
        "pairs_covered": covered,
    }
    _write_json(out / "similarity_report.json", report)
    _write_run_record("evalsim", out, options)
    log.info("evalsim: rho=%.3f coverage=%.1f%%", rho, 100.0 * coverage)
    return 0


# -------------------------------------------------------------------- fit

_TRAIN_OPTS = [
    Opt("hidden", cast=int, default=128),
    Opt("activation", default="tanh", choices=("tanh", "relu")),
    Opt("l1", cast=float, default=0.001),
    Opt("l2", cast=float, default=0.001),
    Opt("epochs", cast=int, default=100),
    Opt("learning-rate", cast=float, default=0.01),
    Opt("learning-rate-end", cast=_none_or(float), default=None),
    Opt("batch-size", cast=_none_or(int), default=None),
    Opt("val-fraction", cast=float, default=0.1),
    Opt("patience", cast=_none_or(int), default=5),
]

FIT_OPTS = _COMMON + [
    Opt("pairs", required=True, help="pairs TSV from extract"),
    Opt("noun-vectors", required=True),
    Opt("adjective-vectors", required=True),
    Opt("vocab-cap", cast=_none_or(int), default=10000),
] + _TRAIN_OPTS


def _train_config(options, seed):
    return TrainConfig(
        hidden=options["hidden"],
        activation=options["activation"],
        l1=options["l1"],
        l2=options["l2"],
        max_epochs=options["epochs"],
        learning_rate=options["learning_rate"],
        lr_end=options["learning_rate_end"],
        batch_size=options["batch_size"],
        val_fraction=options["val_fraction"],
        patience=options["patience"],
        seed=seed,
    )


def _load_training_inputs(options):
    with open(options["pairs"], encoding="utf-8") as stream:
        pair_corpus = read_pairs_tsv(stream)
    noun_vectors = load_vectors_file(options["noun_vectors"])
    adjective_vectors = load_vectors_file(options["adjective_vectors"])
    try:
        vocab = AdjectiveVocab.from_pair_corpus(
            pair_corpus, adjective_vectors, cap=options.get("vocab_cap")
        )
    except ValueError as err:
        raise CliError(str(err)) from err
    dataset = build_dataset(pair_corpus, noun_vectors, vocab)
    if len(dataset) == 0:
        raise CliError("no noun has both a vector and an in-vocabulary adjective")
    return pair_corpus, noun_vectors, vocab, dataset


def cmd_fit(args):
    options = _resolve(args, FIT_OPTS)
    out = _ensure_out(options)
    _, _, vocab, dataset = _load_training_inputs(options)
    genders = sorted({noun.gender for noun in dataset.nouns()})
    result = train_classifier(
        dataset, vocab, _train_config(options, options["seed"]), genders=genders
    )
    save_checkpoint(
        result.params,
        Path(options["out"]) / "model.json",
        extra={
            "vocab_hash": vocab.content_hash(),
            "vocab_cap": options["vocab_cap"],
            "vocab_size": len(vocab),
            "noun_count": len(dataset),
            "token_count": dataset.token_count(),
            "seed": options["seed"],
            "best_epoch": result.best_epoch,
            "train_curve": result.train_curve,
            "val_curve": result.val_curve,
        },
    )
    _write_run_record("fit", out, options)
    log.info("fit: %d nouns, %d adjectives -> model.json", len(dataset), len(vocab))
    return 0


# --------------------------------------------------------------- estimate

ESTIMATE_OPTS = _COMMON + [
    Opt("pairs", required=True),
    Opt("noun-vectors", required=True),
    Opt("adjective-vectors", required=True),
    Opt("model", required=True, help="checkpoint from fit"),
    Opt("noun-weighting", default="types", choices=("types", "tokens"),
        help="context weights in the model-based estimators"),
    Opt("marginal-weighting", default="tokens", choices=("tokens", "types"),
        help="gender marginal weighting"),
    Opt("language", default=None),
    Opt("representation", default=None),
]


def cmd_estimate(args):
    options = _resolve(args, ESTIMATE_OPTS)
    out = _ensure_out(options)
    params, meta = load_checkpoint(options["model"])
    options_for_vocab = dict(options)
    options_for_vocab["vocab_cap"] = meta.get("vocab_cap")
    pair_corpus, noun_vectors, vocab, dataset = _load_training_inputs(options_for_vocab)
    if noun_vectors.dim != params.d_noun:
        raise CliError(
            f"noun vector dimension {noun_vectors.dim} does not match "
            f"model dimension {params.d_noun}"
        )
    if vocab.dim != params.d_adj:
        raise CliError(
            f"adjective vector dimension {vocab.dim} does not match "
            f"model dimension {params.d_adj}"
        )
    stored_hash = meta.get("vocab_hash")
    if stored_hash and stored_hash != vocab.content_hash():
        raise CliError("adjective vocabulary differs from the one the model was fit on")
    omega = None if options["noun_weighting"] == "types" else "tokens"
    contexts = dataset.nouns()
    marginal = empirical_gender_marginal(
        dataset, genders=params.genders, weighting=options["marginal_weighting"]
    )
    estimates = {
        "language": options["language"],
        "representation": options["representation"],
        "plugin_mi": plugin_mi(pair_corpus),
        "model_mi": model_mi(params, vocab, contexts, weights=omega),
        "mi_do": mi_do(params, vocab, contexts, marginal, weights=omega),
        "noun_weighting": options["noun_weighting"],
        "marginal_weighting": options["marginal_weighting"],
        "gender_marginal": marginal.as_dict(),
        "log_base": 2,
        "vocab_size": len(vocab),
        "noun_count": len(dataset),
        "seeds": {"global": options["seed"], "model": meta.get("seed")},
    }
    _write_json(out / "estimates.json", estimates)
    _write_run_record("estimate", out, options)
    log.info(
        "estimate: plugin=%.4g model=%.4g do=%.4g",
        estimates["plugin_mi"], estimates["model_mi"], estimates["mi_do"],
    )
    return 0


# --------------------------------------------------------------- permtest

PERMTEST_OPTS = _COMMON + [
    Opt("pairs", required=True),
    Opt("noun-vectors", required=True),
    Opt("adjective-vectors", required=True),
    Opt("vocab-cap", cast=_none_or(int), default=None),
    Opt("permutations", cast=int, default=200),
    Opt("folds", cast=int, default=5),
    Opt("subset", cast=int, default=100),
    Opt("alpha", cast=float, default=0.05),
    Opt("smoothed", flag=True, default=False),
    Opt("threads", cast=int, default=1),
    Opt("noun-weighting", default="types", choices=("types", "tokens")),
    Opt("marginal-weighting", default="tokens", choices=("tokens", "types")),
] + _TRAIN_OPTS


def cmd_permtest(args):
    options = _resolve(args, PERMTEST_OPTS)
    out = _ensure_out(options)
    _, _, vocab, dataset = _load_training_inputs(options)
    cfg = PermTestConfig(
        permutations=options["permutations"],
        folds=options["folds"],
        subset=options["subset"],
        alpha=options["alpha"],
        seed=options["seed"],
        smoothed=options["smoothed"],
        threads=options["threads"],
        noun_weighting=options["noun_weighting"],
        marginal_weighting=options["marginal_weighting"],
        train=_train_config(options, options["seed"]),
    )
    try:
        result = run_permutation_test(dataset, vocab, cfg)
    except ValueError as err:
        raise CliError(str(err)) from err
    save_result(result, out / "permtest.json")
    _write_run_record("permtest", out, options)
    log.info(
        "permtest: p=%.4f (%s)", result.p_value,
        "reject" if result.reject else "fail to reject",
    )
    return 0


# ------------------------------------------------------------------ synth

SYNTH_OPTS = _COMMON + [
    Opt("case", default="3", choices=("1", "2", "3", "null")),
    Opt("nouns", cast=int, default=16),
    Opt("adjectives", cast=int, default=12),
    Opt("noun-dim", cast=int, default=6),
    Opt("adjective-dim", cast=int, default=6),
    Opt("hidden", cast=int, default=12),
    Opt("genders", cast=_csv_tuple, default=("FEM", "MSC")),
    Opt("gender-effect", cast=float, default=4.0),
    Opt("effect-target", cast=_none_or(float), default=0.25,
        help="calibrated interventional MI in bits, or 'none' for raw"),
    Opt("coupling", cast=float, default=1.5,
        help="meaning-to-gender strength in the confounded case"),
    Opt("tokens-per-noun", cast=int, default=2000),
    Opt("activation", default="tanh", choices=("tanh", "relu")),
]


def cmd_synth(args):
    options = _resolve(args, SYNTH_OPTS)
    out = _ensure_out(options)
    config = SynthConfig(
        case=options["case"],
        nouns=options["nouns"],
        adjectives=options["adjectives"],
        noun_dim=options["noun_dim"],
        adjective_dim=options["adjective_dim"],
        hidden=options["hidden"],
        genders=options["genders"],
        gender_effect=options["gender_effect"],
        effect_target=options["effect_target"],
        coupling=options["coupling"],
        tokens_per_noun=options["tokens_per_noun"],
        activation=options["activation"],
        seed=options["seed"],
    )
    record = generate_world(config, out)
    _write_run_record("synth", out, options)
    log.info(
        "synth: case %s world, mi=%.4g mi_do=%.4g -> %s",
        config.case, record["mi"], record["mi_do"], out,
    )
    return 0


# ----------------------------------------------------------------- report

REPORT_OPTS = _COMMON + [
    Opt("language", default=None, help="fallback when an estimates file has none"),
    Opt("representation", default=None),
]


def cmd_report(args):
    options = _resolve(args, REPORT_OPTS)
    out = _ensure_out(options)
    if not args.estimates:
        raise CliError("missing required option --estimates")
    permtest_paths = list(args.permtest or [])
    if permtest_paths and len(permtest_paths) != len(args.estimates):
        raise CliError("--permtest must be given once per --estimates file")
    rows = []
    for index, est_path in enumerate(args.estimates):
        with open(est_path, encoding="utf-8") as stream:
            estimates = json.load(stream)
        p_value = None
        mean_difference = None
        if permtest_paths:
            with open(permtest_paths[index], encoding="utf-8") as stream:
                test = json.load(stream)
            p_value = test["p_value"]
            mean_difference = test["mean_difference"]
        rows.append(
            ReportRow(
                language=estimates.get("language") or options["language"] or "?",
                representation=estimates.get("representation")
                or options["representation"] or "?",
                model_mi=estimates["model_mi"],
                mi_do=estimates["mi_do"],
                mean_difference=mean_difference,
                p_value=p_value,
            )
        )
    text = summarize(rows)
    (out / "summary.txt").write_text(text, encoding="utf-8")
    write_summary_csv(rows, out / "summary.csv")
    _write_run_record("report", out, options)
    sys.stdout.write(text)
    return 0


# ------------------------------------------------------------------- main

_COMMANDS = {
    "extract": (cmd_extract, EXTRACT_OPTS, "extract noun-adjective pairs from a treebank"),
    "embed": (cmd_embed, EMBED_OPTS, "train skip-gram vectors from a treebank"),
    "graphvec": (cmd_graphvec, GRAPHVEC_OPTS, "build vectors from a relation graph"),
    "evalsim": (cmd_evalsim, EVALSIM_OPTS, "score vectors against similarity judgments"),
    "fit": (cmd_fit, FIT_OPTS, "train the adjective classifier"),
    "estimate": (cmd_estimate, ESTIMATE_OPTS, "compute the three MI estimates"),
    "permtest": (cmd_permtest, PERMTEST_OPTS, "run the gender permutation test"),
    "synth": (cmd_synth, SYNTH_OPTS, "generate a synthetic world with ground truth"),
    "report": (cmd_report, REPORT_OPTS, "render summary tables from result files"),
}


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cgmi",
        description="Causal analysis of grammatical gender effects on adjective choice.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)
    for name, (func, opts, help_text) in _COMMANDS.items():
        sub = commands.add_parser(name, help=help_text)
        _add_options(sub, opts)
        if name == "report":
            sub.add_argument("--estimates", action="append", help="estimates.json (repeatable)")
            sub.add_argument("--permtest", action="append", help="permtest.json aligned with --estimates")
        sub.set_defaults(func=func)
    return parser


def _setup_logging():
    level_name = os.environ.get("CGMI_LOG", "off").lower()
    levels = {"off": logging.CRITICAL + 10, "info": logging.INFO, "debug": logging.DEBUG}
    if level_name not in levels:
        raise CliError(f"CGMI_LOG must be off, info, or debug, not {level_name!r}")
    logging.basicConfig(
        level=levels[level_name], stream=sys.stderr, format="%(name)s %(levelname)s %(message)s"
    )


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _setup_logging()
        return args.func(args)
    except CliError as err:
        print(f"error: {err}", file=sys.stderr)
        return err.code
    except (ValueError, OSError, KeyError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())

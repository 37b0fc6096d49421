"""Command-line entry points.

``clusterfeat cluster`` clusters a vector file into a lexicon TSV.
``clusterfeat run`` evaluates one task once without cluster features and
once per k, writing a metric-vs-k report table.
"""

from __future__ import annotations

import argparse
import hashlib
import logging
import sys
from collections import defaultdict
from dataclasses import dataclass
from pathlib import Path

from . import cluster as clus
from . import linmodel, quantify, sentiment, seqtag
from .embedio import load_vectors
from .features import SentenceFeatureConfig, load_sentiment_lexicon
from .linmodel import TrainConfig
from .textprep import SENTIMENT_RULES

log = logging.getLogger("clusterfeat")

TASKS = ("ner-seg", "ner-class", "sent-class", "sent-quant")
METRICS = {"ner-seg": "f1", "ner-class": "f1", "sent-class": "mae_macro", "sent-quant": "emd"}

RECOMMENDATION = (
    "Starting point: low-dimensional (about 40-d) skip-gram style vectors with a large "
    "number of clusters (k in 500, 1000, 2000). Out-of-domain vectors are a reasonable "
    "fallback."
)

_BOOL_DESTS = ("ngrams", "char_ngrams", "lexicons", "capitalization", "words", "binary",
               "normalize", "probabilistic", "shuffle")


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def read_config_file(path) -> dict[str, str]:
    """Flat ``key=value`` file; ``#`` comments and blank lines ignored."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _parse_bool(value: str) -> bool:
    v = value.strip().lower()
    if v in ("1", "true", "yes", "on"):
        return True
    if v in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def parse_k_list(text: str) -> list[int]:
    ks = [int(x) for x in str(text).replace(" ", "").split(",") if x]
    if not ks or any(k < 1 for k in ks):
        raise argparse.ArgumentTypeError(f"k values must be positive integers: {text!r}")
    return sorted(set(ks))


def _add_cluster_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0, help="base seed; restart i uses seed+i")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--max-iterations", type=int, default=300)
    p.add_argument("--normalize", action=argparse.BooleanOptionalAction, default=False,
                   help="length-normalize vectors before clustering")
    p.add_argument("--jobs", type=int, default=1, help="threads for independent restarts")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clusterfeat", epilog=RECOMMENDATION,
                                     description="Word-embedding cluster features for NER and sentiment.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("cluster", help="cluster a word vector file into a lexicon",
                        epilog=RECOMMENDATION)
    pc.add_argument("--vectors", required=True)
    pc.add_argument("--k", type=int, required=True)
    pc.add_argument("--out", required=True, help="lexicon TSV to write")
    _add_cluster_options(pc)

    pr = sub.add_parser("run", help="run a task with a sweep over k", epilog=RECOMMENDATION)
    pr.add_argument("--config", help="key=value file; command-line flags take precedence")
    pr.add_argument("--task", choices=TASKS)
    pr.add_argument("--train")
    pr.add_argument("--test")
    pr.add_argument("--out-dir")
    pr.add_argument("--vectors", help="word vector file clustered once per k")
    pr.add_argument("--k", type=parse_k_list, default=None,
                    help="comma-separated k values (default: 100,250,500,1000,2000)")
    pr.add_argument("--lexicon", action="append", default=None,
                    help="precomputed cluster lexicon(s) instead of --vectors")
    _add_cluster_options(pr)
    g = pr.add_argument_group("features")
    g.add_argument("--ngrams", action=argparse.BooleanOptionalAction, default=True)
    g.add_argument("--char-ngrams", action=argparse.BooleanOptionalAction, default=True)
    g.add_argument("--lexicons", action=argparse.BooleanOptionalAction, default=True)
    g.add_argument("--sentiment-lexicon", action="append", default=None,
                   help="word<TAB>score lexicon file (repeatable)")
    g.add_argument("--binary", action=argparse.BooleanOptionalAction, default=False,
                   help="binary instead of counted n-grams")
    g.add_argument("--words", action=argparse.BooleanOptionalAction, default=True,
                   help="word window features for tagging")
    g.add_argument("--capitalization", action=argparse.BooleanOptionalAction, default=True)
    g.add_argument("--cluster-window", type=int, default=2)
    g.add_argument("--probabilistic", action=argparse.BooleanOptionalAction, default=False,
                   help="average probabilities instead of counting decisions (sent-quant)")
    t = pr.add_argument_group("training")
    t.add_argument("--l2", type=float, default=1.0)
    t.add_argument("--epochs", type=int, default=50)
    t.add_argument("--learning-rate", type=float, default=0.1)
    t.add_argument("--decay", type=float, default=1e-4)
    t.add_argument("--train-seed", type=int, default=0)
    t.add_argument("--shuffle", action=argparse.BooleanOptionalAction, default=True)
    parser.set_defaults(run_parser=pr)
    return parser


def cmd_cluster(args) -> int:
    table = load_vectors(args.vectors)
    config = clus.ClusterConfig(args.k, args.max_iterations, args.restarts, args.seed)
    config.validate(len(table))
    model = clus.fit_with_restarts(table, config, n_jobs=args.jobs, normalize=args.normalize)
    clus.export_lexicon(model, args.out)
    print(f"vocabulary={len(table)} dim={table.dim} k={model.k}")
    for s in model.restarts:
        print(f"restart={s.restart}\tseed={s.seed}\tinertia={s.inertia:.6f}\titerations={s.iterations}")
    print(f"best_restart={model.best_restart} inertia={model.inertia:.6f} lexicon={args.out}")
    return 0


@dataclass
class RowResult:
    setting: str
    k: int | None
    metric: float
    model: linmodel.LinearModel
    extra: dict


def _train_config(args) -> TrainConfig:
    return TrainConfig(l2_strength=args.l2, epochs=args.epochs, learning_rate=args.learning_rate,
                       decay=args.decay, seed=args.train_seed, shuffle=args.shuffle)


def _run_ner(args, train, test, cluster_model) -> tuple[float, linmodel.LinearModel, dict]:
    if args.task == "ner-seg":
        def seg(s):
            return seqtag.TaggedSequence(s.tokens, seqtag.collapse_types(s.tags), s.pos, s.gazetteers)
        train, test = [seg(s) for s in train], [seg(s) for s in test]
        scheme = seqtag.SEGMENTATION
    else:
        scheme = seqtag.TagScheme.from_tags(t for s in list(train) + list(test) for t in s.tags)
    fcfg = seqtag.TaggerFeatureConfig(words=args.words, capitalization=args.capitalization,
                                      clusters=cluster_model is not None,
                                      cluster_window=args.cluster_window)
    models = [cluster_model] if cluster_model is not None else []
    tagger = seqtag.train_tagger(train, _train_config(args), fcfg, models, scheme)
    pred = seqtag.tag_corpus(tagger, test)
    p, r, f1 = seqtag.entity_f1(test, pred)
    return f1, tagger.classifier, {"precision": p, "recall": r}


def _featurizer(args, cluster_model, lexicons) -> sentiment.SentimentFeaturizer:
    cfg = SentenceFeatureConfig(ngrams=args.ngrams, char_ngrams=args.char_ngrams,
                                lexicons=args.lexicons, clusters=cluster_model is not None,
                                binary=args.binary)
    models = [cluster_model] if cluster_model is not None else []
    return sentiment.SentimentFeaturizer(cfg, SENTIMENT_RULES, list(lexicons), models)


def _run_sentiment(args, train, test, cluster_model, lexicons):
    featurizer = _featurizer(args, cluster_model, lexicons)
    if args.task == "sent-class":
        run = sentiment.run_sentiment_pipeline(train, test, featurizer, _train_config(args))
        return run.score, run.model, {}
    data = [(featurizer(it.text), it.label) for it in train]
    model = linmodel.train(data, _train_config(args), classes=sentiment.DEFAULT_SCALE.classes)
    groups = defaultdict(list)
    for it in test:
        groups[it.subject].append((featurizer(it.text), it.label))
    results, mean = quantify.quantify_by_subject(model, groups, probabilistic=args.probabilistic)
    return mean, model, {"subjects": results}


def _resolve(args, parser) -> argparse.Namespace:
    for name in ("task", "train", "test", "out_dir"):
        if not getattr(args, name):
            parser.error(f"--{name.replace('_', '-')} is required (flag or config file)")
    if not args.vectors and not args.lexicon:
        parser.error("one of --vectors or --lexicon is required")
    if args.vectors and args.lexicon:
        parser.error("--vectors and --lexicon are mutually exclusive")
    if args.k is None:
        args.k = list(clus.DEFAULT_K_GRID)
    return args


def cmd_run(args, parser) -> int:
    args = _resolve(args, parser)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    inputs = {"train": args.train, "test": args.test}
    if args.vectors:
        inputs["vectors"] = args.vectors
    for i, path in enumerate(args.lexicon or []):
        inputs[f"lexicon{i}"] = path
    for i, path in enumerate(args.sentiment_lexicon or []):
        inputs[f"sentiment_lexicon{i}"] = path

    if args.task.startswith("ner"):
        train, test = seqtag.read_conll(args.train), seqtag.read_conll(args.test)
    else:
        train = sentiment.read_sentiment_tsv(args.train)
        test = sentiment.read_sentiment_tsv(args.test)
    lexicons = [load_sentiment_lexicon(p) for p in args.sentiment_lexicon or []]

    settings: list[tuple[str, int | None, object]] = [("no-clusters", None, None)]
    if args.vectors:
        table = load_vectors(args.vectors)
        for k in args.k:
            config = clus.ClusterConfig(k, args.max_iterations, args.restarts, args.seed)
            config.validate(len(table))
            model = clus.fit_with_restarts(table, config, n_jobs=args.jobs, normalize=args.normalize)
            clus.export_lexicon(model, out / f"lexicon_k{k}.tsv")
            print(f"clustered k={k}: inertia={model.inertia:.6f} "
                  f"(best of {config.restarts} restarts)", file=sys.stderr)
            settings.append((f"clusters-k{k}", k, model))
    else:
        for i, path in enumerate(args.lexicon):
            lex = clus.load_lexicon(path)
            settings.append((f"clusters-k{lex.k}" if len(args.lexicon) == 1 else f"clusters-{i}-k{lex.k}",
                             lex.k, lex))
        settings[1:] = sorted(settings[1:], key=lambda s: (s[1], s[0]))

    rows = []
    for name, k, model in settings:
        if args.task.startswith("ner"):
            metric, lm, extra = _run_ner(args, train, test, model)
        else:
            metric, lm, extra = _run_sentiment(args, train, test, model, lexicons)
        linmodel.save_model(lm, out / f"model_{name}.tsv")
        if "subjects" in extra:
            quantify.write_quantification_tsv(extra["subjects"], out / f"quant_{name}.tsv")
        rows.append(RowResult(name, k, metric, lm, extra))

    resolved = {key: getattr(args, key) for key in sorted(vars(args))
                if key not in ("command", "config", "verbose", "run_parser", "out_dir")}
    metric_name = METRICS[args.task]
    report_path = out / "report.tsv"
    with open(report_path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in resolved.items():
            if isinstance(value, list):
                value = ",".join(map(str, value))
            fh.write(f"# config.{key}={value}\n")
        for key, path in inputs.items():
            fh.write(f"# sha256.{key}={sha256_file(path)}\n")
        fh.write(f"setting\tk\t{metric_name}\n")
        for r in rows:
            fh.write(f"{r.setting}\t{r.k if r.k is not None else '-'}\t{r.metric!r}\n")

    print(f"task={args.task} metric={metric_name} ({'lower' if metric_name != 'f1' else 'higher'} is better)")
    for r in rows:
        print(f"  {r.setting:<20} {r.metric:.4f}")
    print(f"report written to {report_path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "cluster":
            return cmd_cluster(args)
        if args.config:
            cfg = read_config_file(args.config)
            run_parser = args.run_parser
            known = {a.dest for a in run_parser._actions}
            unknown = set(cfg) - known
            if unknown:
                parser.error(f"unknown config keys: {', '.join(sorted(unknown))}")
            defaults = {}
            for key, value in cfg.items():
                if key in _BOOL_DESTS:
                    defaults[key] = _parse_bool(value)
                elif key in ("lexicon", "sentiment_lexicon"):
                    defaults[key] = [v for v in value.split(",") if v]
                else:
                    defaults[key] = value
            run_parser.set_defaults(**defaults)
            args = parser.parse_args(argv)
        return cmd_run(args, parser)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

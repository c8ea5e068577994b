"""Command-line entry point.

Subcommands mirror the pipeline stages so any stage can be rerun from its
predecessor's artifacts: represent, align, select, train, evaluate, plus
the all-in-one pipeline, the synthetic corpus generator, and hierarchical
classification.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import pipeline as pl
from .alignment import AlignmentResult
from .corpus import load_embedded_corpus, write_embedded_corpus
from .errors import ValidationError, WeakLabelError
from .hierarchy import classify_end, classify_hier, load_class_tree
from .selection import PseudoLabelSet, evaluate, select_confident, train_classifier
from .synthetic import generate_hierarchical_corpus, generate_synthetic_corpus

logger = logging.getLogger(__name__)

# Knob flags shared by every stage subcommand; destinations match
# PipelineConfig field names so the merge below stays mechanical.
_KNOBS = (
    ("--t-keywords", dict(type=int, dest="t_keywords", help="max keywords per class")),
    ("--min-count", dict(type=int, dest="min_count", help="min occurrences for expansion candidates")),
    ("--attention", dict(choices=list(pl.ATTENTION_MODES), help="attention mechanism set")),
    ("--pca-dim", dict(type=int, dest="pca_dim", help="PCA target dimension; 0 disables")),
    ("--cluster-method", dict(choices=list(pl.CLUSTER_METHODS), dest="cluster_method")),
    ("--delta", dict(type=float, help="confident fraction kept per class")),
    ("--delta-sweep", dict(action="store_const", const=True, dest="delta_sweep",
                           help="also rerun selection and training for delta 0.1..0.9")),
    ("--global-selection", dict(action="store_const", const=True, dest="global_selection",
                                help="select top delta fraction globally instead of per class")),
    ("--seed", dict(type=int, help="random seed recorded in artifacts")),
    ("--workers", dict(type=int, help="worker processes for per-document stages")),
    ("--max-iters", dict(type=int, dest="max_iters", help="EM / Lloyd iteration cap")),
    ("--tol", dict(type=float, help="EM relative log-likelihood tolerance")),
)


def _add_common(sub: argparse.ArgumentParser, corpus_required: bool = True) -> None:
    sub.add_argument("--corpus", required=corpus_required, help="XCEF corpus directory")
    sub.add_argument("--class-names", dest="class_names",
                     help="class names file, one per line (default: corpus metadata)")
    sub.add_argument("--out", help="artifact directory")
    sub.add_argument("--config", help="key=value config file; flags override it")
    for flag, kwargs in _KNOBS:
        sub.add_argument(flag, default=None, **kwargs)


def _build_config(args: argparse.Namespace) -> pl.PipelineConfig:
    values: dict = {}
    if getattr(args, "config", None):
        values.update(pl.parse_config_text(Path(args.config).read_text(encoding="utf-8")))
    for field in pl.PipelineConfig.__dataclass_fields__:
        flag_value = getattr(args, field, None)
        if flag_value is not None:
            values[field] = flag_value
    return pl.PipelineConfig(**values).validated()


def _out_dir(config: pl.PipelineConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _load_gold(config: pl.PipelineConfig):
    corpus = load_embedded_corpus(config.corpus)
    return corpus, corpus.gold_labels


def _cmd_pipeline(args) -> int:
    config = _build_config(args)
    out = pl.run_pipeline(config)
    print(f"pipeline artifacts written to {out}")
    return 0


def _cmd_represent(args) -> int:
    config = _build_config(args)
    out = pl.run_pipeline(config, stop_after="prior")
    print(f"representation artifacts written to {out}")
    return 0


def _cmd_align(args) -> int:
    config = _build_config(args)
    out = _out_dir(config)
    doc_vectors = pl.read_matrix(out / pl.DOC_REPS_FILE)
    class_reps = pl.read_matrix(out / pl.CLASS_REPS_FILE)
    prior = pl.read_labels(out / pl.PRIOR_LABELS_FILE)
    k = len(class_reps)
    reduced, class_reduced = pl._reduce(doc_vectors, class_reps, config.pca_dim)
    alignment = pl._align_stage(
        reduced, prior, k, class_reduced, doc_vectors, class_reps, config
    )
    pl.write_labels(out / pl.ALIGN_LABELS_FILE, alignment.assignment)
    pl.write_assignment_csv(
        out / pl.ALIGN_CSV_FILE,
        np.arange(len(alignment.assignment)), alignment.assignment, alignment.confidence,
    )
    if args.corpus:
        _, gold = _load_gold(config)
        if gold is not None:
            pl.write_report(out / pl.ALIGN_REPORT_FILE, evaluate(alignment.assignment, gold, k))
    print(f"alignment artifacts written to {out}")
    return 0


def _alignment_from_csv(out: Path, k: int) -> AlignmentResult:
    indices, class_ids, confs = pl.read_assignment_csv(out / pl.ALIGN_CSV_FILE)
    if not np.array_equal(indices, np.arange(len(indices))):
        raise ValidationError(f"{pl.ALIGN_CSV_FILE} must cover documents 0..n-1 in order")
    posterior = np.zeros((len(indices), k))
    posterior[indices, class_ids] = 1.0
    return AlignmentResult(assignment=class_ids, posterior=posterior, confidence=confs)


def _cmd_select(args) -> int:
    config = _build_config(args)
    out = _out_dir(config)
    k = len(pl.read_matrix(out / pl.CLASS_REPS_FILE))
    alignment = _alignment_from_csv(out, k)
    pseudo = select_confident(alignment, config.delta, per_class=not config.global_selection)
    pl.write_assignment_csv(
        out / pl.PSEUDO_FILE, pseudo.doc_indices, pseudo.class_ids, pseudo.confidences
    )
    print(f"selected {len(pseudo)} pseudo labels into {out / pl.PSEUDO_FILE}")
    return 0


def _cmd_train(args) -> int:
    config = _build_config(args)
    out = _out_dir(config)
    features = pl.read_matrix(out / pl.DOC_REPS_FILE)
    k = len(pl.read_matrix(out / pl.CLASS_REPS_FILE))
    indices, class_ids, confs = pl.read_assignment_csv(out / pl.PSEUDO_FILE)
    pseudo = PseudoLabelSet(
        doc_indices=indices, class_ids=class_ids, confidences=confs,
        delta=config.delta, per_class=not config.global_selection,
    )
    classifier = train_classifier(features, pseudo, num_classes=k, seed=config.seed)
    final = classifier.predict(features)
    pl.write_labels(out / pl.FINAL_LABELS_FILE, final)
    if args.corpus:
        _, gold = _load_gold(config)
        if gold is not None:
            pl.write_report(out / pl.FINAL_REPORT_FILE, evaluate(final, gold, k))
    print(f"classifier labels written to {out / pl.FINAL_LABELS_FILE}")
    return 0


def _cmd_evaluate(args) -> int:
    config = _build_config(args)
    predicted = pl.read_labels(Path(args.predictions))
    if args.gold:
        gold = pl.read_labels(Path(args.gold))
    else:
        _, gold = _load_gold(config)
        if gold is None:
            raise ValidationError("corpus has no gold labels; pass --gold")
    report = evaluate(predicted, gold)
    print(json.dumps(report.to_dict(), indent=2, sort_keys=True))
    return 0


def _cmd_synth(args) -> int:
    if args.coarse is not None:
        corpus, _, _, _, edges = generate_hierarchical_corpus(
            coarse=args.coarse, fine_per_coarse=args.fine_per_coarse,
            n=args.n, dim=args.dim, seed=args.seed,
        )
        out = write_embedded_corpus(corpus, args.out)
        tree_path = Path(args.out) / "tree.txt"
        tree_path.write_text(
            "".join(f"{p}\t{c}\n" for p, c in edges), encoding="utf-8"
        )
        print(f"hierarchical corpus written to {out} (tree: {tree_path})")
    else:
        corpus, _, _ = generate_synthetic_corpus(
            k=args.k, n=args.n, dim=args.dim, seed=args.seed
        )
        out = write_embedded_corpus(corpus, args.out)
        print(f"synthetic corpus written to {out}")
    return 0


def _cmd_hier(args) -> int:
    config = _build_config(args)
    out = _out_dir(config)
    corpus = load_embedded_corpus(config.corpus)
    tree = load_class_tree(args.tree)
    leaf_names = tree.leaf_names

    end_labels = classify_end(corpus, tree, config)
    hier_labels = classify_hier(corpus, tree, config)
    (out / "leaf_names.txt").write_text(
        "".join(f"{name}\n" for name in leaf_names), encoding="utf-8"
    )
    pl.write_labels(out / "labels_end.txt", end_labels)
    pl.write_labels(out / "labels_hier.txt", hier_labels)

    gold = corpus.gold_labels
    if gold is not None and corpus.class_names:
        # Gold ids index the corpus class list; remap leaf-order predictions.
        if set(leaf_names) <= set(corpus.class_names):
            to_gold = np.array([corpus.class_names.index(name) for name in leaf_names])
            pl.write_report(out / "report_end.json", evaluate(to_gold[end_labels], gold))
            pl.write_report(out / "report_hier.json", evaluate(to_gold[hier_labels], gold))
        else:
            logger.warning("tree leaves do not match corpus class names; skipping reports")
    print(f"hierarchical labels written to {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="weaklabel",
        description="Text classification from class names alone, over pre-embedded corpora.",
    )
    parser.add_argument("--verbose", action="store_true", help="log stage progress")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("pipeline", help="run all stages and write artifacts")
    _add_common(p)
    p.set_defaults(fn=_cmd_pipeline)

    p = subs.add_parser("represent", help="keywords, class/document reps, prior labels")
    _add_common(p)
    p.set_defaults(fn=_cmd_represent)

    p = subs.add_parser("align", help="cluster document reps from represent artifacts")
    _add_common(p, corpus_required=False)
    p.set_defaults(fn=_cmd_align)

    p = subs.add_parser("select", help="keep the most confident aligned documents")
    _add_common(p, corpus_required=False)
    p.set_defaults(fn=_cmd_select)

    p = subs.add_parser("train", help="train the classifier on pseudo labels")
    _add_common(p, corpus_required=False)
    p.set_defaults(fn=_cmd_train)

    p = subs.add_parser("evaluate", help="score a label file against gold labels")
    _add_common(p, corpus_required=False)
    p.add_argument("--predictions", required=True, help="label file, one class id per line")
    p.add_argument("--gold", help="gold label file (default: corpus labels)")
    p.set_defaults(fn=_cmd_evaluate)

    p = subs.add_parser("synth", help="generate a synthetic embedded corpus")
    p.add_argument("--k", type=int, default=4, help="number of classes (flat corpus)")
    p.add_argument("--n", type=int, default=400, help="number of documents")
    p.add_argument("--dim", type=int, default=32, help="embedding dimension")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--coarse", type=int, default=None,
                   help="generate a 2-level corpus with this many coarse classes")
    p.add_argument("--fine-per-coarse", type=int, default=2, dest="fine_per_coarse")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=_cmd_synth)

    p = subs.add_parser("hier", help="hierarchical and end-to-end classification")
    _add_common(p)
    p.add_argument("--tree", required=True, help="edge file: parent<TAB>child, root ROOT")
    p.set_defaults(fn=_cmd_hier)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.fn(args)
    except pl.StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except WeakLabelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())

"""Hierarchical classification by recursive partitioning over a class tree.

The coarse stage runs the flat pipeline over a node's children, documents
are partitioned by predicted child, and each internal child gets a fresh
run on its partition alone (word statistics recomputed from scratch, so a
word can mean different things under different branches).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .corpus import EmbeddedCorpus
from .errors import MissingClassNameError, ValidationError
from .pipeline import PipelineConfig, run_flat

logger = logging.getLogger(__name__)

ROOT = "ROOT"


@dataclass(frozen=True)
class ClassTree:
    """Rooted class taxonomy; leaves are the fine-grained classes."""

    children: dict  # parent name -> tuple of child names, insertion-ordered

    def child_names(self, node: str) -> tuple[str, ...]:
        return self.children.get(node, ())

    def is_leaf(self, node: str) -> bool:
        return node not in self.children

    @property
    def leaf_names(self) -> list[str]:
        """Leaves in depth-first order; stable across runs."""
        leaves: list[str] = []
        stack = [ROOT]
        while stack:
            node = stack.pop()
            if self.is_leaf(node):
                leaves.append(node)
            else:
                stack.extend(reversed(self.children[node]))
        return leaves

    @property
    def depth(self) -> int:
        def walk(node: str) -> int:
            if self.is_leaf(node):
                return 0
            return 1 + max(walk(c) for c in self.children[node])

        return walk(ROOT)


def parse_class_tree(text: str) -> ClassTree:
    """Build a ClassTree from `parent<TAB>child` lines rooted at ROOT."""
    children: dict = {}
    parent_of: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip("\n")
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0].strip() or not parts[1].strip():
            raise ValidationError(f"tree line {lineno}: expected parent<TAB>child, got {raw!r}")
        parent, child = parts[0].strip(), parts[1].strip()
        if child == ROOT:
            raise ValidationError(f"tree line {lineno}: {ROOT} cannot be a child")
        if child in parent_of:
            raise ValidationError(f"tree line {lineno}: {child!r} already has a parent")
        parent_of[child] = parent
        children.setdefault(parent, []).append(child)

    if ROOT not in children:
        raise ValidationError(f"tree has no edges from {ROOT}")
    for parent in children:
        if parent != ROOT and parent not in parent_of:
            raise ValidationError(f"node {parent!r} is not reachable from {ROOT}")
    for node, kids in children.items():
        if len(kids) < 2:
            raise ValidationError(f"internal node {node!r} has fewer than 2 children")
    # A cycle would leave some chain never reaching ROOT.
    for child in parent_of:
        seen = set()
        node = child
        while node != ROOT:
            if node in seen:
                raise ValidationError(f"cycle detected through {node!r}")
            seen.add(node)
            node = parent_of[node]
    return ClassTree(children={p: tuple(kids) for p, kids in children.items()})


def load_class_tree(path) -> ClassTree:
    from pathlib import Path

    return parse_class_tree(Path(path).read_text(encoding="utf-8"))


def classify_end(
    corpus: EmbeddedCorpus, tree: ClassTree, config: PipelineConfig
) -> np.ndarray:
    """Flat run over all leaf names at once; labels index ``tree.leaf_names``."""
    return run_flat(corpus, tree.leaf_names, config).final_labels


def classify_hier(
    corpus: EmbeddedCorpus, tree: ClassTree, config: PipelineConfig
) -> np.ndarray:
    """Recursive coarse-to-fine classification; labels index ``tree.leaf_names``.

    Every document's leaf label sits under the child its partition chose at
    each level, by construction.  Partitions with fewer documents than child
    classes fall back to prior labels; a partition where a child name never
    occurs sends everything to the first child, with a warning either way.
    """
    n = len(corpus.docs)
    leaf_index = {name: i for i, name in enumerate(tree.leaf_names)}
    labels = np.full(n, -1, dtype=np.int64)
    _classify_node(corpus, tree, config, ROOT, np.arange(n), labels, leaf_index)
    return labels


def _classify_node(
    corpus: EmbeddedCorpus,
    tree: ClassTree,
    config: PipelineConfig,
    node: str,
    doc_indices: np.ndarray,
    labels: np.ndarray,
    leaf_index: dict,
) -> None:
    kids = tree.children[node]
    if len(doc_indices) == 0:
        logger.warning("no documents reached node %r", node)
        return
    sub = corpus.subset(doc_indices)
    child_labels = _partition(sub, list(kids), config, node)
    for ci, child in enumerate(kids):
        members = doc_indices[child_labels == ci]
        if tree.is_leaf(child):
            labels[members] = leaf_index[child]
        else:
            _classify_node(corpus, tree, config, child, members, labels, leaf_index)


def _partition(
    sub: EmbeddedCorpus, names: list[str], config: PipelineConfig, node: str
) -> np.ndarray:
    if len(sub.docs) < len(names):
        logger.warning(
            "node %r: %d documents for %d classes; using prior labels only",
            node, len(sub.docs), len(names),
        )
        try:
            return run_flat(sub, names, config, prior_only=True).final_labels
        except MissingClassNameError as exc:
            logger.warning("node %r: %s; assigning everything to %r", node, exc, names[0])
            return np.zeros(len(sub.docs), dtype=np.int64)
    try:
        return run_flat(sub, names, config, fallback_to_alignment=True).final_labels
    except MissingClassNameError as exc:
        logger.warning("node %r: %s; assigning everything to %r", node, exc, names[0])
        return np.zeros(len(sub.docs), dtype=np.int64)

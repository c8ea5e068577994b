"""Embedded-corpus exchange format (XCEF v1) and static word representations.

A corpus on disk is a directory with a ``manifest.xcef`` of ``key=value``
lines pointing at a vocabulary file, a binary token file, and optional
label / class-name files.  In memory a corpus is a list of documents,
each a sequence of (word-id, contextualized vector) pairs.
"""

from __future__ import annotations

import string
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError, ValidationError

MANIFEST_NAME = "manifest.xcef"

_MANIFEST_KEYS = {"version", "dim", "num_docs", "vocab", "tokens", "labels", "class_names"}
_REQUIRED_KEYS = {"version", "dim", "num_docs", "vocab", "tokens"}

_STRIP_CHARS = string.punctuation + string.whitespace


def normalize_word(word: str) -> str:
    """Lowercase and strip surrounding punctuation/whitespace from a word."""
    return word.strip(_STRIP_CHARS).lower()


@dataclass(frozen=True)
class Vocabulary:
    """Dense word-id assignment: id of ``words[i]`` is ``i``."""

    words: tuple[str, ...]
    index: dict[str, int] = field(repr=False)

    @classmethod
    def from_words(cls, words: list[str] | tuple[str, ...]) -> "Vocabulary":
        words = tuple(words)
        index = {w: i for i, w in enumerate(words)}
        if len(index) != len(words):
            seen: set[str] = set()
            for w in words:
                if w in seen:
                    raise ValidationError(f"duplicate vocabulary word {w!r}")
                seen.add(w)
        return cls(words=words, index=index)

    def __len__(self) -> int:
        return len(self.words)

    def get(self, word: str) -> int | None:
        return self.index.get(word)


@dataclass(frozen=True)
class Document:
    """Token sequence of one document: word ids plus their vectors."""

    word_ids: np.ndarray  # (m,) int64
    vectors: np.ndarray  # (m, dim) float32

    def __len__(self) -> int:
        return len(self.word_ids)


@dataclass(frozen=True)
class EmbeddedCorpus:
    """Documents with per-token contextualized vectors and a vocabulary."""

    dim: int
    vocab: Vocabulary
    docs: list[Document]
    gold_labels: np.ndarray | None = None  # (n,) int64, evaluation only
    class_names: list[str] | None = None

    @property
    def num_docs(self) -> int:
        return len(self.docs)

    @property
    def total_tokens(self) -> int:
        return sum(len(d) for d in self.docs)

    def validate(self) -> None:
        """Check all corpus invariants, raising ValidationError on the first hit."""
        if self.dim <= 0:
            raise ValidationError(f"dim must be positive, got {self.dim}")
        nv = len(self.vocab)
        for i, doc in enumerate(self.docs):
            if len(doc) == 0:
                raise ValidationError(f"document {i} is empty")
            if doc.vectors.shape != (len(doc.word_ids), self.dim):
                raise ValidationError(
                    f"document {i}: vector block {doc.vectors.shape} does not match "
                    f"{len(doc.word_ids)} tokens of dim {self.dim}"
                )
            if doc.word_ids.min() < 0 or doc.word_ids.max() >= nv:
                raise ValidationError(f"document {i}: word id out of range [0, {nv})")
            if not np.isfinite(doc.vectors).all():
                raise ValidationError(f"document {i} contains non-finite vector values")
        if self.gold_labels is not None and len(self.gold_labels) != len(self.docs):
            raise ValidationError(
                f"{len(self.gold_labels)} labels for {len(self.docs)} documents"
            )

    def subset(self, doc_indices: np.ndarray) -> "EmbeddedCorpus":
        """Corpus restricted to the given documents (vocabulary unchanged)."""
        docs = [self.docs[i] for i in doc_indices]
        gold = self.gold_labels[doc_indices] if self.gold_labels is not None else None
        return EmbeddedCorpus(
            dim=self.dim, vocab=self.vocab, docs=docs,
            gold_labels=gold, class_names=self.class_names,
        )


@dataclass(frozen=True)
class StaticRepTable:
    """Per-word mean of contextualized occurrence vectors, with counts.

    Rows of ``vectors`` are defined only where ``counts > 0``; accessing an
    absent word raises KeyError.
    """

    vectors: np.ndarray  # (|V|, dim) float64
    counts: np.ndarray  # (|V|,) int64

    def __contains__(self, word_id: int) -> bool:
        return 0 <= word_id < len(self.counts) and self.counts[word_id] > 0

    def __getitem__(self, word_id: int) -> np.ndarray:
        if word_id not in self:
            raise KeyError(f"word id {word_id} does not occur in the corpus")
        return self.vectors[word_id]

    def count(self, word_id: int) -> int:
        return int(self.counts[word_id])

    def word_ids(self, min_count: int = 1) -> np.ndarray:
        """Ids of all words occurring at least ``min_count`` times, ascending."""
        return np.flatnonzero(self.counts >= min_count)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]


def compute_static_representations(
    corpus: EmbeddedCorpus, min_count: int = 1
) -> StaticRepTable:
    """Average each word's contextualized vectors over all its occurrences.

    Sums are accumulated in float64 regardless of the stored vector dtype.
    ``min_count`` drops rare words from the table entirely (default keeps
    every word that occurs).
    """
    nv = len(corpus.vocab)
    sums = np.zeros((nv, corpus.dim), dtype=np.float64)
    counts = np.zeros(nv, dtype=np.int64)
    for doc in corpus.docs:
        np.add.at(sums, doc.word_ids, doc.vectors.astype(np.float64))
        np.add.at(counts, doc.word_ids, 1)
    if min_count > 1:
        drop = counts < min_count
        sums[drop] = 0.0
        counts[drop] = 0
    vectors = np.zeros_like(sums)
    present = counts > 0
    vectors[present] = sums[present] / counts[present, None]
    return StaticRepTable(vectors=vectors, counts=counts)


# ---------------------------------------------------------------------------
# XCEF v1 reading / writing


def _parse_manifest(manifest_path: Path) -> dict[str, str]:
    raw = manifest_path.read_bytes()
    entries: dict[str, str] = {}
    offset = 0
    for line in raw.split(b"\n"):
        stripped = line.strip()
        if stripped:
            if b"=" not in stripped:
                raise FormatError("manifest line has no '='", offset=offset)
            key_b, _, value_b = stripped.partition(b"=")
            try:
                key = key_b.decode("utf-8").strip()
                value = value_b.decode("utf-8").strip()
            except UnicodeDecodeError:
                raise FormatError("manifest line is not valid UTF-8", offset=offset)
            if key not in _MANIFEST_KEYS:
                raise FormatError(f"unknown manifest key {key!r}", offset=offset)
            if key in entries:
                raise FormatError(f"duplicate manifest key {key!r}", offset=offset)
            entries[key] = value
        offset += len(line) + 1
    missing = _REQUIRED_KEYS - entries.keys()
    if missing:
        raise FormatError(f"manifest missing keys: {sorted(missing)}")
    if entries["version"] != "1":
        raise FormatError(f"unsupported exchange format version {entries['version']!r}")
    for key in ("dim", "num_docs"):
        if not entries[key].isdigit():
            raise FormatError(f"manifest key {key!r} is not a non-negative integer")
    return entries


def _read_tokens(tokens_path: Path, num_docs: int, dim: int) -> list[Document]:
    raw = tokens_path.read_bytes()
    docs: list[Document] = []
    pos = 0
    for i in range(num_docs):
        if pos + 4 > len(raw):
            raise ValidationError(
                f"tokens file truncated before document {i} (byte {pos})"
            )
        m = int(np.frombuffer(raw, dtype="<u4", count=1, offset=pos)[0])
        pos += 4
        if m == 0:
            raise ValidationError(f"document {i} is empty")
        need = m * 4 + m * dim * 4
        if pos + need > len(raw):
            raise ValidationError(
                f"tokens file truncated inside document {i}: dimension or token "
                f"count does not match the manifest (byte {pos})"
            )
        word_ids = np.frombuffer(raw, dtype="<u4", count=m, offset=pos).astype(np.int64)
        pos += m * 4
        vectors = np.frombuffer(raw, dtype="<f4", count=m * dim, offset=pos)
        vectors = vectors.reshape(m, dim).copy()
        pos += m * dim * 4
        docs.append(Document(word_ids=word_ids, vectors=vectors))
    if pos != len(raw):
        raise ValidationError(
            f"tokens file has {len(raw) - pos} trailing bytes after {num_docs} documents"
        )
    return docs


def load_embedded_corpus(path: str | Path) -> EmbeddedCorpus:
    """Load and validate an XCEF v1 corpus.

    ``path`` may be the corpus directory or the manifest file itself.
    """
    path = Path(path)
    manifest_path = path / MANIFEST_NAME if path.is_dir() else path
    if not manifest_path.is_file():
        raise FormatError(f"no manifest at {manifest_path}")
    entries = _parse_manifest(manifest_path)
    base = manifest_path.parent
    dim = int(entries["dim"])
    num_docs = int(entries["num_docs"])

    vocab_lines = (base / entries["vocab"]).read_text(encoding="utf-8").splitlines()
    vocab = Vocabulary.from_words([w for w in vocab_lines])

    docs = _read_tokens(base / entries["tokens"], num_docs, dim)

    gold_labels = None
    if "labels" in entries:
        label_lines = (base / entries["labels"]).read_text(encoding="utf-8").split()
        try:
            gold_labels = np.array([int(x) for x in label_lines], dtype=np.int64)
        except ValueError as exc:
            raise FormatError(f"labels file: {exc}")

    class_names = None
    if "class_names" in entries:
        class_names = [
            line for line in
            (base / entries["class_names"]).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]

    corpus = EmbeddedCorpus(
        dim=dim, vocab=vocab, docs=docs, gold_labels=gold_labels, class_names=class_names
    )
    corpus.validate()
    return corpus


def write_embedded_corpus(corpus: EmbeddedCorpus, out_dir: str | Path) -> Path:
    """Write a corpus as XCEF v1; returns the manifest path.

    Writing then loading reproduces the corpus bit-exactly.
    """
    corpus.validate()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    (out_dir / "vocab.txt").write_text(
        "".join(w + "\n" for w in corpus.vocab.words), encoding="utf-8"
    )

    chunks: list[bytes] = []
    for doc in corpus.docs:
        chunks.append(np.array([len(doc)], dtype="<u4").tobytes())
        chunks.append(doc.word_ids.astype("<u4").tobytes())
        chunks.append(np.ascontiguousarray(doc.vectors, dtype="<f4").tobytes())
    (out_dir / "tokens.bin").write_bytes(b"".join(chunks))

    lines = [
        "version=1",
        f"dim={corpus.dim}",
        f"num_docs={corpus.num_docs}",
        "vocab=vocab.txt",
        "tokens=tokens.bin",
    ]
    if corpus.gold_labels is not None:
        (out_dir / "labels.txt").write_text(
            "".join(f"{x}\n" for x in corpus.gold_labels), encoding="utf-8"
        )
        lines.append("labels=labels.txt")
    if corpus.class_names is not None:
        (out_dir / "class_names.txt").write_text(
            "".join(name + "\n" for name in corpus.class_names), encoding="utf-8"
        )
        lines.append("class_names=class_names.txt")

    manifest_path = out_dir / MANIFEST_NAME
    manifest_path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return manifest_path

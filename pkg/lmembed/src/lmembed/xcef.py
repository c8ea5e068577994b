"""Embedded-corpus directory writer.

The directory layout is the pipeline's exchange format: a flat key=value
manifest, a vocabulary file with one word per line (line number is the
word id), and a binary token file holding, per document, a u32 token
count, that many u32 word ids, then that many little-endian float32 rows.
"""

import string
from pathlib import Path

import numpy as np

MANIFEST_NAME = "manifest.xcef"
VOCAB_NAME = "vocab.txt"
TOKENS_NAME = "tokens.bin"

# Must match the reader's vocabulary rules exactly: lowercase, surrounding
# ASCII punctuation and whitespace stripped.
_STRIP_CHARS = string.punctuation + string.whitespace


def normalize_word(word: str) -> str:
    return word.strip(_STRIP_CHARS).lower()


def write_corpus(out_dir, vocab_words, docs, dim: int) -> Path:
    """Write (word_ids, vectors) documents under ``out_dir``.

    ``vectors`` are cast to float32; every document must have at least one
    token and vectors shaped (len(word_ids), dim).
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    blobs = []
    for i, (word_ids, vectors) in enumerate(docs):
        vectors = np.ascontiguousarray(vectors, dtype="<f4")
        if len(word_ids) == 0:
            raise ValueError(f"document {i} has no tokens")
        if vectors.shape != (len(word_ids), dim):
            raise ValueError(
                f"document {i}: vectors shaped {vectors.shape}, expected ({len(word_ids)}, {dim})"
            )
        blobs.append(np.array([len(word_ids)], dtype="<u4").tobytes())
        blobs.append(np.asarray(word_ids, dtype="<u4").tobytes())
        blobs.append(vectors.tobytes())

    (out / VOCAB_NAME).write_text("".join(f"{w}\n" for w in vocab_words), encoding="utf-8")
    (out / TOKENS_NAME).write_bytes(b"".join(blobs))
    manifest = (
        f"version=1\n"
        f"dim={dim}\n"
        f"num_docs={len(docs)}\n"
        f"vocab={VOCAB_NAME}\n"
        f"tokens={TOKENS_NAME}\n"
    )
    (out / MANIFEST_NAME).write_text(manifest, encoding="utf-8")
    return out

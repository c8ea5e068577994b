"""Contextualized word vectors from a masked language model.

A document is normalized to words, wordpiece-tokenized, and run through
the model in overlapping windows.  A wordpiece covered by several windows
gets the average of its per-window vectors; a word gets the average of
its wordpieces.  Every wordpiece is covered by at least one window, so
every surviving word has a vector.
"""

import logging
from pathlib import Path

import numpy as np
import torch
from transformers import AutoModel, AutoTokenizer

from .config import EmbedderConfig
from .xcef import normalize_word, write_corpus

logger = logging.getLogger(__name__)

SKIPPED_NAME = "skipped.txt"


def window_starts(n_pieces: int, content: int, stride: int) -> list[int]:
    """Offsets of each window's first content piece; the last is flush with the end."""
    if n_pieces <= content:
        return [0]
    starts = list(range(0, n_pieces - content, stride))
    starts.append(n_pieces - content)
    return starts


def _load_model(config: EmbedderConfig):
    tokenizer = AutoTokenizer.from_pretrained(config.model)
    if not tokenizer.is_fast:
        raise ValueError("a fast tokenizer is required for wordpiece-to-word alignment")
    model = AutoModel.from_pretrained(config.model)
    model.eval()
    model.to(config.device)
    max_len = getattr(model.config, "max_position_embeddings", config.window)
    if config.window > max_len:
        raise ValueError(
            f"window {config.window} exceeds the model's maximum input length {max_len}"
        )
    return tokenizer, model


def _select_layers(hidden_states, policy: str) -> torch.Tensor:
    if policy == "last":
        return hidden_states[-1]
    return torch.stack(hidden_states[-4:]).mean(dim=0)


@torch.no_grad()
def _piece_vectors(model, tokenizer, piece_ids: list[int], config: EmbedderConfig) -> np.ndarray:
    """Average hidden vectors per wordpiece over every window covering it."""
    content = config.window - 2
    starts = window_starts(len(piece_ids), content, config.stride)
    cls_id, sep_id = tokenizer.cls_token_id, tokenizer.sep_token_id
    pad_id = tokenizer.pad_token_id or 0

    dim = model.config.hidden_size
    sums = np.zeros((len(piece_ids), dim), dtype=np.float64)
    counts = np.zeros(len(piece_ids), dtype=np.int64)

    for batch_start in range(0, len(starts), config.batch_size):
        batch = starts[batch_start : batch_start + config.batch_size]
        chunks = [piece_ids[s : s + content] for s in batch]
        longest = max(len(c) for c in chunks) + 2
        ids = torch.full((len(chunks), longest), pad_id, dtype=torch.long)
        mask = torch.zeros((len(chunks), longest), dtype=torch.long)
        for row, chunk in enumerate(chunks):
            ids[row, : len(chunk) + 2] = torch.tensor([cls_id, *chunk, sep_id])
            mask[row, : len(chunk) + 2] = 1
        out = model(
            input_ids=ids.to(config.device),
            attention_mask=mask.to(config.device),
            output_hidden_states=True,
        )
        hidden = _select_layers(out.hidden_states, config.layers).cpu().numpy()
        for row, (start, chunk) in enumerate(zip(batch, chunks)):
            sums[start : start + len(chunk)] += hidden[row, 1 : 1 + len(chunk)]
            counts[start : start + len(chunk)] += 1

    return sums / counts[:, None]


def embed_documents(documents, config: EmbedderConfig):
    """Embed raw documents in memory.

    Returns (vocab_words, docs, skipped) where docs are (word_ids, float32
    vectors) pairs in input order and skipped lists the indices of
    documents that normalized to nothing.
    """
    config = config.validated()
    tokenizer, model = _load_model(config)

    vocab_index: dict[str, int] = {}
    vocab_words: list[str] = []
    docs = []
    skipped: list[int] = []
    for doc_idx, raw in enumerate(documents):
        words = [w for w in (normalize_word(t) for t in raw.split()) if w]
        if not words:
            skipped.append(doc_idx)
            continue
        enc = tokenizer(words, is_split_into_words=True, add_special_tokens=False)
        piece_ids = enc["input_ids"]
        if not piece_ids:
            skipped.append(doc_idx)
            continue
        word_of_piece = enc.word_ids()

        piece_vecs = _piece_vectors(model, tokenizer, piece_ids, config)

        positions: dict[int, list[int]] = {}
        for pos, wi in enumerate(word_of_piece):
            positions.setdefault(wi, []).append(pos)
        word_ids = []
        vectors = []
        for wi in range(len(words)):
            if wi not in positions:  # tokenizer produced no pieces for this word
                continue
            word = words[wi]
            if word not in vocab_index:
                vocab_index[word] = len(vocab_words)
                vocab_words.append(word)
            word_ids.append(vocab_index[word])
            vectors.append(piece_vecs[positions[wi]].mean(axis=0))
        if not word_ids:
            skipped.append(doc_idx)
            continue
        docs.append((word_ids, np.asarray(vectors, dtype=np.float32)))

    if skipped:
        logger.warning(
            "%d empty documents skipped (indices: %s)",
            len(skipped), ", ".join(map(str, skipped)),
        )
    return vocab_words, docs, skipped


def embed_corpus(documents, out_dir, config: EmbedderConfig) -> Path:
    """Embed documents and write the corpus directory.

    Skipped document indices land in ``skipped.txt`` next to the corpus so
    downstream indexing can be reconciled.
    """
    vocab_words, docs, skipped = embed_documents(documents, config)
    if not docs:
        raise ValueError("every document was empty after normalization")
    dim = docs[0][1].shape[1]
    out = write_corpus(out_dir, vocab_words, docs, dim)
    (out / SKIPPED_NAME).write_text("".join(f"{i}\n" for i in skipped), encoding="utf-8")
    return out

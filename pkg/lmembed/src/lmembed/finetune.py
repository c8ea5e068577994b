"""Fine-tune a transformer classifier on exported pseudo labels."""

import logging
from pathlib import Path

import numpy as np
import torch
from transformers import AutoModelForSequenceClassification, AutoTokenizer

from .config import EmbedderConfig

logger = logging.getLogger(__name__)

PSEUDO_HEADER = "doc_index,class_id,confidence"


class CapabilityError(RuntimeError):
    """The requested device or memory is not available on this machine."""


def read_pseudo_csv(path) -> tuple[np.ndarray, np.ndarray]:
    """Read the selection stage's export: document indices and class ids."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != PSEUDO_HEADER:
        raise ValueError(f"{path}: expected header {PSEUDO_HEADER!r}")
    indices, class_ids = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 3:
            raise ValueError(f"{path} line {lineno}: expected 3 fields")
        indices.append(int(parts[0]))
        class_ids.append(int(parts[1]))
    if not indices:
        raise ValueError(f"{path}: no pseudo labels")
    return np.array(indices, dtype=np.int64), np.array(class_ids, dtype=np.int64)


def _resolve_device(config: EmbedderConfig) -> torch.device:
    if config.device.startswith("cuda") and not torch.cuda.is_available():
        raise CapabilityError(f"device {config.device!r} requested but CUDA is unavailable")
    return torch.device(config.device)


def _batches(n: int, size: int, generator: torch.Generator | None = None):
    order = torch.randperm(n, generator=generator) if generator is not None else torch.arange(n)
    for start in range(0, n, size):
        yield order[start : start + size]


def finetune_classifier(
    documents,
    pseudo_path,
    config: EmbedderConfig,
    out_path,
    epochs: int = 3,
    learning_rate: float = 2e-5,
    num_labels: int | None = None,
) -> Path:
    """Train on the pseudo-labeled subset, then predict every document.

    Writes one predicted class id per document line to ``out_path``.
    Raises CapabilityError when the device is unavailable or memory runs
    out; this operation is optional equipment, not a pipeline stage.
    """
    config = config.validated()
    device = _resolve_device(config)
    documents = list(documents)
    indices, class_ids = read_pseudo_csv(pseudo_path)
    if indices.min() < 0 or indices.max() >= len(documents):
        raise ValueError(
            f"pseudo label references document {int(indices.min())}..{int(indices.max())} "
            f"but only {len(documents)} documents were given"
        )
    k = num_labels if num_labels is not None else int(class_ids.max()) + 1

    torch.manual_seed(config.seed)
    tokenizer = AutoTokenizer.from_pretrained(config.model)
    model = AutoModelForSequenceClassification.from_pretrained(config.model, num_labels=k)
    model.to(device)

    def encode(texts):
        return tokenizer(
            texts, padding=True, truncation=True,
            max_length=config.window, return_tensors="pt",
        ).to(device)

    train_texts = [documents[i] for i in indices]
    labels = torch.tensor(class_ids, dtype=torch.long, device=device)
    optimizer = torch.optim.AdamW(model.parameters(), lr=learning_rate)
    shuffler = torch.Generator().manual_seed(config.seed)

    try:
        model.train()
        for epoch in range(epochs):
            total = 0.0
            for batch in _batches(len(train_texts), config.batch_size, shuffler):
                optimizer.zero_grad()
                out = model(**encode([train_texts[i] for i in batch]), labels=labels[batch])
                out.loss.backward()
                optimizer.step()
                total += float(out.loss.detach())
            logger.info("epoch %d: mean batch loss %.4f", epoch, total)

        model.eval()
        predictions = []
        with torch.no_grad():
            for batch in _batches(len(documents), config.batch_size):
                logits = model(**encode([documents[i] for i in batch])).logits
                predictions.extend(int(p) for p in logits.argmax(dim=1))
    except torch.cuda.OutOfMemoryError as exc:
        raise CapabilityError(f"out of device memory: {exc}") from exc
    except RuntimeError as exc:
        if "out of memory" in str(exc).lower():
            raise CapabilityError(f"out of memory: {exc}") from exc
        raise

    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text("".join(f"{p}\n" for p in predictions), encoding="utf-8")
    return out

"""Turn raw text into the embedded-corpus directory format the pipeline reads."""

from .config import LAYER_POLICIES, EmbedderConfig
from .embed import embed_corpus, embed_documents
from .finetune import CapabilityError, finetune_classifier, read_pseudo_csv
from .xcef import normalize_word, write_corpus

__all__ = [
    "CapabilityError",
    "EmbedderConfig",
    "LAYER_POLICIES",
    "embed_corpus",
    "embed_documents",
    "finetune_classifier",
    "normalize_word",
    "read_pseudo_csv",
    "write_corpus",
]

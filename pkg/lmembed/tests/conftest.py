"""A tiny randomly initialized model so tests never touch the network."""

import pytest
import torch
from tokenizers import Tokenizer, normalizers, pre_tokenizers, processors
from tokenizers.models import WordPiece
from transformers import BertConfig, BertModel, BertTokenizerFast

# Wordpiece vocabulary: "cats" splits into cat + ##s, "fisherman" into
# fisher + ##man; everything else is a single piece.
TINY_VOCAB = [
    "[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]",
    "the", "sun", "rises", "over", "old", "harbor", "boats", "drift",
    "past", "stone", "walls", "gulls", "call", "morning", "light",
    "water", "cold", "wind", "salt", "nets", "mend", "slow", "tide",
    "cat", "##s", "fisher", "##man",
]

MAX_POSITIONS = 32
HIDDEN = 16


@pytest.fixture(scope="session")
def tiny_model_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("tiny_model")
    # constructing from vocab_file alone leaves the fast backend empty, so
    # the wordpiece model is built explicitly
    backend = Tokenizer(WordPiece({w: i for i, w in enumerate(TINY_VOCAB)}, unk_token="[UNK]"))
    backend.normalizer = normalizers.BertNormalizer(lowercase=True)
    backend.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    backend.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", 2), ("[SEP]", 3)],
    )
    tokenizer = BertTokenizerFast(
        tokenizer_object=backend, unk_token="[UNK]", pad_token="[PAD]",
        cls_token="[CLS]", sep_token="[SEP]", mask_token="[MASK]",
    )

    config = BertConfig(
        vocab_size=len(TINY_VOCAB),
        hidden_size=HIDDEN,
        num_hidden_layers=2,
        num_attention_heads=2,
        intermediate_size=32,
        max_position_embeddings=MAX_POSITIONS,
        pad_token_id=0,
    )
    torch.manual_seed(0)
    model = BertModel(config)
    model.save_pretrained(path)
    tokenizer.save_pretrained(path)
    return path

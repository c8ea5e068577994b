"""Run configuration shared by embedding and fine-tuning."""

from dataclasses import dataclass

LAYER_POLICIES = ("last", "last4")

# Uncased for representations, cased when fine-tuning a classifier.
DEFAULT_REP_MODEL = "bert-base-uncased"
DEFAULT_CLS_MODEL = "bert-base-cased"


@dataclass(frozen=True)
class EmbedderConfig:
    model: str = DEFAULT_REP_MODEL
    layers: str = "last"  # or "last4": mean of the last four hidden layers
    window: int = 512  # wordpiece positions per forward pass, specials included
    stride: int = 256  # content positions advanced between windows
    batch_size: int = 16
    device: str = "cpu"
    seed: int = 0

    def validated(self) -> "EmbedderConfig":
        if self.layers not in LAYER_POLICIES:
            raise ValueError(f"layers must be one of {LAYER_POLICIES}, got {self.layers!r}")
        if self.window < 3:
            raise ValueError("window must hold at least one content position plus specials")
        if not 0 < self.stride <= self.window - 2:
            raise ValueError(f"stride must be in [1, window - 2], got {self.stride}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        return self

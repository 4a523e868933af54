"""Export configuration shared by the three exporters."""

from __future__ import annotations

from dataclasses import dataclass


class BridgeError(Exception):
    """A checkpoint or input artifact does not meet the export contract."""


class BridgeConfigError(Exception):
    """An export parameter is invalid."""


@dataclass(frozen=True)
class BridgeConfig:
    corpus_path: str
    output_path: str
    model_id: str
    batch_size: int = 8
    device: str = "cpu"
    # None means the model's own maximum sequence length.
    max_length: int | None = None

    def __post_init__(self) -> None:
        if self.batch_size < 1:
            raise BridgeConfigError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.max_length is not None and self.max_length < 3:
            # Two positions go to the sequence delimiters; below three nothing
            # of the text itself survives.
            raise BridgeConfigError(f"max_length must be >= 3, got {self.max_length}")

"""Transformer wrapper: subtokenization and hidden-state lookup.

The encoder owns the tokenizer/model pair, knows how many special tokens the
model wraps around a sequence, and turns a batch of subtoken blocks into one
float32 vector per subtoken, read from a chosen hidden layer.  Layers are
addressed from the end: -1 is the last layer, -2 the one before it.
"""

from __future__ import annotations

import numpy as np
import torch

from tkextract.errors import ExtractorConfigError


class Encoder:
    """A loaded tokenizer/model pair with batched hidden-state extraction."""

    def __init__(self, model_name: str):
        from transformers import AutoModel, AutoTokenizer

        try:
            self.tokenizer = AutoTokenizer.from_pretrained(model_name)
            self.model = AutoModel.from_pretrained(model_name)
        except (OSError, ValueError) as exc:
            raise ExtractorConfigError(
                f"cannot load model {model_name!r}: {exc}"
            ) from exc
        self.model.eval()

        # Learn the single-sequence special-token template (prefix + sequence
        # + suffix) by locating a lone unknown token inside an encoded probe.
        unk_id = self.tokenizer.unk_token_id
        if unk_id is None:
            self._prefix_ids: list[int] = []
            self._suffix_ids: list[int] = []
        else:
            probe = self.tokenizer(
                self.tokenizer.unk_token, add_special_tokens=True
            )["input_ids"]
            at = probe.index(unk_id)
            self._prefix_ids = [int(i) for i in probe[:at]]
            self._suffix_ids = [int(i) for i in probe[at + 1 :]]
        self.prefix_len = len(self._prefix_ids)
        self.suffix_len = len(self._suffix_ids)
        pad_id = self.tokenizer.pad_token_id
        self.pad_id = 0 if pad_id is None else int(pad_id)

        config = self.model.config
        self.dim = int(config.hidden_size)
        self.num_layers = int(config.num_hidden_layers)
        max_positions = getattr(config, "max_position_embeddings", None)
        if max_positions is None:
            self.max_block_capacity = None
        else:
            self.max_block_capacity = (
                int(max_positions) - self.prefix_len - self.suffix_len
            )

    def validate_layer(self, layer_index: int) -> None:
        """Reject offsets that reach past the model's layer stack."""
        if abs(layer_index) > self.num_layers:
            raise ExtractorConfigError(
                f"layer {layer_index} does not exist: the model has only "
                f"{self.num_layers} hidden layers"
            )

    def subtokenize(self, word: str) -> tuple[int, ...]:
        """Return the subtoken ids of one word, without special tokens."""
        return tuple(self.tokenizer(word, add_special_tokens=False)["input_ids"])

    def encode_blocks(
        self, blocks: list[list[int]], layer_index: int
    ) -> list[np.ndarray]:
        """Run one batch of subtoken blocks through the model.

        Each block is a flat list of subtoken ids.  Returns, per block, a
        float32 array of shape (len(block), dim) holding the hidden state of
        every subtoken at ``layer_index`` (negative, counted from the last
        layer).  Special and padding positions are never returned.
        """
        rows = [
            self._prefix_ids + list(block) + self._suffix_ids for block in blocks
        ]
        width = max(len(row) for row in rows)
        input_ids = torch.full((len(rows), width), self.pad_id, dtype=torch.long)
        attention = torch.zeros((len(rows), width), dtype=torch.long)
        for i, row in enumerate(rows):
            input_ids[i, : len(row)] = torch.tensor(row, dtype=torch.long)
            attention[i, : len(row)] = 1
        with torch.no_grad():
            output = self.model(
                input_ids=input_ids,
                attention_mask=attention,
                output_hidden_states=True,
            )
        states = output.hidden_states[layer_index]
        vectors: list[np.ndarray] = []
        for i, block in enumerate(blocks):
            start = self.prefix_len
            piece_states = states[i, start : start + len(block), :]
            vectors.append(
                np.ascontiguousarray(piece_states.cpu().numpy(), dtype=np.float32)
            )
        return vectors

"""Build a tiny randomly-initialized BERT for offline tests.

The vocabulary is handcrafted so the tests know exactly how words split:
"flowing" -> flow + ##ing, "swimmers" -> swim + ##mer + ##s, and so on.
Weights are random but seeded, so every test run sees the same model.
"""

from __future__ import annotations

from pathlib import Path

WORDPIECES = [
    "[PAD]",
    "[UNK]",
    "[CLS]",
    "[SEP]",
    "[MASK]",
    "the",
    "a",
    "river",
    "bank",
    "money",
    "water",
    "deep",
    "old",
    "flow",
    "##ing",
    "fin",
    "##ance",
    "swim",
    "##mer",
    "##s",
    "loan",
    "credit",
    "boat",
    "cash",
    "shore",
    "near",
    "by",
    "in",
    "on",
    "was",
    "is",
    "camp",
    "##fire",
    "light",
    "##house",
]

HIDDEN_SIZE = 32
NUM_LAYERS = 4
MAX_POSITIONS = 48


def build_tiny_encoder(target_dir: Path) -> str:
    """Create and save a seeded tiny BERT; returns the directory path."""
    import torch
    from tokenizers import Tokenizer, models, normalizers, pre_tokenizers, processors
    from transformers import BertConfig, BertModel, PreTrainedTokenizerFast

    target_dir.mkdir(parents=True, exist_ok=True)
    vocab = {piece: i for i, piece in enumerate(WORDPIECES)}
    backend = Tokenizer(
        models.WordPiece(vocab=vocab, unk_token="[UNK]", max_input_chars_per_word=100)
    )
    backend.normalizer = normalizers.BertNormalizer(lowercase=True)
    backend.pre_tokenizer = pre_tokenizers.BertPreTokenizer()
    backend.post_processor = processors.TemplateProcessing(
        single="[CLS] $A [SEP]",
        pair="[CLS] $A [SEP] $B [SEP]",
        special_tokens=[("[CLS]", vocab["[CLS]"]), ("[SEP]", vocab["[SEP]"])],
    )
    tokenizer = PreTrainedTokenizerFast(
        tokenizer_object=backend,
        unk_token="[UNK]",
        pad_token="[PAD]",
        cls_token="[CLS]",
        sep_token="[SEP]",
        mask_token="[MASK]",
    )

    torch.manual_seed(0)
    config = BertConfig(
        vocab_size=len(WORDPIECES),
        hidden_size=HIDDEN_SIZE,
        num_hidden_layers=NUM_LAYERS,
        num_attention_heads=4,
        intermediate_size=64,
        max_position_embeddings=MAX_POSITIONS,
        pad_token_id=0,
    )
    model = BertModel(config)

    model_dir = target_dir / "model"
    tokenizer.save_pretrained(model_dir)
    model.save_pretrained(model_dir)
    return str(model_dir)

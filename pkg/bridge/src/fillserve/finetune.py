"""Masked-language-model fine-tuning for the fill side of the service.

Defaults: batch size 64, learning rate 2e-5, weight decay 0.01, 5 epochs,
masking probability 0.15. ``--base-model`` takes any local or hub checkpoint;
``--scratch`` builds a small randomly-initialized BERT with a word-level
vocabulary from the training corpus, so the full training loop runs offline.

Reruns with a fixed seed reproduce the loss trace up to framework-level
nondeterminism (threaded CPU kernels); bitwise equality is not guaranteed.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .count_model import read_texts

_WORD_RE = re.compile(r"\w+|[^\w\s]+", re.UNICODE)
_SPECIALS = ["[PAD]", "[UNK]", "[CLS]", "[SEP]", "[MASK]"]


@dataclass(frozen=True)
class FinetuneConfig:
    batch_size: int = 64
    learning_rate: float = 2e-5
    weight_decay: float = 0.01
    epochs: int = 5
    mlm_probability: float = 0.15
    max_length: int = 64
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if not 0.0 < self.mlm_probability < 1.0:
            raise ValueError("mlm_probability must be in (0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be positive")


def _build_scratch(texts: list[str], out_dir: Path, hidden_size: int,
                   num_layers: int, max_length: int):
    from transformers import BertConfig, BertForMaskedLM, BertTokenizer

    vocabulary = sorted({word for text in texts for word in _WORD_RE.findall(text)})
    vocab_path = out_dir / "vocab.txt"
    vocab_path.write_text("\n".join(_SPECIALS + vocabulary) + "\n", encoding="utf-8")
    # direct BertTokenizer(vocab_file=...) construction stopped loading the
    # vocabulary in transformers v5; go through from_pretrained instead
    tokenizer = BertTokenizer.from_pretrained(str(out_dir), do_lower_case=False)
    config = BertConfig(vocab_size=tokenizer.vocab_size,
                        hidden_size=hidden_size,
                        num_hidden_layers=num_layers,
                        num_attention_heads=max(1, hidden_size // 32),
                        intermediate_size=hidden_size * 4,
                        max_position_embeddings=max_length + 2)
    return BertForMaskedLM(config), tokenizer


def _mask_batch(input_ids, special_mask, tokenizer, probability, generator):
    import torch

    labels = input_ids.clone()
    matrix = torch.full(labels.shape, probability)
    matrix.masked_fill_(special_mask, 0.0)
    masked = torch.bernoulli(matrix, generator=generator).bool()
    labels[~masked] = -100
    # standard recipe: 80% [MASK], 10% random token, 10% unchanged
    replace = torch.bernoulli(torch.full(labels.shape, 0.8), generator=generator).bool() & masked
    input_ids[replace] = tokenizer.mask_token_id
    randomize = (torch.bernoulli(torch.full(labels.shape, 0.5), generator=generator).bool()
                 & masked & ~replace)
    random_ids = torch.randint(len(tokenizer), labels.shape, generator=generator)
    input_ids[randomize] = random_ids[randomize]
    return input_ids, labels


def finetune(dataset_path: str | Path, out_dir: str | Path, format: str = "jsonl",
             base_model: str | None = None, scratch: bool = False,
             config: FinetuneConfig = FinetuneConfig(),
             hidden_size: int = 64, num_layers: int = 2,
             device: str = "cpu", log=print) -> Path:
    """Fine-tune an MLM on the dataset's texts; returns the artifact directory."""
    import torch
    from transformers import AutoModelForMaskedLM, AutoTokenizer

    if bool(base_model) == scratch:
        raise ValueError("pass exactly one of base_model or scratch")

    texts = read_texts(dataset_path, format)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    torch.manual_seed(config.seed)
    generator = torch.Generator().manual_seed(config.seed)

    if scratch:
        model, tokenizer = _build_scratch(texts, out_dir, hidden_size,
                                          num_layers, config.max_length)
    else:
        tokenizer = AutoTokenizer.from_pretrained(base_model)
        model = AutoModelForMaskedLM.from_pretrained(base_model)
    model.to(device)
    model.train()

    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate,
                                  weight_decay=config.weight_decay)
    encoded = tokenizer(texts, truncation=True, max_length=config.max_length,
                        padding=True, return_tensors="pt",
                        return_special_tokens_mask=True)
    input_ids = encoded["input_ids"]
    attention = encoded["attention_mask"]
    special = encoded["special_tokens_mask"].bool()

    steps = 0
    for epoch in range(config.epochs):
        order = torch.randperm(len(texts), generator=generator)
        epoch_loss = 0.0
        batches = 0
        for start in range(0, len(texts), config.batch_size):
            index = order[start:start + config.batch_size]
            batch_ids, labels = _mask_batch(input_ids[index].clone(),
                                            special[index], tokenizer,
                                            config.mlm_probability, generator)
            output = model(input_ids=batch_ids.to(device),
                           attention_mask=attention[index].to(device),
                           labels=labels.to(device))
            output.loss.backward()
            optimizer.step()
            optimizer.zero_grad()
            epoch_loss += float(output.loss.detach())
            batches += 1
            steps += 1
        log(f"epoch {epoch + 1}/{config.epochs}: mean loss "
            f"{epoch_loss / max(1, batches):.4f}")

    model.eval()
    model.save_pretrained(out_dir)
    tokenizer.save_pretrained(out_dir)
    log(f"saved model artifacts to {out_dir} ({steps} steps)")
    return out_dir

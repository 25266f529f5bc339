"""Transformer provider: masked-LM fill plus sentence embeddings.

Loads a fine-tuned masked language model (see ``fillserve finetune``) for
fill requests. Embeddings come from a sentence-transformers model when one
is configured, otherwise from mean-pooled encoder hidden states of the fill
model. Inference is eval-mode, no-grad, CPU by default: deterministic given
fixed weights. torch/transformers are imported lazily so the count provider
stays light.
"""

from __future__ import annotations

from pathlib import Path


class MlmModel:
    def __init__(self, model, tokenizer, device, sentence_encoder=None) -> None:
        self._model = model
        self._tokenizer = tokenizer
        self._device = device
        self._sentence_encoder = sentence_encoder
        specials = set(tokenizer.all_special_ids)
        vocab = tokenizer.get_vocab()
        # candidate ids: whole-word pieces only, no specials, no continuations
        self._candidate_ids = [
            token_id for token, token_id in sorted(vocab.items(), key=lambda kv: kv[1])
            if token_id not in specials and not token.startswith("##")
        ]

    @classmethod
    def load(cls, model_dir: str | Path, embed_model: str | None = None,
             device: str = "cpu") -> "MlmModel":
        import torch
        from transformers import AutoModelForMaskedLM, AutoTokenizer

        tokenizer = AutoTokenizer.from_pretrained(str(model_dir))
        model = AutoModelForMaskedLM.from_pretrained(str(model_dir))
        model.to(device)
        model.eval()
        torch.set_grad_enabled(False)
        sentence_encoder = None
        if embed_model:
            from sentence_transformers import SentenceTransformer
            sentence_encoder = SentenceTransformer(embed_model, device=device)
        return cls(model, tokenizer, device, sentence_encoder)

    def _encode_with_masks(self, tokens, masked_positions):
        tokenizer = self._tokenizer
        masked = set(masked_positions)
        ids = [tokenizer.cls_token_id]
        slots = {}
        for index, word in enumerate(tokens):
            if index in masked:
                slots[index] = len(ids)
                ids.append(tokenizer.mask_token_id)
            else:
                pieces = tokenizer.encode(word, add_special_tokens=False)
                ids.extend(pieces or [tokenizer.unk_token_id])
        ids.append(tokenizer.sep_token_id)
        return ids, slots

    def fill(self, tokens, masked_positions, k) -> list[list[tuple[str, float]]]:
        import torch

        ids, slots = self._encode_with_masks(tokens, masked_positions)
        input_ids = torch.tensor([ids], device=self._device)
        logits = self._model(input_ids=input_ids).logits[0]
        candidate_ids = torch.tensor(self._candidate_ids, device=self._device)
        results = []
        for position in masked_positions:
            row = torch.log_softmax(logits[slots[position]], dim=-1)
            scores = row[candidate_ids]
            take = min(k, len(self._candidate_ids))
            top = torch.topk(scores, take)
            per_position = [
                (self._tokenizer.convert_ids_to_tokens(int(candidate_ids[i])),
                 float(score))
                for score, i in zip(top.values, top.indices)
            ]
            if len(per_position) < k:
                per_position += [per_position[-1]] * (k - len(per_position))
            results.append(per_position)
        return results

    def embed(self, texts) -> list[list[float]]:
        if self._sentence_encoder is not None:
            return [vector.tolist()
                    for vector in self._sentence_encoder.encode(list(texts))]
        import torch

        encoded = self._tokenizer(list(texts), padding=True, truncation=True,
                                  max_length=128, return_tensors="pt").to(self._device)
        output = self._model(**encoded, output_hidden_states=True)
        hidden = output.hidden_states[-1]
        mask = encoded["attention_mask"].unsqueeze(-1)
        pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1)
        return [vector.tolist() for vector in pooled]

"""Perplexity of a text line under a causal language model.

The model's own sub-word tokenizer segments the line; perplexity is the
exponentiated mean negative log-likelihood of those tokens, each predicted
from a BOS-anchored left context.
"""

from __future__ import annotations

import torch
from transformers import AutoModelForCausalLM, AutoTokenizer


class ScoringSession:
    """One loaded model plus tokenizer, scoring lines deterministically."""

    def __init__(self, model_id: str, device: str = "cpu"):
        self.model_id = model_id
        self.device = device
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForCausalLM.from_pretrained(model_id)
        self.model.to(device)
        self.model.eval()
        bos = self.tokenizer.bos_token_id
        if bos is None:
            bos = self.tokenizer.eos_token_id
        if bos is None:
            raise ValueError(f"tokenizer of {model_id!r} has neither BOS nor EOS")
        self._bos = bos
        self._max_len = int(getattr(self.model.config, "max_position_embeddings", 1024))

    def sentence_ppl(self, text: str) -> float:
        """exp(mean NLL) over the line's tokens; raises on empty input."""
        ids = self.tokenizer.encode(text, add_special_tokens=False)
        if not ids:
            raise ValueError("no tokens in input line")
        ids = ids[: self._max_len - 1]
        input_ids = torch.tensor([[self._bos] + ids], device=self.device)
        with torch.no_grad():
            logits = self.model(input_ids).logits[0]
        logprobs = torch.log_softmax(logits[:-1].float(), dim=-1)
        targets = torch.tensor(ids, device=self.device)
        nll = -logprobs[torch.arange(len(ids)), targets].mean()
        return float(torch.exp(nll))

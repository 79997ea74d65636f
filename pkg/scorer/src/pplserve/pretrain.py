"""Build a small causal LM from a plain-text corpus, for offline scoring.

Trains a byte-level BPE tokenizer and a compact GPT-2-architecture model on
one-sentence-per-line text, then saves both in a directory the server's
--model flag can load. The result is a toy model: enough to rank fluent
word orderings above scrambled ones, nowhere near a real pretrained LM.
"""

from __future__ import annotations

import argparse
import random
import sys
from pathlib import Path

import torch
from tokenizers import ByteLevelBPETokenizer
from transformers import GPT2Config, GPT2LMHeadModel, PreTrainedTokenizerFast

EOT = "<|endoftext|>"


def pretrain(corpus_path, out_dir, *, vocab_size: int = 1024, n_layer: int = 2,
             n_head: int = 4, n_embd: int = 128, block_size: int = 64,
             batch_size: int = 16, epochs: int = 40, lr: float = 3e-4,
             seed: int = 0, log=None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    torch.manual_seed(seed)
    rng = random.Random(seed)

    bpe = ByteLevelBPETokenizer()
    bpe.train([str(corpus_path)], vocab_size=vocab_size, min_frequency=2,
              special_tokens=[EOT])
    tokenizer = PreTrainedTokenizerFast(
        tokenizer_object=bpe._tokenizer,
        bos_token=EOT, eos_token=EOT, unk_token=EOT,
    )
    tokenizer.save_pretrained(out)

    eot_id = tokenizer.eos_token_id
    ids: list[int] = []
    with open(corpus_path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                ids.extend(tokenizer.encode(line))
                ids.append(eot_id)
    usable = (len(ids) // block_size) * block_size
    blocks = torch.tensor(ids[:usable]).view(-1, block_size)

    config = GPT2Config(
        vocab_size=len(tokenizer),
        n_positions=max(256, block_size),
        n_embd=n_embd, n_layer=n_layer, n_head=n_head,
        bos_token_id=eot_id, eos_token_id=eot_id,
    )
    model = GPT2LMHeadModel(config)
    model.train()
    optimizer = torch.optim.AdamW(model.parameters(), lr=lr)

    step = 0
    for epoch in range(epochs):
        order = list(range(len(blocks)))
        rng.shuffle(order)
        for start in range(0, len(order), batch_size):
            batch = blocks[order[start : start + batch_size]]
            loss = model(batch, labels=batch).loss
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            step += 1
        if log and (epoch + 1) % 10 == 0:
            log(f"epoch {epoch + 1}/{epochs} loss {loss.item():.3f}")

    model.eval()
    model.save_pretrained(out)
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pplserve-pretrain",
        description="Train a tiny offline causal LM from one-sentence-per-line text.",
    )
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--vocab-size", type=int, default=1024)
    parser.add_argument("--layers", type=int, default=2)
    parser.add_argument("--heads", type=int, default=4)
    parser.add_argument("--embed", type=int, default=128)
    parser.add_argument("--epochs", type=int, default=40)
    parser.add_argument("--lr", type=float, default=3e-4)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    pretrain(
        args.corpus, args.out,
        vocab_size=args.vocab_size, n_layer=args.layers, n_head=args.heads,
        n_embd=args.embed, epochs=args.epochs, lr=args.lr, seed=args.seed,
        log=lambda msg: print(msg, file=sys.stderr),
    )
    print(args.out)
    return 0


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()

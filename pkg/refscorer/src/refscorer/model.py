"""Word-level LSTM language model at toy scale.

One embedding layer, one recurrent layer, tied to nothing, trained with
Adam. Validation perplexity mirrors the benchmark's n-gram accounting:
start symbols are never predicted, the end symbol is, and positions whose
target is the unknown marker are excluded from both the sum and the count.
"""

from __future__ import annotations

import math
import random
from collections import Counter

import torch
from torch import nn

PAD = "<pad>"
UNK = "<unk>"
BOS = "<s>"
EOS = "</s>"
RESERVED = (PAD, UNK, BOS, EOS)

CHECKPOINT_VERSION = 1


def set_determinism(seed: int) -> None:
    # Single-threaded CPU keeps runs bit-stable for a fixed torch version.
    torch.manual_seed(seed)
    torch.set_num_threads(1)


def build_vocab(sentences, size: int = 50000) -> list[str]:
    counts = Counter()
    for sent in sentences:
        counts.update(sent)
    for symbol in RESERVED:
        counts.pop(symbol, None)
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[:size]
    return list(RESERVED) + [w for w, _ in ranked]


class TinyLM(nn.Module):
    def __init__(self, vocab: list[str], embedding_size: int = 64, hidden_size: int = 128):
        super().__init__()
        self.vocab = list(vocab)
        self.stoi = {w: i for i, w in enumerate(self.vocab)}
        self.embedding_size = embedding_size
        self.hidden_size = hidden_size
        self.embedding = nn.Embedding(len(self.vocab), embedding_size, padding_idx=0)
        self.rnn = nn.LSTM(embedding_size, hidden_size, num_layers=1, batch_first=True)
        self.projection = nn.Linear(hidden_size, len(self.vocab))

    def token_id(self, token: str) -> int:
        return self.stoi.get(token, self.stoi[UNK])

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        hidden, _ = self.rnn(self.embedding(ids))
        return self.projection(hidden)

    @torch.no_grad()
    def next_token_logprobs(self, prefix: list[str]) -> torch.Tensor:
        """Log distribution over the vocabulary after consuming the prefix."""
        self.eval()
        ids = torch.tensor(
            [[self.stoi[BOS]] + [self.token_id(t) for t in prefix]], dtype=torch.long
        )
        logits = self.forward(ids)[0, -1]
        return torch.log_softmax(logits, dim=-1)


def _batches(sentences, rng: random.Random, batch_size: int):
    order = list(range(len(sentences)))
    rng.shuffle(order)
    for start in range(0, len(order), batch_size):
        yield [sentences[i] for i in order[start : start + batch_size]]


def _encode_batch(model: TinyLM, batch):
    width = max(len(s) for s in batch) + 1
    bos, eos, pad = model.stoi[BOS], model.stoi[EOS], model.stoi[PAD]
    inputs = torch.full((len(batch), width), pad, dtype=torch.long)
    targets = torch.full((len(batch), width), pad, dtype=torch.long)
    for row, sent in enumerate(batch):
        ids = [model.token_id(t) for t in sent]
        inputs[row, : len(ids) + 1] = torch.tensor([bos] + ids)
        targets[row, : len(ids) + 1] = torch.tensor(ids + [eos])
    return inputs, targets


@torch.no_grad()
def validation_perplexity(model: TinyLM, sentences, batch_size: int = 64) -> float:
    """Perplexity over real-token and end-symbol positions, unknowns excluded."""
    model.eval()
    pad, unk = model.stoi[PAD], model.stoi[UNK]
    total = 0.0
    count = 0
    for start in range(0, len(sentences), batch_size):
        batch = sentences[start : start + batch_size]
        inputs, targets = _encode_batch(model, batch)
        logprobs = torch.log_softmax(model.forward(inputs), dim=-1)
        picked = logprobs.gather(-1, targets.unsqueeze(-1)).squeeze(-1)
        mask = (targets != pad) & (targets != unk)
        total += picked[mask].sum().item()
        count += int(mask.sum().item())
    if count == 0:
        raise ValueError("no predictable positions in the validation set")
    return math.exp(-total / count)


def train(
    corpus_path: str,
    epochs: int,
    seed: int,
    embedding_size: int = 64,
    hidden_size: int = 128,
    vocab_size: int = 50000,
    batch_size: int = 64,
    learning_rate: float = 2e-3,
    holdout_every: int = 9,
):
    """Train on the corpus, holding out every `holdout_every`-th sentence for
    validation. Returns (model, validation_perplexity)."""
    with open(corpus_path, encoding="utf-8") as handle:
        sentences = [line.split() for line in handle if line.split()]
    if not sentences:
        raise ValueError(f"empty corpus: {corpus_path}")
    validation = [s for i, s in enumerate(sentences) if i % holdout_every == holdout_every - 1]
    training = [s for i, s in enumerate(sentences) if i % holdout_every != holdout_every - 1]
    if not validation:
        validation = training

    set_determinism(seed)
    model = TinyLM(build_vocab(training, vocab_size), embedding_size, hidden_size)
    optimizer = torch.optim.Adam(model.parameters(), lr=learning_rate)
    loss_fn = nn.CrossEntropyLoss(ignore_index=model.stoi[PAD])
    rng = random.Random(seed)
    for _ in range(epochs):
        model.train()
        for batch in _batches(training, rng, batch_size):
            inputs, targets = _encode_batch(model, batch)
            optimizer.zero_grad()
            logits = model.forward(inputs)
            loss = loss_fn(logits.reshape(-1, logits.shape[-1]), targets.reshape(-1))
            loss.backward()
            optimizer.step()
    return model, validation_perplexity(model, validation)


def save_checkpoint(path: str, model: TinyLM, val_ppl: float, seed: int) -> None:
    torch.save(
        {
            "format_version": CHECKPOINT_VERSION,
            "vocab": model.vocab,
            "embedding_size": model.embedding_size,
            "hidden_size": model.hidden_size,
            "state_dict": model.state_dict(),
            "validation_perplexity": val_ppl,
            "seed": seed,
        },
        path,
    )


def load_checkpoint(path: str) -> tuple[TinyLM, float]:
    payload = torch.load(path, map_location="cpu", weights_only=False)
    if payload.get("format_version") != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version")
    model = TinyLM(payload["vocab"], payload["embedding_size"], payload["hidden_size"])
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, payload["validation_perplexity"]

"""Skip-gram word embeddings with negative sampling.

A compact trainer in the style of the original C implementation: dynamic
context windows, a unigram^0.75 negative-sampling distribution, linear
learning-rate decay, and separate input/output matrices.  Single-threaded
training is bit-reproducible for a fixed seed; an optional lock-free
multi-threaded mode trades that away for speed.
"""

from __future__ import annotations

import threading
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .seeds import make_rng
from .vectors import VectorTable

NEGATIVE_POWER = 0.75


@dataclass
class SgnsConfig:
    dim: int = 200
    window: int = 5
    min_count: int = 5
    negatives: int = 10
    epochs: int = 5
    learning_rate: float = 0.025       # linear decay start
    learning_rate_end: float = 1e-4    # linear decay end
    subsample: float = 0.0             # 0 disables frequent-word subsampling
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.dim < 1 or self.window < 1 or self.epochs < 1:
            raise ValueError("dim, window, and epochs must be positive")
        if self.negatives < 1:
            raise ValueError("at least one negative sample is required")
        if self.min_count < 1:
            raise ValueError("min_count must be >= 1")
        if not 0 < self.learning_rate_end <= self.learning_rate:
            raise ValueError("learning rate must decay toward a positive end value")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")


@dataclass
class SgnsVocab:
    """Frequency-sorted vocabulary with the negative-sampling distribution."""

    words: tuple
    counts: tuple
    _cumulative: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        self._index = {w: i for i, w in enumerate(self.words)}
        weights = np.array(self.counts, dtype=np.float64) ** NEGATIVE_POWER
        self._cumulative = np.cumsum(weights / weights.sum())

    def __len__(self):
        return len(self.words)

    def __contains__(self, word):
        return word in self._index

    def index(self, word):
        return self._index[word]

    def sample_negatives(self, rng, k):
        return np.searchsorted(self._cumulative, rng.random(k))


def build_vocab(sentences, min_count):
    """Count words and keep those seen at least min_count times.

    Order is by descending frequency with alphabetical tie-break, so the
    vocabulary is reproducible regardless of input hashing.
    """
    counts = Counter()
    for sentence in sentences:
        counts.update(sentence)
    kept = [(w, c) for w, c in counts.items() if c >= min_count]
    kept.sort(key=lambda item: (-item[1], item[0]))
    if not kept:
        raise ValueError(f"no word reaches min_count={min_count}")
    return SgnsVocab(
        words=tuple(w for w, _ in kept), counts=tuple(c for _, c in kept)
    )


def _log_sigmoid(x):
    return -np.logaddexp(0.0, -x)


def pair_loss_and_grads(v_in, out_vectors, labels):
    """Negative-sampling loss for one (input, targets) update.

    loss = -sum_t [ l_t log s(v_in . u_t) + (1 - l_t) log s(-v_in . u_t) ]

    Returns (loss, grad wrt v_in, grad wrt each output vector).  The
    gradients are of the loss, so training steps subtract them.
    """
    scores = out_vectors @ v_in
    loss = -float(np.sum(labels * _log_sigmoid(scores) + (1 - labels) * _log_sigmoid(-scores)))
    coeff = 1.0 / (1.0 + np.exp(-scores)) - labels      # sigmoid(x) - label
    grad_in = coeff @ out_vectors
    grad_out = np.outer(coeff, v_in)
    return loss, grad_in, grad_out


def _subsample_keep(rng, relative_freq, threshold):
    if threshold <= 0:
        return True
    keep = np.sqrt(threshold / relative_freq)
    return keep >= 1.0 or rng.random() < keep


class _TrainState:
    def __init__(self, vocab, config):
        rng = make_rng(config.seed, "sgns", "init")
        self.syn0 = (rng.random((len(vocab), config.dim)) - 0.5) / config.dim
        self.syn1 = np.zeros((len(vocab), config.dim))
        self.processed = 0
        self.loss_sum = 0.0
        self.loss_pairs = 0


def _encode_sentences(sentences, vocab):
    encoded = []
    for sentence in sentences:
        ids = [vocab.index(w) for w in sentence if w in vocab]
        if len(ids) >= 2:
            encoded.append(np.array(ids, dtype=np.intp))
    return encoded


def _train_span(state, encoded, vocab, config, rng, total_words, lock=None):
    total_freq = sum(vocab.counts)
    rel_freq = np.array(vocab.counts, dtype=np.float64) / total_freq
    lr_start = config.learning_rate
    lr_end = config.learning_rate_end
    for ids in encoded:
        if config.subsample > 0:
            ids = np.array(
                [i for i in ids if _subsample_keep(rng, rel_freq[i], config.subsample)],
                dtype=np.intp,
            )
            if len(ids) < 2:
                continue
        for pos, center in enumerate(ids):
            frac = min(state.processed / total_words, 1.0) if total_words else 1.0
            lr = lr_start + frac * (lr_end - lr_start)
            span = int(rng.integers(1, config.window + 1))
            lo = max(0, pos - span)
            hi = min(len(ids), pos + span + 1)
            for ctx_pos in range(lo, hi):
                if ctx_pos == pos:
                    continue
                target = int(ids[ctx_pos])
                negatives = vocab.sample_negatives(rng, config.negatives)
                negatives = negatives[negatives != target]
                targets = np.concatenate(([target], negatives))
                labels = np.zeros(len(targets))
                labels[0] = 1.0
                v_in = state.syn0[center]
                loss, grad_in, grad_out = pair_loss_and_grads(
                    v_in, state.syn1[targets], labels
                )
                if not np.isfinite(loss):
                    raise RuntimeError(
                        f"non-finite loss after {state.processed} words; "
                        "lower the learning rate"
                    )
                if lock is not None:
                    lock.acquire()
                try:
                    state.syn0[center] -= lr * grad_in
                    np.add.at(state.syn1, targets, -lr * grad_out)
                    state.loss_sum += loss
                    state.loss_pairs += 1
                finally:
                    if lock is not None:
                        lock.release()
            state.processed += 1


def train_sgns(sentences, config=None):
    """Train skip-gram vectors on an iterable of token lists.

    Returns a VectorTable over the retained vocabulary (input vectors).
    Metadata records the configuration and the mean pair loss per epoch.
    With threads=1 the result is a deterministic function of the input
    order and the seed.
    """
    table, _ = train_sgns_with_state(sentences, config)
    return table


def train_sgns_with_state(sentences, config=None):
    """Like train_sgns but also returns the raw training state.

    The state dict carries the context (output) vectors keyed by token,
    which some diagnostics need; the vector table alone is the product.
    """
    config = config or SgnsConfig()
    sentences = [list(s) for s in sentences]
    vocab = build_vocab(sentences, config.min_count)
    encoded = _encode_sentences(sentences, vocab)
    if not encoded:
        raise ValueError("no sentence has two or more in-vocabulary words")
    total_words = sum(len(ids) for ids in encoded) * config.epochs
    state = _TrainState(vocab, config)
    loss_by_epoch = []
    for epoch in range(config.epochs):
        state.loss_sum = 0.0
        state.loss_pairs = 0
        if config.threads == 1:
            rng = make_rng(config.seed, "sgns", "epoch", str(epoch))
            _train_span(state, encoded, vocab, config, rng, total_words)
        else:
            lock = threading.Lock()
            shards = [encoded[i :: config.threads] for i in range(config.threads)]
            workers = [
                threading.Thread(
                    target=_train_span,
                    args=(
                        state,
                        shard,
                        vocab,
                        config,
                        make_rng(config.seed, "sgns", "epoch", str(epoch), str(i)),
                        total_words,
                        lock,
                    ),
                )
                for i, shard in enumerate(shards)
            ]
            for worker in workers:
                worker.start()
            for worker in workers:
                worker.join()
        loss_by_epoch.append(
            state.loss_sum / state.loss_pairs if state.loss_pairs else float("nan")
        )
    vectors = {word: state.syn0[i].copy() for i, word in enumerate(vocab.words)}
    metadata = {
        "model": "sgns",
        "dim": config.dim,
        "window": config.window,
        "min_count": config.min_count,
        "negatives": config.negatives,
        "epochs": config.epochs,
        "learning_rate": config.learning_rate,
        "learning_rate_end": config.learning_rate_end,
        "subsample": config.subsample,
        "seed": config.seed,
        "threads": config.threads,
        "vocab_size": len(vocab),
        "loss_by_epoch": loss_by_epoch,
    }
    table = VectorTable(dim=config.dim, vectors=vectors, metadata=metadata)
    train_state = {
        "context_vectors": {
            word: state.syn1[i].copy() for i, word in enumerate(vocab.words)
        },
        "loss_by_epoch": loss_by_epoch,
        "vocab": vocab,
    }
    return table, train_state

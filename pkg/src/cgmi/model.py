"""Adjective-choice classifier over noun meaning and grammatical gender.

The classifier scores every adjective ``a`` for a noun with meaning vector
``n`` and gender ``g`` as ``w . act(W [e(a); n; onehot(g)])`` and normalizes
the scores with a softmax over the adjective vocabulary.  Training maximizes
the corpus log-likelihood (natural log) minus L1 and L2 penalties, with
analytic gradients and a hand-rolled Adam loop so that every update is
reproducible from the seed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .seeds import make_rng

PROB_ATOL = 1e-12
CHECKPOINT_VERSION = 1
ACTIVATIONS = ("tanh", "relu")

# Noun chunk size for batched forward/backward passes.
_CHUNK = 128


class TrainingDiverged(RuntimeError):
    """Raised when training produces a non-finite loss."""


@dataclass
class CategoricalDistribution:
    """A normalized distribution over an ordered, finite support."""

    support: tuple
    probs: np.ndarray

    def __post_init__(self):
        self.support = tuple(self.support)
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if len(set(self.support)) != len(self.support):
            raise ValueError("support labels must be unique")
        if self.probs.shape != (len(self.support),):
            raise ValueError("probs length must match support length")
        if np.any(self.probs < 0):
            raise ValueError("probabilities must be non-negative")
        if abs(float(self.probs.sum()) - 1.0) > PROB_ATOL:
            raise ValueError(f"probabilities sum to {self.probs.sum()!r}, not 1")

    @classmethod
    def from_weights(cls, support, weights):
        weights = np.asarray(weights, dtype=np.float64)
        total = weights.sum()
        if total <= 0:
            raise ValueError("weights must have positive total")
        probs = weights / total
        return cls(support=tuple(support), probs=probs / probs.sum())

    def prob(self, label):
        return float(self.probs[self.support.index(label)])

    def as_dict(self):
        return {label: float(p) for label, p in zip(self.support, self.probs)}


@dataclass(eq=False)
class NounEntry:
    """One noun type: lemma, lexicalized gender, meaning vector, token weight."""

    lemma: str
    gender: str
    meaning: np.ndarray
    weight: int = 1

    def __post_init__(self):
        self.meaning = np.asarray(self.meaning, dtype=np.float64)
        if self.weight < 1:
            raise ValueError(f"noun {self.lemma!r}: weight must be >= 1")


@dataclass(eq=False)
class AdjectiveVocab:
    """Frequency-ordered adjective vocabulary with fixed vectors."""

    lemmas: tuple
    matrix: np.ndarray        # (len(lemmas), dim) adjective vectors
    frequencies: tuple

    def __post_init__(self):
        self.lemmas = tuple(self.lemmas)
        self.matrix = np.asarray(self.matrix, dtype=np.float64)
        self.frequencies = tuple(int(f) for f in self.frequencies)
        if self.matrix.ndim != 2 or self.matrix.shape[0] != len(self.lemmas):
            raise ValueError("vocab matrix must have one row per lemma")
        if len(self.frequencies) != len(self.lemmas):
            raise ValueError("one frequency per lemma required")
        self._index = {lemma: i for i, lemma in enumerate(self.lemmas)}
        if len(self._index) != len(self.lemmas):
            raise ValueError("adjective lemmas must be unique")

    def __len__(self):
        return len(self.lemmas)

    @property
    def dim(self):
        return self.matrix.shape[1]

    def index(self, lemma):
        return self._index[lemma]

    def __contains__(self, lemma):
        return lemma in self._index

    def top(self, k):
        """The k most frequent adjectives (vocab order is frequency order)."""
        if k > len(self):
            raise ValueError(f"cannot take top {k} of {len(self)} adjectives")
        return AdjectiveVocab(
            lemmas=self.lemmas[:k],
            matrix=self.matrix[:k].copy(),
            frequencies=self.frequencies[:k],
        )

    def content_hash(self):
        digest = hashlib.sha256()
        digest.update("\x00".join(self.lemmas).encode("utf-8"))
        digest.update(np.ascontiguousarray(self.matrix).tobytes())
        return digest.hexdigest()

    @classmethod
    def from_pair_corpus(cls, pair_corpus, adjective_vectors, cap=None):
        """Top-`cap` adjectives by pair frequency that have a vector.

        Ties in frequency break alphabetically so the order is reproducible.
        """
        freqs = pair_corpus.adjective_frequencies()
        covered = [a for a in freqs if a in adjective_vectors]
        covered.sort(key=lambda a: (-freqs[a], a))
        if cap is not None:
            covered = covered[:cap]
        if not covered:
            raise ValueError("no adjective in the pair corpus has a vector")
        matrix = np.stack([adjective_vectors[a] for a in covered])
        return cls(
            lemmas=tuple(covered),
            matrix=matrix,
            frequencies=tuple(freqs[a] for a in covered),
        )


@dataclass
class Dataset:
    """Noun entries with per-noun adjective counts (indices into a vocab)."""

    entries: list                  # list of (NounEntry, {adj_index: count})
    split: str = "train"
    fold: int | None = None

    def __post_init__(self):
        lemmas = [noun.lemma for noun, _ in self.entries]
        if len(set(lemmas)) != len(lemmas):
            raise ValueError("each noun lemma may occur only once in a dataset")
        for noun, counts in self.entries:
            if not counts:
                raise ValueError(f"noun {noun.lemma!r} has no adjective counts")
            for index, count in counts.items():
                if count < 1:
                    raise ValueError(f"noun {noun.lemma!r}: counts must be >= 1")

    def __len__(self):
        return len(self.entries)

    def nouns(self):
        return [noun for noun, _ in self.entries]

    def token_count(self):
        return sum(sum(c.values()) for _, c in self.entries)

    def subset(self, indices, split=None, fold=None):
        return Dataset(
            entries=[self.entries[i] for i in indices],
            split=self.split if split is None else split,
            fold=self.fold if fold is None else fold,
        )

    def arrays(self, params_or_genders, vocab_size):
        """Dense (meanings, gender indices, count matrix) for training."""
        genders = getattr(params_or_genders, "genders", params_or_genders)
        order = {g: i for i, g in enumerate(genders)}
        meanings = np.stack([noun.meaning for noun, _ in self.entries])
        gender_idx = np.array([order[noun.gender] for noun, _ in self.entries])
        counts = np.zeros((len(self.entries), vocab_size))
        for row, (_, entry_counts) in enumerate(self.entries):
            for index, count in entry_counts.items():
                if not 0 <= index < vocab_size:
                    raise ValueError(f"adjective index {index} outside vocab")
                counts[row, index] = count
        return meanings, gender_idx, counts


def build_dataset(pair_corpus, noun_vectors, vocab, split="train"):
    """Join a PairCorpus with noun vectors against an adjective vocab.

    Nouns without a vector, and pairs whose adjective is outside the vocab,
    are dropped.  Noun weight is the number of retained pair tokens.
    """
    entries = []
    for lemma in pair_corpus.nouns():
        if lemma not in noun_vectors:
            continue
        counts = {}
        for (noun, adjective), count in pair_corpus.entries.items():
            if noun == lemma and adjective in vocab:
                counts[vocab.index(adjective)] = counts.get(vocab.index(adjective), 0) + count
        if not counts:
            continue
        entries.append(
            (
                NounEntry(
                    lemma=lemma,
                    gender=pair_corpus.noun_gender[lemma],
                    meaning=noun_vectors[lemma],
                    weight=sum(counts.values()),
                ),
                counts,
            )
        )
    return Dataset(entries=entries, split=split)


@dataclass(eq=False)
class ClassifierParams:
    """Weights of the adjective classifier plus its structural tags."""

    W: np.ndarray              # (hidden, d_adj + d_noun + n_genders)
    w: np.ndarray              # (hidden,)
    activation: str
    hidden: int
    d_adj: int
    d_noun: int
    genders: tuple

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=np.float64)
        self.w = np.asarray(self.w, dtype=np.float64)
        self.genders = tuple(self.genders)
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        expected = (self.hidden, self.d_adj + self.d_noun + len(self.genders))
        if self.W.shape != expected:
            raise ValueError(f"W has shape {self.W.shape}, expected {expected}")
        if self.w.shape != (self.hidden,):
            raise ValueError(f"w has shape {self.w.shape}, expected ({self.hidden},)")
        if not (np.all(np.isfinite(self.W)) and np.all(np.isfinite(self.w))):
            raise ValueError("classifier weights must be finite")

    def copy(self):
        return replace(self, W=self.W.copy(), w=self.w.copy())

    def blocks(self):
        a, n = self.d_adj, self.d_noun
        return self.W[:, :a], self.W[:, a : a + n], self.W[:, a + n :]

    def gender_index(self, gender):
        try:
            return self.genders.index(gender)
        except ValueError:
            raise ValueError(f"gender {gender!r} not in {self.genders}") from None


def init_params(vocab, d_noun, genders, hidden=128, activation="tanh", seed=0):
    """Symmetric uniform init scaled by fan-in."""
    fan_in = vocab.dim + d_noun + len(genders)
    rng = make_rng(seed, "init")
    bound = 1.0 / np.sqrt(fan_in)
    W = rng.uniform(-bound, bound, size=(hidden, fan_in))
    w = rng.uniform(-1.0 / np.sqrt(hidden), 1.0 / np.sqrt(hidden), size=hidden)
    return ClassifierParams(
        W=W,
        w=w,
        activation=activation,
        hidden=hidden,
        d_adj=vocab.dim,
        d_noun=d_noun,
        genders=tuple(genders),
    )


def ablate_gender(params):
    """Zero the gender block: predictions become identical across genders."""
    W = params.W.copy()
    W[:, params.d_adj + params.d_noun :] = 0.0
    return replace(params, W=W)


def softmax(scores):
    shifted = scores - np.max(scores, axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


def log_softmax(scores):
    shifted = scores - np.max(scores, axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def _activate(z, activation):
    if activation == "tanh":
        return np.tanh(z)
    return np.maximum(z, 0.0)


def _activate_deriv(z, hid, activation):
    if activation == "tanh":
        return 1.0 - hid * hid
    return (z > 0.0).astype(np.float64)


def _score_chunk(params, vocab, meanings, gender_idx, keep_hidden=False):
    """Scores (B, A) for a chunk of nouns; optionally returns intermediates."""
    W_adj, W_noun, W_gen = params.blocks()
    z_shared = W_adj @ vocab.matrix.T                        # (H, A)
    z_entry = W_noun @ meanings.T + W_gen[:, gender_idx]     # (H, B)
    z = z_entry.T[:, :, None] + z_shared[None, :, :]         # (B, H, A)
    hid = _activate(z, params.activation)
    scores = np.einsum("bha,h->ba", hid, params.w)
    if keep_hidden:
        return scores, z, hid
    return scores


def adjective_scores(params, vocab, meaning, gender):
    """Unnormalized scores for every adjective, for one (meaning, gender)."""
    meaning = np.asarray(meaning, dtype=np.float64)
    if meaning.shape != (params.d_noun,):
        raise ValueError(f"meaning has shape {meaning.shape}, expected ({params.d_noun},)")
    if not np.all(np.isfinite(meaning)):
        raise ValueError("meaning vector has non-finite components")
    if vocab.dim != params.d_adj:
        raise ValueError(f"vocab dim {vocab.dim} != classifier d_adj {params.d_adj}")
    gi = params.gender_index(gender)
    scores = _score_chunk(params, vocab, meaning[None, :], np.array([gi]))
    return scores[0]


def predict_adjective_distribution(params, vocab, meaning, gender):
    """Softmax distribution over the adjective vocabulary."""
    probs = softmax(adjective_scores(params, vocab, meaning, gender))
    return CategoricalDistribution(support=vocab.lemmas, probs=probs)


def _iter_chunks(n, size=_CHUNK):
    for start in range(0, n, size):
        yield slice(start, min(start + size, n))


def log_likelihood(params, vocab, dataset):
    """Sum over nouns and adjective tokens of log p(adjective | gender, noun)."""
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    meanings, gender_idx, counts = dataset.arrays(params, len(vocab))
    total = 0.0
    for chunk in _iter_chunks(len(dataset)):
        scores = _score_chunk(params, vocab, meanings[chunk], gender_idx[chunk])
        total += float(np.sum(counts[chunk] * log_softmax(scores)))
    return total


def penalty(params, l1, l2):
    theta = (params.W, params.w)
    value = 0.0
    for block in theta:
        value += l1 * float(np.abs(block).sum()) + l2 * float(np.square(block).sum())
    return value


def objective_and_gradient(params, vocab, meanings, gender_idx, counts, l1=0.0, l2=0.0):
    """Regularized log-likelihood and its gradient in (W, w).

    Returns (objective, grad_W, grad_w) for maximization:
    objective = log-likelihood - l1*|theta|_1 - l2*|theta|_2^2.
    """
    grad_W = np.zeros_like(params.W)
    grad_w = np.zeros_like(params.w)
    n_genders = len(params.genders)
    a, d = params.d_adj, params.d_noun
    ll = 0.0
    for chunk in _iter_chunks(meanings.shape[0]):
        scores, z, hid = _score_chunk(
            params, vocab, meanings[chunk], gender_idx[chunk], keep_hidden=True
        )
        c = counts[chunk]
        logp = log_softmax(scores)
        ll += float(np.sum(c * logp))
        residual = c - c.sum(axis=1, keepdims=True) * np.exp(logp)   # (B, A)
        grad_w += np.einsum("ba,bha->h", residual, hid)
        upstream = residual[:, None, :] * (
            params.w[None, :, None] * _activate_deriv(z, hid, params.activation)
        )                                                            # (B, H, A)
        grad_W[:, :a] += np.einsum("bha,ad->hd", upstream, vocab.matrix)
        upstream_sum = upstream.sum(axis=2)                          # (B, H)
        grad_W[:, a : a + d] += upstream_sum.T @ meanings[chunk]
        for gi in range(n_genders):
            mask = gender_idx[chunk] == gi
            if np.any(mask):
                grad_W[:, a + d + gi] += upstream_sum[mask].sum(axis=0)
    objective = ll - penalty(params, l1, l2)
    grad_W -= l1 * np.sign(params.W) + 2.0 * l2 * params.W
    grad_w -= l1 * np.sign(params.w) + 2.0 * l2 * params.w
    return objective, grad_W, grad_w


@dataclass
class TrainConfig:
    hidden: int = 128
    activation: str = "tanh"
    l1: float = 0.001
    l2: float = 0.001
    max_epochs: int = 100
    learning_rate: float = 0.01
    lr_end: float | None = None          # linear decay target; None = constant
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    batch_size: int | None = None        # None = full batch
    val_fraction: float = 0.1
    patience: int | None = 5
    seed: int = 0


@dataclass
class TrainResult:
    params: ClassifierParams
    train_curve: list
    val_curve: list
    best_epoch: int


class _Adam:
    def __init__(self, shapes, lr, beta1, beta2, eps):
        self.m = [np.zeros(s) for s in shapes]
        self.v = [np.zeros(s) for s in shapes]
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.t = 0

    def step(self, grads, lr=None):
        self.t += 1
        lr = self.lr if lr is None else lr
        updates = []
        for i, g in enumerate(grads):
            self.m[i] = self.beta1 * self.m[i] + (1 - self.beta1) * g
            self.v[i] = self.beta2 * self.v[i] + (1 - self.beta2) * g * g
            mhat = self.m[i] / (1 - self.beta1 ** self.t)
            vhat = self.v[i] / (1 - self.beta2 ** self.t)
            updates.append(lr * mhat / (np.sqrt(vhat) + self.eps))
        return updates


def train_classifier(dataset, vocab, config, genders=None, init=None):
    """Fit the classifier by regularized maximum likelihood with Adam.

    Ascends log-likelihood - l1*|theta|_1 - l2*|theta|_2^2.  When a
    validation split is available, stops after `patience` epochs without
    improvement and returns the best-validation parameters; otherwise runs
    all epochs and returns the final parameters.
    """
    if len(dataset) == 0:
        raise ValueError("training dataset is empty")
    if genders is None:
        genders = sorted({noun.gender for noun in dataset.nouns()})
    d_noun = dataset.entries[0][0].meaning.shape[0]
    if init is None:
        params = init_params(
            vocab,
            d_noun,
            genders,
            hidden=config.hidden,
            activation=config.activation,
            seed=config.seed,
        )
    else:
        params = init.copy()

    rng = make_rng(config.seed, "train")
    n_val = int(round(config.val_fraction * len(dataset)))
    use_early_stop = config.patience is not None and n_val >= 1 and n_val < len(dataset)
    if use_early_stop:
        order = rng.permutation(len(dataset))
        val_data = dataset.subset(order[:n_val].tolist(), split="val")
        train_data = dataset.subset(order[n_val:].tolist())
    else:
        train_data = dataset
        val_data = None

    meanings, gender_idx, counts = train_data.arrays(params, len(vocab))
    n_entries = meanings.shape[0]
    batch = n_entries if config.batch_size is None else min(config.batch_size, n_entries)

    adam = _Adam(
        [params.W.shape, params.w.shape],
        config.learning_rate,
        config.beta1,
        config.beta2,
        config.adam_eps,
    )
    train_curve = []
    val_curve = []
    best_val = -np.inf
    best_params = params.copy()
    best_epoch = 0
    stale = 0

    for epoch in range(config.max_epochs):
        if config.lr_end is None or config.max_epochs <= 1:
            lr = config.learning_rate
        else:
            frac = epoch / (config.max_epochs - 1)
            lr = config.learning_rate + frac * (config.lr_end - config.learning_rate)
        order = rng.permutation(n_entries) if batch < n_entries else np.arange(n_entries)
        epoch_obj = 0.0
        for start in range(0, n_entries, batch):
            take = order[start : start + batch]
            # Scale the penalty so one epoch applies it exactly once.
            scale = len(take) / n_entries
            obj, gW, gw = objective_and_gradient(
                params,
                vocab,
                meanings[take],
                gender_idx[take],
                counts[take],
                l1=config.l1 * scale,
                l2=config.l2 * scale,
            )
            if not np.isfinite(obj):
                raise TrainingDiverged(f"non-finite objective at epoch {epoch}")
            dW, dw = adam.step([gW, gw], lr=lr)
            params.W += dW
            params.w += dw
            epoch_obj += obj
        train_curve.append(epoch_obj)
        if val_data is not None:
            val_ll = log_likelihood(params, vocab, val_data)
            val_curve.append(val_ll)
            if not np.isfinite(val_ll):
                raise TrainingDiverged(f"non-finite validation loss at epoch {epoch}")
            if val_ll > best_val:
                best_val = val_ll
                best_params = params.copy()
                best_epoch = epoch
                stale = 0
            else:
                stale += 1
                if use_early_stop and stale > config.patience:
                    break

    if val_data is None:
        best_params = params
        best_epoch = len(train_curve) - 1 if train_curve else 0
    return TrainResult(
        params=best_params,
        train_curve=train_curve,
        val_curve=val_curve,
        best_epoch=best_epoch,
    )


def empirical_gender_marginal(dataset, genders=None, weighting="tokens"):
    """Maximum-likelihood gender marginal of a dataset.

    weighting="tokens" weighs each noun by its token weight; "types" counts
    each noun once.  Genders absent from the data keep probability 0.
    """
    if len(dataset) == 0:
        raise ValueError("dataset is empty")
    if weighting not in ("tokens", "types"):
        raise ValueError("weighting must be 'tokens' or 'types'")
    if genders is None:
        genders = sorted({noun.gender for noun in dataset.nouns()})
    weights = dict.fromkeys(genders, 0.0)
    for noun in dataset.nouns():
        if noun.gender not in weights:
            raise ValueError(f"gender {noun.gender!r} not in support {genders}")
        weights[noun.gender] += noun.weight if weighting == "tokens" else 1.0
    return CategoricalDistribution.from_weights(
        tuple(genders), [weights[g] for g in genders]
    )


def permute_genders(dataset, seed):
    """Uniformly permute gender labels across noun entries.

    The gender multiset is preserved exactly; all other fields are
    untouched.  `seed` may be an int or a numpy Generator.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    genders = [noun.gender for noun, _ in dataset.entries]
    order = rng.permutation(len(genders))
    entries = [
        (replace(noun, gender=genders[order[i]]), counts)
        for i, (noun, counts) in enumerate(dataset.entries)
    ]
    return Dataset(entries=entries, split=dataset.split, fold=dataset.fold)


def split_folds(dataset, folds=5, seed=0):
    """Partition noun entries into cross-validation folds.

    Nouns (not tokens) are the split unit: each noun appears in exactly one
    test fold.  Returns a list of (train, test) Dataset pairs.
    """
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if len(dataset) < folds:
        raise ValueError(f"need at least {folds} nouns for {folds} folds, have {len(dataset)}")
    rng = make_rng(seed, "folds")
    order = rng.permutation(len(dataset))
    chunks = np.array_split(order, folds)
    pairs = []
    for fold, test_idx in enumerate(chunks):
        test_set = set(test_idx.tolist())
        train_idx = [i for i in order.tolist() if i not in test_set]
        pairs.append(
            (
                dataset.subset(sorted(train_idx), split="train", fold=fold),
                dataset.subset(sorted(test_idx.tolist()), split="test", fold=fold),
            )
        )
    return pairs


def save_checkpoint(params, path, extra=None):
    """Write a versioned JSON checkpoint."""
    payload = {
        "format_version": CHECKPOINT_VERSION,
        "activation": params.activation,
        "hidden": params.hidden,
        "d_adj": params.d_adj,
        "d_noun": params.d_noun,
        "genders": list(params.genders),
        "W": params.W.tolist(),
        "w": params.w.tolist(),
    }
    if extra:
        payload["meta"] = extra
    with open(path, "w", encoding="utf-8") as stream:
        json.dump(payload, stream, sort_keys=True)
        stream.write("\n")


def load_checkpoint(path):
    with open(path, encoding="utf-8") as stream:
        payload = json.load(stream)
    if payload.get("format_version") != CHECKPOINT_VERSION:
        raise ValueError(f"unsupported checkpoint version {payload.get('format_version')!r}")
    params = ClassifierParams(
        W=np.array(payload["W"], dtype=np.float64),
        w=np.array(payload["w"], dtype=np.float64),
        activation=payload["activation"],
        hidden=payload["hidden"],
        d_adj=payload["d_adj"],
        d_noun=payload["d_noun"],
        genders=tuple(payload["genders"]),
    )
    return params, payload.get("meta", {})

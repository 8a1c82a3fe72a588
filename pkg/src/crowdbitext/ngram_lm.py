"""Smoothed n-gram language models and domain-relevance scoring.

Models are interpolated modified Kneser-Ney, stored ARPA-style as two maps:
n-gram -> ln probability (already interpolated) and context -> ln backoff
weight. Scoring walks from the longest stored match down, accumulating
backoff weights, which reproduces the interpolated model exactly because
every suffix of a stored n-gram is itself stored.

Cross-entropy is natural log per token and the end-of-sentence symbol counts
as a token. The relevance score is the cross-entropy difference between an
in-domain and a general model; lower means more in-domain.
"""

from __future__ import annotations

import logging
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field

from .textkit import Sentence

log = logging.getLogger(__name__)

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

MODE_WHITESPACE = "whitespace"
MODE_CHARACTER = "character"

MAX_ORDER = 5
MIN_TRAIN_SENTENCES = 50

# fallback discounts by count bucket, used when count-of-counts are too
# sparse for the closed-form estimate
_FALLBACK_D = (0.5, 1.0, 1.5)
_MIN_DISCOUNT = 0.05

Gram = tuple[str, ...]


@dataclass
class LmModel:
    order: int
    tokenizer_mode: str
    # gram -> ln of the fully interpolated probability of gram[-1] given gram[:-1]
    probs: dict[Gram, float] = field(repr=False)
    # context -> ln of its backoff weight
    backoffs: dict[Gram, float] = field(repr=False)
    vocab: frozenset[str] = field(repr=False)  # prediction vocabulary; no BOS


@dataclass(frozen=True)
class MlScore:
    sentence_ref: Sentence
    h_in: float
    h_gen: float
    score: float


def tokenize(text: str, mode: str) -> list[str]:
    if mode == MODE_WHITESPACE:
        return text.split()
    if mode == MODE_CHARACTER:
        return [c for c in text if not c.isspace()]
    raise ValueError(f"unknown tokenizer mode {mode!r}")


def _raw_counts(corpus: list[Sentence], order: int, mode: str) -> list[Counter]:
    """Raw n-gram counts for every length 1..order.

    Sentences are padded with order-1 start symbols and one end symbol.
    Windows ending in the start symbol are skipped: the start symbol is
    context only and never predicted.
    """
    counts: list[Counter] = [Counter() for _ in range(order + 1)]  # index by length
    pad = [BOS] * (order - 1)
    for s in corpus:
        tokens = pad + tokenize(s.text, mode) + [EOS]
        for k in range(1, order + 1):
            for i in range(len(tokens) - k + 1):
                gram = tuple(tokens[i : i + k])
                if gram[-1] == BOS:
                    continue
                counts[k][gram] += 1
    return counts


def _discounts(counter: Counter) -> tuple[float, float, float]:
    """Closed-form modified KN discounts for the 1, 2 and 3+ count buckets."""
    n = Counter()
    for c in counter.values():
        if c <= 4:
            n[c] += 1
    if n[1] + 2 * n[2] == 0:
        return _FALLBACK_D
    y = n[1] / (n[1] + 2 * n[2])
    # a bucket with no mass never applies its discount; any fallback works
    d1 = 1.0 - 2.0 * y * n[2] / n[1] if n[1] else _FALLBACK_D[0]
    d2 = 2.0 - 3.0 * y * n[3] / n[2] if n[2] else _FALLBACK_D[1]
    d3 = 3.0 - 4.0 * y * n[4] / n[3] if n[3] else _FALLBACK_D[2]

    def clamp(value: float, cap: float) -> float:
        # cap at the bucket's count so discounted counts stay non-negative
        return min(max(value, _MIN_DISCOUNT), cap)

    return clamp(d1, 1.0), clamp(d2, 2.0), clamp(d3, 3.0)


def _bucket(d: tuple[float, float, float], count: int) -> float:
    return d[min(count, 3) - 1]


def train_lm(
    corpus: list[Sentence], order: int = 5, tokenizer_mode: str = MODE_WHITESPACE
) -> LmModel:
    """Train an interpolated modified Kneser-Ney model.

    The top order keeps raw counts; every lower order uses continuation
    counts (distinct left-extension types in the raw counts one order up),
    including n-grams starting with the sentence-start symbol. Keeping one
    counting rule for all lower orders costs a little accuracy at sentence
    starts but makes the model invariant to duplicating the corpus, which is
    the behavior the scorers rely on.
    """
    if not corpus:
        raise ValueError("training corpus is empty")
    if not 1 <= order <= MAX_ORDER:
        raise ValueError(f"order must be in [1, {MAX_ORDER}]")
    if tokenizer_mode not in (MODE_WHITESPACE, MODE_CHARACTER):
        raise ValueError(f"unknown tokenizer mode {tokenizer_mode!r}")
    if len(corpus) < MIN_TRAIN_SENTENCES:
        log.warning(
            "training on %d sentences; below %d the estimates are rough",
            len(corpus),
            MIN_TRAIN_SENTENCES,
        )

    raw = _raw_counts(corpus, order, tokenizer_mode)
    kn: list[Counter] = [Counter() for _ in range(order + 1)]
    kn[order] = raw[order]
    for k in range(order - 1, 0, -1):
        for gram in raw[k + 1]:
            kn[k][gram[1:]] += 1  # one distinct left extension each

    vocab = frozenset(g[0] for g in kn[1]) | {UNK}
    uniform = 1.0 / len(vocab)

    probs: dict[Gram, float] = {}
    backoffs: dict[Gram, float] = {}
    p_prev: dict[Gram, float] = {}

    for k in range(1, order + 1):
        level = kn[k]
        d = _discounts(level)
        denom: dict[Gram, int] = defaultdict(int)
        mass: dict[Gram, float] = defaultdict(float)
        for gram, c in level.items():
            denom[gram[:-1]] += c
            mass[gram[:-1]] += _bucket(d, c)
        p_cur: dict[Gram, float] = {}
        for gram, c in level.items():
            h = gram[:-1]
            gamma = mass[h] / denom[h]
            lower = p_prev[gram[1:]] if k > 1 else uniform
            p_cur[gram] = max(c - _bucket(d, c), 0.0) / denom[h] + gamma * lower
        if k == 1:
            # unseen tokens share the interpolation mass uniformly
            gamma1 = mass[()] / denom[()]
            p_cur[(UNK,)] = gamma1 * uniform
            for w in vocab:
                p_cur.setdefault((w,), gamma1 * uniform)
        for h in denom:
            backoffs[h] = math.log(mass[h] / denom[h])
        probs.update({g: math.log(p) for g, p in p_cur.items()})
        p_prev = p_cur

    # the empty context's "backoff" is the unigram interpolation weight,
    # already folded into the stored unigram probabilities
    backoffs.pop((), None)
    return LmModel(
        order=order,
        tokenizer_mode=tokenizer_mode,
        probs=probs,
        backoffs=backoffs,
        vocab=vocab,
    )


def _ln_prob(model: LmModel, context: Gram, w: str) -> float:
    """Backoff walk: longest stored match wins, shorter matches pay backoff."""
    acc = 0.0
    ctx = context[-(model.order - 1) :] if model.order > 1 else ()
    while True:
        gram = ctx + (w,)
        if gram in model.probs:
            return acc + model.probs[gram]
        if not ctx:
            return acc + model.probs[(UNK,)]
        acc += model.backoffs.get(ctx, 0.0)
        ctx = ctx[1:]


def _map_oov(model: LmModel, tokens: list[str]) -> list[str]:
    # BOS stays: it is legal in contexts even though it is never predicted
    return [t if t in model.vocab or t == BOS else UNK for t in tokens]


def cross_entropy(model: LmModel, s: Sentence) -> float:
    """Per-token cross-entropy in nats; the end symbol is scored and counted."""
    tokens = _map_oov(model, tokenize(s.text, model.tokenizer_mode))
    if not tokens:
        raise ValueError("no tokens to score")
    padded = [BOS] * (model.order - 1) + tokens + [EOS]
    start = model.order - 1
    total = 0.0
    for i in range(start, len(padded)):
        context = tuple(padded[max(0, i - model.order + 1) : i])
        total += _ln_prob(model, context, padded[i])
    return -total / (len(tokens) + 1)


def perplexity(model: LmModel, corpus: list[Sentence]) -> float:
    """Corpus-level perplexity: exp of token-weighted mean cross-entropy."""
    if not corpus:
        raise ValueError("empty corpus")
    nll = 0.0
    tokens = 0
    for s in corpus:
        t = len(tokenize(s.text, model.tokenizer_mode)) + 1
        nll += cross_entropy(model, s) * t
        tokens += t
    return math.exp(nll / tokens)


def conditional_distribution(model: LmModel, context: Gram) -> dict[str, float]:
    """P(w | context) over the prediction vocabulary; sums to 1."""
    ctx = tuple(_map_oov(model, list(context)))
    return {w: math.exp(_ln_prob(model, ctx, w)) for w in model.vocab}


def ml_score(in_model: LmModel, gen_model: LmModel, s: Sentence) -> MlScore:
    """Cross-entropy difference: negative means the sentence looks in-domain."""
    if in_model.tokenizer_mode != gen_model.tokenizer_mode:
        raise ValueError("models tokenize differently; scores would not be comparable")
    h_in = cross_entropy(in_model, s)
    h_gen = cross_entropy(gen_model, s)
    return MlScore(sentence_ref=s, h_in=h_in, h_gen=h_gen, score=h_in - h_gen)


def select_lowest(
    corpus: list[Sentence], scores: list[MlScore], k: int
) -> list[Sentence]:
    """The k lowest-scoring sentences, ties resolved by corpus order."""
    if k > len(corpus):
        raise ValueError("k exceeds corpus size")
    if len(scores) != len(corpus):
        raise ValueError("scores not aligned with corpus")
    ranked = sorted(range(len(corpus)), key=lambda i: (scores[i].score, i))
    return [corpus[i] for i in sorted(ranked[:k])]


def partition_by_score(pairs: list, scores: list[float], fraction: float):
    """Top, middle and bottom score slices of equal size ⌊fraction·n⌋.

    Higher score ranks first. The middle slice is centered at rank n/2.
    """
    if not 0 < fraction <= 1 / 3:
        raise ValueError("fraction must be in (0, 1/3]")
    if len(scores) != len(pairs):
        raise ValueError("scores not aligned with pairs")
    n = len(pairs)
    size = int(fraction * n)
    order = sorted(range(n), key=lambda i: (-scores[i], i))
    mid_start = (n - size) // 2
    top = [pairs[i] for i in order[:size]]
    middle = [pairs[i] for i in order[mid_start : mid_start + size]]
    bottom = [pairs[i] for i in order[n - size :]]
    return top, middle, bottom


def save_lm(model: LmModel, path: str) -> None:
    """Write the documented model format.

    Header ``NGLM v1 <order> <tokenizer_mode>``; one line per stored n-gram:
    ``lnprob<TAB>token token ...<TAB>lnbackoff`` where the backoff field is
    empty unless the n-gram is also a stored backoff context. Tokens never
    contain whitespace (the tokenizers cannot produce any), and rows are
    sorted, so serialization is deterministic.
    """
    grams = sorted(set(model.probs) | set(model.backoffs))
    lines = [f"NGLM v1 {model.order} {model.tokenizer_mode}"]
    for gram in grams:
        prob = repr(model.probs[gram]) if gram in model.probs else ""
        backoff = repr(model.backoffs[gram]) if gram in model.backoffs else ""
        lines.append(f"{prob}\t{' '.join(gram)}\t{backoff}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_lm(path: str) -> LmModel:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split(" ")
        if len(header) != 4 or header[0] != "NGLM" or header[1] != "v1":
            raise ValueError(f"not an NGLM v1 model file: {path}")
        order = int(header[2])
        mode = header[3]
        if not 1 <= order <= MAX_ORDER:
            raise ValueError(f"order {order} out of range")
        if mode not in (MODE_WHITESPACE, MODE_CHARACTER):
            raise ValueError(f"unknown tokenizer mode {mode!r}")
        probs: dict[Gram, float] = {}
        backoffs: dict[Gram, float] = {}
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 3 or not fields[1]:
                raise ValueError(f"{path}:{lineno}: malformed model row")
            gram = tuple(fields[1].split(" "))
            if fields[0]:
                probs[gram] = float(fields[0])
            if fields[2]:
                backoffs[gram] = float(fields[2])
    vocab = frozenset(g[0] for g in probs if len(g) == 1)
    if (UNK,) not in probs:
        raise ValueError(f"{path}: model has no unknown-token probability")
    return LmModel(
        order=order, tokenizer_mode=mode, probs=probs, backoffs=backoffs, vocab=vocab
    )

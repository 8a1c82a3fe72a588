"""Text normalization, sentence segmentation and character n-gram language ID.

Everything in this module is deterministic and pure; trained LID models are
immutable after training and safe to share between pipeline workers.
"""

from __future__ import annotations

import math
import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field

# Language codes whose scripts are written without spaces between words.
# Segmentation and LM tokenization treat these per-character.
UNSPACED_LANGS = frozenset({"ja", "zh", "yue", "th", "km", "lo", "my"})

# Terminal punctuation. NFKC folds fullwidth ！？ to ASCII but keeps 。,
# so the unspaced set accepts both families.
_SPACED_TERMINALS = ".!?"
_UNSPACED_TERMINALS = "。．！？.!?"

LID_SMOOTHING_ALPHA = 0.1
DEFAULT_MIN_CONFIDENCE = 0.6
MIN_SENTENCE_CHARS = 3


@dataclass(frozen=True)
class Sentence:
    """One segmented sentence: normalized text plus its position in the document."""

    text: str
    index: int

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("sentence text must be non-empty")
        if "\n" in self.text or "\r" in self.text:
            raise ValueError("sentence text must not contain newlines")

    @property
    def char_len(self) -> int:
        return len(self.text)


def normalize_text(raw: str) -> str:
    """NFKC-normalize text (fullwidth to halfwidth, compatibility folding).

    Idempotent; empty input returns empty output.
    """
    return unicodedata.normalize("NFKC", raw)


def _is_abbrev_guard(line: str, dot_pos: int) -> bool:
    # Guard initials like "J. Smith": a period preceded by a single capital
    # letter (no letter before it) does not end a sentence.
    if dot_pos == 0:
        return False
    prev = line[dot_pos - 1]
    if not prev.isupper() or not prev.isalpha():
        return False
    return dot_pos < 2 or not line[dot_pos - 2].isalpha()


def _split_line_spaced(line: str) -> list[str]:
    parts: list[str] = []
    start = 0
    i = 0
    n = len(line)
    while i < n:
        ch = line[i]
        if ch in _SPACED_TERMINALS:
            # consume a run of terminals ("?!", "...")
            j = i
            while j + 1 < n and line[j + 1] in _SPACED_TERMINALS:
                j += 1
            at_end = j + 1 >= n
            followed_by_space = not at_end and line[j + 1].isspace()
            guarded = ch == "." and i == j and _is_abbrev_guard(line, i)
            if (at_end or followed_by_space) and not guarded:
                parts.append(line[start : j + 1])
                start = j + 1
            i = j + 1
        else:
            i += 1
    if start < n:
        parts.append(line[start:])
    return parts


def _split_line_unspaced(line: str) -> list[str]:
    parts: list[str] = []
    start = 0
    for i, ch in enumerate(line):
        if ch in _UNSPACED_TERMINALS:
            parts.append(line[start : i + 1])
            start = i + 1
    if start < len(line):
        parts.append(line[start:])
    return parts


def segment_sentences(text: str, lang: str) -> list[Sentence]:
    """Split normalized text into sentences.

    Splits at newlines and after terminal punctuation; unspaced scripts use
    the ideographic terminals and require no following space. A period after
    a lone capital letter (an initial) never splits. Whitespace-only input
    yields an empty list. No non-whitespace character is ever dropped, so the
    output re-concatenates to the input modulo whitespace.
    """
    splitter = _split_line_unspaced if lang in UNSPACED_LANGS else _split_line_spaced
    sentences: list[Sentence] = []
    for line in text.splitlines():
        for part in splitter(line):
            stripped = part.strip()
            if stripped:
                sentences.append(Sentence(text=stripped, index=len(sentences)))
    return sentences


def drop_short_sentences(
    sentences: list[Sentence], min_chars: int = MIN_SENTENCE_CHARS
) -> list[Sentence]:
    """Drop sub-minimum sentences (noise control ahead of alignment)."""
    return [s for s in sentences if s.char_len >= min_chars]


@dataclass(frozen=True)
class LidModel:
    """Multinomial character n-gram language identifier with add-alpha smoothing.

    ``log_probs[lang]`` maps every n-gram of the shared vocabulary seen in
    that language's training data to its log probability; any n-gram absent
    from the map takes ``unseen_log_prob[lang]``. Per language, the stored
    probabilities plus one unseen-bucket mass sum to 1.
    """

    languages: tuple[str, ...]
    ngram_order: int
    log_probs: dict[str, dict[str, float]] = field(repr=False)
    unseen_log_prob: dict[str, float] = field(repr=False)


def _char_ngrams(text: str, order: int) -> list[str]:
    return [text[i : i + order] for i in range(len(text) - order + 1)]


def train_lid(corpora: dict[str, list[str]], order: int = 3) -> LidModel:
    """Train a character n-gram language identifier.

    Expects at least two languages; around 100+ sentences per language gives
    dependable accuracy. Deterministic given its input.
    """
    if len(corpora) < 2:
        raise ValueError("language ID training needs at least 2 languages")
    if order < 1:
        raise ValueError("ngram order must be >= 1")

    counts: dict[str, Counter[str]] = {}
    for lang, sentences in corpora.items():
        counter: Counter[str] = Counter()
        for raw in sentences:
            counter.update(_char_ngrams(normalize_text(raw), order))
        if not counter:
            raise ValueError(f"empty corpus for language {lang!r}")
        counts[lang] = counter

    vocab = sorted(set().union(*counts.values()))
    vocab_slots = len(vocab) + 1  # +1: the unseen bucket
    alpha = LID_SMOOTHING_ALPHA

    log_probs: dict[str, dict[str, float]] = {}
    unseen: dict[str, float] = {}
    for lang, counter in counts.items():
        total = sum(counter.values())
        denom = total + alpha * vocab_slots
        log_probs[lang] = {
            g: math.log((counter.get(g, 0) + alpha) / denom) for g in vocab
        }
        unseen[lang] = math.log(alpha / denom)

    return LidModel(
        languages=tuple(sorted(corpora)),
        ngram_order=order,
        log_probs=log_probs,
        unseen_log_prob=unseen,
    )


def language_posterior(model: LidModel, s: Sentence) -> dict[str, float]:
    """Posterior over ``model.languages`` plus an ``"unknown"`` bucket.

    A sentence shorter than the n-gram order carries no evidence: all mass
    goes to "unknown". Otherwise the posterior is the softmax of per-language
    log likelihoods under a uniform prior and "unknown" gets 0.
    """
    posterior = {lang: 0.0 for lang in model.languages}
    if len(s.text) < model.ngram_order:
        posterior["unknown"] = 1.0
        return posterior
    posterior["unknown"] = 0.0

    grams = _char_ngrams(s.text, model.ngram_order)
    loglik = {}
    for lang in model.languages:
        table = model.log_probs[lang]
        fallback = model.unseen_log_prob[lang]
        loglik[lang] = sum(table.get(g, fallback) for g in grams)
    peak = max(loglik.values())
    weights = {lang: math.exp(v - peak) for lang, v in loglik.items()}
    z = sum(weights.values())
    for lang, w in weights.items():
        posterior[lang] = w / z
    return posterior


def classify_lang(model: LidModel, s: Sentence) -> tuple[str, float]:
    """Most probable language and its posterior; ("unknown", 0.0) if too short."""
    if len(s.text) < model.ngram_order:
        return "unknown", 0.0
    posterior = language_posterior(model, s)
    best = max(model.languages, key=lambda lang: (posterior[lang], lang))
    return best, posterior[best]


def filter_by_lang(
    model: LidModel,
    sentences: list[Sentence],
    lang: str,
    min_conf: float = DEFAULT_MIN_CONFIDENCE,
) -> list[Sentence]:
    """Keep sentences classified as ``lang`` with confidence >= ``min_conf``.

    Order and original indices are preserved; output is a subsequence of the
    input.
    """
    if not 0.0 <= min_conf <= 1.0:
        raise ValueError("min_conf must be in [0, 1]")
    kept = []
    for s in sentences:
        predicted, conf = classify_lang(model, s)
        if predicted == lang and conf >= min_conf:
            kept.append(s)
    return kept


_ESCAPES = {"\\": "\\\\", "\t": "\\t", "\n": "\\n", "\r": "\\r"}
_UNESCAPES = {"\\\\": "\\", "\\t": "\t", "\\n": "\n", "\\r": "\r"}


def _escape(token: str) -> str:
    for raw, esc in _ESCAPES.items():
        token = token.replace(raw, esc)
    return token


def _unescape(token: str) -> str:
    out = []
    i = 0
    while i < len(token):
        pair = token[i : i + 2]
        if pair in _UNESCAPES:
            out.append(_UNESCAPES[pair])
            i += 2
        else:
            out.append(token[i])
            i += 1
    return "".join(out)


def save_lid(model: LidModel, path: str) -> None:
    """Write the documented line-oriented LID model format.

    Header ``LID v1 <order> <lang,lang,...>``; one ``lang<TAB>ngram<TAB>logprob``
    line per stored n-gram (tab/newline/backslash escaped); a line with an
    empty ngram field carries the language's unseen-bucket log probability.
    Rows are sorted, so identical models serialize byte-identically.
    """
    lines = [f"LID v1 {model.ngram_order} {','.join(model.languages)}"]
    for lang in model.languages:
        lines.append(f"{lang}\t\t{model.unseen_log_prob[lang]!r}")
        for gram in sorted(model.log_probs[lang]):
            lines.append(f"{lang}\t{_escape(gram)}\t{model.log_probs[lang][gram]!r}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def load_lid(path: str) -> LidModel:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        fields = header.split(" ")
        if len(fields) != 4 or fields[0] != "LID" or fields[1] != "v1":
            raise ValueError(f"not a LID v1 model file: {path}")
        order = int(fields[2])
        languages = tuple(fields[3].split(","))
        log_probs: dict[str, dict[str, float]] = {lang: {} for lang in languages}
        unseen: dict[str, float] = {}
        for lineno, line in enumerate(fh, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                lang, gram, logprob = line.split("\t")
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed LID row") from exc
            if gram == "":
                unseen[lang] = float(logprob)
            else:
                log_probs[lang][_unescape(gram)] = float(logprob)
    missing = [lang for lang in languages if lang not in unseen]
    if missing:
        raise ValueError(f"LID model missing unseen mass for {missing}")
    return LidModel(
        languages=languages, ngram_order=order, log_probs=log_probs, unseen_log_prob=unseen
    )

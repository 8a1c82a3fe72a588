"""End-to-end extraction: two page texts in, scored parallel pairs out.

The service and the CLI share this flow. A campaign's trained models and
parameters travel together as one immutable bundle so a report processed
twice with the same bundle produces the same pairs and the same reward.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .align import AlignParams, align_documents, extract_pairs
from .embed import EmbedderConfig, embed_overlaps
from .ngram_lm import (
    MODE_CHARACTER,
    MODE_WHITESPACE,
    LmModel,
    cross_entropy,
    train_lm,
)
from .reward import RewardBreakdown, RewardParams, compute_reward, pair_terms
from .textkit import (
    UNSPACED_LANGS,
    LidModel,
    Sentence,
    drop_short_sentences,
    filter_by_lang,
    normalize_text,
    segment_sentences,
    train_lid,
)

DEFAULT_MIN_LANG_CONF = 0.6


@dataclass(frozen=True)
class CampaignArtifacts:
    """Everything one campaign needs to turn page texts into paid pairs."""

    src_lang: str
    tgt_lang: str
    lid: LidModel = field(repr=False)
    lm_in: LmModel = field(repr=False)
    lm_gen: LmModel = field(repr=False)
    embed_config: EmbedderConfig
    align_params: AlignParams
    reward_params: RewardParams
    min_lang_conf: float = DEFAULT_MIN_LANG_CONF

    def __post_init__(self) -> None:
        if self.src_lang == self.tgt_lang:
            raise ValueError("source and target language must differ")
        if not 0.0 <= self.min_lang_conf <= 1.0:
            raise ValueError("min_lang_conf must be in [0, 1]")


@dataclass(frozen=True)
class ScoredPair:
    """One extracted pair with its alignment cost and domain scores."""

    src_text: str
    tgt_text: str
    cost: float
    s_a: float
    s_d: float
    h_in: float
    h_gen: float


@dataclass(frozen=True)
class PipelineResult:
    pairs: tuple[ScoredPair, ...]
    breakdown: RewardBreakdown
    src_sentences: int  # per side, after language filtering
    tgt_sentences: int


def sentences_from_lines(lines: list[str]) -> list[Sentence]:
    """Normalize pre-segmented lines into Sentence records, skipping blanks."""
    out: list[Sentence] = []
    for line in lines:
        text = normalize_text(line).strip()
        if text:
            out.append(Sentence(text=text, index=len(out)))
    return out


def default_tokenizer_mode(lang: str) -> str:
    return MODE_CHARACTER if lang in UNSPACED_LANGS else MODE_WHITESPACE


def build_artifacts(
    src_lang: str,
    tgt_lang: str,
    dev_src: list[str],
    dev_tgt: list[str],
    general_src: list[str],
    embed_config: EmbedderConfig | None = None,
    align_params: AlignParams | None = None,
    reward_params: RewardParams | None = None,
    lm_order: int = 5,
    lid_order: int = 3,
    min_lang_conf: float = DEFAULT_MIN_LANG_CONF,
) -> CampaignArtifacts:
    """Train a campaign's models from its reference corpora.

    The in-domain model learns the source side of the dev set, the general
    model a general source-language corpus. The language identifier trains
    on the dev set alone: both sides cover the same domain, so neither
    language's n-gram mass is diluted by off-domain text (padding one side
    with the general corpus would deflate its in-domain n-grams and tip
    in-domain sentences toward the other language). Training is
    deterministic given the inputs.
    """
    if src_lang == tgt_lang:
        raise ValueError("source and target language must differ")
    dev_src_sents = sentences_from_lines(dev_src)
    dev_tgt_sents = sentences_from_lines(dev_tgt)
    general_sents = sentences_from_lines(general_src)
    if not dev_src_sents or not dev_tgt_sents:
        raise ValueError("dev set must have sentences on both sides")
    if not general_sents:
        raise ValueError("general corpus is empty")
    mode = default_tokenizer_mode(src_lang)
    lid = train_lid(
        {
            src_lang: [s.text for s in dev_src_sents],
            tgt_lang: [s.text for s in dev_tgt_sents],
        },
        order=lid_order,
    )
    return CampaignArtifacts(
        src_lang=src_lang,
        tgt_lang=tgt_lang,
        lid=lid,
        lm_in=train_lm(dev_src_sents, order=lm_order, tokenizer_mode=mode),
        lm_gen=train_lm(general_sents, order=lm_order, tokenizer_mode=mode),
        embed_config=embed_config or EmbedderConfig(),
        align_params=align_params or AlignParams(),
        reward_params=reward_params or RewardParams(),
        min_lang_conf=min_lang_conf,
    )


def prepare_side(raw_text: str, lang: str, artifacts: CampaignArtifacts) -> list[Sentence]:
    """Page text to alignable sentences: normalize, segment, drop noise, LID-filter."""
    sentences = segment_sentences(normalize_text(raw_text), lang)
    sentences = drop_short_sentences(sentences)
    return filter_by_lang(artifacts.lid, sentences, lang, artifacts.min_lang_conf)


def extract_and_score(
    src_raw: str, tgt_raw: str, artifacts: CampaignArtifacts
) -> PipelineResult:
    """Run the full extraction pipeline on one page-text pair.

    An empty side after filtering short-circuits to zero pairs; that is a
    completed (paid-at-floor) outcome, not an error. Alignment costs above
    the campaign threshold never reach the scored output.
    """
    src_sents = prepare_side(src_raw, artifacts.src_lang, artifacts)
    tgt_sents = prepare_side(tgt_raw, artifacts.tgt_lang, artifacts)
    if not src_sents or not tgt_sents:
        return PipelineResult(
            pairs=(),
            breakdown=compute_reward([], artifacts.reward_params),
            src_sentences=len(src_sents),
            tgt_sentences=len(tgt_sents),
        )
    max_overlap = max(max(m, n) for m, n in artifacts.align_params.allowed_beads)
    src_table = embed_overlaps(artifacts.embed_config, src_sents, max_overlap)
    tgt_table = embed_overlaps(artifacts.embed_config, tgt_sents, max_overlap)
    path = align_documents(
        src_table, tgt_table, len(src_sents), len(tgt_sents), artifacts.align_params
    )
    raw_pairs = extract_pairs(
        path, src_sents, tgt_sents, threshold=artifacts.align_params.cost_threshold
    )
    scored: list[ScoredPair] = []
    terms: list[tuple[float, float]] = []
    for i, pair in enumerate(raw_pairs):
        src_sentence = Sentence(text=pair.src_text, index=i)
        h_in = cross_entropy(artifacts.lm_in, src_sentence)
        h_gen = cross_entropy(artifacts.lm_gen, src_sentence)
        s_a, s_d = pair_terms(pair.cost, h_in, h_gen, artifacts.reward_params)
        terms.append((s_a, s_d))
        scored.append(
            ScoredPair(
                src_text=pair.src_text,
                tgt_text=pair.tgt_text,
                cost=pair.cost,
                s_a=s_a,
                s_d=s_d,
                h_in=h_in,
                h_gen=h_gen,
            )
        )
    return PipelineResult(
        pairs=tuple(scored),
        breakdown=compute_reward(terms, artifacts.reward_params),
        src_sentences=len(src_sents),
        tgt_sentences=len(tgt_sents),
    )

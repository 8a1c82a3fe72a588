import math
import random

import pytest

from crowdbitext import ngram_lm
from crowdbitext.textkit import Sentence, normalize_text
from corpora import (
    en_sentences,
    general_sentences,
    ja_sentences,
    unique_token_sentences,
)


def to_sents(texts: list[str]) -> list[Sentence]:
    return [Sentence(text=t, index=i) for i, t in enumerate(texts)]


def en_model(seed: int = 1, n: int = 200, order: int = 5) -> ngram_lm.LmModel:
    return ngram_lm.train_lm(to_sents(en_sentences(random.Random(seed), n)), order)


def test_vocab_disjointness_of_domain_fixtures():
    # the sign guarantees below rely on this staying true
    rng = random.Random(0)
    in_words = {w for s in en_sentences(rng, 300) for w in s.split()}
    gen_words = {w for s in general_sentences(rng, 300) for w in s.split()}
    assert not in_words & gen_words


def test_train_validation():
    with pytest.raises(ValueError):
        ngram_lm.train_lm([], 5)
    corpus = to_sents(en_sentences(random.Random(1), 60))
    with pytest.raises(ValueError):
        ngram_lm.train_lm(corpus, 6)
    with pytest.raises(ValueError):
        ngram_lm.train_lm(corpus, 0)
    with pytest.raises(ValueError):
        ngram_lm.train_lm(corpus, 5, tokenizer_mode="syllable")


def test_training_sentence_has_finite_cross_entropy():
    model = en_model()
    s = to_sents(en_sentences(random.Random(1), 1))[0]
    h = ngram_lm.cross_entropy(model, s)
    assert math.isfinite(h)
    assert h > 0


def test_unknown_only_sentence_is_finite():
    model = en_model(n=100)
    s = Sentence(text="zzqq wwvv kkjj ppmm", index=0)
    h = ngram_lm.cross_entropy(model, s)
    assert math.isfinite(h)
    # all-unknown text must cost more than a training-domain sentence
    assert h > ngram_lm.cross_entropy(model, to_sents(en_sentences(random.Random(2), 1))[0])


def test_order1_uniform_two_token_corpus():
    # 50 sentences of 100 tokens drawn uniformly from {x, y}: the unigram
    # model sits near ln 2 per token; the end symbol and smoothing push it
    # up a little, hence the loose tolerance
    rng = random.Random(3)
    corpus = to_sents(
        [" ".join(rng.choice("xy") for _ in range(100)) for _ in range(50)]
    )
    model = ngram_lm.train_lm(corpus, order=1)
    query = Sentence(text=" ".join(rng.choice("xy") for _ in range(100)), index=0)
    assert ngram_lm.cross_entropy(model, query) == pytest.approx(math.log(2), abs=0.1)


def test_cross_entropy_decomposes_per_token():
    model = en_model(n=80, order=3)
    s = to_sents(en_sentences(random.Random(4), 1))[0]
    tokens = s.text.split()
    padded = [ngram_lm.BOS] * 2 + [
        t if t in model.vocab else ngram_lm.UNK for t in tokens
    ] + [ngram_lm.EOS]
    total = 0.0
    for i in range(2, len(padded)):
        dist = ngram_lm.conditional_distribution(model, tuple(padded[i - 2 : i]))
        total += math.log(dist[padded[i]])
    direct = ngram_lm.cross_entropy(model, s)
    assert direct == pytest.approx(-total / (len(tokens) + 1), abs=1e-9)


def test_doubling_corpus_preserves_cross_entropy():
    base = to_sents(unique_token_sentences(60))
    single = ngram_lm.train_lm(base, 5)
    doubled = ngram_lm.train_lm(to_sents(unique_token_sentences(60) * 2), 5)
    queries = (
        unique_token_sentences(60)[:5]
        + ["u3t0 u3t1 u7t4 u7t5", "zz yy xx ww", "u0t0"]
    )
    for text in queries:
        s = Sentence(text=text, index=0)
        a = ngram_lm.cross_entropy(single, s)
        b = ngram_lm.cross_entropy(doubled, s)
        assert a == pytest.approx(b, abs=1e-3), text


def test_conditional_distributions_sum_to_one():
    rng = random.Random(5)
    corpus = to_sents(en_sentences(rng, 60))
    seen = sorted({t for s in corpus for t in s.text.split()})
    for order in range(1, 6):
        model = ngram_lm.train_lm(corpus, order)
        for _ in range(100):
            length = rng.randrange(0, order)
            context = tuple(
                rng.choice(
                    [rng.choice(seen), "zzunseen", ngram_lm.BOS, ngram_lm.EOS]
                )
                for _ in range(length)
            )
            dist = ngram_lm.conditional_distribution(model, context)
            assert sum(dist.values()) == pytest.approx(1.0, abs=1e-6)
            assert all(0 < p <= 1 for p in dist.values())
            assert ngram_lm.BOS not in dist


def test_character_mode_for_unspaced_text():
    corpus = to_sents(ja_sentences(random.Random(6), 120))
    model = ngram_lm.train_lm(corpus, 5, tokenizer_mode=ngram_lm.MODE_CHARACTER)
    s = to_sents(ja_sentences(random.Random(7), 1))[0]
    assert math.isfinite(ngram_lm.cross_entropy(model, s))
    dist = ngram_lm.conditional_distribution(model, tuple(s.text[:2]))
    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-6)


def test_kn_beats_add_one_unigram_on_holdout():
    rng = random.Random(8)
    train = en_sentences(rng, 300)
    heldout = to_sents(en_sentences(random.Random(9), 60))
    kn = ngram_lm.train_lm(to_sents(train), 5)

    # independent add-1 unigram baseline
    counts = {}
    for text in train:
        for t in text.split() + [ngram_lm.EOS]:
            counts[t] = counts.get(t, 0) + 1
    vocab_size = len(counts) + 1
    total = sum(counts.values())

    def add1_nll(s: Sentence) -> tuple[float, int]:
        toks = s.text.split() + [ngram_lm.EOS]
        nll = 0.0
        for t in toks:
            nll -= math.log((counts.get(t, 0) + 1) / (total + vocab_size))
        return nll, len(toks)

    nll = 0.0
    tokens = 0
    for s in heldout:
        a, b = add1_nll(s)
        nll += a
        tokens += b
    add1_ppl = math.exp(nll / tokens)
    assert ngram_lm.perplexity(kn, heldout) <= add1_ppl


def test_cross_entropy_normalization_idempotent():
    model = en_model(n=60)
    raw = "Ｔｈｅ ministry confirmed ①② cases."
    once = Sentence(text=normalize_text(raw), index=0)
    twice = Sentence(text=normalize_text(normalize_text(raw)), index=0)
    assert ngram_lm.cross_entropy(model, once) == ngram_lm.cross_entropy(model, twice)


def test_ml_score_signs_and_identity():
    rng = random.Random(10)
    in_model = ngram_lm.train_lm(to_sents(en_sentences(rng, 200)), 3)
    gen_model = ngram_lm.train_lm(to_sents(general_sentences(rng, 200)), 3)

    in_sent = to_sents(en_sentences(random.Random(11), 1))[0]
    gen_sent = to_sents(general_sentences(random.Random(12), 1))[0]
    assert ngram_lm.ml_score(in_model, gen_model, in_sent).score < 0
    assert ngram_lm.ml_score(in_model, gen_model, gen_sent).score > 0

    same = ngram_lm.ml_score(in_model, in_model, in_sent)
    assert same.score == pytest.approx(0.0, abs=1e-9)
    assert same.score == pytest.approx(same.h_in - same.h_gen, abs=1e-9)


def test_ml_score_rejects_mode_mismatch():
    rng = random.Random(13)
    a = ngram_lm.train_lm(to_sents(en_sentences(rng, 60)), 2)
    b = ngram_lm.train_lm(
        to_sents(en_sentences(rng, 60)), 2, tokenizer_mode=ngram_lm.MODE_CHARACTER
    )
    with pytest.raises(ValueError):
        ngram_lm.ml_score(a, b, Sentence(text="abc def", index=0))


def score_corpus(in_model, gen_model, corpus):
    return [ngram_lm.ml_score(in_model, gen_model, s) for s in corpus]


def test_select_lowest_basics_and_recall():
    rng = random.Random(14)
    in_model = ngram_lm.train_lm(to_sents(en_sentences(rng, 200)), 3)
    gen_model = ngram_lm.train_lm(to_sents(general_sentences(rng, 200)), 3)

    planted = en_sentences(random.Random(15), 100)
    filler = general_sentences(random.Random(16), 900)
    mixed = planted + filler
    rng.shuffle(mixed)
    corpus = to_sents(mixed)
    scores = score_corpus(in_model, gen_model, corpus)

    chosen = ngram_lm.select_lowest(corpus, scores, 100)
    in_set = set(planted)
    recall = sum(1 for s in chosen if s.text in in_set) / 100
    assert recall >= 0.9

    assert ngram_lm.select_lowest(corpus, scores, len(corpus)) == corpus
    single = ngram_lm.select_lowest(corpus, scores, 1)
    best = min(range(len(corpus)), key=lambda i: (scores[i].score, i))
    assert single == [corpus[best]]
    with pytest.raises(ValueError):
        ngram_lm.select_lowest(corpus, scores, len(corpus) + 1)


def test_select_lowest_pure_under_scoring_order():
    rng = random.Random(17)
    in_model = ngram_lm.train_lm(to_sents(en_sentences(rng, 100)), 2)
    gen_model = ngram_lm.train_lm(to_sents(general_sentences(rng, 100)), 2)
    corpus = to_sents(en_sentences(rng, 30) + general_sentences(rng, 30))
    direct = score_corpus(in_model, gen_model, corpus)

    shuffled_idx = list(range(len(corpus)))
    rng.shuffle(shuffled_idx)
    out_of_order = {i: ngram_lm.ml_score(in_model, gen_model, corpus[i]) for i in shuffled_idx}
    rebuilt = [out_of_order[i] for i in range(len(corpus))]
    assert [s.score for s in rebuilt] == [s.score for s in direct]
    assert ngram_lm.select_lowest(corpus, rebuilt, 10) == ngram_lm.select_lowest(
        corpus, direct, 10
    )


def test_partition_by_score_sizes_and_ties():
    pairs = [f"p{i}" for i in range(10)]
    top, middle, bottom = ngram_lm.partition_by_score(pairs, [0.0] * 10, 0.2)
    assert (len(top), len(middle), len(bottom)) == (2, 2, 2)
    # equal scores fall back to original order
    assert top == ["p0", "p1"]
    assert middle == ["p4", "p5"]
    assert bottom == ["p8", "p9"]

    with pytest.raises(ValueError):
        ngram_lm.partition_by_score(pairs, [0.0] * 10, 0.5)
    with pytest.raises(ValueError):
        ngram_lm.partition_by_score(pairs, [0.0] * 10, 0.0)


def test_partition_by_score_planted_tiers():
    rng = random.Random(18)
    pairs = list(range(30))
    scores = [3.0] * 10 + [2.0] * 10 + [1.0] * 10
    shuffled = list(zip(pairs, scores))
    rng.shuffle(shuffled)
    pairs = [p for p, _ in shuffled]
    scores = [s for _, s in shuffled]
    top, middle, bottom = ngram_lm.partition_by_score(pairs, scores, 0.2)
    assert all(scores[pairs.index(p)] == 3.0 for p in top)
    assert all(scores[pairs.index(p)] == 2.0 for p in middle)
    assert all(scores[pairs.index(p)] == 1.0 for p in bottom)


def test_save_load_round_trip(tmp_path):
    model = en_model(n=80, order=4)
    path = tmp_path / "model.nglm"
    ngram_lm.save_lm(model, str(path))
    loaded = ngram_lm.load_lm(str(path))
    assert loaded.order == model.order
    assert loaded.tokenizer_mode == model.tokenizer_mode
    assert loaded.vocab == model.vocab
    assert loaded.probs == model.probs
    assert loaded.backoffs == model.backoffs
    s = to_sents(en_sentences(random.Random(19), 1))[0]
    assert ngram_lm.cross_entropy(loaded, s) == ngram_lm.cross_entropy(model, s)
    # deterministic bytes
    again = tmp_path / "again.nglm"
    ngram_lm.save_lm(model, str(again))
    assert path.read_bytes() == again.read_bytes()


def test_load_rejects_bad_files(tmp_path):
    path = tmp_path / "bad.nglm"
    path.write_text("WRONG v1 5 whitespace\n", encoding="utf-8")
    with pytest.raises(ValueError):
        ngram_lm.load_lm(str(path))
    path.write_text("NGLM v1 9 whitespace\n", encoding="utf-8")
    with pytest.raises(ValueError):
        ngram_lm.load_lm(str(path))
    path.write_text("NGLM v1 2 whitespace\n-1.0\tfoo\t\n", encoding="utf-8")
    with pytest.raises(ValueError, match="unknown-token"):
        ngram_lm.load_lm(str(path))

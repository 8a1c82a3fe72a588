"""Monotone sentence alignment over bead costs.

A bead matches m source sentences to n target sentences (m, n up to 2, one
side may be 0 for a skip). Bead costs are (1 - cosine) scaled by the larger
span and divided by a document-pair normalizer, so the extraction threshold
keeps its meaning across embedders. ``align_documents`` is the production
banded DP; ``brute_force_align`` enumerates every monotone path and exists
to check the DP on small instances, so it must stay an independent
implementation.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .embed import EmbeddingVector, cosine
from .textkit import Sentence

ALL_BEAD_SHAPES = frozenset({(1, 1), (1, 0), (0, 1), (1, 2), (2, 1), (2, 2)})
NORM_FLOOR = 1e-3
DEFAULT_COST_THRESHOLD = 0.7
BRUTE_FORCE_LIMIT = 8

# Tie-break order: (1,1) first, then smaller beads, then the bead covering
# the earlier source position. Lower rank wins at equal path cost.
_BEAD_RANK = {(1, 1): 0, (1, 0): 1, (0, 1): 2, (2, 1): 3, (1, 2): 4, (2, 2): 5}


@dataclass(frozen=True)
class Bead:
    src_span: tuple[int, int]
    tgt_span: tuple[int, int]
    cost: float

    def __post_init__(self) -> None:
        m, n = self.src_span[1], self.tgt_span[1]
        if m not in (0, 1, 2) or n not in (0, 1, 2):
            raise ValueError("bead span lengths must be in {0, 1, 2}")
        if m == 0 and n == 0:
            raise ValueError("bead cannot be empty on both sides")
        if self.cost < 0:
            raise ValueError("bead cost must be >= 0")

    @property
    def is_skip(self) -> bool:
        return self.src_span[1] == 0 or self.tgt_span[1] == 0


@dataclass(frozen=True)
class AlignmentPath:
    beads: tuple[Bead, ...]
    total_cost: float


@dataclass(frozen=True)
class AlignParams:
    allowed_beads: frozenset[tuple[int, int]] = ALL_BEAD_SHAPES
    skip_penalty: float = 1.0
    norm_sample: int = 128
    # one normalizer sample stream per document pair; fixed here so alignment
    # is reproducible end to end
    norm_seed: int = 0
    cost_threshold: float = DEFAULT_COST_THRESHOLD
    band_width: int | None = 100

    def __post_init__(self) -> None:
        if (1, 1) not in self.allowed_beads:
            raise ValueError("(1,1) beads must be allowed")
        if not self.allowed_beads <= ALL_BEAD_SHAPES:
            raise ValueError(f"allowed beads must be a subset of {sorted(ALL_BEAD_SHAPES)}")
        if self.skip_penalty < 0:
            raise ValueError("skip_penalty must be >= 0")
        if self.norm_sample < 1:
            raise ValueError("norm_sample must be >= 1")
        if self.cost_threshold <= 0:
            raise ValueError("cost_threshold must be > 0")
        if self.band_width is not None and self.band_width < 1:
            raise ValueError("band_width must be >= 1 or None for unlimited")


@dataclass(frozen=True)
class ParallelPair:
    """One extracted pair; multi-sentence sides are space-joined."""

    src_text: str
    tgt_text: str
    cost: float


OverlapTable = dict[tuple[int, int], EmbeddingVector]


def bead_cost(
    src_table: OverlapTable,
    tgt_table: OverlapTable,
    bead: tuple[int, int, int, int],
    norm: float,
    skip_penalty: float = 1.0,
) -> float:
    """Cost of bead (m, n, i, j): src[i:i+m] against tgt[j:j+n].

    Substitution beads cost (1 - cosine) * max(m, n) / norm; skip beads cost
    skip_penalty per skipped sentence and ignore the normalizer.
    """
    m, n, i, j = bead
    if norm <= 0:
        raise ValueError("norm must be > 0")
    if m == 0 or n == 0:
        return skip_penalty * (m + n)
    sim = cosine(src_table[(i, m)], tgt_table[(j, n)])
    cost = (1.0 - sim) * max(m, n) / norm
    # identical unit vectors dot to 1 +- 1ulp; quantizing keeps costs
    # nonnegative and lets genuinely equal routes tie exactly, so the
    # bead-shape preference decides (identical documents align 1:1)
    cost = round(cost, 12)
    return cost if cost > 0.0 else 0.0


def _single_count(table: OverlapTable) -> int:
    return sum(1 for (_, length) in table if length == 1)


def compute_norm(
    src_table: OverlapTable,
    tgt_table: OverlapTable,
    sample_size: int,
    rng_seed: int,
) -> float:
    """Document-pair cost normalizer.

    Mean (1 - cosine) over seeded random cross-document single-sentence
    pairs, floored at 1e-3 so identical documents cannot zero it out. Each
    draw contributes both index orientations, which makes the value exactly
    invariant under swapping the two documents.
    """
    n_src = _single_count(src_table)
    n_tgt = _single_count(tgt_table)
    if n_src == 0 or n_tgt == 0:
        raise ValueError("both documents must be non-empty")
    rng = random.Random(rng_seed)
    total = 0.0
    for _ in range(sample_size):
        u = rng.random()
        v = rng.random()
        i, j = min(int(u * n_src), n_src - 1), min(int(v * n_tgt), n_tgt - 1)
        p, q = min(int(v * n_src), n_src - 1), min(int(u * n_tgt), n_tgt - 1)
        d1 = 1.0 - cosine(src_table[(i, 1)], tgt_table[(j, 1)])
        d2 = 1.0 - cosine(src_table[(p, 1)], tgt_table[(q, 1)])
        total += (d1 + d2) / 2.0
    return max(total / sample_size, NORM_FLOOR)


def _norm_for(src_table, tgt_table, n_src, n_tgt, params):
    if n_src == 0 or n_tgt == 0:
        return 1.0  # only skip beads exist and they ignore the normalizer
    return compute_norm(src_table, tgt_table, params.norm_sample, params.norm_seed)


def _band_bounds(i: int, n_src: int, n_tgt: int, band: int | None) -> tuple[int, int]:
    if band is None:
        return 0, n_tgt
    center = round(i * n_tgt / n_src) if n_src else 0
    return max(0, center - band), min(n_tgt, center + band)


def _banded_search(src_table, tgt_table, n_src, n_tgt, params, norm, band):
    # DP over states (i, j) = prefix lengths consumed; value (cost, rank of
    # incoming bead, bead) with tuple comparison doing the tie-breaking
    beads = sorted(params.allowed_beads, key=_BEAD_RANK.__getitem__)
    best: list[dict[int, tuple[float, int]]] = [dict() for _ in range(n_src + 1)]
    back: list[dict[int, tuple[int, int, float]]] = [dict() for _ in range(n_src + 1)]
    best[0][0] = (0.0, 0)
    for i in range(n_src + 1):
        lo, hi = _band_bounds(i, n_src, n_tgt, band)
        for j in range(lo, hi + 1):
            if i == 0 and j == 0:
                continue
            choice = None
            chosen = None
            for m, n in beads:
                pi, pj = i - m, j - n
                if pi < 0 or pj < 0:
                    continue
                prev = best[pi].get(pj)
                if prev is None:
                    continue
                cost = bead_cost(
                    src_table, tgt_table, (m, n, pi, pj), norm, params.skip_penalty
                )
                candidate = (prev[0] + cost, _BEAD_RANK[(m, n)])
                if choice is None or candidate < choice:
                    choice = candidate
                    chosen = (m, n, cost)
            if choice is not None:
                best[i][j] = choice
                back[i][j] = chosen
    if n_tgt not in best[n_src]:
        return None
    path: list[Bead] = []
    i, j = n_src, n_tgt
    while (i, j) != (0, 0):
        m, n, cost = back[i][j]
        path.append(Bead(src_span=(i - m, m), tgt_span=(j - n, n), cost=cost))
        i, j = i - m, j - n
    path.reverse()
    return AlignmentPath(beads=tuple(path), total_cost=best[n_src][n_tgt][0])


def align_documents(
    src_table: OverlapTable,
    tgt_table: OverlapTable,
    n_src: int,
    n_tgt: int,
    params: AlignParams,
) -> AlignmentPath:
    """Minimum-cost monotone bead path covering both documents.

    Runs a DP restricted to a band around the length-scaled diagonal. If the
    band admits no complete path the search is retried once without a band;
    failure after that means the allowed beads cannot cover the documents.
    """
    if n_src < 0 or n_tgt < 0:
        raise ValueError("document sizes must be >= 0")
    if n_src == 0 and n_tgt == 0:
        return AlignmentPath(beads=(), total_cost=0.0)
    norm = _norm_for(src_table, tgt_table, n_src, n_tgt, params)
    result = _banded_search(
        src_table, tgt_table, n_src, n_tgt, params, norm, params.band_width
    )
    if result is None and params.band_width is not None:
        result = _banded_search(src_table, tgt_table, n_src, n_tgt, params, norm, None)
    if result is None:
        raise ValueError("no feasible path")
    return result


def brute_force_align(
    src_table: OverlapTable,
    tgt_table: OverlapTable,
    n_src: int,
    n_tgt: int,
    params: AlignParams,
) -> AlignmentPath:
    """Exact minimum by enumerating every monotone bead sequence.

    Test oracle only: exponential, capped at 8 sentences per side. Shares
    the bead cost definition with the DP but none of its search machinery.
    """
    if n_src > BRUTE_FORCE_LIMIT or n_tgt > BRUTE_FORCE_LIMIT:
        raise ValueError(f"brute force capped at {BRUTE_FORCE_LIMIT} sentences per side")
    if n_src < 0 or n_tgt < 0:
        raise ValueError("document sizes must be >= 0")
    if n_src == 0 and n_tgt == 0:
        return AlignmentPath(beads=(), total_cost=0.0)
    norm = _norm_for(src_table, tgt_table, n_src, n_tgt, params)

    shapes = sorted(params.allowed_beads)
    # shares only the per-bead cost definition with the DP; the search is
    # independent enumeration
    costs: dict[tuple[int, int, int, int], float] = {}
    for m, n in shapes:
        for i in range(n_src - m + 1):
            for j in range(n_tgt - n + 1):
                costs[(m, n, i, j)] = bead_cost(
                    src_table, tgt_table, (m, n, i, j), norm, params.skip_penalty
                )

    best_cost = [float("inf")]
    best_path: list[tuple[tuple[int, int, int, int], ...]] = [()]

    def walk(i: int, j: int, acc: float, trail: list) -> None:
        if i == n_src and j == n_tgt:
            if acc < best_cost[0]:
                best_cost[0] = acc
                best_path[0] = tuple(trail)
            return
        for m, n in shapes:
            ni, nj = i + m, j + n
            if ni > n_src or nj > n_tgt:
                continue
            step = costs[(m, n, i, j)]
            trail.append((m, n, i, j))
            walk(ni, nj, acc + step, trail)
            trail.pop()

    walk(0, 0, 0.0, [])
    if best_cost[0] == float("inf"):
        raise ValueError("no feasible path")
    beads = tuple(
        Bead(src_span=(i, m), tgt_span=(j, n), cost=costs[(m, n, i, j)])
        for (m, n, i, j) in best_path[0]
    )
    return AlignmentPath(beads=beads, total_cost=best_cost[0])


def extract_pairs(
    path: AlignmentPath,
    src_sents: list[Sentence],
    tgt_sents: list[Sentence],
    threshold: float = DEFAULT_COST_THRESHOLD,
) -> list[ParallelPair]:
    """Turn substitution beads into text pairs, dropping costs above threshold.

    The threshold comparison is strict: a pair at exactly the threshold is
    kept. Skip beads contribute nothing.
    """
    pairs = []
    for bead in path.beads:
        if bead.is_skip or bead.cost > threshold:
            continue
        si, sm = bead.src_span
        tj, tn = bead.tgt_span
        pairs.append(
            ParallelPair(
                src_text=" ".join(s.text for s in src_sents[si : si + sm]),
                tgt_text=" ".join(s.text for s in tgt_sents[tj : tj + tn]),
                cost=bead.cost,
            )
        )
    return pairs


def format_path(path: AlignmentPath) -> str:
    """Stable text form: one ``srcStart:len<TAB>tgtStart:len<TAB>cost`` line per bead."""
    lines = []
    for bead in path.beads:
        lines.append(
            f"{bead.src_span[0]}:{bead.src_span[1]}"
            f"\t{bead.tgt_span[0]}:{bead.tgt_span[1]}"
            f"\t{bead.cost:.6f}"
        )
    return "\n".join(lines)

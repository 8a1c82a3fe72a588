"""Reward computation for crowd reports.

Two payout modes. Fixed mode pays a flat amount when at least one parallel
sentence survived extraction, nothing otherwise. Variable mode sums a
per-pair alignment term s_a and domain term s_d, adds the minimum reward and
clamps to the maximum. Both alignment cost and cross-entropies pass through
a logistic squashing so every extracted pair contributes a bounded, positive
amount.

Amounts are integer minor currency units. Rounding happens once, at the
final amount, to keep ledger arithmetic exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

MODE_FIXED = "fixed"
MODE_VARIABLE = "variable"

DEFAULT_FIXED_AMOUNT = 25
DEFAULT_R_MIN = 10
DEFAULT_R_MAX = 100


def sigmoid(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    # rewritten for large negative z; exp(z) underflows to 0, never overflows
    e = math.exp(z)
    return e / (1.0 + e)


@dataclass(frozen=True)
class RewardParams:
    mode: str = MODE_VARIABLE
    fixed_amount: int = DEFAULT_FIXED_AMOUNT
    r_min: int = DEFAULT_R_MIN
    r_max: int = DEFAULT_R_MAX
    # +1 scores sigmoid(h_gen - h_in), paying more for in-domain text; -1
    # flips it for replicating runs that used the opposite convention
    domain_sign: int = 1

    def __post_init__(self) -> None:
        if self.mode not in (MODE_FIXED, MODE_VARIABLE):
            raise ValueError(f"unknown reward mode {self.mode!r}")
        if not 0 <= self.r_min <= self.r_max:
            raise ValueError("need 0 <= r_min <= r_max")
        if self.fixed_amount < 0:
            raise ValueError("fixed_amount must be >= 0")
        if self.domain_sign not in (1, -1):
            raise ValueError("domain_sign must be +1 or -1")


@dataclass(frozen=True)
class RewardBreakdown:
    per_pair: tuple[tuple[float, float], ...]  # (s_a, s_d) per extracted pair
    sum_terms: float
    raw: float
    final: int
    mode: str


def pair_terms(
    v: float, h_in: float, h_gen: float, params: RewardParams
) -> tuple[float, float]:
    """Per-pair reward terms: s_a from alignment cost, s_d from domain fit.

    s_a = sigmoid(-V) so a perfect alignment (V=0) scores 0.5 and worse
    alignments decay toward 0. s_d = sigmoid(domain_sign * (h_gen - h_in)).
    """
    if not (math.isfinite(v) and math.isfinite(h_in) and math.isfinite(h_gen)):
        raise ValueError("reward terms need finite inputs")
    if v < 0:
        raise ValueError("alignment cost must be >= 0")
    s_a = sigmoid(-v)
    s_d = sigmoid(params.domain_sign * (h_gen - h_in))
    return s_a, s_d


def _round_half_up(x: float) -> int:
    # bankers' rounding would round 0.5 down half the time; payouts round up
    return math.floor(x + 0.5)


def compute_reward(
    terms: list[tuple[float, float]], params: RewardParams
) -> RewardBreakdown:
    """Reward for one report from its extracted pairs' (s_a, s_d) terms.

    Variable mode: clamp(r_min + sum of all terms, r_min, r_max), rounded
    half-up to integer minor units at the end. Fixed mode: fixed_amount if
    anything was extracted, else 0.
    """
    total = sum(s_a + s_d for s_a, s_d in terms)
    if params.mode == MODE_FIXED:
        final = params.fixed_amount if terms else 0
        raw = float(final)
    else:
        raw = params.r_min + total
        final = _round_half_up(min(max(raw, float(params.r_min)), float(params.r_max)))
    return RewardBreakdown(
        per_pair=tuple(terms),
        sum_terms=total,
        raw=raw,
        final=final,
        mode=params.mode,
    )

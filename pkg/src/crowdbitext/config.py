"""Flat key=value run configuration shared by every CLI command.

The file format is one ``key = value`` assignment per line, ``#`` comments,
and nothing nested. Unknown keys are rejected rather than ignored so a typo
cannot silently fall back to a default, and the master ``seed`` key is
mandatory: every stochastic choice (embedding hash, alignment normalizer)
draws its default from it, which keeps reruns byte-reproducible.

Keys::

    seed                          master seed (required)
    embed.dimension               embedding dimension
    embed.ngram_orders            comma-separated, e.g. 2,3,4
    embed.mode                    builtin-hashed | external-table
    embed.seed                    hash seed (default: seed)
    align.allowed_beads           comma-separated m:n shapes, e.g. 1:1,1:0
    align.skip_penalty            per-sentence skip cost
    align.norm_sample             normalizer sample size
    align.norm_seed               normalizer seed (default: seed)
    align.cost_threshold          extraction threshold
    align.band_width              integer or "none" for unbounded
    lm.order                      n-gram order
    lm.tokenizer_mode             whitespace | character
    lid.order                     language-ID character n-gram order
    lid.min_conf                  posterior needed to keep a sentence
    reward.mode                   variable | fixed
    reward.fixed_amount           payout in fixed mode
    reward.r_min                  variable-mode floor
    reward.r_max                  variable-mode cap
    reward.domain_sign            +1 or -1
    fetch.user_agent              HTTP user agent
    fetch.timeout                 seconds
    fetch.max_bytes               response size cap
    fetch.per_host_min_interval   politeness delay, seconds
    fetch.respect_robots          true | false
    service.host                  bind address for serve
    service.port                  bind port for serve
    service.pool_size             report worker threads
"""

from __future__ import annotations

from dataclasses import dataclass

from .align import AlignParams
from .embed import EmbedderConfig
from .fetch import FetchPolicy
from .ngram_lm import MODE_CHARACTER, MODE_WHITESPACE
from .reward import RewardParams


class ConfigError(ValueError):
    pass


def _parse_int(raw: str) -> int:
    return int(raw, 10)


def _parse_float(raw: str) -> float:
    return float(raw)


def _parse_bool(raw: str) -> bool:
    if raw == "true":
        return True
    if raw == "false":
        return False
    raise ValueError(f"expected true or false, got {raw!r}")


def _parse_str(raw: str) -> str:
    return raw


def _parse_orders(raw: str) -> tuple[int, ...]:
    return tuple(int(part, 10) for part in raw.split(","))


def _parse_beads(raw: str) -> frozenset[tuple[int, int]]:
    shapes = set()
    for part in raw.split(","):
        m, sep, n = part.strip().partition(":")
        if not sep:
            raise ValueError(f"bead shape {part!r} is not m:n")
        shapes.add((int(m, 10), int(n, 10)))
    return frozenset(shapes)


def _parse_band(raw: str) -> int | None:
    if raw == "none":
        return None
    return int(raw, 10)


def _parse_tokenizer_mode(raw: str) -> str:
    if raw not in (MODE_WHITESPACE, MODE_CHARACTER):
        raise ValueError(f"expected {MODE_WHITESPACE} or {MODE_CHARACTER}, got {raw!r}")
    return raw


_PARSERS = {
    "seed": _parse_int,
    "embed.dimension": _parse_int,
    "embed.ngram_orders": _parse_orders,
    "embed.mode": _parse_str,
    "embed.seed": _parse_int,
    "align.allowed_beads": _parse_beads,
    "align.skip_penalty": _parse_float,
    "align.norm_sample": _parse_int,
    "align.norm_seed": _parse_int,
    "align.cost_threshold": _parse_float,
    "align.band_width": _parse_band,
    "lm.order": _parse_int,
    "lm.tokenizer_mode": _parse_tokenizer_mode,
    "lid.order": _parse_int,
    "lid.min_conf": _parse_float,
    "reward.mode": _parse_str,
    "reward.fixed_amount": _parse_int,
    "reward.r_min": _parse_int,
    "reward.r_max": _parse_int,
    "reward.domain_sign": _parse_int,
    "fetch.user_agent": _parse_str,
    "fetch.timeout": _parse_float,
    "fetch.max_bytes": _parse_int,
    "fetch.per_host_min_interval": _parse_float,
    "fetch.respect_robots": _parse_bool,
    "service.host": _parse_str,
    "service.port": _parse_int,
    "service.pool_size": _parse_int,
}


def parse_assignments(lines: list[str], source: str) -> dict[str, object]:
    """Parse ``key = value`` lines; unknown or repeated keys are errors."""
    values: dict[str, object] = {}
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        key, eq, raw = stripped.partition("=")
        if not eq:
            raise ConfigError(f"{source}:{lineno}: not a key=value line: {stripped!r}")
        key = key.strip()
        raw = raw.strip()
        parser = _PARSERS.get(key)
        if parser is None:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = parser(raw)
        except ValueError as err:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {err}") from err
    return values


@dataclass(frozen=True)
class RunConfig:
    """Resolved configuration; every accessor returns a validated value."""

    values: dict

    @property
    def seed(self) -> int:
        return self.values["seed"]

    def _get(self, key: str, default):
        return self.values.get(key, default)

    def embedder_config(self) -> EmbedderConfig:
        defaults = EmbedderConfig()
        return EmbedderConfig(
            dimension=self._get("embed.dimension", defaults.dimension),
            ngram_orders=self._get("embed.ngram_orders", defaults.ngram_orders),
            seed=self._get("embed.seed", self.seed),
            mode=self._get("embed.mode", defaults.mode),
        )

    def align_params(self) -> AlignParams:
        defaults = AlignParams()
        return AlignParams(
            allowed_beads=self._get("align.allowed_beads", defaults.allowed_beads),
            skip_penalty=self._get("align.skip_penalty", defaults.skip_penalty),
            norm_sample=self._get("align.norm_sample", defaults.norm_sample),
            norm_seed=self._get("align.norm_seed", self.seed),
            cost_threshold=self._get("align.cost_threshold", defaults.cost_threshold),
            band_width=self._get("align.band_width", defaults.band_width),
        )

    def reward_params(self) -> RewardParams:
        defaults = RewardParams()
        return RewardParams(
            mode=self._get("reward.mode", defaults.mode),
            fixed_amount=self._get("reward.fixed_amount", defaults.fixed_amount),
            r_min=self._get("reward.r_min", defaults.r_min),
            r_max=self._get("reward.r_max", defaults.r_max),
            domain_sign=self._get("reward.domain_sign", defaults.domain_sign),
        )

    def fetch_policy(self) -> FetchPolicy:
        defaults = FetchPolicy()
        return FetchPolicy(
            user_agent=self._get("fetch.user_agent", defaults.user_agent),
            timeout=self._get("fetch.timeout", defaults.timeout),
            max_bytes=self._get("fetch.max_bytes", defaults.max_bytes),
            per_host_min_interval=self._get(
                "fetch.per_host_min_interval", defaults.per_host_min_interval
            ),
            respect_robots=self._get("fetch.respect_robots", defaults.respect_robots),
        )

    def lm_order(self) -> int:
        return self._get("lm.order", 5)

    def lm_tokenizer_mode(self) -> str:
        return self._get("lm.tokenizer_mode", MODE_WHITESPACE)

    def lid_order(self) -> int:
        return self._get("lid.order", 3)

    def min_lang_conf(self) -> float:
        return self._get("lid.min_conf", 0.6)

    def service_host(self) -> str:
        return self._get("service.host", "127.0.0.1")

    def service_port(self) -> int:
        return self._get("service.port", 8080)

    def service_pool_size(self) -> int:
        return self._get("service.pool_size", 2)


def load_run_config(path: str, overrides: list[str] | None = None) -> RunConfig:
    """Read a config file, apply ``key=value`` flag overrides, validate all.

    Every parameter record is constructed once here so a bad value fails
    before the command does any work.
    """
    with open(path, encoding="utf-8") as fh:
        values = parse_assignments(fh.read().splitlines(), source=path)
    if overrides:
        values.update(parse_assignments(list(overrides), source="--set"))
    if "seed" not in values:
        raise ConfigError(f"{path}: missing required key 'seed'")
    config = RunConfig(values)
    try:
        config.embedder_config()
        config.align_params()
        config.reward_params()
        config.fetch_policy()
        config.lm_tokenizer_mode()
    except ValueError as err:
        raise ConfigError(str(err)) from err
    return config

"""Campaign and report orchestration around the store.

Reports enqueue at submission and a small thread pool drains the queue:
claim, fetch both URLs, run the extraction pipeline, persist pairs and pay.
Campaign models are trained once per process from the corpora stored with
the campaign, so a restarted service reprocesses a report to the identical
result.
"""

from __future__ import annotations

import dataclasses
import logging
import queue
import secrets
import threading
import time

from ..align import AlignParams
from ..embed import EmbedderConfig
from ..fetch import FetchError, FetchPolicy, RobotsDisallowed, canonicalize_url, fetch_url
from ..pipeline import CampaignArtifacts, PipelineResult, build_artifacts, extract_and_score
from ..reward import RewardParams
from .store import DuplicateReport, Store

log = logging.getLogger(__name__)

EXAMPLE_COUNT = 10


class ServiceError(Exception):
    """API-visible failure with a machine-readable code."""

    def __init__(self, code: str, message: str, http_status: int = 400, **extra):
        super().__init__(message)
        self.code = code
        self.http_status = http_status
        self.extra = dict(extra)


def _not_found(what: str) -> ServiceError:
    return ServiceError("not_found", f"{what} not found", http_status=404)


def _reward_params(config: dict) -> RewardParams:
    fields = {f.name for f in dataclasses.fields(RewardParams)}
    return RewardParams(**{k: v for k, v in config.get("reward", {}).items() if k in fields})


def _align_params(config: dict) -> AlignParams:
    raw = dict(config.get("align", {}))
    if "allowed_beads" in raw:
        raw["allowed_beads"] = frozenset(tuple(b) for b in raw["allowed_beads"])
    fields = {f.name for f in dataclasses.fields(AlignParams)}
    return AlignParams(**{k: v for k, v in raw.items() if k in fields})


def _embed_config(config: dict) -> EmbedderConfig:
    raw = dict(config.get("embed", {}))
    if "ngram_orders" in raw:
        raw["ngram_orders"] = tuple(raw["ngram_orders"])
    fields = {f.name for f in dataclasses.fields(EmbedderConfig)}
    return EmbedderConfig(**{k: v for k, v in raw.items() if k in fields})


class Service:
    """Everything behind the HTTP API; also usable directly (CLI, tests)."""

    def __init__(
        self,
        store: Store,
        fetch_policy: FetchPolicy | None = None,
        pool_size: int = 2,
    ):
        policy = fetch_policy or FetchPolicy()
        # robots compliance is not negotiable when running as a service
        self.fetch_policy = dataclasses.replace(policy, respect_robots=True)
        self.store = store
        self.pool_size = pool_size
        self._artifacts: dict[str, CampaignArtifacts] = {}
        self._artifacts_lock = threading.Lock()
        self._queue: queue.Queue[str] = queue.Queue()
        self._threads: list[threading.Thread] = []
        self._stop = threading.Event()

    # accounts

    def bootstrap_admin(self, token: str | None = None) -> dict:
        """Idempotent: returns the existing admin or creates the first one."""
        existing = self.store.first_admin()
        if existing is not None:
            return existing
        return self.store.add_worker(
            "admin", token or secrets.token_hex(16), role="admin"
        )

    def register_worker(self, name: str) -> dict:
        if not name or not name.strip():
            raise ServiceError("invalid_request", "worker name is empty")
        return self.store.add_worker(name.strip(), secrets.token_hex(16))

    def authenticate(self, token: str) -> dict:
        worker = self.store.worker_by_token(token)
        if worker is None:
            raise ServiceError("forbidden", "unknown token", http_status=403)
        return worker

    # campaigns

    def create_campaign(
        self,
        name: str,
        domain: str,
        src_lang: str,
        tgt_lang: str,
        dev_src: list[str],
        dev_tgt: list[str],
        general_src: list[str],
        config: dict | None = None,
    ) -> dict:
        if len(dev_src) != len(dev_tgt):
            raise ServiceError(
                "invalid_request", "dev set sides differ in length; examples need pairs"
            )
        config = dict(config or {})
        config["dev_src"] = list(dev_src)
        config["dev_tgt"] = list(dev_tgt)
        config["general_src"] = list(general_src)
        try:
            artifacts = self._build(src_lang, tgt_lang, config)
        except ValueError as err:
            raise ServiceError("invalid_request", str(err)) from err
        campaign = self.store.add_campaign(name, domain, src_lang, tgt_lang, config)
        with self._artifacts_lock:
            self._artifacts[campaign["id"]] = artifacts
        return campaign

    def _build(self, src_lang: str, tgt_lang: str, config: dict) -> CampaignArtifacts:
        return build_artifacts(
            src_lang,
            tgt_lang,
            config["dev_src"],
            config["dev_tgt"],
            config["general_src"],
            embed_config=_embed_config(config),
            align_params=_align_params(config),
            reward_params=_reward_params(config),
            lm_order=config.get("lm_order", 5),
            lid_order=config.get("lid_order", 3),
            min_lang_conf=config.get("min_lang_conf", 0.6),
        )

    def artifacts_for(self, campaign_id: str) -> CampaignArtifacts:
        with self._artifacts_lock:
            cached = self._artifacts.get(campaign_id)
        if cached is not None:
            return cached
        try:
            campaign = self.store.get_campaign(campaign_id)
        except KeyError:
            raise _not_found("campaign") from None
        built = self._build(
            campaign["src_lang"], campaign["tgt_lang"], campaign["config"]
        )
        with self._artifacts_lock:
            return self._artifacts.setdefault(campaign_id, built)

    def campaign_view(self, campaign_id: str) -> dict:
        try:
            campaign = self.store.get_campaign(campaign_id)
        except KeyError:
            raise _not_found("campaign") from None
        config = campaign["config"]
        reward = _reward_params(config)
        align = _align_params(config)
        return {
            "id": campaign["id"],
            "name": campaign["name"],
            "domain": campaign["domain"],
            "src_lang": campaign["src_lang"],
            "tgt_lang": campaign["tgt_lang"],
            "created_at": campaign["created_at"],
            "reward": dataclasses.asdict(reward),
            "cost_threshold": align.cost_threshold,
        }

    def campaign_examples(self, campaign_id: str, count: int = EXAMPLE_COUNT) -> list[dict]:
        try:
            campaign = self.store.get_campaign(campaign_id)
        except KeyError:
            raise _not_found("campaign") from None
        config = campaign["config"]
        pairs = zip(config["dev_src"], config["dev_tgt"])
        return [{"src": s, "tgt": t} for s, t in list(pairs)[:count]]

    # reports

    def submit_report(
        self, worker_id: str, campaign_id: str, url_a: str, url_b: str
    ) -> dict:
        try:
            self.store.get_campaign(campaign_id)
        except KeyError:
            raise _not_found("campaign") from None
        try:
            canon_a = canonicalize_url(url_a)
            canon_b = canonicalize_url(url_b)
        except ValueError as err:
            raise ServiceError("invalid_url", str(err)) from err
        if canon_a == canon_b:
            raise ServiceError(
                "invalid_url", "both sides canonicalize to the same URL"
            )
        try:
            report = self.store.add_report(campaign_id, worker_id, canon_a, canon_b)
        except DuplicateReport as dup:
            raise ServiceError(
                "duplicate_report",
                f"url pair already reported as {dup.existing_id}",
                http_status=409,
                report_id=dup.existing_id,
            ) from None
        self._queue.put(report["id"])
        return report

    def process_report(self, report_id: str) -> dict:
        """Claim and run one pending report to a terminal status."""
        if not self.store.claim_report(report_id):
            return self.store.get_report(report_id)
        return self._run_claimed(report_id)

    def _run_claimed(self, report_id: str) -> dict:
        report = self.store.get_report(report_id)
        try:
            artifacts = self.artifacts_for(report["campaign_id"])
            src_doc = fetch_url(report["url_a"], self.fetch_policy)
            tgt_doc = fetch_url(report["url_b"], self.fetch_policy)
        except RobotsDisallowed:
            return self.store.fail_report(report_id, "robots_denied")
        except FetchError as err:
            return self.store.fail_report(report_id, f"fetch_error: {err}")
        if src_doc.text is None or tgt_doc.text is None:
            return self.store.fail_report(report_id, "no_text_content")
        try:
            result = extract_and_score(src_doc.text, tgt_doc.text, artifacts)
        except Exception as err:  # a report must never wedge a pool thread
            log.exception("pipeline failure on report %s", report_id)
            return self.store.fail_report(report_id, f"pipeline_error: {err}")
        return self._persist_result(report_id, result)

    def _persist_result(self, report_id: str, result: PipelineResult) -> dict:
        pairs = [
            {
                "src": p.src_text,
                "tgt": p.tgt_text,
                "cost": p.cost,
                "s_a": p.s_a,
                "s_d": p.s_d,
                "h_in": p.h_in,
                "h_gen": p.h_gen,
            }
            for p in result.pairs
        ]
        reward = {
            "mode": result.breakdown.mode,
            "per_pair": [list(t) for t in result.breakdown.per_pair],
            "sum_terms": result.breakdown.sum_terms,
            "raw": result.breakdown.raw,
            "final": result.breakdown.final,
        }
        return self.store.complete_report(report_id, pairs, reward)

    def reprocess_report(self, report_id: str) -> dict:
        """Admin action: rerun a finished report in place, without repaying."""
        try:
            self.store.requeue_report(report_id)
        except KeyError:
            raise _not_found("report") from None
        except ValueError as err:
            raise ServiceError("invalid_request", str(err)) from err
        return self._run_claimed(report_id)

    def report_view(self, report_id: str, requester: dict) -> dict:
        try:
            report = self.store.get_report(report_id)
        except KeyError:
            raise _not_found("report") from None
        if requester["role"] != "admin" and requester["id"] != report["worker_id"]:
            raise ServiceError("forbidden", "not your report", http_status=403)
        view = {
            "id": report["id"],
            "campaign_id": report["campaign_id"],
            "worker_id": report["worker_id"],
            "url_a": report["url_a"],
            "url_b": report["url_b"],
            "status": report["status"],
            "failure_reason": report["failure_reason"],
            "pair_count": report["pair_count"],
            "submitted_at": report["submitted_at"],
            "completed_at": report["completed_at"],
            "reward": report["reward"],
        }
        if report["status"] == "done":
            view["pairs"] = [
                {
                    "src": p["src"],
                    "tgt": p["tgt"],
                    "cost": p["cost"],
                    "s_a": p["s_a"],
                    "s_d": p["s_d"],
                }
                for p in self.store.pairs_for_report(report_id)
            ]
        return view

    # background processing

    def start(self) -> None:
        if self._threads:
            return
        self._stop.clear()
        for report_id in self.store.pending_report_ids():
            self._queue.put(report_id)
        for i in range(self.pool_size):
            t = threading.Thread(
                target=self._worker_loop, name=f"report-worker-{i}", daemon=True
            )
            t.start()
            self._threads.append(t)

    def stop(self) -> None:
        self._stop.set()
        for t in self._threads:
            t.join(timeout=10)
        self._threads.clear()

    def _worker_loop(self) -> None:
        while not self._stop.is_set():
            try:
                report_id = self._queue.get(timeout=0.1)
            except queue.Empty:
                continue
            try:
                self.process_report(report_id)
            except Exception:
                log.exception("unhandled failure processing %s", report_id)
            finally:
                self._queue.task_done()

    def drain(self, timeout: float = 60.0) -> None:
        """Block until no report is pending or processing (tests, CLI)."""
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            if self.store.open_report_count() == 0:
                return
            time.sleep(0.02)
        raise TimeoutError("reports still in flight")

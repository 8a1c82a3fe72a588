"""HTTP+JSON API over the service core.

Every error body is the same envelope: {"error": {"code", "message", ...}}
with machine-readable codes (duplicate_report, robots_denied, invalid_url,
forbidden, not_found, invalid_request). Auth is a bearer token per worker;
admin-only routes check the role.
"""

from __future__ import annotations

from fastapi import Depends, FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .core import Service, ServiceError

EXPORT_HEADER = "src\ttgt\tcost"
STATS_HEADER = "day,reports,sentences,cumulative_sentences,payout"


def format_export(rows: list[dict]) -> str:
    lines = [EXPORT_HEADER]
    lines += [f"{r['src']}\t{r['tgt']}\t{r['cost']:.6f}" for r in rows]
    return "\n".join(lines) + "\n"


def format_stats_csv(series: list[dict]) -> str:
    lines = [STATS_HEADER]
    lines += [
        "{day},{reports},{sentences},{cumulative_sentences},{payout}".format(**row)
        for row in series
    ]
    return "\n".join(lines) + "\n"


class WorkerCreate(BaseModel):
    name: str


class CampaignCreate(BaseModel):
    name: str
    domain: str
    src_lang: str
    tgt_lang: str
    dev_src: list[str]
    dev_tgt: list[str]
    general_src: list[str]
    reward: dict = Field(default_factory=dict)
    align: dict = Field(default_factory=dict)
    embed: dict = Field(default_factory=dict)
    lm_order: int = 5
    lid_order: int = 3
    min_lang_conf: float = 0.6


class ReportCreate(BaseModel):
    url_a: str
    url_b: str


def create_app(service: Service) -> FastAPI:
    app = FastAPI(title="crowdbitext", docs_url=None, redoc_url=None)
    app.state.service = service

    def requester(request: Request) -> dict:
        header = request.headers.get("authorization", "")
        scheme, _, token = header.partition(" ")
        if scheme.lower() != "bearer" or not token.strip():
            raise ServiceError("forbidden", "missing bearer token", http_status=403)
        return service.authenticate(token.strip())

    def admin(worker: dict = Depends(requester)) -> dict:
        if worker["role"] != "admin":
            raise ServiceError("forbidden", "admin only", http_status=403)
        return worker

    @app.exception_handler(ServiceError)
    async def service_error(_request: Request, err: ServiceError) -> JSONResponse:
        body = {"code": err.code, "message": str(err), **err.extra}
        return JSONResponse(status_code=err.http_status, content={"error": body})

    @app.exception_handler(RequestValidationError)
    async def bad_request(_request: Request, err: RequestValidationError) -> JSONResponse:
        body = {"code": "invalid_request", "message": str(err.errors()[:3])}
        return JSONResponse(status_code=400, content={"error": body})

    @app.get("/v1/me")
    def me(worker: dict = Depends(requester)) -> dict:
        return {"id": worker["id"], "name": worker["name"], "role": worker["role"]}

    @app.post("/v1/workers", status_code=201)
    def create_worker(body: WorkerCreate) -> dict:
        worker = service.register_worker(body.name)
        # the token is returned exactly once, at registration
        return {
            "id": worker["id"],
            "name": worker["name"],
            "role": worker["role"],
            "token": worker["token"],
        }

    @app.post("/v1/campaigns", status_code=201)
    def create_campaign(body: CampaignCreate, _admin: dict = Depends(admin)) -> dict:
        campaign = service.create_campaign(
            body.name,
            body.domain,
            body.src_lang,
            body.tgt_lang,
            body.dev_src,
            body.dev_tgt,
            body.general_src,
            config={
                "reward": body.reward,
                "align": body.align,
                "embed": body.embed,
                "lm_order": body.lm_order,
                "lid_order": body.lid_order,
                "min_lang_conf": body.min_lang_conf,
            },
        )
        return service.campaign_view(campaign["id"])

    @app.get("/v1/campaigns")
    def list_campaigns(_worker: dict = Depends(requester)) -> dict:
        views = [service.campaign_view(c["id"]) for c in service.store.list_campaigns()]
        return {"campaigns": views}

    @app.get("/v1/campaigns/{campaign_id}")
    def get_campaign(campaign_id: str, _worker: dict = Depends(requester)) -> dict:
        return service.campaign_view(campaign_id)

    @app.get("/v1/campaigns/{campaign_id}/examples")
    def campaign_examples(campaign_id: str, _worker: dict = Depends(requester)) -> dict:
        return {"examples": service.campaign_examples(campaign_id)}

    @app.post("/v1/campaigns/{campaign_id}/reports", status_code=202)
    def submit_report(
        campaign_id: str, body: ReportCreate, worker: dict = Depends(requester)
    ) -> dict:
        report = service.submit_report(worker["id"], campaign_id, body.url_a, body.url_b)
        return service.report_view(report["id"], worker)

    @app.get("/v1/reports/{report_id}")
    def get_report(report_id: str, worker: dict = Depends(requester)) -> dict:
        return service.report_view(report_id, worker)

    @app.post("/v1/reports/{report_id}/reprocess")
    def reprocess_report(report_id: str, worker: dict = Depends(admin)) -> dict:
        service.reprocess_report(report_id)
        return service.report_view(report_id, worker)

    @app.get("/v1/campaigns/{campaign_id}/stats")
    def campaign_stats(campaign_id: str, _admin: dict = Depends(admin)) -> dict:
        service.campaign_view(campaign_id)  # not_found before empty series
        return {"series": service.store.stats_rows(campaign_id)}

    @app.get("/v1/campaigns/{campaign_id}/export")
    def export_corpus(
        campaign_id: str, max_cost: float, _admin: dict = Depends(admin)
    ) -> Response:
        service.campaign_view(campaign_id)
        rows = service.store.export_rows(campaign_id, max_cost)
        return Response(
            content=format_export(rows), media_type="text/tab-separated-values"
        )

    @app.get("/v1/workers/{worker_id}/ledger")
    def worker_ledger(worker_id: str, worker: dict = Depends(requester)) -> dict:
        if worker["role"] != "admin" and worker["id"] != worker_id:
            raise ServiceError("forbidden", "not your ledger", http_status=403)
        entries = service.store.ledger_for_worker(worker_id)
        return {"entries": entries, "total": sum(e["amount"] for e in entries)}

    @app.get("/v1/workers/{worker_id}/reports")
    def worker_reports(worker_id: str, worker: dict = Depends(requester)) -> dict:
        if worker["role"] != "admin" and worker["id"] != worker_id:
            raise ServiceError("forbidden", "not your reports", http_status=403)
        reports = service.store.reports_for_worker(worker_id)
        return {"reports": [service.report_view(r["id"], worker) for r in reports]}

    return app

"""Boots a real service instance plus fixture page servers for the webui
integration test, then prints one JSON line with everything the test needs:

    {"base_url": ..., "admin_token": ..., "campaign_id": ...,
     "cost_threshold": ..., "pages": {"src": ..., "tgt": ...,
     "alt_src": ..., "alt_tgt": ..., "blocked": ...}}

Runs until killed. State is in-memory only, so teardown is just SIGTERM.
Reuses the repository's test corpora so the campaign behaves exactly like
the one the Python suite validates.
"""

import json
import random
import sys
import threading
import time
from pathlib import Path

import uvicorn

REPO = Path(__file__).resolve().parents[2]
sys.path.insert(0, str(REPO / "tests"))

from corpora import campaign_corpora, parallel_docs  # noqa: E402
from webfixtures import FixtureServer, page_route, robots_route  # noqa: E402

from crowdbitext import fetch  # noqa: E402
from crowdbitext.service import Service, Store, create_app  # noqa: E402

FAST = fetch.FetchPolicy(per_host_min_interval=0.0, timeout=5.0)


def main() -> None:
    doc_src, doc_tgt = parallel_docs(random.Random(1409), 10)
    alt_src, alt_tgt = parallel_docs(random.Random(1410), 6)
    pages = FixtureServer(
        {
            "/robots.txt": robots_route("User-agent: *\nAllow: /\n"),
            "/src": page_route(doc_src, title=""),
            "/tgt": page_route(doc_tgt, title=""),
            "/alt-src": page_route(alt_src, title=""),
            "/alt-tgt": page_route(alt_tgt, title=""),
        }
    )
    blocked = FixtureServer(
        {
            "/robots.txt": robots_route("User-agent: *\nDisallow: /\n"),
            "/page": page_route(["Never served."], title=""),
        }
    )
    pages.__enter__()
    blocked.__enter__()

    store = Store(":memory:")
    service = Service(store, fetch_policy=FAST, pool_size=2)
    admin = service.bootstrap_admin(token="webui-admin")
    dev_src, dev_tgt, general = campaign_corpora(random.Random(1409))
    campaign = service.campaign_view(
        service.create_campaign(
            "webui-fixture", "health", "en", "xx", dev_src, dev_tgt, general
        )["id"]
    )
    service.start()

    config = uvicorn.Config(
        create_app(service), host="127.0.0.1", port=0, log_level="warning"
    )
    server = uvicorn.Server(config)
    thread = threading.Thread(target=server.run, daemon=True)
    thread.start()
    while not server.started:
        time.sleep(0.01)
    port = server.servers[0].sockets[0].getsockname()[1]

    print(
        json.dumps(
            {
                "base_url": f"http://127.0.0.1:{port}",
                "admin_token": admin["token"],
                "campaign_id": campaign["id"],
                "cost_threshold": campaign["cost_threshold"],
                "pages": {
                    "src": pages.url("/src"),
                    "tgt": pages.url("/tgt"),
                    "alt_src": pages.url("/alt-src"),
                    "alt_tgt": pages.url("/alt-tgt"),
                    "blocked": blocked.url("/page"),
                },
            }
        ),
        flush=True,
    )
    thread.join()


if __name__ == "__main__":
    main()

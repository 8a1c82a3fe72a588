import random
import string
import time

import pytest

from crowdbitext import fetch
from webfixtures import FixtureServer, page_route, robots_route

FAST = fetch.FetchPolicy(per_host_min_interval=0.0, timeout=5.0)


@pytest.fixture(autouse=True)
def fresh_fetch_state():
    fetch.clear_fetch_state()
    yield
    fetch.clear_fetch_state()


def test_canonicalize_rules():
    assert (
        fetch.canonicalize_url("HTTP://Example.COM:80/a/../b#x") == "http://example.com/b"
    )
    assert (
        fetch.canonicalize_url("https://example.com/p?b=2&a=1")
        == "https://example.com/p?b=2&a=1"
    )
    assert (
        fetch.canonicalize_url("https://example.com:8443/x") == "https://example.com:8443/x"
    )
    assert fetch.canonicalize_url("https://example.com:443/x") == "https://example.com/x"
    assert fetch.canonicalize_url("http://a.com/x/./y/../z") == "http://a.com/x/z"
    assert fetch.canonicalize_url("http://a.com/x/y/..") == "http://a.com/x/"
    # idempotent on everything above
    for url in [
        "http://example.com/b",
        "https://example.com/p?b=2&a=1",
        "http://a.com/x/z",
    ]:
        assert fetch.canonicalize_url(url) == url


def test_canonicalize_rejects_bad_urls():
    for bad in ["ftp://x.com/a", "/relative/only", "example.com/no-scheme", "mailto:a@b"]:
        with pytest.raises(ValueError):
            fetch.canonicalize_url(bad)


def test_extract_text_rules():
    assert fetch.extract_text("<p>a</p><p>b</p>") == "a\nb"
    assert fetch.extract_text("<script>var x=1;</script>hi") == "hi"
    assert fetch.extract_text("a &amp; b") == "a & b"
    assert fetch.extract_text("x<br>y") == "x\ny"
    assert fetch.extract_text("<!-- gone -->kept") == "kept"
    assert fetch.extract_text("<b>bo</b>ld runs <i>to</i>gether") == "bold runs together"
    assert (
        fetch.extract_text("<div>one</div>\n\n\n<div>two</div>")
        == "one\ntwo"
    )
    assert fetch.extract_text("<style>p{}</style><noscript>n</noscript>done") == "done"


def test_extract_text_handles_tag_soup():
    # mangled nesting and unterminated tags must not leak markup through
    rng = random.Random(1)
    tags = ["p", "div", "b", "script", "style", "td", "h2"]
    for _ in range(150):
        soup = []
        for _ in range(rng.randrange(1, 30)):
            kind = rng.randrange(4)
            if kind == 0:
                soup.append(f"<{rng.choice(tags)}>")
            elif kind == 1:
                soup.append(f"</{rng.choice(tags)}>")
            elif kind == 2:
                soup.append("".join(rng.choice(string.ascii_letters + " .,") for _ in range(8)))
            else:
                soup.append(rng.choice(["<", "< ", "<3", "&amp;", "<x y=\""]))
        text = fetch.extract_text("".join(soup))
        for i, ch in enumerate(text[:-1]):
            assert not (ch == "<" and text[i + 1].isalpha()), text


def test_fetch_html_document():
    routes = {
        "/robots.txt": robots_route("User-agent: *\nAllow: /\n"),
        "/page": page_route(["First paragraph.", "Second paragraph."]),
    }
    with FixtureServer(routes) as server:
        doc = fetch.fetch_url(server.url("/page"), FAST)
    assert doc.status == 200
    assert doc.content_type == "text/html"
    assert doc.text == "page\nFirst paragraph.\nSecond paragraph."
    assert doc.url == server.url("/page")


def test_fetch_plain_text_and_other_types():
    routes = {
        "/robots.txt": robots_route("User-agent: *\nAllow: /\n"),
        "/notes.txt": (200, {"Content-Type": "text/plain; charset=utf-8"}, "plain body".encode()),
        "/data.bin": (200, {"Content-Type": "application/octet-stream"}, b"\x00\x01"),
    }
    with FixtureServer(routes) as server:
        txt = fetch.fetch_url(server.url("/notes.txt"), FAST)
        blob = fetch.fetch_url(server.url("/data.bin"), FAST)
    assert txt.text == "plain body"
    assert blob.text is None
    assert blob.content_type == "application/octet-stream"


def test_robots_disallow_blocks_before_request():
    routes = {
        "/robots.txt": robots_route("User-agent: *\nDisallow: /private/\n"),
        "/private/page": page_route(["secret"]),
        "/open": page_route(["fine"]),
    }
    with FixtureServer(routes) as server:
        with pytest.raises(fetch.RobotsDisallowed):
            fetch.fetch_url(server.url("/private/page"), FAST)
        assert server.requests == ["/robots.txt"]  # the content URL was never hit
        doc = fetch.fetch_url(server.url("/open"), FAST)
        assert doc.text == "page\nfine"
        assert server.requests == ["/robots.txt", "/open"]  # robots cached


def test_missing_robots_allows_and_server_error_denies():
    with FixtureServer({"/page": page_route(["ok"])}) as server:
        doc = fetch.fetch_url(server.url("/page"), FAST)
        assert doc.text == "page\nok"

    fetch.clear_fetch_state()
    routes = {
        "/robots.txt": (500, {"Content-Type": "text/plain"}, b"boom"),
        "/page": page_route(["ok"]),
    }
    with FixtureServer(routes) as server:
        with pytest.raises(fetch.RobotsDisallowed):
            fetch.fetch_url(server.url("/page"), FAST)
        assert server.requests == ["/robots.txt"]


def test_non_2xx_status_raises():
    routes = {"/robots.txt": robots_route("User-agent: *\nAllow: /\n")}
    with FixtureServer(routes) as server:
        with pytest.raises(fetch.FetchError, match="404"):
            fetch.fetch_url(server.url("/missing"), FAST)


def test_oversize_response_rejected():
    big = b"x" * 4096
    routes = {
        "/robots.txt": robots_route("User-agent: *\nAllow: /\n"),
        "/big": (200, {"Content-Type": "text/html"}, big),
    }
    small_cap = fetch.FetchPolicy(per_host_min_interval=0.0, timeout=5.0, max_bytes=1024)
    with FixtureServer(routes) as server:
        with pytest.raises(fetch.FetchError, match="exceeds"):
            fetch.fetch_url(server.url("/big"), small_cap)


def test_same_host_requests_are_spaced():
    routes = {
        "/robots.txt": robots_route("User-agent: *\nAllow: /\n"),
        "/a": page_route(["a"]),
        "/b": page_route(["b"]),
    }
    policy = fetch.FetchPolicy(per_host_min_interval=0.6, timeout=5.0)
    with FixtureServer(routes) as server:
        started = time.monotonic()
        fetch.fetch_url(server.url("/a"), policy)
        fetch.fetch_url(server.url("/b"), policy)
        elapsed = time.monotonic() - started
    # three spaced requests (robots, /a, /b) => at least two full intervals
    assert elapsed >= 2 * 0.6 - 0.5


def test_redirects_followed_with_limit():
    routes = {
        "/robots.txt": robots_route("User-agent: *\nAllow: /\n"),
        "/start": (302, {"Content-Type": "text/html", "Location": "/hop1"}, b""),
        "/hop1": (302, {"Content-Type": "text/html", "Location": "/final"}, b""),
        "/final": page_route(["landed"]),
        "/loop": (302, {"Content-Type": "text/html", "Location": "/loop"}, b""),
    }
    with FixtureServer(routes) as server:
        doc = fetch.fetch_url(server.url("/start"), FAST)
        assert doc.text == "page\nlanded"
        assert doc.url == server.url("/final")
        with pytest.raises(fetch.FetchError, match="redirects"):
            fetch.fetch_url(server.url("/loop"), FAST)


def test_cross_host_redirect_rechecks_robots():
    # second server (a different port, hence host key) disallows everything;
    # the redirect from the first must be stopped before touching content
    with FixtureServer(
        {"/robots.txt": robots_route("User-agent: *\nDisallow: /\n"), "/page": page_route(["x"])}
    ) as blocked:
        routes = {
            "/robots.txt": robots_route("User-agent: *\nAllow: /\n"),
            "/jump": (302, {"Content-Type": "text/html", "Location": blocked.url("/page")}, b""),
        }
        with FixtureServer(routes) as first:
            with pytest.raises(fetch.RobotsDisallowed):
                fetch.fetch_url(first.url("/jump"), FAST)
        assert blocked.requests == ["/robots.txt"]


def test_policy_validation():
    with pytest.raises(ValueError):
        fetch.FetchPolicy(timeout=0)
    with pytest.raises(ValueError):
        fetch.FetchPolicy(max_bytes=0)
    with pytest.raises(ValueError):
        fetch.FetchPolicy(per_host_min_interval=-1)

"""Polite fetching of reported URLs and HTML text extraction.

Every content request is preceded by a robots.txt check for its host, and
requests to the same host are spaced by a minimum interval. Robots rules are
cached per host for the process lifetime; a missing robots.txt allows
everything, while a server error or unreachable robots.txt denies the host
(politeness errs toward not fetching). Redirects are followed manually, at
most five hops, re-checking robots at every hop, so a redirect can never
smuggle a request past a host's rules.
"""

from __future__ import annotations

import threading
import time
import urllib.error
import urllib.request
from dataclasses import dataclass
from html.parser import HTMLParser
from urllib import robotparser
from urllib.parse import urljoin, urlsplit, urlunsplit

DEFAULT_USER_AGENT = "crowdbitext/0.1"
DEFAULT_TIMEOUT = 20.0
DEFAULT_MAX_BYTES = 8 * 1024 * 1024
DEFAULT_MIN_INTERVAL = 2.0
REDIRECT_LIMIT = 5

_DEFAULT_PORTS = {"http": "80", "https": "443"}


class FetchError(Exception):
    """Network, size, status or redirect failure while fetching."""


class RobotsDisallowed(FetchError):
    """The host's robots rules forbid this fetch; no request was made."""


@dataclass(frozen=True)
class FetchPolicy:
    user_agent: str = DEFAULT_USER_AGENT
    timeout: float = DEFAULT_TIMEOUT
    max_bytes: int = DEFAULT_MAX_BYTES
    per_host_min_interval: float = DEFAULT_MIN_INTERVAL
    respect_robots: bool = True

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise ValueError("timeout must be > 0")
        if self.max_bytes <= 0:
            raise ValueError("max_bytes must be > 0")
        if self.per_host_min_interval < 0:
            raise ValueError("per_host_min_interval must be >= 0")


@dataclass(frozen=True)
class Document:
    url: str
    fetched_at: float
    content_type: str
    text: str | None
    status: int


def canonicalize_url(raw: str) -> str:
    """Canonical form for dedup: lowercase scheme/host, strip default port
    and fragment, resolve dot-segments. Path and query stay verbatim
    otherwise; reordering a query string can change page identity.
    """
    parts = urlsplit(raw.strip())
    scheme = parts.scheme.lower()
    if scheme not in ("http", "https"):
        raise ValueError(f"not an absolute http(s) URL: {raw!r}")
    if not parts.hostname:
        raise ValueError(f"URL has no host: {raw!r}")
    host = parts.hostname.lower()
    netloc = f"[{host}]" if ":" in host else host  # IPv6 literals keep brackets
    if parts.port is not None and str(parts.port) != _DEFAULT_PORTS[scheme]:
        netloc = f"{netloc}:{parts.port}"
    if parts.username:
        cred = parts.username if parts.password is None else f"{parts.username}:{parts.password}"
        netloc = f"{cred}@{netloc}"
    path = _remove_dot_segments(parts.path)
    return urlunsplit((scheme, netloc, path, parts.query, ""))


def _remove_dot_segments(path: str) -> str:
    # RFC 3986 section 5.2.4
    out: list[str] = []
    for segment in path.split("/"):
        if segment == ".":
            continue
        if segment == "..":
            if out and out[-1] != "":
                out.pop()
                if not out:
                    out = [""]
        else:
            out.append(segment)
    resolved = "/".join(out)
    if path.startswith("/") and not resolved.startswith("/"):
        resolved = "/" + resolved
    if path.endswith(("/.", "/..")):
        resolved += "/" if not resolved.endswith("/") else ""
    return resolved


_BLOCK_TAGS = frozenset(
    "p div h1 h2 h3 h4 h5 h6 li ul ol dl dt dd table thead tbody tr td th caption "
    "section article header footer nav aside main blockquote pre hr form fieldset "
    "figure figcaption address title option".split()
)
_SKIP_TAGS = frozenset({"script", "style", "noscript", "template"})


class _TextExtractor(HTMLParser):
    def __init__(self) -> None:
        super().__init__(convert_charrefs=True)
        self.chunks: list[str] = []
        self._skip_depth = 0

    def handle_starttag(self, tag: str, attrs) -> None:
        if tag in _SKIP_TAGS:
            self._skip_depth += 1
        elif tag == "br":
            self.chunks.append("\n")
        elif tag in _BLOCK_TAGS:
            self.chunks.append("\n")

    def handle_endtag(self, tag: str) -> None:
        if tag in _SKIP_TAGS:
            self._skip_depth = max(0, self._skip_depth - 1)
        elif tag in _BLOCK_TAGS:
            self.chunks.append("\n")

    def handle_data(self, data: str) -> None:
        if not self._skip_depth:
            self.chunks.append(data)


def extract_text(html: str) -> str:
    """Plain text from tag soup.

    Scripts, styles and comments vanish; block elements break lines; inline
    elements run together; entities come out decoded; blank lines collapse.
    """
    parser = _TextExtractor()
    parser.feed(html)
    # A trailing "<foo" with no ">" would be flushed as literal data at
    # close(); drop the unconsumed tail so markup never leaks into the text.
    if parser.rawdata.startswith("<"):
        parser.rawdata = ""
    parser.close()
    lines = [ln.strip() for ln in "".join(parser.chunks).split("\n")]
    text = "\n".join(ln for ln in lines if ln)
    # Tag-soup recovery can emit stray "<" as text right next to real words;
    # a "<" directly before a letter reads as markup, so those are dropped
    # (right to left, so runs like "<<word" collapse fully).
    kept: list[str] = []
    for ch in reversed(text):
        if ch == "<" and kept and kept[-1].isalpha():
            continue
        kept.append(ch)
    return "".join(reversed(kept))


# Shared politeness state. Robots verdicts are cached per (scheme, host) for
# the process lifetime; the throttle spaces request starts per host.
_lock = threading.Lock()
_robots_cache: dict[tuple[str, str], robotparser.RobotFileParser | str] = {}
_last_request: dict[str, float] = {}


def clear_fetch_state() -> None:
    """Forget cached robots rules and throttle timestamps (for tests)."""
    with _lock:
        _robots_cache.clear()
        _last_request.clear()


def _wait_turn(host: str, interval: float) -> None:
    while True:
        with _lock:
            now = time.monotonic()
            last = _last_request.get(host)
            wait = 0.0 if last is None else last + interval - now
            if wait <= 0:
                _last_request[host] = now
                return
        time.sleep(wait)


def _raw_get(url: str, policy: FetchPolicy) -> tuple[int, dict[str, str], bytes]:
    """One HTTP GET with no redirect following; returns status, headers, body."""
    host = urlsplit(url).netloc
    _wait_turn(host, policy.per_host_min_interval)
    request = urllib.request.Request(
        url, headers={"User-Agent": policy.user_agent}, method="GET"
    )

    class _NoRedirect(urllib.request.HTTPRedirectHandler):
        def redirect_request(self, *args, **kwargs):
            return None

    opener = urllib.request.build_opener(_NoRedirect)
    try:
        with opener.open(request, timeout=policy.timeout) as response:
            body = response.read(policy.max_bytes + 1)
            if len(body) > policy.max_bytes:
                raise FetchError(f"response exceeds {policy.max_bytes} bytes: {url}")
            return response.status, dict(response.headers), body
    except urllib.error.HTTPError as exc:
        exc.read()
        return exc.code, dict(exc.headers), b""
    except (urllib.error.URLError, TimeoutError, ConnectionError, OSError) as exc:
        raise FetchError(f"fetch failed for {url}: {exc}") from exc


def _robots_for(scheme: str, host: str, policy: FetchPolicy):
    key = (scheme, host)
    with _lock:
        cached = _robots_cache.get(key)
    if cached is not None:
        return cached
    robots_url = f"{scheme}://{host}/robots.txt"
    try:
        status, _, body = _raw_get(robots_url, policy)
    except FetchError:
        verdict: robotparser.RobotFileParser | str = "deny"
    else:
        if status in (401, 403) or 500 <= status < 600:
            # can't prove we're allowed; stay out
            verdict = "deny"
        elif status >= 400:
            verdict = "allow"  # no robots.txt published
        else:
            parser = robotparser.RobotFileParser()
            parser.parse(body.decode("utf-8", errors="replace").splitlines())
            verdict = parser
    with _lock:
        _robots_cache.setdefault(key, verdict)
        return _robots_cache[key]


def _check_robots(url: str, policy: FetchPolicy) -> None:
    parts = urlsplit(url)
    verdict = _robots_for(parts.scheme, parts.netloc, policy)
    if verdict == "allow":
        return
    if verdict == "deny":
        raise RobotsDisallowed(f"robots rules unavailable for {parts.netloc}")
    if not verdict.can_fetch(policy.user_agent, url):
        raise RobotsDisallowed(f"robots.txt disallows {url}")


def fetch_url(url: str, policy: FetchPolicy) -> Document:
    """Fetch one URL politely; no link crawling.

    Raises RobotsDisallowed before any content request when the host's rules
    forbid the URL, and FetchError on network failures, oversize responses,
    redirect chains past five hops, or a final non-2xx status.
    """
    current = canonicalize_url(url)
    for _ in range(REDIRECT_LIMIT + 1):
        if policy.respect_robots:
            _check_robots(current, policy)
        status, headers, body = _raw_get(current, policy)
        if 300 <= status < 400:
            location = headers.get("Location") or headers.get("location")
            if not location:
                raise FetchError(f"redirect without location from {current}")
            current = canonicalize_url(urljoin(current, location))
            continue
        if not 200 <= status < 300:
            raise FetchError(f"status {status} for {current}")
        content_type = headers.get("Content-Type", "").strip()
        media = content_type.split(";")[0].strip().lower()
        charset = "utf-8"
        for param in content_type.split(";")[1:]:
            name, _, value = param.partition("=")
            if name.strip().lower() == "charset" and value.strip():
                charset = value.strip().strip('"')
        text: str | None = None
        if media in ("text/html", "application/xhtml+xml"):
            text = extract_text(body.decode(charset, errors="replace"))
        elif media == "text/plain":
            text = body.decode(charset, errors="replace")
        return Document(
            url=current,
            fetched_at=time.time(),
            content_type=media,
            text=text,
            status=status,
        )
    raise FetchError(f"more than {REDIRECT_LIMIT} redirects from {url}")

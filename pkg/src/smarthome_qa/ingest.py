"""Forum export parsing and keyword filtering.

Exports come from external scraping tools; this module only consumes their
dumps. Two formats are accepted: a JSON array of thread objects, and a CSV
with one row per post (columns thread_id, position, title, body, meta).
Live crawling and HTML parsing are out of scope.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Optional, Sequence

from .errors import IngestError
from .preprocess import QACandidate

MATCH_FIELDS = ("title", "opening_post")


@dataclass(frozen=True)
class Post:
    position: int
    body: str
    meta: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class RawThread:
    source: str
    thread_id: str
    title: str
    posts: tuple[Post, ...]

    def opening_post(self) -> Optional[Post]:
        return self.posts[0] if self.posts else None


@dataclass(frozen=True)
class KeywordFilterSpec:
    keywords: tuple[str, ...]
    match_fields: tuple[str, ...] = MATCH_FIELDS

    def __post_init__(self) -> None:
        object.__setattr__(self, "keywords", tuple(self.keywords))
        object.__setattr__(self, "match_fields", tuple(self.match_fields))
        if not self.keywords:
            raise IngestError("keyword list is empty")
        for kw in self.keywords:
            if kw != kw.lower():
                raise IngestError(f"keyword {kw!r} must be lowercase")
        if not self.match_fields:
            raise IngestError("match_fields is empty")
        for f in self.match_fields:
            if f not in MATCH_FIELDS:
                raise IngestError(f"unknown match field {f!r}")


@dataclass(frozen=True)
class ParseWarning:
    file: str
    row: int
    reason: str

    def to_json_dict(self) -> dict:
        return {"file": self.file, "row": self.row, "reason": self.reason}


@dataclass(frozen=True)
class ParseResult:
    threads: tuple[RawThread, ...]
    warnings: tuple[ParseWarning, ...]


def write_warning_report(warnings: Sequence[ParseWarning], path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for w in warnings:
            fh.write(json.dumps(w.to_json_dict(), ensure_ascii=False))
            fh.write("\n")


def _build_posts(raw_posts: list, file: str, row: int, warnings: list[ParseWarning]) -> list[Post]:
    posts: list[Post] = []
    for p in raw_posts:
        if not isinstance(p, dict) or "position" not in p or "body" not in p:
            warnings.append(ParseWarning(file, row, "post missing position/body"))
            continue
        try:
            position = int(p["position"])
        except (TypeError, ValueError):
            warnings.append(ParseWarning(file, row, f"bad post position {p['position']!r}"))
            continue
        if position < 0:
            warnings.append(ParseWarning(file, row, f"negative post position {position}"))
            continue
        meta = p.get("meta") or {}
        if not isinstance(meta, dict):
            meta = {"raw": meta}
        posts.append(Post(position=position, body=str(p["body"]), meta=meta))
    posts.sort(key=lambda p: p.position)
    return posts


def _parse_json_export(path: Path, source: str) -> ParseResult:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise IngestError(f"{path}: not valid JSON: {exc}") from None
    if not isinstance(data, list):
        raise IngestError(f"{path}: JSON export must be an array of threads")
    threads: list[RawThread] = []
    warnings: list[ParseWarning] = []
    for idx, entry in enumerate(data):
        if not isinstance(entry, dict) or "thread_id" not in entry:
            warnings.append(ParseWarning(str(path), idx, "thread entry missing thread_id"))
            continue
        posts = _build_posts(entry.get("posts") or [], str(path), idx, warnings)
        if not posts or posts[0].position != 0:
            warnings.append(ParseWarning(str(path), idx, "thread has no opening post"))
            continue
        threads.append(
            RawThread(
                source=source,
                thread_id=str(entry["thread_id"]),
                title=str(entry.get("title", "")),
                posts=tuple(posts),
            )
        )
    return ParseResult(tuple(threads), tuple(warnings))


def _parse_csv_export(path: Path, source: str) -> ParseResult:
    warnings: list[ParseWarning] = []
    rows_by_thread: dict[str, list[tuple[int, str, dict]]] = {}
    titles: dict[str, str] = {}
    with path.open("r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"thread_id", "position", "body"} <= set(
            reader.fieldnames
        ):
            raise IngestError(
                f"{path}: CSV export needs at least thread_id, position, body columns"
            )
        for rownum, row in enumerate(reader, start=2):  # header is line 1
            thread_id = (row.get("thread_id") or "").strip()
            if not thread_id:
                warnings.append(ParseWarning(str(path), rownum, "missing thread_id"))
                continue
            try:
                position = int(row.get("position") or "")
            except ValueError:
                warnings.append(
                    ParseWarning(str(path), rownum, f"bad position {row.get('position')!r}")
                )
                continue
            meta_raw = (row.get("meta") or "").strip()
            meta: dict = {}
            if meta_raw:
                try:
                    parsed = json.loads(meta_raw)
                    meta = parsed if isinstance(parsed, dict) else {"raw": parsed}
                except json.JSONDecodeError:
                    warnings.append(ParseWarning(str(path), rownum, "meta is not valid JSON"))
                    continue
            rows_by_thread.setdefault(thread_id, []).append(
                (position, row.get("body") or "", meta)
            )
            title = (row.get("title") or "").strip()
            if title and thread_id not in titles:
                titles[thread_id] = title
    threads: list[RawThread] = []
    for thread_id, rows in rows_by_thread.items():
        rows.sort(key=lambda r: r[0])
        if rows[0][0] != 0:
            warnings.append(ParseWarning(str(path), 0, f"thread {thread_id}: no opening post"))
            continue
        posts = tuple(Post(position=p, body=b, meta=m) for p, b, m in rows)
        threads.append(
            RawThread(
                source=source,
                thread_id=thread_id,
                title=titles.get(thread_id, ""),
                posts=posts,
            )
        )
    return ParseResult(tuple(threads), tuple(warnings))


def parse_export(path: str | Path, source: str) -> ParseResult:
    """Parse a scraper export into normalized threads plus row-level warnings."""
    path = Path(path)
    if not path.exists():
        raise IngestError(f"no such export file: {path}")
    suffix = path.suffix.lower()
    if suffix == ".json":
        result = _parse_json_export(path, source)
    elif suffix == ".csv":
        result = _parse_csv_export(path, source)
    else:
        head = path.read_text(encoding="utf-8", errors="replace")[:64].lstrip()
        if head.startswith("["):
            result = _parse_json_export(path, source)
        else:
            raise IngestError(f"{path}: unknown export format (expected .json or .csv)")
    if not result.threads:
        raise IngestError(f"{path}: no parseable threads")
    return result


def _thread_matches(thread: RawThread, spec: KeywordFilterSpec) -> bool:
    texts: list[str] = []
    if "title" in spec.match_fields:
        texts.append(thread.title.lower())
    if "opening_post" in spec.match_fields:
        opening = thread.opening_post()
        texts.append(opening.body.lower() if opening else "")
    return any(kw in text for text in texts for kw in spec.keywords)


def keyword_filter(threads: Iterable[RawThread], spec: KeywordFilterSpec) -> list[RawThread]:
    """Keep threads where any keyword occurs as a substring of a match field."""
    return [t for t in threads if _thread_matches(t, spec)]


def thread_to_candidate(thread: RawThread) -> QACandidate:
    """Title plus opening post become the question; later posts the answers.

    Post metadata is intentionally left behind here; only the texts travel on.
    """
    if not thread.posts:
        raise IngestError(f"thread {thread.thread_id!r} has no posts")
    opening = thread.posts[0].body
    parts = [p for p in (thread.title.strip(), opening.strip()) if p]
    if not parts:
        raise IngestError(f"thread {thread.thread_id!r} has an empty title and opening post")
    return QACandidate(
        source=thread.source,
        question="\n\n".join(parts),
        answers=tuple(p.body for p in thread.posts[1:]),
        thread_id=thread.thread_id,
    )


def load_keywords(path: str | Path | None = None) -> KeywordFilterSpec:
    """Keyword spec from a file (one phrase per line, # comments), or the
    packaged default list when no path is given."""
    if path is None:
        text = resources.files("smarthome_qa.data").joinpath("keywords.txt").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    keywords = tuple(
        line.strip().lower()
        for line in text.splitlines()
        if line.strip() and not line.strip().startswith("#")
    )
    return KeywordFilterSpec(keywords=keywords)

"""Tweet corpus ingestion: parsing, validation, collection window and grouping.

Input is UTF-8 line-delimited JSON, one tweet per line, in the shape of the
Twitter streaming payload (``id``, ``user.*``, ``created_at``, ``text`` and an
optional ``retweeted_status``).  Bad lines are skipped and reported.
"""

from __future__ import annotations

import enum
import json
import logging
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Iterable, Iterator, TextIO

log = logging.getLogger(__name__)

MAX_ID = 2**64 - 1
DEFAULT_MAX_LINE_LENGTH = 1 << 20

_TWITTER_TS = "%a %b %d %H:%M:%S %z %Y"
_PLAIN_TS = "%Y-%m-%d %H:%M:%S"


class CorpusError(ValueError):
    """Domain error raised by corpus operations."""


class Label(str, enum.Enum):
    HUMAN = "H"
    BOT = "B"
    UNKNOWN = "U"


@dataclass(frozen=True)
class OriginalRef:
    original_tweet_id: int
    original_author_id: int
    original_created_at: int
    # text of the embedded original, when the payload carries it
    text: str | None = None


@dataclass(frozen=True)
class TweetRecord:
    tweet_id: int
    author_id: int
    created_at: int
    text: str
    retweet_of: OriginalRef | None = None

    @property
    def is_retweet(self) -> bool:
        return self.retweet_of is not None


@dataclass
class AccountProfile:
    account_id: int
    followers_count: int
    friends_count: int
    statuses_count: int
    account_created_at: int
    label: Label = Label.UNKNOWN
    sub_scores: object | None = None  # botsense.BotScore once scored


@dataclass(frozen=True)
class CollectionWindow:
    start: int
    end: int

    def __post_init__(self):
        if not self.start < self.end:
            raise CorpusError(f"window start {self.start} must precede end {self.end}")

    @property
    def hours(self) -> float:
        return (self.end - self.start) / 3600.0


@dataclass
class CorpusStats:
    tweets: int = 0
    retweets: int = 0
    accounts: int = 0
    rejected: int = 0
    duplicates: int = 0
    diagnostics: list[str] = field(default_factory=list)

    def as_dict(self) -> dict[str, int]:
        return {
            "tweets": self.tweets,
            "retweets": self.retweets,
            "accounts": self.accounts,
            "rejected": self.rejected,
            "duplicates": self.duplicates,
        }


def parse_timestamp(value) -> int:
    """Return UTC epoch seconds for either accepted timestamp form.

    Plain ``YYYY-MM-DD HH:MM:SS`` strings are taken to be UTC.
    """
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise ValueError(f"bad timestamp {value!r}")
    if isinstance(value, int):
        return value
    value = value.strip()
    try:
        dt = datetime.strptime(value, _PLAIN_TS).replace(tzinfo=timezone.utc)
    except ValueError:
        dt = datetime.strptime(value, _TWITTER_TS)
    return int(dt.timestamp())


def format_timestamp(seconds: int) -> str:
    return datetime.fromtimestamp(seconds, tz=timezone.utc).strftime(_PLAIN_TS)


def _as_id(value) -> int:
    # ids may arrive as JSON numbers or as strings (``id_str`` style)
    if isinstance(value, bool):
        raise ValueError(f"bad identifier {value!r}")
    if isinstance(value, str):
        value = int(value)
    if not isinstance(value, int) or not 0 <= value <= MAX_ID:
        raise ValueError(f"bad identifier {value!r}")
    return value


def _as_count(value) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < 0:
        raise ValueError(f"bad count {value!r}")
    return value


def parse_line(line: str) -> tuple[TweetRecord, AccountProfile]:
    """Parse one JSON record.  Raises ValueError on any schema problem."""
    try:
        obj = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ValueError(f"invalid JSON: {exc.msg}") from None
    if not isinstance(obj, dict):
        raise ValueError("record is not an object")
    try:
        user = obj["user"]
        text = obj["text"]
        if not isinstance(text, str):
            raise ValueError("text is not a string")
        created_at = parse_timestamp(obj["created_at"])
        author_id = _as_id(user["id"])
        profile = AccountProfile(
            account_id=author_id,
            followers_count=_as_count(user["followers_count"]),
            friends_count=_as_count(user["friends_count"]),
            statuses_count=_as_count(user["statuses_count"]),
            account_created_at=parse_timestamp(user["created_at"]),
        )
        retweet_of = None
        rs = obj.get("retweeted_status")
        if rs is not None:
            orig_text = rs.get("text")
            if orig_text is not None and not isinstance(orig_text, str):
                raise ValueError("retweeted_status.text is not a string")
            retweet_of = OriginalRef(
                original_tweet_id=_as_id(rs["id"]),
                original_author_id=_as_id(rs["user"]["id"]),
                original_created_at=parse_timestamp(rs["created_at"]),
                text=orig_text,
            )
            if retweet_of.original_created_at > created_at:
                raise ValueError("original created after its retweet")
        record = TweetRecord(
            tweet_id=_as_id(obj["id"]),
            author_id=author_id,
            created_at=created_at,
            text=text,
            retweet_of=retweet_of,
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"missing or mistyped field {exc}") from None
    return record, profile


def _parse_numbered(item: tuple[int, str]):
    lineno, line = item
    try:
        return parse_line(line)
    except ValueError as exc:
        return f"line {lineno}: {exc}"


def _numbered_lines(lines: Iterable[str], max_line_length: int, diagnostics: list[str]):
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        if len(line) > max_line_length:
            diagnostics.append(f"line {lineno}: exceeds maximum length {max_line_length}")
            continue
        yield lineno, line


def parse_corpus(
    lines: Iterable[str],
    max_line_length: int = DEFAULT_MAX_LINE_LENGTH,
    window_end: int | None = None,
    workers: int = 1,
) -> tuple[list[TweetRecord], dict[int, AccountProfile], CorpusStats]:
    """Parse a line-delimited corpus.

    Returns valid records in input order, one profile per author and the
    corpus statistics.  Malformed, oversized, duplicate and post-window lines
    are counted in ``stats.rejected`` with a diagnostic each.  With
    ``workers > 1`` lines are decoded in a process pool; the reduction is
    done in line order so the result is identical to a serial run.
    """
    diagnostics: list[str] = []
    numbered = _numbered_lines(lines, max_line_length, diagnostics)
    if workers > 1:
        items = list(numbered)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parsed = list(pool.map(_parse_numbered, items, chunksize=2048))
    else:
        parsed = map(_parse_numbered, numbered)

    records: list[TweetRecord] = []
    profiles: dict[int, AccountProfile] = {}
    latest: dict[int, tuple[int, int]] = {}
    seen: set[int] = set()
    stats = CorpusStats(diagnostics=diagnostics)
    for result in parsed:
        if isinstance(result, str):
            diagnostics.append(result)
            continue
        record, profile = result
        if record.tweet_id in seen:
            stats.duplicates += 1
            diagnostics.append(f"tweet {record.tweet_id}: duplicate id, first occurrence kept")
            continue
        if window_end is not None and record.created_at > window_end:
            diagnostics.append(f"tweet {record.tweet_id}: created after window end")
            continue
        seen.add(record.tweet_id)
        records.append(record)
        # newest record wins so the profile does not depend on line order
        key = (record.created_at, record.tweet_id)
        if record.author_id not in latest or key > latest[record.author_id]:
            latest[record.author_id] = key
            profiles[record.author_id] = profile

    stats.rejected = len(diagnostics)
    stats.tweets = len(records)
    stats.retweets = sum(1 for r in records if r.retweet_of is not None)
    stats.accounts = len(profiles)
    for msg in diagnostics:
        log.warning("rejected %s", msg)
    return records, profiles, stats


def load_corpus(path, **kwargs):
    """Parse the corpus file at ``path``; I/O errors propagate."""
    with open(path, encoding="utf-8") as fp:
        return parse_corpus(fp, **kwargs)


def record_to_json(record: TweetRecord, profile: AccountProfile) -> dict:
    obj = {
        "id": record.tweet_id,
        "created_at": format_timestamp(record.created_at),
        "text": record.text,
        "user": {
            "id": profile.account_id,
            "followers_count": profile.followers_count,
            "friends_count": profile.friends_count,
            "statuses_count": profile.statuses_count,
            "created_at": format_timestamp(profile.account_created_at),
        },
    }
    ref = record.retweet_of
    if ref is not None:
        obj["retweeted_status"] = {
            "id": ref.original_tweet_id,
            "created_at": format_timestamp(ref.original_created_at),
            "user": {"id": ref.original_author_id},
        }
        if ref.text is not None:
            obj["retweeted_status"]["text"] = ref.text
    return obj


def serialize_corpus(records: Iterable[TweetRecord], profiles: dict[int, AccountProfile],
                     fp: TextIO) -> None:
    for record in records:
        line = json.dumps(record_to_json(record, profiles[record.author_id]),
                          ensure_ascii=False, separators=(",", ":"))
        fp.write(line + "\n")


def collection_window(records: Iterable[TweetRecord]) -> CollectionWindow:
    """Span of record timestamps (embedded originals excluded).

    A single-instant corpus is widened by one second.
    """
    times = [r.created_at for r in records]
    if not times:
        raise CorpusError("collection window of an empty corpus")
    start, end = min(times), max(times)
    if start == end:
        end += 1
    return CollectionWindow(start, end)


def group_by_account(records: Iterable[TweetRecord]) -> dict[int, list[TweetRecord]]:
    groups: dict[int, list[TweetRecord]] = defaultdict(list)
    for r in records:
        groups[r.author_id].append(r)
    out = {}
    for account in sorted(groups):
        out[account] = sorted(groups[account], key=lambda r: (r.created_at, r.tweet_id))
    return out


def iter_retweets(records: Iterable[TweetRecord]) -> Iterator[TweetRecord]:
    return (r for r in records if r.retweet_of is not None)

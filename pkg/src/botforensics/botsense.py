"""Language-independent bot scoring, kernel density estimation and labeling.

The three sub-scores (friend, network, temporal) are either imported from an
external classifier dump or computed here from corpus metadata.  The local
versions are proxies defined by this package, not reproductions of any
external service.
"""

from __future__ import annotations

import csv
import enum
import json
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import AccountProfile, CollectionWindow, Label, TweetRecord

log = logging.getLogger(__name__)

SECONDS_PER_DAY = 86400.0
TEMPORAL_BINS = 16
BANDWIDTH_FLOOR = 0.01
DEFAULT_GRID = {1: 256, 2: 64, 3: 32}
SCORE_FIELDS = ("friend", "network", "temporal")


class BotSenseError(ValueError):
    """Domain error raised by scoring, density and labeling operations."""


@dataclass(frozen=True)
class BotScore:
    friend: float
    network: float
    temporal: float
    composite: float | None = None

    def __post_init__(self):
        parts = (self.friend, self.network, self.temporal)
        if not all(math.isfinite(p) for p in parts):
            raise BotSenseError(f"non-finite sub-score in {parts}")
        mean = (self.friend + self.network + self.temporal) / 3.0
        if self.composite is None:
            object.__setattr__(self, "composite", mean)
        elif not math.isclose(self.composite, mean, rel_tol=0, abs_tol=1e-12):
            raise BotSenseError(f"composite {self.composite} is not the mean {mean}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.friend, self.network, self.temporal)


def _clamp01(value: float) -> float:
    return min(1.0, max(0.0, value))


def import_scores(lines: Iterable[str], accounts: Iterable[int] | None = None,
                  diagnostics: list[str] | None = None) -> dict[int, BotScore]:
    """Read externally produced sub-scores, one JSON object per line.

    Each entry carries ``account_id``, ``friend``, ``network`` and
    ``temporal``.  Values outside [0, 1] are clamped with a diagnostic;
    malformed entries are skipped.  When ``accounts`` is given, entries for
    other accounts are ignored.
    """
    if diagnostics is None:
        diagnostics = []
    wanted = set(accounts) if accounts is not None else None
    scores: dict[int, BotScore] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            obj = json.loads(line)
            account = obj["account_id"]
            account = int(account) if isinstance(account, str) else account
            if isinstance(account, bool) or not isinstance(account, int) or account < 0:
                raise ValueError(f"bad account_id {account!r}")
            values = []
            for name in SCORE_FIELDS:
                v = obj[name]
                if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                    raise ValueError(f"bad {name} value {v!r}")
                if not 0.0 <= v <= 1.0:
                    diagnostics.append(f"line {lineno}: {name}={v} clamped to [0, 1]")
                    v = _clamp01(v)
                values.append(float(v))
        except (ValueError, KeyError, TypeError) as exc:
            diagnostics.append(f"line {lineno}: skipped ({exc})")
            continue
        if wanted is not None and account not in wanted:
            continue
        scores[account] = BotScore(*values)
    for msg in diagnostics:
        log.warning("score import: %s", msg)
    if not scores:
        raise BotSenseError("score file holds no valid entries")
    return scores


def load_scores(path, accounts=None, diagnostics=None) -> dict[int, BotScore]:
    with open(path, encoding="utf-8") as fp:
        return import_scores(fp, accounts, diagnostics)


# -- proxy sub-scores ---------------------------------------------------------

def temporal_score(timeline: Sequence[TweetRecord], window: CollectionWindow | None = None) -> float:
    """Regularity of posting: 1 - H/log2(16) over the log2 inter-tweet gaps.

    Gaps are floored at one second and binned into 16 equal-width bins over
    the account's observed log-gap range.  Fewer than three tweets (inside
    the window, when one is given) is undetermined and scores 0.5.
    """
    times = sorted(r.created_at for r in timeline
                   if window is None or window.start <= r.created_at <= window.end)
    if len(times) < 3:
        return 0.5
    gaps = np.maximum(np.diff(np.asarray(times, dtype=float)), 1.0)
    logs = np.log2(gaps)
    lo, hi = logs.min(), logs.max()
    if hi == lo:
        return 1.0
    counts, _ = np.histogram(logs, bins=TEMPORAL_BINS, range=(lo, hi))
    p = counts[counts > 0] / counts.sum()
    entropy = float(-(p * np.log2(p)).sum())
    return _clamp01(1.0 - entropy / math.log2(TEMPORAL_BINS))


def retweet_partners(records: Iterable[TweetRecord]) -> dict[int, list[int]]:
    """Counterpart list per account, one entry per retweet interaction."""
    partners: dict[int, list[int]] = defaultdict(list)
    for r in records:
        if r.retweet_of is None:
            continue
        a, b = r.author_id, r.retweet_of.original_author_id
        partners[a].append(b)
        if a != b:
            partners[b].append(a)
    return partners


def network_score(account: int, partners: Mapping[int, Sequence[int]]) -> float:
    """1 - distinct/total counterparts; 0.5 for accounts with no retweet contact."""
    events = partners.get(account, ())
    k = len(events)
    if k == 0:
        return 0.5
    return 1.0 - len(set(events)) / k


def _logistic(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    z = math.exp(x)
    return z / (1.0 + z)


@dataclass(frozen=True)
class FriendStats:
    rate_mean: float
    rate_std: float
    ratio_mean: float
    ratio_std: float


def _friend_features(profile: AccountProfile, reference_time: int) -> tuple[float, float]:
    age_days = (reference_time - profile.account_created_at) / SECONDS_PER_DAY
    rate = profile.statuses_count / max(1.0, age_days)
    ratio = math.log((profile.followers_count + 1) / (profile.friends_count + 1))
    return rate, ratio


def friend_stats(profiles: Iterable[AccountProfile], reference_time: int) -> FriendStats:
    feats = np.array([_friend_features(p, reference_time) for p in profiles], dtype=float)
    if feats.size == 0:
        return FriendStats(0.0, 0.0, 0.0, 0.0)
    mean = feats.mean(axis=0)
    std = feats.std(axis=0)  # population std over the scored accounts
    return FriendStats(float(mean[0]), float(std[0]), float(mean[1]), float(std[1]))


def friend_score(profile: AccountProfile, stats: FriendStats, reference_time: int) -> float:
    """logistic(z(tweet rate) - z(follower ratio)); zero-variance features give z = 0."""
    rate, ratio = _friend_features(profile, reference_time)
    z_rate = (rate - stats.rate_mean) / stats.rate_std if stats.rate_std > 0 else 0.0
    z_ratio = (ratio - stats.ratio_mean) / stats.ratio_std if stats.ratio_std > 0 else 0.0
    return _logistic(z_rate - z_ratio)


def proxy_scores(records: Sequence[TweetRecord], profiles: Mapping[int, AccountProfile],
                 groups: Mapping[int, Sequence[TweetRecord]],
                 window: CollectionWindow) -> dict[int, BotScore]:
    """Score every profiled account from corpus-local signals."""
    partners = retweet_partners(records)
    ordered = [profiles[a] for a in sorted(profiles)]
    fstats = friend_stats(ordered, window.end)
    return {
        p.account_id: BotScore(
            friend_score(p, fstats, window.end),
            network_score(p.account_id, partners),
            temporal_score(groups.get(p.account_id, ()), window),
        )
        for p in ordered
    }


# -- density estimation -------------------------------------------------------

def scott_bandwidth(points) -> np.ndarray:
    """Per-dimension Scott bandwidth sigma * n^(-1/(d+4)) with a 0.01 floor."""
    pts = _as_matrix(points)
    n, d = pts.shape
    if n < 2:
        raise BotSenseError(f"bandwidth needs at least 2 points, got {n}")
    sigma = pts.std(axis=0, ddof=1)
    h = sigma * n ** (-1.0 / (d + 4))
    return np.maximum(h, BANDWIDTH_FLOOR)


def _as_matrix(points) -> np.ndarray:
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise BotSenseError("points must be an n x d matrix")
    return pts


@dataclass
class DensityGrid:
    axes: list[np.ndarray]
    values: np.ndarray
    bandwidths: np.ndarray
    names: tuple[str, ...] = field(default=())

    @property
    def dims(self) -> int:
        return len(self.axes)

    def integral(self) -> float:
        total = self.values
        for axis in reversed(self.axes):
            total = np.trapezoid(total, axis, axis=-1)
        return float(total)

    def rows(self):
        """(coordinates..., density) per node, row-major over the axes."""
        mesh = np.meshgrid(*self.axes, indexing="ij")
        coords = [m.ravel() for m in mesh]
        flat = self.values.ravel()
        for i in range(flat.size):
            yield tuple(float(c[i]) for c in coords) + (float(flat[i]),)

    def write_csv(self, fp) -> None:
        names = self.names or tuple(f"x{i + 1}" for i in range(self.dims))
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow([*names, "density"])
        for row in self.rows():
            writer.writerow([repr(v) for v in row])


def kde(points, grid: int | None = None, bandwidths=None, names: tuple[str, ...] = ()) -> DensityGrid:
    """Gaussian product-kernel density of points in [0,1]^d on a regular grid.

    ``grid`` is the node count per axis (defaults 256/64/32 for d=1/2/3) and
    ``bandwidths`` defaults to Scott's rule.  The per-node sum runs over the
    points in input order, so the result does not depend on threading.
    """
    pts = _as_matrix(points)
    n, d = pts.shape
    if d > 3 or d < 1:
        raise BotSenseError(f"kde supports 1 to 3 dimensions, got {d}")
    if n == 0:
        raise BotSenseError("kde of an empty point set")
    if not np.all(np.isfinite(pts)) or pts.min() < 0.0 or pts.max() > 1.0:
        raise BotSenseError("kde points must lie in the unit cube")
    h = scott_bandwidth(pts) if bandwidths is None else np.broadcast_to(
        np.asarray(bandwidths, dtype=float), (d,)).copy()
    if np.any(h <= 0) or not np.all(np.isfinite(h)):
        raise BotSenseError(f"bandwidths must be positive, got {h}")
    g = DEFAULT_GRID[d] if grid is None else int(grid)
    axes = [np.linspace(0.0, 1.0, g) for _ in range(d)]

    # one (G, n) kernel matrix per dimension, combined by an ordered contraction
    kernels = []
    for i in range(d):
        diff = (axes[i][:, None] - pts[None, :, i]) / h[i]
        kernels.append(np.exp(-0.5 * diff * diff) / (h[i] * math.sqrt(2.0 * math.pi)))
    spec = {1: "aj->a", 2: "aj,bj->ab", 3: "aj,bj,cj->abc"}[d]
    values = np.einsum(spec, *kernels, optimize=False) / n
    return DensityGrid(axes=axes, values=values, bandwidths=h, names=names)


# -- thresholding and labeling ------------------------------------------------

class ThresholdSource(str, enum.Enum):
    FIXED = "fixed"
    VALLEY = "valley"
    IMPORTED = "imported"


def _local_maxima(d: np.ndarray) -> list[int]:
    # rising edge of a peak or plateau; grid ends count when the curve falls away
    last = len(d) - 1
    if last < 1:
        return [0] if last == 0 else []
    out = [0] if d[0] > d[1] else []
    for i in range(1, last):
        if d[i] > d[i - 1] and d[i] >= d[i + 1]:
            out.append(i)
    if d[last] > d[last - 1]:
        out.append(last)
    return out


def valley_threshold(scores, grid: int = 256) -> tuple[float, ThresholdSource]:
    """Density valley between the two highest modes of the composite scores.

    Falls back to (0.5, fixed) when the density has a single mode.
    """
    x = np.asarray(scores, dtype=float).ravel()
    if x.size < 2:
        raise BotSenseError(f"valley threshold needs at least 2 scores, got {x.size}")
    dens = kde(x, grid=grid)
    d = dens.values
    maxima = _local_maxima(d)
    if len(maxima) < 2:
        return 0.5, ThresholdSource.FIXED
    top = sorted(maxima, key=lambda i: (-d[i], i))[:2]
    lo, hi = sorted(top)
    if hi - lo < 2:
        return 0.5, ThresholdSource.FIXED
    between = d[lo + 1:hi]
    j = lo + 1 + int(np.argmin(between))  # argmin takes the first (lowest-index) tie
    return float(dens.axes[0][j]), ThresholdSource.VALLEY


class Policy(str, enum.Enum):
    COMPOSITE = "composite"
    ALL_THREE = "all-three"


@dataclass
class LabelReport:
    labels: dict[int, Label]
    threshold: float
    source: ThresholdSource
    policy: Policy

    @property
    def counts(self) -> dict[Label, int]:
        out = {lab: 0 for lab in Label}
        for lab in self.labels.values():
            out[lab] += 1
        return out


def label_accounts(scores: Mapping[int, BotScore], threshold: float,
                   policy: Policy | str = Policy.COMPOSITE,
                   accounts: Iterable[int] | None = None,
                   source: ThresholdSource | str = ThresholdSource.FIXED) -> LabelReport:
    """Bot iff the policy statistic reaches ``threshold``; unscored accounts are Unknown."""
    if not 0.0 <= threshold <= 1.0:
        raise BotSenseError(f"threshold {threshold} outside [0, 1]")
    policy = Policy(policy)
    universe = set(scores) if accounts is None else set(accounts) | set(scores)
    labels = {}
    for account in sorted(universe):
        s = scores.get(account)
        if s is None:
            labels[account] = Label.UNKNOWN
            continue
        stat = s.composite if policy is Policy.COMPOSITE else min(s.as_tuple())
        labels[account] = Label.BOT if stat >= threshold else Label.HUMAN
    return LabelReport(labels, float(threshold), ThresholdSource(source), policy)


def read_labels(fp) -> dict[int, Label]:
    reader = csv.DictReader(fp)
    return {int(row["account_id"]): Label(row["label"]) for row in reader}


def write_labels(labels: Mapping[int, Label], fp) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["account_id", "label"])
    for account in sorted(labels):
        writer.writerow([account, labels[account].value])


def write_scores(scores: Mapping[int, BotScore], fp) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["account_id", *SCORE_FIELDS, "composite"])
    for account in sorted(scores):
        s = scores[account]
        writer.writerow([account, repr(s.friend), repr(s.network), repr(s.temporal),
                         repr(s.composite)])

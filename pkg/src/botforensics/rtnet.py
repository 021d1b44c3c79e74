"""Retweet network: construction, centrality tables, cohort tallies, URL counts.

Edges point from the retweeter to the original author.  Betweenness runs on
the deduplicated simple view with unit weights.
"""

from __future__ import annotations

import csv
from collections import Counter, deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .corpus import CollectionWindow, Label, TweetRecord

EDGE_DIRECTION = "retweeter->author"
_BLOCK = 256  # sources per accumulation block; fixed so results ignore worker count


class NetworkError(ValueError):
    """Domain error raised by network operations."""


@dataclass(frozen=True)
class RetweetEdge:
    retweeter: int
    author: int
    tweet_id: int
    created_at: int


@dataclass
class RetweetGraph:
    nodes: dict[int, Label]
    edges: list[RetweetEdge]
    direction: str = EDGE_DIRECTION

    @property
    def simple_view(self) -> dict[tuple[int, int], int]:
        return dict(sorted(Counter((e.retweeter, e.author) for e in self.edges).items()))

    def summary(self) -> dict[str, int]:
        return {"nodes": len(self.nodes), "edges": len(self.simple_view),
                "multi_edges": len(self.edges)}

    def write_edges(self, fp) -> None:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(["retweeter_id", "author_id", "multiplicity"])
        for (u, v), m in self.simple_view.items():
            writer.writerow([u, v, m])

    def write_nodes(self, fp) -> None:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(["account_id", "label"])
        for account in sorted(self.nodes):
            writer.writerow([account, self.nodes[account].value])


def build_retweet_network(records: Iterable[TweetRecord], labels: Mapping[int, Label],
                          include_authors: bool = False) -> RetweetGraph:
    """One multi-edge per retweet; nodes are the edge endpoints.

    Accounts seen only as original authors are included; self-retweets stay
    as self-loops.  With ``include_authors`` every account that wrote a
    record becomes a node too, retweet contact or not.  Edges are ordered by
    tweet id, so the graph does not depend on record order.
    """
    edges = []
    nodes = {}
    for r in records:
        if include_authors:
            nodes[r.author_id] = labels.get(r.author_id, Label.UNKNOWN)
        if r.retweet_of is not None:
            edges.append(RetweetEdge(r.author_id, r.retweet_of.original_author_id,
                                     r.tweet_id, r.created_at))
    edges.sort(key=lambda e: e.tweet_id)
    for e in edges:
        for account in (e.retweeter, e.author):
            nodes[account] = labels.get(account, Label.UNKNOWN)
    return RetweetGraph(dict(sorted(nodes.items())), edges)


def filter_network(graph: RetweetGraph, retweeter: Label, author: Label) -> RetweetGraph:
    """Edge-induced subgraph of retweets between the two cohorts.

    ``filter_network(g, Label.BOT, Label.BOT)`` is the bots-retweeting-bots
    network and ``filter_network(g, Label.HUMAN, Label.BOT)`` the
    humans-retweeting-bots one.
    """
    edges = [e for e in graph.edges
             if graph.nodes[e.retweeter] is retweeter and graph.nodes[e.author] is author]
    nodes = {}
    for e in edges:
        nodes[e.retweeter] = graph.nodes[e.retweeter]
        nodes[e.author] = graph.nodes[e.author]
    return RetweetGraph(dict(sorted(nodes.items())), edges, graph.direction)


@dataclass
class CentralityTable:
    rows: list[tuple[int, float, Label]]

    @classmethod
    def from_values(cls, values: Mapping[int, float], labels: Mapping[int, Label]):
        rows = sorted(((a, v, labels.get(a, Label.UNKNOWN)) for a, v in values.items()),
                      key=lambda r: (-r[1], r[0]))
        return cls(rows)

    def top(self, k: int) -> list[tuple[int, float, Label]]:
        return self.rows[:k]

    def as_dict(self) -> dict[int, float]:
        return {a: v for a, v, _ in self.rows}

    def write_csv(self, fp) -> None:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(["account_id", "value", "label"])
        for account, value, label in self.rows:
            writer.writerow([account, repr(value) if isinstance(value, float) else value,
                             label.value])


def _adjacency(nodes: Sequence[int], pairs: Iterable[tuple[int, int]], directed: bool):
    index = {a: i for i, a in enumerate(nodes)}
    nbrs: list[set[int]] = [set() for _ in nodes]
    for u, v in pairs:
        if u == v:
            continue
        nbrs[index[u]].add(index[v])
        if not directed:
            nbrs[index[v]].add(index[u])
    return [sorted(s) for s in nbrs]


def _accumulate(args) -> list[float]:
    adj, sources = args
    n = len(adj)
    cb = [0.0] * n
    for s in sources:
        stack = []
        preds: dict[int, list[int]] = {s: []}
        sigma = {s: 1}
        dist = {s: 0}
        queue = deque([s])
        while queue:
            v = queue.popleft()
            stack.append(v)
            dv = dist[v] + 1
            for w in adj[v]:
                if w not in dist:
                    dist[w] = dv
                    sigma[w] = 0
                    preds[w] = []
                    queue.append(w)
                if dist[w] == dv:
                    sigma[w] += sigma[v]
                    preds[w].append(v)
        delta = dict.fromkeys(stack, 0.0)
        while stack:
            w = stack.pop()
            coeff = (1.0 + delta[w]) / sigma[w]
            for v in preds[w]:
                delta[v] += sigma[v] * coeff
            if w != s:
                cb[w] += delta[w]
    return cb


def betweenness(graph: RetweetGraph, normalized: bool = True, directed: bool = True,
                workers: int = 1) -> CentralityTable:
    """Exact shortest-path betweenness on the simple view.

    Directed values are normalized by (n-1)(n-2).  The undirected variant
    counts each unordered pair once and normalizes by (n-1)(n-2)/2.
    Sources are processed in fixed blocks whose partial sums are added in
    block order, so any ``workers`` value gives bit-identical output.
    """
    nodes = sorted(graph.nodes)
    n = len(nodes)
    if normalized and n < 3:
        raise NetworkError(f"normalized betweenness needs at least 3 nodes, got {n}")
    adj = _adjacency(nodes, graph.simple_view, directed)
    blocks = [(adj, range(i, min(i + _BLOCK, n))) for i in range(0, n, _BLOCK)]
    if workers > 1 and len(blocks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            partials = list(pool.map(_accumulate, blocks))
    else:
        partials = [_accumulate(b) for b in blocks]
    total = [0.0] * n
    for part in partials:
        for i, x in enumerate(part):
            total[i] += x
    if not directed:
        total = [x / 2.0 for x in total]
    if normalized:
        scale = (n - 1) * (n - 2)
        if not directed:
            scale /= 2.0
        total = [x / scale for x in total]
    return CentralityTable.from_values(dict(zip(nodes, total)), graph.nodes)


def degree_table(graph: RetweetGraph) -> CentralityTable:
    """Times each node's tweets were retweeted (multi-edge in-degree)."""
    counts = dict.fromkeys(graph.nodes, 0)
    for e in graph.edges:
        counts[e.author] += 1
    return CentralityTable.from_values(counts, graph.nodes)


@dataclass
class RetweetTally:
    hh: int = 0
    hb: int = 0
    bh: int = 0
    bb: int = 0
    missing: int = 0

    @property
    def total(self) -> int:
        return self.hh + self.hb + self.bh + self.bb + self.missing

    @property
    def humans_retweeted(self) -> int:
        return self.hh + self.hb

    @property
    def bots_retweeted(self) -> int:
        return self.bh + self.bb

    def as_dict(self) -> dict[str, int]:
        return {"hh": self.hh, "hb": self.hb, "bh": self.bh, "bb": self.bb,
                "missing": self.missing, "humans_retweeted": self.humans_retweeted,
                "bots_retweeted": self.bots_retweeted}


_PAIR_FIELD = {
    (Label.HUMAN, Label.HUMAN): "hh",
    (Label.HUMAN, Label.BOT): "hb",
    (Label.BOT, Label.HUMAN): "bh",
    (Label.BOT, Label.BOT): "bb",
}


def classify_retweets(records: Iterable[TweetRecord], labels: Mapping[int, Label],
                      window: CollectionWindow) -> RetweetTally:
    """Bin retweets by (original author cohort, retweeter cohort).

    Retweets of originals from before the window, or touching an Unknown
    account, go to ``missing``.
    """
    tally = RetweetTally()
    for r in records:
        ref = r.retweet_of
        if ref is None:
            continue
        key = (labels.get(ref.original_author_id, Label.UNKNOWN),
               labels.get(r.author_id, Label.UNKNOWN))
        if ref.original_created_at < window.start or key not in _PAIR_FIELD:
            tally.missing += 1
        else:
            name = _PAIR_FIELD[key]
            setattr(tally, name, getattr(tally, name) + 1)
    return tally


@dataclass
class UrlCounts:
    records: dict[Label, int] = field(default_factory=lambda: {Label.HUMAN: 0, Label.BOT: 0})
    embedded: dict[Label, int] = field(default_factory=lambda: {Label.HUMAN: 0, Label.BOT: 0})

    def total(self, label: Label) -> int:
        return self.records[label] + self.embedded[label]


def url_counts(records: Iterable[TweetRecord], labels: Mapping[int, Label],
               scan_embedded: bool = False, needle: str = "http") -> UrlCounts:
    """Count tweets whose text contains ``http`` (case-sensitive), per author cohort.

    With ``scan_embedded`` the embedded original text of each retweet is
    scanned too and counted separately, under the retweeter's cohort.
    """
    out = UrlCounts()
    for r in records:
        label = labels.get(r.author_id, Label.UNKNOWN)
        if label is Label.UNKNOWN:
            continue
        if needle in r.text:
            out.records[label] += 1
        if scan_embedded and r.retweet_of is not None and r.retweet_of.text \
                and needle in r.retweet_of.text:
            out.embedded[label] += 1
    return out

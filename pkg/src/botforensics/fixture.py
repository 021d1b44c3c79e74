"""Seeded synthetic corpora whose aggregate tallies hit prescribed targets exactly.

The default targets are the reference collection figures, so a
pipeline run over the default fixture must reproduce them to the unit.
Optional network targets additionally pin the node/edge counts of the full
retweet network and of its humans-retweeting-bots and bots-retweeting-bots
subgraphs.
"""

from __future__ import annotations

import json
import math
import os
import string
from dataclasses import asdict, dataclass, fields

import numpy as np

from .corpus import (AccountProfile, OriginalRef, TweetRecord, parse_timestamp,
                     serialize_corpus)


class FixtureError(ValueError):
    """Inconsistent or unattainable fixture targets."""


@dataclass
class FixtureTargets:
    tweets: int = 20854
    accounts: int = 9730
    bots: int = 1803
    retweets: int = 12905
    hh: int = 9896
    hb: int = 848
    bh: int = 1450
    bb: int = 76
    missing: int = 635
    bot_tweets: int = 4153
    bot_retweets: int | None = 1010
    url_human: int = 17474
    url_bot: int = 4736
    full_nodes: int | None = 6528
    full_edges: int | None = 10011
    hum_rt_bot_nodes: int | None = 1550
    hum_rt_bot_edges: int | None = 1596
    bot_rt_bot_nodes: int | None = 92
    bot_rt_bot_edges: int | None = 80
    window_start: str = "2016-08-19 15:06:17"
    window_end: str = "2016-08-22 02:13:35"

    NETWORK_FIELDS = ("full_nodes", "full_edges", "hum_rt_bot_nodes", "hum_rt_bot_edges",
                      "bot_rt_bot_nodes", "bot_rt_bot_edges")

    @classmethod
    def zeros(cls) -> "FixtureTargets":
        return cls(**{f.name: 0 for f in fields(cls)
                      if f.name not in cls.NETWORK_FIELDS and not f.name.startswith("window")},
                   **{k: None for k in cls.NETWORK_FIELDS})

    @property
    def humans(self) -> int:
        return self.accounts - self.bots

    @property
    def human_tweets(self) -> int:
        return self.tweets - self.bot_tweets

    @property
    def has_network(self) -> bool:
        return any(getattr(self, k) is not None for k in self.NETWORK_FIELDS)

    def to_dict(self) -> dict:
        return asdict(self)


def _choose_bot_retweets(t: FixtureTargets) -> int:
    lo = max(t.hb + t.bb, t.retweets - t.human_tweets)
    hi = min(t.hb + t.bb + t.missing, t.bot_tweets)
    in_window = t.hh + t.hb + t.bh + t.bb
    share = (t.hb + t.bb) / in_window if in_window else t.bots / max(t.accounts, 1)
    want = t.hb + t.bb + round(t.missing * share)
    return min(max(want, lo), hi) if lo <= hi else lo


def check_targets(t: FixtureTargets) -> FixtureTargets:
    """Validate the accounting identities; returns a copy with bot_retweets resolved."""
    problems = []
    ints = [f.name for f in fields(t) if not f.name.startswith("window")
            and f.name not in t.NETWORK_FIELDS and f.name != "bot_retweets"]
    for name in ints:
        if getattr(t, name) < 0:
            problems.append(f"{name} >= 0")
    if problems:
        raise FixtureError("inconsistent targets: " + "; ".join(problems))
    bot_rt = _choose_bot_retweets(t) if t.bot_retweets is None else t.bot_retweets
    human_rt = t.retweets - bot_rt

    def need(ok: bool, identity: str):
        if not ok:
            problems.append(identity)

    need(t.hh + t.hb + t.bh + t.bb + t.missing == t.retweets,
         "hh + hb + bh + bb + missing == retweets")
    need(t.retweets <= t.tweets, "retweets <= tweets")
    need(t.bots <= t.accounts, "bots <= accounts")
    need(t.bot_tweets <= t.tweets, "bot_tweets <= tweets")
    need((t.tweets == 0) == (t.accounts == 0), "tweets == 0 iff accounts == 0")
    need(t.bot_tweets >= t.bots, "bot_tweets >= bots")
    need(t.human_tweets >= t.humans, "tweets - bot_tweets >= accounts - bots")
    need(t.bots > 0 or t.bot_tweets == 0, "bot_tweets == 0 when bots == 0")
    need(t.humans > 0 or t.human_tweets == 0, "human tweets == 0 when humans == 0")
    need(0 <= bot_rt <= t.bot_tweets, "0 <= bot_retweets <= bot_tweets")
    need(0 <= human_rt <= t.human_tweets, "retweets - bot_retweets <= human tweets")
    need(bot_rt >= t.hb + t.bb, "bot_retweets >= hb + bb")
    need(human_rt >= t.hh + t.bh, "retweets - bot_retweets >= hh + bh")
    need(t.bots > 0 or t.bh + t.bb == 0, "bh + bb == 0 when bots == 0")
    need(t.humans > 0 or t.hh + t.hb == 0, "hh + hb == 0 when humans == 0")
    need(t.url_human <= t.human_tweets + human_rt, "url_human <= human tweets + human retweets")
    need(t.url_bot <= t.bot_tweets + bot_rt, "url_bot <= bot_tweets + bot_retweets")
    if t.tweets >= 2:
        need(parse_timestamp(t.window_start) < parse_timestamp(t.window_end),
             "window_start < window_end")
    if t.has_network:
        need(all(getattr(t, k) is not None and getattr(t, k) >= 0 for k in t.NETWORK_FIELDS),
             "network targets given together and non-negative")
    if problems:
        raise FixtureError("inconsistent targets: " + "; ".join(problems))
    out = FixtureTargets(**t.to_dict())
    out.bot_retweets = bot_rt
    return out


# -- retweet plan -------------------------------------------------------------
# A plan is a list of (retweeter, author, missing) triples, one per retweet.

def _cover_edges(sources, targets, e, rng, must_src=(), must_tgt=()):
    """``e`` distinct (s, t) pairs, s != t, touching every must-cover node."""
    sources, targets = list(sources), list(targets)
    edges: dict[tuple[int, int], None] = {}
    uncovered = list(must_tgt)

    def pick(pool, avoid_s=None, avoid_t=None):
        for _ in range(64):
            x = pool[int(rng.integers(len(pool)))]
            pair = (avoid_s, x) if avoid_s is not None else (x, avoid_t)
            if pair[0] != pair[1] and pair not in edges:
                return x
        for x in pool:
            pair = (avoid_s, x) if avoid_s is not None else (x, avoid_t)
            if pair[0] != pair[1] and pair not in edges:
                return x
        raise FixtureError("network targets leave no free edge for a required node")

    for s in must_src:
        t = None
        for j, cand in enumerate(uncovered):
            if cand != s:
                t = uncovered.pop(j)
                break
        if t is None:
            t = pick(targets, avoid_s=s)
        edges[(s, t)] = None
    for t in uncovered:
        edges[(pick(sources, avoid_t=t), t)] = None
    if len(edges) > e:
        raise FixtureError(f"covering {len(edges)} required edges exceeds target {e}")
    capacity = len(sources) * len(targets) - len(set(sources) & set(targets))
    if e > capacity:
        raise FixtureError(f"{e} edges exceed the {capacity} available pairs")
    if e - len(edges) > capacity // 2:
        free = [(s, t) for s in sources for t in targets if s != t and (s, t) not in edges]
        for i in rng.choice(len(free), size=e - len(edges), replace=False):
            edges[free[int(i)]] = None
    while len(edges) < e:
        s = sources[int(rng.integers(len(sources)))]
        t = targets[int(rng.integers(len(targets)))]
        if s != t:
            edges.setdefault((s, t), None)
    return list(edges)


def _expand(edges, total, missing, rng, weight):
    """Spread ``total`` retweets over ``edges`` (each at least once), marking ``missing`` of them."""
    if not edges:
        return []
    mult = np.ones(len(edges), dtype=np.int64)
    extra = total - len(edges)
    if extra > 0:
        w = np.array([weight[a] for _, a in edges], dtype=float)
        np.add.at(mult, rng.choice(len(edges), size=extra, p=w / w.sum()), 1)
    flat = [pair for pair, m in zip(edges, mult) for _ in range(int(m))]
    flags = np.zeros(total, dtype=bool)
    flags[rng.choice(total, size=missing, replace=False)] = True
    return [(s, a, bool(f)) for (s, a), f in zip(flat, flags)]


def _block_split(n, e, prefer):
    """Split n nodes into (sources, targets) so that e edges can cover both sides."""
    if e == 0:
        if n:
            raise FixtureError(f"{n} subgraph nodes but no edges")
        return 0, 0
    options = [t for t in range(1, n) if max(n - t, t) <= e <= (n - t) * t]
    if not options:
        raise FixtureError(f"no bipartite layout gives {n} nodes with {e} edges")
    above = [t for t in options if t >= prefer]
    return n - (above[0] if above else options[-1]), (above[0] if above else options[-1])


def _missing_split(t: FixtureTargets):
    """Missing retweets per (author, retweeter) cohort pair."""
    miss_bot = t.bot_retweets - t.hb - t.bb
    miss_human = t.retweets - t.bot_retweets - t.hh - t.bh
    if t.has_network:
        m_bb = max(0, t.bot_rt_bot_edges - t.bb)
        m_bh = max(0, t.hum_rt_bot_edges - t.bh)
    else:
        frac = t.bots / t.accounts if t.accounts else 0.0
        m_bb = round(miss_bot * frac) if t.bots else 0
        m_bh = round(miss_human * frac) if t.bots else 0
        if t.humans == 0:
            m_bb, m_bh = miss_bot, miss_human
    m_hb, m_hh = miss_bot - m_bb, miss_human - m_bh
    if min(m_hb, m_hh) < 0:
        raise FixtureError("network edge targets need more out-of-window retweets than exist")
    if (m_hb or m_hh) and t.humans == 0:
        raise FixtureError("out-of-window retweets of human originals need humans")
    return {"hh": m_hh, "hb": m_hb, "bh": m_bh, "bb": m_bb}


def _random_plan(t, humans, bots, rng, weight):
    miss = _missing_split(t)
    multi = {k: getattr(t, k) + miss[k] for k in ("hh", "hb", "bh", "bb")}
    plan = []
    for cohort, cohort_rt, keys in ((humans, t.retweets - t.bot_retweets, ("hh", "bh")),
                                    (bots, t.bot_retweets, ("hb", "bb"))):
        if not cohort_rt:
            continue
        originals = (t.human_tweets if cohort is humans else t.bot_tweets) - cohort_rt
        r_min = max(1, len(cohort) - originals)
        r = max(r_min, min(len(cohort), cohort_rt, math.ceil(cohort_rt / 2)))
        retweeters = list(rng.choice(cohort, size=r, replace=False))
        slots = []
        for key in keys:
            n_miss = miss[key]
            flags = [True] * n_miss + [False] * (multi[key] - n_miss)
            slots += [(key, f) for f in flags]
        order = rng.permutation(len(slots))
        for pos, idx in enumerate(order):
            key, is_missing = slots[idx]
            rt = retweeters[pos] if pos < r else retweeters[int(rng.integers(r))]
            authors = humans if key[0] == "h" else bots
            if not authors:
                raise FixtureError(f"{key} retweets need {('human', 'bot')[key[0] == 'b']} authors")
            a = authors[int(rng.integers(len(authors)))]
            if a == rt and len(authors) > 1:
                a = authors[(authors.index(a) + 1) % len(authors)]
            plan.append((int(rt), int(a), is_missing))
    return plan


def _network_plan(t, humans, bots, rng, weight):
    miss = _missing_split(t)
    multi = {k: getattr(t, k) + miss[k] for k in ("hh", "hb", "bh", "bb")}
    human_orig = t.human_tweets - (t.retweets - t.bot_retweets)
    bot_orig = t.bot_tweets - t.bot_retweets

    s1, t1 = _block_split(t.bot_rt_bot_nodes, t.bot_rt_bot_edges, 1)
    s2, t2 = _block_split(t.hum_rt_bot_nodes, t.hum_rt_bot_edges,
                          max(1, t.hum_rt_bot_nodes // 75))
    if multi["bb"] < t.bot_rt_bot_edges or multi["bh"] < t.hum_rt_bot_edges:
        raise FixtureError("subgraph edge targets exceed their retweet counts")
    e_rest = t.full_edges - t.bot_rt_bot_edges - t.hum_rt_bot_edges
    x_new = t.full_nodes - t.bot_rt_bot_nodes - t.hum_rt_bot_nodes
    if e_rest < 0 or x_new < 0:
        raise FixtureError("subgraph targets exceed full network targets")

    m_hh, m_hb = multi["hh"], multi["hb"]
    if m_hh + m_hb == 0:
        if e_rest or x_new:
            raise FixtureError("edges outside the bot-author subgraphs need human-authored retweets")
        e_hb = e_hh = 0
    else:
        lo = max(1 if m_hb else 0, e_rest - m_hh)
        hi = min(m_hb, e_rest - (1 if m_hh else 0))
        if lo > hi:
            raise FixtureError("full_edges incompatible with human-authored retweet counts")
        e_hb = min(max(round(e_rest * m_hb / (m_hh + m_hb)), lo), hi)
        e_hh = e_rest - e_hb

    r_min_b = max(0, t.bots - bot_orig)
    b_new = 0
    if e_hb:
        b_new = max(0, r_min_b - s1) if s1 else max(1, r_min_b)
    elif r_min_b > s1:
        raise FixtureError("too few bot originals for the bot retweeter layout")
    u = x_new - b_new
    r_need = max(0, t.humans - human_orig - s2)
    a = r = None
    if e_hh + e_hb:
        for cand in [max(1, u // 3)] + list(range(1, u + 1)):
            # a quarter of the authors also retweet, so some paths have length > 1
            rr = min(u, max(r_need, u - cand + cand // 4)) if e_hh else 0
            if rr > u or cand + rr < u or b_new > e_hb:
                continue
            if e_hh and (e_hh < max(rr, cand) or e_hh > (s2 + u) * cand - cand):
                continue
            if not e_hh and e_hb < cand:
                continue
            if e_hb > (s1 + b_new) * cand:
                continue
            a, r = cand, rr
            break
        if a is None:
            raise FixtureError("no node layout meets the full network targets")
    elif u:
        raise FixtureError("isolated full-network nodes are impossible")
    else:
        a = r = 0
    if s2 + u > len(humans) or s1 + t1 + t2 + b_new > len(bots):
        raise FixtureError("network targets need more accounts than exist")
    if s2 + r < t.humans - human_orig:
        raise FixtureError("too few human originals for the retweeter layout")

    h_pool = list(rng.permutation(humans)) if humans else []
    b_pool = list(rng.permutation(bots)) if bots else []
    S_bb, b_pool = b_pool[:s1], b_pool[s1:]
    T_bb, b_pool = b_pool[:t1], b_pool[t1:]
    T_bh, b_pool = b_pool[:t2], b_pool[t2:]
    B_new = b_pool[:b_new]
    S_bh, h_pool = h_pool[:s2], h_pool[s2:]
    U = h_pool[:u]
    U_a, U_r = U[:a], U[u - r:] if r else []

    plan = []
    blocks = [
        ("bb", S_bb, T_bb, t.bot_rt_bot_edges, S_bb, T_bb),
        ("bh", S_bh, T_bh, t.hum_rt_bot_edges, S_bh, T_bh),
        ("hh", S_bh + U, U_a, e_hh, U_r, U_a),
        ("hb", S_bb + B_new, U_a, e_hb, B_new, () if e_hh else U_a),
    ]
    for key, src, tgt, e, must_s, must_t in blocks:
        if not e:
            if multi[key]:
                raise FixtureError(f"{key} retweets exist but the layout has no {key} edges")
            continue
        pairs = _cover_edges(src, tgt, e, rng, must_s, must_t)
        plan += _expand(pairs, multi[key], miss[key], rng, weight)
    return [(int(s), int(a), m) for s, a, m in plan]


# -- materialization ----------------------------------------------------------

HUMAN_WORDS = (
    "asesinatos masacre tortura ejecuciones ejecutaron violación muerte matanza sangriento "
    "criminales represión genocidio culpables impunidad vergüenza indignante asesinos "
    "mentiras corrupción guerra exigimos justicia ejército policía gobierno víctimas horror "
    "terrible dolor rabia miedo balazos disparos"
).split()
BOT_WORDS = (
    "informe cndh recomendación derechos humanos documento consulta disponible publica "
    "comisión nacional investigación michoacán rancho civiles hechos reporte lectura enlace "
    "oficial datos análisis noticia resumen versión completa"
).split()
COMMON_WORDS = (
    "plaza #plaza el la de en que los las del por con para un una sobre se al y a"
).split()

_CODE = np.array(list(string.ascii_letters + string.digits))


def _text(rng, own_pool, other_pool, url: bool) -> str:
    n = int(rng.integers(6, 13))
    words = []
    for _ in range(n):
        u = rng.random()
        pool = COMMON_WORDS if u < 0.35 else other_pool if u < 0.45 else own_pool
        words.append(pool[int(rng.integers(len(pool)))])
    if url:
        words.append("https://t.co/" + "".join(rng.choice(_CODE, size=10)))
    return " ".join(words)


def _unique_ids(rng, n, lo=10**6, hi=5 * 10**9):
    out: set[int] = set()
    while len(out) < n:
        out.update(int(x) for x in rng.integers(lo, hi, size=n - len(out)))
    return sorted(out)


def _cluster_scores(rng, n, center, spread=0.1):
    """Sub-scores jittered around a shared composite ``center``."""
    rows = []
    for _ in range(n):
        d1, d2 = rng.uniform(-spread, spread, size=2)
        rows.append((center + d1, center + d2, 3 * center - (center + d1) - (center + d2)))
    return rows


@dataclass
class Fixture:
    records: list[TweetRecord]
    profiles: dict[int, AccountProfile]
    scores: dict[int, tuple[float, float, float]]
    bots: set[int]
    lexicon: dict[str, float]
    stopwords: list[str]
    targets: FixtureTargets


def generate_fixture(targets: FixtureTargets | None = None, seed: int = 0) -> Fixture:
    """Synthesize a corpus, score table and lexicons meeting ``targets`` exactly."""
    t = check_targets(targets or FixtureTargets())
    rng = np.random.default_rng(seed)
    t0 = parse_timestamp(t.window_start)
    t1 = parse_timestamp(t.window_end)

    ids = [int(x) for x in rng.permutation(_unique_ids(rng, t.accounts))]
    bots, humans = sorted(ids[:t.bots]), sorted(ids[t.bots:])
    bot_set = set(bots)
    weight = {a: float(rng.pareto(1.2) + 1.0) for a in ids}

    plan = (_network_plan if t.has_network else _random_plan)(t, humans, bots, rng, weight)

    # originals: one for every account with no retweet, the rest spread at random
    retweeters = {rt for rt, _, _ in plan}
    originals: list[int] = []
    for cohort, n_orig in ((humans, t.human_tweets - (t.retweets - t.bot_retweets)),
                           (bots, t.bot_tweets - t.bot_retweets)):
        idle = [a for a in cohort if a not in retweeters]
        if len(idle) > n_orig:
            raise FixtureError("fewer originals than accounts without retweets")
        originals += idle
        if n_orig > len(idle):
            originals += [cohort[int(i)] for i in rng.integers(len(cohort), size=n_orig - len(idle))]

    # (author, retweet author or None, missing)
    items = [(a, None, False) for a in originals] + [(rt, au, m) for rt, au, m in plan]
    order = rng.permutation(len(items))
    items = [items[int(i)] for i in order]
    n = len(items)
    times = rng.integers(t0, t1 + 1, size=n) if n else np.zeros(0, dtype=np.int64)
    if n >= 1:
        times[0] = t0
    if n >= 2:
        times[1] = t1
    idx = sorted(range(n), key=lambda i: (int(times[i]), i))

    # URL flags per cohort: own text, embedded original text
    own_url = np.zeros(n, dtype=bool)
    emb_url = np.zeros(n, dtype=bool)
    for cohort_is_bot, total in ((False, t.url_human), (True, t.url_bot)):
        mine = [i for i in range(n) if (items[i][0] in bot_set) == cohort_is_bot]
        rts = [i for i in mine if items[i][1] is not None]
        lo, hi = max(0, total - len(mine)), min(len(rts), total)
        emb = (lo + hi) // 2
        if emb:
            emb_url[rng.choice(rts, size=emb, replace=False)] = True
        if total - emb:
            own_url[rng.choice(mine, size=total - emb, replace=False)] = True

    base_id = 766_000_000_000_000_000
    orig_base = 760_000_000_000_000_000
    records = []
    counts: dict[int, int] = {}
    for k, i in enumerate(idx):
        author, orig_author, is_missing = items[i]
        created = int(times[i])
        author_bot = author in bot_set
        pools = (BOT_WORDS, HUMAN_WORDS) if author_bot else (HUMAN_WORDS, BOT_WORDS)
        ref = None
        if orig_author is None:
            text = _text(rng, *pools, own_url[i])
        else:
            if is_missing:
                o_time = t0 - int(rng.integers(60, 7 * 86400))
            else:
                o_time = int(rng.integers(t0, created + 1))
            o_pools = (BOT_WORDS, HUMAN_WORDS) if orig_author in bot_set else (HUMAN_WORDS, BOT_WORDS)
            ref = OriginalRef(orig_base + k, orig_author, o_time, _text(rng, *o_pools, emb_url[i]))
            text = f"RT @u{orig_author}: " + _text(rng, *o_pools, own_url[i])
        records.append(TweetRecord(base_id + k, author, created, text, ref))
        counts[author] = counts.get(author, 0) + 1

    profiles = {}
    for a in ids:
        is_bot = a in bot_set
        age_days = int(rng.integers(30, 400)) if is_bot else int(rng.integers(200, 3000))
        profiles[a] = AccountProfile(
            account_id=a,
            followers_count=int(rng.integers(0, 300)) if is_bot else int(rng.integers(20, 5000)),
            friends_count=int(rng.integers(500, 5000)) if is_bot else int(rng.integers(20, 1500)),
            statuses_count=counts.get(a, 1) + (int(rng.integers(2000, 60000)) if is_bot
                                               else int(rng.integers(10, 8000))),
            account_created_at=t0 - age_days * 86400,
        )

    scores = {}
    for cohort, center in ((bots, 0.8), (humans, 0.2)):
        for a, row in zip(cohort, _cluster_scores(rng, len(cohort), center)):
            scores[a] = row

    lex_rng = np.random.default_rng(seed + 1)
    lexicon = {}
    for pool, lo, hi in ((HUMAN_WORDS, 1.5, 3.5), (BOT_WORDS, 4.5, 6.5), (COMMON_WORDS, 4.8, 5.2)):
        for w in pool:
            lexicon.setdefault(w, round(float(lex_rng.uniform(lo, hi)), 2))
    return Fixture(records, profiles, scores, bot_set, lexicon, list(COMMON_WORDS[2:]), t)


def write_fixture(fx: Fixture, out_dir) -> dict[str, str]:
    """Write corpus, score file, happiness lexicon, stop words and targets; returns the paths."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {name: os.path.join(out_dir, fname) for name, fname in (
        ("corpus", "corpus.jsonl"), ("scores", "scores.jsonl"), ("labmt", "labmt.tsv"),
        ("stopwords", "stopwords.txt"), ("targets", "targets.json"))}
    with open(paths["corpus"], "w", encoding="utf-8") as fp:
        serialize_corpus(fx.records, fx.profiles, fp)
    with open(paths["scores"], "w", encoding="utf-8") as fp:
        for a in sorted(fx.scores):
            f, nw, tm = fx.scores[a]
            fp.write(json.dumps({"account_id": a, "friend": f, "network": nw, "temporal": tm}) + "\n")
    with open(paths["labmt"], "w", encoding="utf-8") as fp:
        for w in sorted(fx.lexicon):
            fp.write(f"{w}\t{fx.lexicon[w]}\n")
    with open(paths["stopwords"], "w", encoding="utf-8") as fp:
        fp.write("\n".join(fx.stopwords) + "\n")
    with open(paths["targets"], "w", encoding="utf-8") as fp:
        json.dump(fx.targets.to_dict(), fp, indent=2, sort_keys=True)
        fp.write("\n")
    return paths

import io
import random

import pytest
from hypothesis import given, settings, strategies as st

from botforensics.corpus import CollectionWindow, Label, OriginalRef, TweetRecord
from botforensics.rtnet import (NetworkError, RetweetEdge, RetweetGraph, betweenness,
                                build_retweet_network, classify_retweets, degree_table,
                                filter_network, url_counts)

from oracles import brute_betweenness

H, B, U = Label.HUMAN, Label.BOT, Label.UNKNOWN
WINDOW = CollectionWindow(1000, 10_000)


def _graph(nodes, pairs):
    edges = [RetweetEdge(u, v, i, 0) for i, (u, v) in enumerate(pairs)]
    return RetweetGraph({n: H for n in nodes}, edges)


def _rt(tid, retweeter, author, orig_time=2000, text="", orig_text=None):
    return TweetRecord(tid, retweeter, 5000 + tid, text,
                       OriginalRef(10_000 + tid, author, orig_time, orig_text))


class TestBuild:
    def test_no_retweets(self):
        recs = [TweetRecord(1, 7, 1500, "x"), TweetRecord(2, 8, 1600, "y")]
        g = build_retweet_network(recs, {7: H, 8: B})
        assert g.edges == [] and g.nodes == {}
        g = build_retweet_network(recs, {7: H, 8: B}, include_authors=True)
        assert g.nodes == {7: H, 8: B} and g.edges == []

    def test_author_only_node_and_self_loop(self):
        g = build_retweet_network([_rt(1, 1, 2), _rt(2, 3, 3)], {1: H})
        assert g.nodes == {1: H, 2: U, 3: U}
        assert g.simple_view == {(1, 2): 1, (3, 3): 1}

    def test_multiplicity(self):
        g = build_retweet_network([_rt(i, 1, 2) for i in range(4)] + [_rt(9, 2, 1)], {})
        assert g.simple_view == {(1, 2): 4, (2, 1): 1}
        assert g.summary() == {"nodes": 2, "edges": 2, "multi_edges": 5}

    def test_export_csv(self):
        g = build_retweet_network([_rt(1, 1, 2), _rt(2, 1, 2)], {1: H, 2: B})
        buf = io.StringIO()
        g.write_edges(buf)
        assert buf.getvalue() == "retweeter_id,author_id,multiplicity\n1,2,2\n"
        buf = io.StringIO()
        g.write_nodes(buf)
        assert buf.getvalue() == "account_id,label\n1,H\n2,B\n"

    def test_filters(self):
        labels = {1: H, 2: B, 3: B, 4: H}
        g = build_retweet_network([_rt(1, 1, 2), _rt(2, 3, 2), _rt(3, 4, 1), _rt(4, 2, 3)], labels)
        hb = filter_network(g, H, B)
        bb = filter_network(g, B, B)
        assert hb.simple_view == {(1, 2): 1}
        assert bb.simple_view == {(2, 3): 1, (3, 2): 1}
        assert set(bb.nodes) == {2, 3}


class TestBetweenness:
    def test_three_path(self):
        g = _graph("abc", [("a", "b"), ("b", "c")])
        raw = betweenness(g, normalized=False).as_dict()
        assert raw == {"a": 0.0, "b": 1.0, "c": 0.0}
        assert betweenness(g).as_dict()["b"] == 0.5

    def test_four_cycle_symmetric(self):
        g = _graph([1, 2, 3, 4], [(1, 2), (2, 3), (3, 4), (4, 1)])
        vals = set(betweenness(g).as_dict().values())
        assert len(vals) == 1 and vals.pop() > 0

    def test_multi_edges_ignored(self):
        once = _graph("abc", [("a", "b"), ("b", "c")])
        many = _graph("abc", [("a", "b")] * 5 + [("b", "c")] * 3)
        assert betweenness(once).rows == betweenness(many).rows

    def test_too_small(self):
        with pytest.raises(NetworkError):
            betweenness(_graph([1, 2], [(1, 2)]))
        assert betweenness(_graph([1, 2], [(1, 2)]), normalized=False).as_dict() == {1: 0.0, 2: 0.0}

    @pytest.mark.parametrize("directed", [True, False])
    def test_random_graphs_match_brute_force(self, directed):
        rng = random.Random(42)
        for _ in range(30):
            n = rng.randint(3, 8)
            nodes = list(range(n))
            pairs = [(u, v) for u in nodes for v in nodes if rng.random() < 0.3]
            got = betweenness(_graph(nodes, pairs), directed=directed).as_dict()
            want = brute_betweenness(nodes, pairs, directed=directed)
            for v in nodes:
                assert got[v] == pytest.approx(want[v], abs=1e-12)

    def test_sorted_desc_then_id(self):
        g = _graph([5, 3, 9, 1], [(5, 3), (3, 9), (9, 1)])
        rows = betweenness(g).rows
        assert [r[0] for r in rows] == [3, 9, 1, 5]

    def test_workers_do_not_change_output(self):
        rng = random.Random(7)
        nodes = list(range(700))
        pairs = [(rng.randrange(700), rng.randrange(700)) for _ in range(2000)]
        g = _graph(nodes, pairs)
        assert betweenness(g, workers=1).rows == betweenness(g, workers=3).rows


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 8).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=20))))
def test_betweenness_property(case):
    n, pairs = case
    got = betweenness(_graph(range(n), pairs)).as_dict()
    want = brute_betweenness(list(range(n)), pairs)
    assert all(abs(got[v] - want[v]) <= 1e-12 for v in range(n))


class TestDegree:
    def test_seven(self):
        recs = [_rt(i, 10 + i, 1) for i in range(5)] + [_rt(20 + i, 30 + i, 1) for i in range(2)]
        assert degree_table(build_retweet_network(recs, {})).as_dict()[1] == 7

    def test_top_value_787(self):
        recs = [_rt(i, 100 + i % 50, 3243658266) for i in range(787)]
        top = degree_table(build_retweet_network(recs, {3243658266: B})).top(1)
        assert top == [(3243658266, 787, B)]

    def test_pure_retweeter_zero(self):
        deg = degree_table(build_retweet_network([_rt(1, 1, 2)], {})).as_dict()
        assert deg[1] == 0

    def test_csv(self):
        buf = io.StringIO()
        degree_table(build_retweet_network([_rt(1, 1, 2)], {2: B})).write_csv(buf)
        assert buf.getvalue() == "account_id,value,label\n2,1,B\n1,0,U\n"


class TestTally:
    def test_bot_retweets_human(self):
        t = classify_retweets([_rt(1, 2, 1)], {1: H, 2: B}, WINDOW)
        assert (t.hb, t.total) == (1, 1)

    def test_missing_cases(self):
        recs = [_rt(1, 2, 1, orig_time=500), _rt(2, 2, 3), _rt(3, 1, 1)]
        t = classify_retweets(recs, {1: H, 2: B}, WINDOW)
        assert t.missing == 2 and t.hh == 1

    def test_aggregates(self):
        labels = {1: H, 2: B}
        recs = [_rt(1, 1, 1), _rt(2, 2, 1), _rt(3, 1, 2), _rt(4, 2, 2), _rt(5, 2, 2)]
        t = classify_retweets(recs, labels, WINDOW)
        assert t.as_dict() == {"hh": 1, "hb": 1, "bh": 1, "bb": 2, "missing": 0,
                               "humans_retweeted": 2, "bots_retweeted": 3}


_label = st.sampled_from([H, B, U])


@st.composite
def labeled_retweets(draw):
    n = draw(st.integers(0, 30))
    recs = []
    for i in range(n):
        if draw(st.booleans()):
            recs.append(_rt(i, draw(st.integers(1, 6)), draw(st.integers(1, 6)),
                            orig_time=draw(st.integers(0, 4000))))
        else:
            recs.append(TweetRecord(i, draw(st.integers(1, 6)), 5000 + i, ""))
    labels = {a: draw(_label) for a in range(1, 7)}
    return recs, labels


@settings(max_examples=60, deadline=None)
@given(labeled_retweets(), st.randoms(use_true_random=False))
def test_network_invariants(case, rnd):
    recs, labels = case
    tally = classify_retweets(recs, labels, WINDOW)
    assert tally.total == sum(r.retweet_of is not None for r in recs)

    g = build_retweet_network(recs, labels)
    assert sum(g.simple_view.values()) == len(g.edges)
    assert all(e.retweeter in g.nodes and e.author in g.nodes for e in g.edges)
    assert sum(degree_table(g).as_dict().values()) == len(g.edges)
    for rl, al in ((B, B), (H, B)):
        sub = filter_network(g, rl, al)
        assert set(sub.nodes) <= set(g.nodes) and set(sub.simple_view) <= set(g.simple_view)

    shuffled = list(recs)
    rnd.shuffle(shuffled)
    assert build_retweet_network(shuffled, labels) == g


class TestUrls:
    def test_substring_rules(self):
        recs = [TweetRecord(1, 1, 1, "ver https://x.y"), TweetRecord(2, 1, 2, "HTTP only"),
                TweetRecord(3, 2, 3, "http"), TweetRecord(4, 3, 4, "http")]
        c = url_counts(recs, {1: H, 2: B})
        assert c.records == {H: 1, B: 1}

    def test_embedded_counted_separately(self):
        recs = [_rt(1, 2, 1, text="RT @x: corto", orig_text="mira http://t.co/a")]
        assert url_counts(recs, {1: H, 2: B}).total(B) == 0
        c = url_counts(recs, {1: H, 2: B}, scan_embedded=True)
        assert c.records[B] == 0 and c.embedded[B] == 1 and c.total(B) == 1

"""End-to-end orchestration: corpus -> scores/labels -> network -> text, plus report emission."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
import platform
import time
from dataclasses import asdict, dataclass, field, fields
from typing import Callable

import numpy as np

from . import __version__
from .botsense import (DEFAULT_GRID, SCORE_FIELDS, BotSenseError, Policy,
                       ThresholdSource, kde, label_accounts, load_scores, proxy_scores,
                       valley_threshold, write_labels, write_scores)
from .corpus import (CorpusError, Label, collection_window, format_timestamp,
                     group_by_account, load_corpus)
from .lexsent import (LexiconError, NegativeLexicon, cohort_word_counts, delta_grid,
                      load_sentiment_lexicon, log_odds, negativity_partition,
                      sentiment_sweep, write_log_odds, write_sweep)
from .lsi import ConvergenceError, load_stopwords, tfidf, truncated_svd, write_projections
from .rtnet import (NetworkError, betweenness, build_retweet_network, classify_retweets,
                    degree_table, filter_network, url_counts)

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_INPUT, EXIT_INTERNAL = 0, 2, 3, 4


class ConfigError(ValueError):
    pass


class PipelineError(RuntimeError):
    """A stage failure, tagged with the module it came from and an exit status."""

    def __init__(self, module: str, message: str, status: int):
        super().__init__(f"[{module}] {message}")
        self.module = module
        self.status = status


@dataclass
class PipelineConfig:
    input: str = ""
    out: str = "report"
    scores: str | None = None
    threshold: float | None = None
    policy: str = "composite"
    labmt: str | None = None
    stopwords: str | None = None
    negative_lexicon: str | None = None
    exact_stems: bool = False
    delta_max: float = 3.0
    delta_step: float = 0.1
    include_retweets: bool = True
    include_embedded: bool = False
    scan_embedded: bool = True
    directed: bool = True
    svd_k: int = 2
    svd_tol: float = 1e-8
    seed: int = 0
    workers: int = 1

    def validate(self) -> "PipelineConfig":
        if not self.input:
            raise ConfigError("input corpus path is required")
        if not self.out:
            raise ConfigError("output directory must be non-empty")
        for name in ("scores", "labmt", "stopwords", "negative_lexicon"):
            if getattr(self, name) == "":
                raise ConfigError(f"{name} path must be non-empty when given")
        if not 0.0 <= self.delta_max <= 3.0 or self.delta_step <= 0:
            raise ConfigError("delta_h grid must lie within [0, 3.0] with a positive step")
        if self.svd_k < 1:
            raise ConfigError("svd_k must be >= 1")
        if self.threshold is not None and not 0.0 <= self.threshold <= 1.0:
            raise ConfigError("threshold must lie in [0, 1]")
        if self.policy not in {p.value for p in Policy}:
            raise ConfigError(f"policy must be one of {[p.value for p in Policy]}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        return self

    def echo(self) -> dict:
        # parallelism is deliberately part of the echo but never of the outputs
        return asdict(self)


@dataclass
class ReportBundle:
    summary: dict[str, object] = field(default_factory=dict)
    tables: dict[str, str] = field(default_factory=dict)
    metadata: dict[str, object] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)

    def summary_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.summary.items())


def _render(writer: Callable, *args) -> str:
    buf = io.StringIO()
    writer(*args, buf)
    return buf.getvalue()


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


class _Stage:
    def __init__(self, bundle: ReportBundle, name: str, module: str):
        self.bundle, self.name, self.module = bundle, name, module

    def __enter__(self):
        self.t = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.bundle.timings[self.name] = round(time.perf_counter() - self.t, 6)
        if exc is None or isinstance(exc, PipelineError):
            return False
        if isinstance(exc, ConvergenceError):
            raise PipelineError(self.module, str(exc), EXIT_INTERNAL) from exc
        if isinstance(exc, (CorpusError, BotSenseError, NetworkError, LexiconError,
                            ValueError, OSError)):
            raise PipelineError(self.module, str(exc), EXIT_INPUT) from exc
        raise PipelineError(self.module, f"internal error: {exc!r}", EXIT_INTERNAL) from exc


def ingest(config: PipelineConfig, bundle: ReportBundle):
    with _Stage(bundle, "ingest", "corpus"):
        records, profiles, stats = load_corpus(config.input, workers=config.workers)
    s = bundle.summary
    for k, v in stats.as_dict().items():
        s[k] = v
    return records, profiles, stats


def score_and_label(config: PipelineConfig, bundle: ReportBundle, records, profiles):
    with _Stage(bundle, "score", "botsense"):
        window = collection_window(records)
        if config.scores:
            scores = load_scores(config.scores, accounts=profiles)
        else:
            scores = proxy_scores(records, profiles, group_by_account(records), window)
        composite = [scores[a].composite for a in sorted(scores)]
        if config.threshold is not None:
            tau, source = config.threshold, ThresholdSource.IMPORTED
        elif len(composite) >= 2:
            tau, source = valley_threshold(composite, grid=DEFAULT_GRID[1])
        else:
            tau, source = 0.5, ThresholdSource.FIXED
        report = label_accounts(scores, tau, config.policy, accounts=profiles, source=source)
        for a, p in profiles.items():
            p.label = report.labels[a]
            p.sub_scores = scores.get(a)

        t = bundle.tables
        t["scores.csv"] = _render(write_scores, scores)
        t["labels.csv"] = _render(write_labels, report.labels)
        if len(scores) >= 2:
            pts = np.array([scores[a].as_tuple() for a in sorted(scores)])
            for i, name in enumerate(SCORE_FIELDS):
                t[f"kde_1d_{name}.csv"] = _render(kde(pts[:, [i]], names=(name,)).write_csv)
            for i, j in ((0, 1), (0, 2), (1, 2)):
                names = (SCORE_FIELDS[i], SCORE_FIELDS[j])
                t[f"kde_2d_{names[0]}_{names[1]}.csv"] = _render(
                    kde(pts[:, [i, j]], names=names).write_csv)
            t["kde_3d_friend_network_temporal.csv"] = _render(kde(pts, names=SCORE_FIELDS).write_csv)
            t["kde_1d_composite.csv"] = _render(kde(np.array(composite), names=("composite",)).write_csv)

    s = bundle.summary
    s["window_start"] = format_timestamp(window.start)
    s["window_end"] = format_timestamp(window.end)
    s["window_hours"] = f"{window.hours:.4f}"
    s["scored_accounts"] = len(scores)
    counts = report.counts
    s["label_threshold"] = repr(report.threshold)
    s["label_source"] = report.source.value
    s["label_policy"] = report.policy.value
    s["bots"] = counts[Label.BOT]
    s["humans"] = counts[Label.HUMAN]
    s["unknown"] = counts[Label.UNKNOWN]
    return window, report


def network(config: PipelineConfig, bundle: ReportBundle, records, labels, window):
    s, t = bundle.summary, bundle.tables
    with _Stage(bundle, "network", "rtnet"):
        bot_tweets = sum(1 for r in records if labels.get(r.author_id) is Label.BOT)
        human_tweets = sum(1 for r in records if labels.get(r.author_id) is Label.HUMAN)
        s["bot_tweets"] = bot_tweets
        s["human_tweets"] = human_tweets
        s["bot_tweet_share_pct"] = f"{100.0 * bot_tweets / len(records):.4f}" if records else "0.0000"
        s["retweets_by_humans"] = sum(1 for r in records if r.retweet_of is not None
                                      and labels.get(r.author_id) is Label.HUMAN)
        s["retweets_by_bots"] = sum(1 for r in records if r.retweet_of is not None
                                    and labels.get(r.author_id) is Label.BOT)

        tally = classify_retweets(records, labels, window)
        for k, v in tally.as_dict().items():
            s[f"tally_{k}" if k in ("hh", "hb", "bh", "bb", "missing") else k] = v
        t["retweet_tally.csv"] = _rows_csv(["class", "count"], [
            ("H-H", tally.hh), ("H-B", tally.hb), ("B-H", tally.bh), ("B-B", tally.bb),
            ("missing", tally.missing)])

        urls = url_counts(records, labels, scan_embedded=True)
        for lab, name in ((Label.HUMAN, "human"), (Label.BOT, "bot")):
            s[f"url_{name}_records"] = urls.records[lab]
            s[f"url_{name}_embedded"] = urls.embedded[lab]
            s[f"url_{name}"] = urls.total(lab) if config.scan_embedded else urls.records[lab]
        t["url_counts.csv"] = _rows_csv(["cohort", "records", "embedded", "total"], [
            (lab.value, urls.records[lab], urls.embedded[lab], urls.total(lab))
            for lab in (Label.HUMAN, Label.BOT)])

        graph = build_retweet_network(records, labels)
        t["edges.csv"] = _render(graph.write_edges)
        t["nodes.csv"] = _render(graph.write_nodes)
        gs = graph.summary()
        s["network_direction"] = graph.direction
        s["network_nodes"] = gs["nodes"]
        s["network_edges"] = gs["edges"]
        s["network_multi_edges"] = gs["multi_edges"]
        for name, rt_label, au_label in (("hum_rt_bot", Label.HUMAN, Label.BOT),
                                         ("bot_rt_bot", Label.BOT, Label.BOT)):
            sub = filter_network(graph, rt_label, au_label).summary()
            s[f"{name}_nodes"] = sub["nodes"]
            s[f"{name}_edges"] = sub["edges"]
        deg = degree_table(graph)
        t["degree.csv"] = _render(deg.write_csv)
        if len(graph.nodes) >= 3:
            bc = betweenness(graph, normalized=True, directed=config.directed,
                             workers=config.workers)
            t["betweenness.csv"] = _render(bc.write_csv)
            if bc.rows:
                s["top_betweenness_account"] = bc.rows[0][0]
        if deg.rows:
            s["top_degree_account"] = deg.rows[0][0]
            s["top_degree_value"] = deg.rows[0][1]
    return tally


def text(config: PipelineConfig, bundle: ReportBundle, records, labels):
    s, t = bundle.summary, bundle.tables
    with _Stage(bundle, "text", "lexsent"):
        if config.negative_lexicon:
            with open(config.negative_lexicon, encoding="utf-8") as fp:
                neg = NegativeLexicon.from_lines(fp, exact=config.exact_stems)
        else:
            neg = NegativeLexicon.default(exact=config.exact_stems)
        part = negativity_partition(records, labels, neg)
        rows = []
        for (lab, kind), c in part.items():
            rows.append((lab.value, kind, c["negative"], c["non_negative"]))
            s[f"negative_{lab.name.lower()}_{kind}"] = c["negative"]
            s[f"non_negative_{lab.name.lower()}_{kind}"] = c["non_negative"]
        t["negativity.csv"] = _rows_csv(["cohort", "kind", "negative", "non_negative"], rows)

        wc = cohort_word_counts(records, labels, config.include_retweets, config.include_embedded)
        if wc.n_bot and wc.n_human:
            t["log_odds.csv"] = _render(write_log_odds, log_odds(wc), wc)

        if config.labmt:
            with open(config.labmt, encoding="utf-8") as fp:
                lex = load_sentiment_lexicon(fp)
            deltas = delta_grid(config.delta_max, config.delta_step)
            t["sentiment_sweep.csv"] = _render(write_sweep, sentiment_sweep(
                records, labels, lex, deltas, config.include_retweets, config.include_embedded))
            t["sentiment_sweep_no_retweets.csv"] = _render(write_sweep, sentiment_sweep(
                records, labels, lex, deltas, False, config.include_embedded))

        stop = None
        if config.stopwords:
            with open(config.stopwords, encoding="utf-8") as fp:
                stop = load_stopwords(fp)
        docs = [r for r in records if config.include_retweets or r.retweet_of is None]
    with _Stage(bundle, "svd", "lexsent"):
        mat = None
        if docs:
            try:
                mat = tfidf([r.text for r in docs], [r.tweet_id for r in docs], stop)
            except LexiconError as exc:
                # a corpus with no word tokens still has valid tallies; skip LSI only
                log.warning("skipping TF-IDF/SVD: %s", exc)
        s["tfidf_documents"] = mat.matrix.shape[0] if mat is not None else 0
        s["tfidf_terms"] = mat.matrix.shape[1] if mat is not None else 0
        if mat is not None:
            k = min(config.svd_k, *mat.matrix.shape)
            svd = truncated_svd(mat.matrix, k, tol=config.svd_tol, seed=config.seed)
            t["projections.csv"] = _render(write_projections, mat.doc_ids, svd.projections)
            t["singular_values.csv"] = _rows_csv(
                ["component", "singular_value"],
                [(i + 1, repr(float(v))) for i, v in enumerate(svd.singular_values)])


def run_pipeline(config: PipelineConfig) -> ReportBundle:
    """Run every stage in order and collect the report in memory."""
    try:
        config.validate()
    except ConfigError as exc:
        raise PipelineError("cli", str(exc), EXIT_CONFIG) from exc
    bundle = ReportBundle()
    records, profiles, stats = ingest(config, bundle)
    if not records:
        raise PipelineError("corpus", "corpus holds no valid records", EXIT_INPUT)
    window, report = score_and_label(config, bundle, records, profiles)
    network(config, bundle, records, report.labels, window)
    text(config, bundle, records, report.labels)
    bundle.metadata = {
        "config": config.echo(),
        "version": __version__,
        "python": platform.python_version(),
        "numpy": np.__version__,
        "edge_direction": "retweeter->author",
    }
    return bundle


def digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def emit_reports(bundle: ReportBundle, out_dir: str) -> dict[str, str]:
    """Write summary, tables and metadata plus ``manifest.txt``; returns name -> sha256.

    Stage timings go to ``timings.json``, which is excluded from the manifest.
    On any write failure the files written so far are removed.
    """
    files = {"summary.txt": bundle.summary_text()}
    files.update(sorted(bundle.tables.items()))
    files["run_metadata.json"] = json.dumps(bundle.metadata, indent=2, sort_keys=True) + "\n"
    written = []
    manifest = {}
    try:
        os.makedirs(out_dir, exist_ok=True)
        for name, content in files.items():
            data = content.encode("utf-8")
            path = os.path.join(out_dir, name)
            written.append(path)
            with open(path, "wb") as fp:
                fp.write(data)
            manifest[name] = digest(data)
        path = os.path.join(out_dir, "manifest.txt")
        written.append(path)
        with open(path, "w", encoding="utf-8") as fp:
            for name in sorted(manifest):
                fp.write(f"{manifest[name]}  {name}\n")
        path = os.path.join(out_dir, "timings.json")
        written.append(path)
        with open(path, "w", encoding="utf-8") as fp:
            json.dump(bundle.timings, fp, indent=2, sort_keys=True)
    except OSError:
        for path in written:
            try:
                os.remove(path)
            except OSError:
                pass
        raise
    return manifest


def config_fields() -> dict[str, type]:
    return {f.name: f.type for f in fields(PipelineConfig)}

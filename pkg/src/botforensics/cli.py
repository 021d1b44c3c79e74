"""Command-line entry point.

Subcommands ``ingest``, ``score``, ``network``, ``text`` and ``report`` run
the pipeline up to the named stage; ``fixture`` writes a synthetic corpus.
Options may also come from a ``key=value`` file given with ``--config``;
command-line flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .botsense import read_labels
from .fixture import FixtureError, FixtureTargets, generate_fixture, write_fixture
from .pipeline import (EXIT_CONFIG, EXIT_INPUT, EXIT_OK, ConfigError, PipelineConfig,
                       PipelineError, ReportBundle, config_fields, emit_reports, ingest,
                       network, run_pipeline, score_and_label, text)
from .corpus import collection_window

log = logging.getLogger("botforensics")

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def _base_type(annotation: str):
    # annotations are strings under postponed evaluation
    kinds = {"bool": bool, "int": int, "float": float, "str": str}
    for name, kind in kinds.items():
        if annotation.startswith(name):
            return kind, "None" in annotation
    raise TypeError(annotation)


def _coerce(key: str, raw: str):
    fields = config_fields()
    if key not in fields:
        raise ConfigError(f"unknown configuration key {key!r}")
    kind, optional = _base_type(str(fields[key]))
    value = raw.strip()
    if optional and value.lower() in ("", "none"):
        return None
    try:
        if kind is bool:
            if value.lower() in _TRUE:
                return True
            if value.lower() in _FALSE:
                return False
            raise ValueError(value)
        return kind(value)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def read_config_file(path: str) -> dict:
    """Flat ``key=value`` lines; ``#`` starts a comment line."""
    out = {}
    try:
        fp = open(path, encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from None
    with fp:
        for lineno, raw in enumerate(fp, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            key = key.strip().replace("-", "_")
            out[key] = _coerce(key, value)
    return out


def _add_pipeline_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key=value configuration file")
    p.add_argument("--input", help="line-delimited JSON corpus")
    p.add_argument("--out", help="output directory")
    p.add_argument("--scores", help="external sub-score file (JSON lines)")
    p.add_argument("--threshold", type=float, help="fixed bot threshold (skips valley search)")
    p.add_argument("--policy", choices=["composite", "all-three"])
    p.add_argument("--labmt", help="happiness lexicon TSV (word<TAB>score)")
    p.add_argument("--stopwords", help="stop-word list, one per line")
    p.add_argument("--negative-lexicon", help="negative stem list (default: built-in table)")
    p.add_argument("--exact-stems", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--delta-max", type=float)
    p.add_argument("--delta-step", type=float)
    p.add_argument("--include-retweets", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--include-embedded", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--scan-embedded", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--directed", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--svd-k", type=int)
    p.add_argument("--svd-tol", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--labels", help="labels.csv from a previous score run")


def build_config(args: argparse.Namespace) -> PipelineConfig:
    values = read_config_file(args.config) if args.config else {}
    for key in config_fields():
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    return PipelineConfig(**values)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="botforensics", description=__doc__.splitlines()[0])
    parser.add_argument("--log-level", default="WARNING")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("ingest", "parse and validate a corpus"),
                        ("score", "score and label accounts, emit density grids"),
                        ("network", "retweet network, centrality and tallies"),
                        ("text", "negativity, sentiment sweep, log-odds, TF-IDF/SVD"),
                        ("report", "full pipeline")):
        _add_pipeline_options(sub.add_parser(name, help=help_))
    fx = sub.add_parser("fixture", help="write a synthetic corpus meeting target tallies")
    fx.add_argument("--out", required=True)
    fx.add_argument("--seed", type=int, default=0)
    fx.add_argument("--targets", help="JSON file overriding the default targets")
    fx.add_argument("--no-network", action="store_true",
                    help="drop the node/edge targets of the retweet networks")
    return parser


def _run_stage(command: str, config: PipelineConfig, labels_path: str | None) -> ReportBundle:
    if command == "report":
        return run_pipeline(config)
    try:
        config.validate()
    except ConfigError as exc:
        raise PipelineError("cli", str(exc), EXIT_CONFIG) from exc
    bundle = ReportBundle(metadata={"config": config.echo(), "stage": command})
    records, profiles, stats = ingest(config, bundle)
    if command == "ingest":
        bundle.tables["accounts.csv"] = "account_id,followers_count,friends_count,statuses_count\n" + "".join(
            f"{a},{p.followers_count},{p.friends_count},{p.statuses_count}\n"
            for a, p in sorted(profiles.items()))
        return bundle
    if not records:
        raise PipelineError("corpus", "corpus holds no valid records", EXIT_INPUT)
    if labels_path and command != "score":
        try:
            with open(labels_path, encoding="utf-8") as fp:
                labels = read_labels(fp)
        except (OSError, ValueError, KeyError) as exc:
            raise PipelineError("botsense", f"cannot read labels: {exc}", EXIT_INPUT) from exc
        window = collection_window(records)
    else:
        window, report = score_and_label(config, bundle, records, profiles)
        labels = report.labels
        if command == "score":
            return bundle
    if command == "network":
        network(config, bundle, records, labels, window)
    else:
        text(config, bundle, records, labels)
    return bundle


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=getattr(logging, str(args.log_level).upper(), logging.WARNING),
                        format="%(asctime)s %(levelname)-8s [%(name)s] %(message)s")
    if args.command == "fixture":
        try:
            targets = FixtureTargets()
            if args.targets:
                with open(args.targets, encoding="utf-8") as fp:
                    targets = FixtureTargets(**{**targets.to_dict(), **json.load(fp)})
            if args.no_network:
                for key in FixtureTargets.NETWORK_FIELDS:
                    setattr(targets, key, None)
            paths = write_fixture(generate_fixture(targets, seed=args.seed), args.out)
        except (FixtureError, TypeError, ValueError) as exc:
            print(f"error: [fixture] {exc}", file=sys.stderr)
            return EXIT_INPUT
        except OSError as exc:
            print(f"error: [fixture] {exc}", file=sys.stderr)
            return EXIT_INPUT
        for name, path in paths.items():
            print(f"{name}={path}")
        return EXIT_OK
    try:
        config = build_config(args)
    except (ConfigError, TypeError) as exc:
        print(f"error: [cli] {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        bundle = _run_stage(args.command, config, args.labels)
        emit_reports(bundle, config.out)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.status
    except OSError as exc:
        print(f"error: [cli] cannot write reports: {exc}", file=sys.stderr)
        return EXIT_INPUT
    sys.stdout.write(bundle.summary_text())
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())

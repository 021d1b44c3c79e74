"""Spanish tweet text: normalization, negative-stem matching, happiness averages
and log-odds word discrimination between cohorts."""

from __future__ import annotations

import csv
import math
import unicodedata
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .corpus import Label, TweetRecord

NEUTRAL = 5.0
# float slack for |h - 5| >= dh, so that e.g. h=5.3 survives dh=0.3
BAND_EPS = 1e-9

_FOLD = str.maketrans({
    "á": "a", "é": "e", "í": "i", "ó": "o", "ú": "u", "ü": "u", "ñ": "n",
    "Á": "A", "É": "E", "Í": "I", "Ó": "O", "Ú": "U", "Ü": "U", "Ñ": "N",
    "¿": "?", "¡": "!",
})

# Hand-coded negative stems; True marks entries written with a trailing '*'.
NEGATIVE_STEMS: tuple[tuple[str, bool], ...] = (
    ("arma", False), ("asesin", True), ("asesinat", True), ("bala", False),
    ("balazo", False), ("brutal", False), ("cartel", False), ("castigo", False),
    ("corrupcion", False), ("corrupt", False), ("crimen", False), ("criminal", False),
    ("culpable", False), ("delincuen", True), ("dispara", False), ("disparos", False),
    ("ejecucion", False), ("ejecut", True), ("exterminio", False), ("fals", True),
    ("genocidio", False), ("guerra", False), ("incendia", False), ("jode", True),
    ("jodid", True), ("levanton", False), ("maltrat", True), ("masacre", False),
    ("matanza", False), ("matar", False), ("mentir", False), ("muerte", False),
    ("pistola", False), ("represion", False), ("represiv", True), ("sangriento", False),
    ("sanguinari", True), ("secuestro", False), ("tortura", False), ("violacion", False),
    ("violenta", False),
)


class LexiconError(ValueError):
    """Domain error raised by text-analysis operations."""


def normalize_text(text: str) -> list[str]:
    """Lowercase ASCII-folded word tokens with URLs and non-word tokens removed.

    >>> normalize_text("Ejecución en la plaza https://t.co/abc")
    ['ejecucion', 'en', 'la', 'plaza']
    """
    words = [w for w in text.split() if not w.lower().startswith("http")]
    folded = unicodedata.normalize("NFC", " ".join(words)).translate(_FOLD)
    ascii_only = folded.encode("ascii", "ignore").decode("ascii").lower()
    return [t for t in ascii_only.split()
            if "a" <= t[0] <= "z" and not t.startswith("http")]


@dataclass
class NegativeLexicon:
    entries: list[tuple[str, bool]]
    exact: bool = False  # non-'*' entries must then equal the token
    index: dict[str, list[tuple[str, bool]]] = field(init=False, repr=False)

    def __post_init__(self):
        self.index = defaultdict(list)
        for stem, open_ in self.entries:
            if not stem or not stem.isascii() or stem != stem.lower() or not stem.isalpha():
                raise LexiconError(f"bad lexicon stem {stem!r}")
            self.index[stem[0]].append((stem, open_))

    @classmethod
    def default(cls, exact: bool = False) -> "NegativeLexicon":
        return cls(list(NEGATIVE_STEMS), exact=exact)

    @classmethod
    def from_lines(cls, lines: Iterable[str], exact: bool = False) -> "NegativeLexicon":
        entries = []
        for raw in lines:
            stem = raw.strip()
            if not stem or stem.startswith("#"):
                continue
            open_ = stem.endswith("*")
            entries.append((stem.rstrip("*").lower(), open_))
        return cls(entries, exact=exact)

    def matches(self, word: str) -> bool:
        if not word:
            return False
        for stem, open_ in self.index.get(word[0], ()):
            if open_ or not self.exact:
                if word.startswith(stem):
                    return True
            elif word == stem:
                return True
        return False


def match_negative(tokens: Sequence[str], lexicon: NegativeLexicon) -> int:
    """Number of tokens matching the lexicon directly or after dropping their first letter."""
    count = 0
    for tok in tokens:
        if lexicon.matches(tok) or (len(tok) >= 2 and lexicon.matches(tok[1:])):
            count += 1
    return count


def negativity_partition(records: Iterable[TweetRecord], labels: Mapping[int, Label],
                         lexicon: NegativeLexicon, weight: int = 1) -> dict:
    """Negative / non-negative tweet counts by author cohort and retweet status.

    A tweet's value is ``weight`` times its match count; it is negative when
    that value is non-zero.  Unknown authors are left out.
    """
    out = {(lab, kind): {"negative": 0, "non_negative": 0}
           for lab in (Label.HUMAN, Label.BOT) for kind in ("original", "retweet")}
    for r in records:
        label = labels.get(r.author_id, Label.UNKNOWN)
        if label is Label.UNKNOWN:
            continue
        value = weight * match_negative(normalize_text(r.text), lexicon)
        kind = "retweet" if r.retweet_of is not None else "original"
        out[(label, kind)]["negative" if value != 0 else "non_negative"] += 1
    return out


def load_sentiment_lexicon(lines: Iterable[str]) -> dict[str, float]:
    """Parse ``word<TAB>score`` lines; scores must lie in [1, 9]."""
    lex = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        try:
            word, score = line.split("\t")[:2]
            h = float(score)
        except ValueError:
            raise LexiconError(f"line {lineno}: expected word<TAB>score") from None
        if not 1.0 <= h <= 9.0:
            raise LexiconError(f"line {lineno}: score {h} outside [1, 9]")
        lex[word.strip()] = h
    return lex


def labmt_sentiment(counts: Mapping[str, int], lexicon: Mapping[str, float],
                    delta_h: float) -> float | None:
    """Frequency-weighted mean happiness over lexicon words at least ``delta_h``
    away from neutral; None when no word survives."""
    if delta_h < 0:
        raise LexiconError(f"delta_h must be non-negative, got {delta_h}")
    num = 0.0
    den = 0
    for word in sorted(counts):
        h = lexicon.get(word)
        if h is None or abs(h - NEUTRAL) < delta_h - BAND_EPS:
            continue
        num += h * counts[word]
        den += counts[word]
    return num / den if den else None


def delta_grid(stop: float = 3.0, step: float = 0.1) -> list[float]:
    n = int(round(stop / step))
    return [round(i * step, 10) for i in range(n + 1)]


@dataclass
class CohortWordCounts:
    bot: Counter
    human: Counter

    @property
    def n_bot(self) -> int:
        return sum(self.bot.values())

    @property
    def n_human(self) -> int:
        return sum(self.human.values())

    @property
    def vocabulary(self) -> list[str]:
        return sorted(set(self.bot) | set(self.human))

    def swapped(self) -> "CohortWordCounts":
        return CohortWordCounts(bot=self.human, human=self.bot)


def cohort_word_counts(records: Iterable[TweetRecord], labels: Mapping[int, Label],
                       include_retweets: bool = True,
                       include_embedded: bool = False) -> CohortWordCounts:
    counts = {Label.BOT: Counter(), Label.HUMAN: Counter()}
    for r in records:
        label = labels.get(r.author_id, Label.UNKNOWN)
        if label is Label.UNKNOWN:
            continue
        if r.retweet_of is not None and not include_retweets:
            continue
        counts[label].update(normalize_text(r.text))
        if include_embedded and r.retweet_of is not None and r.retweet_of.text:
            counts[label].update(normalize_text(r.retweet_of.text))
    return CohortWordCounts(bot=counts[Label.BOT], human=counts[Label.HUMAN])


def sentiment_sweep(records: Sequence[TweetRecord], labels: Mapping[int, Label],
                    lexicon: Mapping[str, float], deltas: Sequence[float] | None = None,
                    include_retweets: bool = True,
                    include_embedded: bool = False) -> list[tuple[float, float | None, float | None]]:
    """Rows of (delta_h, h_avg human, h_avg bot) over the neutral-band grid."""
    deltas = delta_grid() if deltas is None else deltas
    wc = cohort_word_counts(records, labels, include_retweets, include_embedded)
    return [(dh, labmt_sentiment(wc.human, lexicon, dh), labmt_sentiment(wc.bot, lexicon, dh))
            for dh in deltas]


def write_sweep(rows, fp) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["delta_h", "h_human", "h_bot"])
    for dh, hh, hb in rows:
        writer.writerow([repr(dh), "" if hh is None else repr(hh), "" if hb is None else repr(hb)])


def log_odds(counts: CohortWordCounts) -> list[tuple[str, float]]:
    """Add-one smoothed log ratio of bot to human word frequencies.

    Positive scores lean bot.  Sorted by score descending, then word.
    """
    n_bot, n_human = counts.n_bot, counts.n_human
    if n_bot == 0 or n_human == 0:
        raise LexiconError("log-odds needs tokens in both cohorts")
    vocab = counts.vocabulary
    v = len(vocab)
    log_nb = math.log(n_bot + v)
    log_nh = math.log(n_human + v)
    rows = []
    for w in vocab:
        bot_term = math.log(counts.bot.get(w, 0) + 1) - log_nb
        human_term = math.log(counts.human.get(w, 0) + 1) - log_nh
        rows.append((w, bot_term - human_term))
    rows.sort(key=lambda r: (-r[1], r[0]))
    return rows


def write_log_odds(rows, counts: CohortWordCounts, fp) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    writer.writerow(["word", "score", "count_bot", "count_human"])
    for word, score in rows:
        writer.writerow([word, repr(score), counts.bot.get(word, 0), counts.human.get(word, 0)])

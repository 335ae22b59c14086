"""Co-occurrence statistics, PMI word vectors and DCW ranking over a text corpus.

Probabilities are window-count ratios: a document is cut into sliding windows
of ``window_size`` tokens (stride 1) and every distinct word in a window is
counted once for that window.  Word vectors are positive-PMI rows over the
vocabulary.  The DCW score of a word against an anchor is its PMI divided by
the cosine of the two PPMI rows.
"""

from __future__ import annotations

import csv
import logging
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from itertools import combinations
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import ValidationError

logger = logging.getLogger(__name__)

COSINE_FLOOR = 1e-6
_TOKEN_RE = re.compile(r"[^\W\d_]+")


def tokenize(text: str, stopwords: Iterable[str] = ()) -> list[str]:
    """Lowercase alphabetic tokens with punctuation, digits and stopwords removed."""
    stop = {w.casefold() for w in stopwords}
    return [t for t in _TOKEN_RE.findall(text.casefold()) if t not in stop]


def default_stopwords() -> set[str]:
    text = resources.files("loadscope").joinpath("data/stopwords.txt").read_text("utf-8")
    return load_stopwords_text(text)


def load_stopwords_text(text: str) -> set[str]:
    return {line.strip().casefold() for line in text.splitlines() if line.strip() and not line.startswith("#")}


@dataclass(frozen=True)
class Document:
    id: str
    text: str
    tokens: tuple[str, ...]

    @classmethod
    def from_text(cls, id: str, text: str, stopwords: Iterable[str] = ()) -> "Document":
        return cls(id=id, text=text, tokens=tuple(tokenize(text, stopwords)))


def read_corpus(directory: str | Path, stopwords: Iterable[str] = ()) -> list[Document]:
    """One document per ``.txt`` file, ordered by file name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ValidationError(f"corpus directory not found: {directory}")
    stop = set(stopwords)
    docs = []
    for path in sorted(directory.glob("*.txt")):
        docs.append(Document.from_text(path.stem, path.read_text(encoding="utf-8"), stop))
    return docs


def _pair(a: str, b: str) -> tuple[str, str]:
    return (a, b) if a < b else (b, a)


@dataclass
class CooccurrenceStats:
    vocab: tuple[str, ...]
    unigram_windows: dict[str, int]
    pair_windows: dict[tuple[str, str], int]
    total_windows: int
    window_size: int
    _index: dict[str, int] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self._index = {w: i for i, w in enumerate(self.vocab)}

    def __contains__(self, word: str) -> bool:
        return word in self._index

    def index(self, word: str) -> int:
        try:
            return self._index[word]
        except KeyError:
            raise ValidationError(f"out of vocabulary: {word!r}") from None

    def prob(self, word: str) -> float:
        self.index(word)
        return self.unigram_windows[word] / self.total_windows

    def pair_count(self, w1: str, w2: str) -> int:
        if w1 == w2:
            return 0
        return self.pair_windows.get(_pair(w1, w2), 0)

    def joint_prob(self, w1: str, w2: str) -> float:
        return self.pair_count(w1, w2) / self.total_windows


def _windows(tokens: Sequence[str], window_size: int):
    if not tokens:
        return
    if len(tokens) <= window_size:
        yield tokens
        return
    for start in range(len(tokens) - window_size + 1):
        yield tokens[start:start + window_size]


def build_stats(docs: Iterable[Document | Sequence[str]], window_size: int = 10) -> CooccurrenceStats:
    """Count context windows per word and per unordered word pair.

    ``docs`` may hold :class:`Document` objects or plain token sequences.
    """
    if window_size < 2:
        raise ValidationError("window_size must be >= 2")
    unigrams: Counter = Counter()
    pairs: Counter = Counter()
    total = 0
    for doc in docs:
        tokens = doc.tokens if isinstance(doc, Document) else tuple(doc)
        for window in _windows(tokens, window_size):
            distinct = sorted(set(window))
            total += 1
            unigrams.update(distinct)
            pairs.update(combinations(distinct, 2))
    if total == 0:
        raise ValidationError("empty corpus")
    vocab = tuple(sorted(unigrams))
    return CooccurrenceStats(
        vocab=vocab,
        unigram_windows={w: unigrams[w] for w in vocab},
        pair_windows=dict(sorted(pairs.items())),
        total_windows=total,
        window_size=window_size,
    )


def pmi(stats: CooccurrenceStats, w1: str, w2: str) -> float:
    """Natural-log pointwise mutual information of two words."""
    p1, p2 = stats.prob(w1), stats.prob(w2)
    joint = stats.joint_prob(w1, w2)
    if joint == 0:
        raise ValidationError(f"no co-occurrence between {w1!r} and {w2!r}")
    return math.log(joint / (p1 * p2))


def mutual_information(stats: CooccurrenceStats) -> float:
    """Corpus-level diagnostic: sum of p(x, y) * pmi(x, y) over co-occurring pairs.

    Not used for ranking.
    """
    total = 0.0
    for (a, b), count in stats.pair_windows.items():
        total += count / stats.total_windows * pmi(stats, a, b)
    return total


def word_vector(stats: CooccurrenceStats, w: str) -> np.ndarray:
    """PPMI row of ``w``; entries for words never seen with ``w`` (including itself) are 0."""
    stats.index(w)
    out = np.zeros(len(stats.vocab))
    for j, other in enumerate(stats.vocab):
        if stats.pair_count(w, other) > 0:
            out[j] = max(0.0, pmi(stats, w, other))
    return out


def cosine(v1, v2) -> float:
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    if v1.shape != v2.shape:
        raise ValidationError(f"vector lengths differ: {v1.shape} vs {v2.shape}")
    n1, n2 = np.linalg.norm(v1), np.linalg.norm(v2)
    if n1 == 0 or n2 == 0:
        raise ValidationError("zero vector")
    return float(np.dot(v1, v2) / (n1 * n2))


def _dcw(pmi_value: float, cos_value: float, anchor: str, word: str) -> float:
    if cos_value <= COSINE_FLOOR:
        raise ValidationError(f"undefined DCW (orthogonal words): {anchor!r}, {word!r}")
    return pmi_value / cos_value


def dcw_score(stats: CooccurrenceStats, anchor: str, word: str) -> float:
    """PMI of the pair divided by the cosine of their PPMI rows."""
    p = pmi(stats, anchor, word)
    v_anchor, v_word = word_vector(stats, anchor), word_vector(stats, word)
    if not v_anchor.any() or not v_word.any():
        raise ValidationError(f"undefined DCW (orthogonal words): {anchor!r}, {word!r}")
    return _dcw(p, cosine(v_anchor, v_word), anchor, word)


@dataclass(frozen=True)
class DcwEntry:
    word: str
    pmi: float
    cosine: float
    dcw: float
    kept: bool


@dataclass
class DcwRanking:
    anchor: str
    threshold: float
    entries: list[DcwEntry]
    omitted: int = 0

    @property
    def kept_words(self) -> list[str]:
        return [e.word for e in self.entries if e.kept]

    def to_csv(self, path, header: str | None = None) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            if header:
                fh.write(header)
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["word", "pmi", "cosine", "dcw", "kept"])
            for e in self.entries:
                writer.writerow([e.word, repr(e.pmi), repr(e.cosine), repr(e.dcw), int(e.kept)])


def ppmi_matrix(stats: CooccurrenceStats) -> np.ndarray:
    """All PPMI rows stacked in vocab order."""
    n = len(stats.vocab)
    mat = np.zeros((n, n))
    for (a, b), count in stats.pair_windows.items():
        value = max(0.0, pmi(stats, a, b))
        i, j = stats.index(a), stats.index(b)
        mat[i, j] = mat[j, i] = value
    return mat


def rank_features(stats: CooccurrenceStats, anchor: str = "load", threshold: float = 0.1) -> DcwRanking:
    """Score every other vocabulary word against ``anchor`` and sort by DCW descending.

    Words without a defined score (no co-occurrence with the anchor, or a
    cosine at or below the floor) are left out and counted in ``omitted``.
    """
    a = stats.index(anchor)
    mat = ppmi_matrix(stats)
    v_anchor = mat[a]
    norm_anchor = np.linalg.norm(v_anchor)
    entries = []
    omitted = 0
    for j, word in enumerate(stats.vocab):
        if j == a:
            continue
        if stats.pair_count(anchor, word) == 0:
            omitted += 1
            continue
        norm_word = np.linalg.norm(mat[j])
        cos = 0.0 if norm_anchor == 0 or norm_word == 0 else float(np.dot(v_anchor, mat[j]) / (norm_anchor * norm_word))
        if cos <= COSINE_FLOOR:
            omitted += 1
            continue
        p = pmi(stats, anchor, word)
        score = p / cos
        entries.append(DcwEntry(word, p, cos, score, score > threshold))
    entries.sort(key=lambda e: (-e.dcw, e.word))
    if omitted:
        logger.info("rank_features: %d words omitted with undefined DCW", omitted)
    return DcwRanking(anchor=anchor, threshold=threshold, entries=entries, omitted=omitted)


class DCWRanker(BaseEstimator):
    """Fit co-occurrence statistics on documents and rank words against an anchor.

    Parameters
    ----------
    anchor : str, default="load"
    window_size : int, default=10
    threshold : float, default=0.1
        Words with DCW strictly above this value are kept.
    stopwords : iterable of str or None
        ``None`` uses the bundled English list.
    """

    def __init__(self, anchor="load", window_size=10, threshold=0.1, stopwords=None):
        self.anchor = anchor
        self.window_size = window_size
        self.threshold = threshold
        self.stopwords = stopwords

    def fit(self, X, y=None):
        """``X`` is a list of raw strings, :class:`Document` objects or token lists."""
        stop = default_stopwords() if self.stopwords is None else set(self.stopwords)
        docs = []
        for i, item in enumerate(X):
            if isinstance(item, str):
                docs.append(Document.from_text(str(i), item, stop))
            else:
                docs.append(item)
        self.stats_ = build_stats(docs, self.window_size)
        self.ranking_ = rank_features(self.stats_, self.anchor, self.threshold)
        return self

    def get_feature_names_out(self, input_features=None):
        return np.asarray(self.ranking_.kept_words, dtype=object)

    def word_vectors(self, words: Sequence[str]) -> np.ndarray:
        mat = ppmi_matrix(self.stats_)
        return np.vstack([mat[self.stats_.index(w)] for w in words]) if words else np.zeros((0, len(mat)))

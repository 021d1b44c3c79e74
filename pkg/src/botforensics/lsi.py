"""Bag-of-words TF-IDF and a subspace-iteration truncated SVD (latent semantic indexing)."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from sklearn.feature_extraction.text import TfidfVectorizer

from .lexsent import LexiconError, normalize_text


class ConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


@dataclass
class TfidfMatrix:
    matrix: sp.csr_matrix
    vocabulary: list[str]
    doc_ids: list[int]


def load_stopwords(lines: Iterable[str]) -> set[str]:
    words = set()
    for raw in lines:
        w = raw.strip()
        if w and not w.startswith("#"):
            words.update(normalize_text(w) or [w.lower()])
    return words


def tfidf(documents: Sequence[str], doc_ids: Sequence[int] | None = None,
          stopwords: Iterable[str] | None = None) -> TfidfMatrix:
    """Unit-norm TF-IDF rows with idf = ln((1+N)/(1+df)) + 1 on raw counts.

    Documents are tokenized with :func:`normalize_text`; stop words are
    dropped before counting.  Columns follow lexicographic term order.
    """
    stop = frozenset(stopwords or ())

    def analyze(doc: str) -> list[str]:
        return [t for t in normalize_text(doc) if t not in stop]

    if not any(analyze(d) for d in documents):
        raise LexiconError("all documents are empty after normalization")
    vec = TfidfVectorizer(analyzer=analyze, norm="l2", use_idf=True, smooth_idf=True,
                          sublinear_tf=False, lowercase=False, dtype=np.float64)
    mat = vec.fit_transform(documents).tocsr()
    vocab = list(vec.get_feature_names_out())
    ids = list(range(len(documents))) if doc_ids is None else list(doc_ids)
    return TfidfMatrix(mat, vocab, ids)


@dataclass
class SvdResult:
    singular_values: np.ndarray  # (k,), descending
    components: np.ndarray       # (cols, k) right singular vectors
    projections: np.ndarray      # (rows, k) = matrix @ components
    iterations: int


def truncated_svd(matrix, k: int, tol: float = 1e-10, max_iter: int = 20000,
                  seed: int = 0) -> SvdResult:
    """Top-k singular triplets by orthogonal (subspace) iteration on A^T A.

    Each sweep re-orthonormalizes the block and takes Ritz values from the
    small projected matrix; iteration stops once no singular value moves by
    ``tol`` or more.  Signs are fixed so each right vector's largest-magnitude
    entry is positive.
    """
    a = matrix if sp.issparse(matrix) else np.asarray(matrix, dtype=float)
    rows, cols = a.shape
    if k < 1 or k > min(rows, cols):
        raise ValueError(f"k={k} must lie in [1, {min(rows, cols)}]")
    if tol <= 0:
        raise ValueError("tol must be positive")
    rng = np.random.default_rng(seed)
    v, _ = np.linalg.qr(rng.standard_normal((cols, k)))
    prev = np.full(k, np.inf)
    for it in range(1, max_iter + 1):
        w = np.asarray(a.T @ (a @ v))
        v, _ = np.linalg.qr(w)
        # Rayleigh-Ritz on the current block
        b = np.asarray(a @ v)
        _, s, vt = np.linalg.svd(b, full_matrices=False)
        v = v @ vt.T
        change = float(np.max(np.abs(s - prev)))
        prev = s
        if change < tol:
            break
    else:
        raise ConvergenceError(f"truncated_svd did not converge in {max_iter} iterations", change)

    pivots = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[pivots, np.arange(k)])
    signs[signs == 0] = 1.0
    v = v * signs
    proj = np.asarray(a @ v)
    return SvdResult(prev.copy(), v, proj, it)


def write_projections(doc_ids: Sequence[int], proj: np.ndarray, fp) -> None:
    writer = csv.writer(fp, lineterminator="\n")
    k = proj.shape[1]
    writer.writerow(["tweet_id", *(f"component_{i + 1}" for i in range(k))])
    for tid, row in zip(doc_ids, proj):
        writer.writerow([tid, *(repr(float(x)) for x in row)])

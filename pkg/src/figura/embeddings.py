"""Word-embedding store with cosine-distance and nearest-neighbor queries.

Loads a plain-text word-vector table (optionally gzip-compressed, detected
by magic bytes) into an immutable in-memory store. All semantic distances
in the package are computed here as ``1 - cosine(a, b)``, so values lie in
``[0, 2]`` and smaller means more similar.
"""
from __future__ import annotations

import gzip
import io
import logging
from pathlib import Path
from typing import BinaryIO, Iterable, Optional, Union

import numpy as np

from .errors import LoadError, UnknownTokenError

logger = logging.getLogger(__name__)

GZIP_MAGIC = b"\x1f\x8b"


class EmbeddingStore:
    """Immutable token -> vector map.

    Vectors are stored row-wise in a float64 matrix together with their
    unit-normalized copies, so distance queries are dot products. The store
    rejects zero vectors at load time (cosine is undefined for them) and is
    safe for concurrent readers once constructed.
    """

    def __init__(self, tokens: Iterable[str], matrix: np.ndarray, lowercase: bool = True):
        self._tokens = list(tokens)
        self._matrix = np.asarray(matrix, dtype=np.float64)
        if self._matrix.ndim != 2 or len(self._tokens) != self._matrix.shape[0]:
            raise LoadError("token list and matrix shape disagree")
        norms = np.linalg.norm(self._matrix, axis=1)
        if np.any(norms == 0.0):
            bad = self._tokens[int(np.argmin(norms))]
            raise LoadError(f"zero-norm vector for token {bad!r}")
        self._unit = self._matrix / norms[:, None]
        self._index = {tok: i for i, tok in enumerate(self._tokens)}
        if len(self._index) != len(self._tokens):
            raise LoadError("duplicate tokens passed to EmbeddingStore")
        self._lowercase = lowercase
        self._matrix.flags.writeable = False
        self._unit.flags.writeable = False

    @property
    def dimensionality(self) -> int:
        return self._matrix.shape[1]

    @property
    def vocabulary(self) -> frozenset:
        return frozenset(self._index)

    def __len__(self) -> int:
        return len(self._tokens)

    def __contains__(self, token: str) -> bool:
        return self._key(token) in self._index

    def _key(self, token: str) -> str:
        return token.lower() if self._lowercase else token

    def normalize(self, token: str) -> str:
        """The form under which a token is stored and matched (casefolding policy)."""
        return self._key(token)

    def _row(self, token: str) -> int:
        key = self._key(token)
        if key not in self._index:
            raise UnknownTokenError(token)
        return self._index[key]

    def vector(self, token: str) -> np.ndarray:
        """Raw stored vector for a token (read-only view)."""
        return self._matrix[self._row(token)]

    def distance(self, a: str, b: str) -> float:
        """Semantic distance ``1 - cosine(a, b)``, clamped to [0, 2]."""
        ua = self._unit[self._row(a)]
        ub = self._unit[self._row(b)]
        d = 1.0 - float(np.dot(ua, ub))
        return min(max(d, 0.0), 2.0)

    def nearest_neighbors(
        self,
        word: str,
        k: int,
        vocab_filter: Optional[Iterable[str]] = None,
    ) -> list[tuple[str, float]]:
        """The k nearest vocabulary tokens to `word`, ascending by distance.

        The query token itself is excluded. If `vocab_filter` is given, only
        tokens in it (and in the vocabulary) are candidates. Ties break by
        lexicographic token order. An empty candidate set yields [].
        """
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        row = self._row(word)
        dists = 1.0 - self._unit @ self._unit[row]
        np.clip(dists, 0.0, 2.0, out=dists)
        if vocab_filter is not None:
            allowed = {self._key(t) for t in vocab_filter}
            candidates = [i for i, t in enumerate(self._tokens) if t in allowed and i != row]
        else:
            candidates = [i for i in range(len(self._tokens)) if i != row]
        ranked = sorted(candidates, key=lambda i: (dists[i], self._tokens[i]))
        return [(self._tokens[i], float(dists[i])) for i in ranked[:k]]


def semantic_distance(store: EmbeddingStore, a: str, b: str) -> float:
    return store.distance(a, b)


def nearest_neighbors(
    store: EmbeddingStore,
    word: str,
    k: int,
    vocab_filter: Optional[Iterable[str]] = None,
) -> list[tuple[str, float]]:
    return store.nearest_neighbors(word, k, vocab_filter)


def _open_text(source: Union[str, Path, BinaryIO]) -> io.TextIOBase:
    """Open `source` as a UTF-8 text stream, transparently ungzipping."""
    opened = isinstance(source, (str, Path))
    raw: BinaryIO = open(source, "rb") if opened else source  # type: ignore[arg-type]
    try:
        data = raw.read()
    finally:
        if opened:
            raw.close()
    if data[:2] == GZIP_MAGIC:
        data = gzip.decompress(data)
    return io.TextIOWrapper(io.BytesIO(data), encoding="utf-8")


def load_embeddings(
    source: Union[str, Path, BinaryIO],
    lowercase: bool = True,
) -> EmbeddingStore:
    """Load a text word-vector table into an EmbeddingStore.

    Format: an optional first line ``<count> <dim>``, then one vector per
    line as ``token v1 v2 ... vd`` separated by single spaces. The first
    vector line fixes the dimensionality; any later line with a different
    width fails with a LoadError naming the (1-based) line number. Duplicate
    tokens keep the first occurrence; zero vectors and empty input are
    rejected.
    """
    text = _open_text(source)
    tokens: list[str] = []
    rows: list[list[float]] = []
    seen: set[str] = set()
    dim: Optional[int] = None
    for lineno, line in enumerate(text, start=1):
        line = line.rstrip("\n").rstrip("\r")
        if not line.strip():
            continue
        parts = line.split(" ")
        if lineno == 1 and len(parts) == 2:
            try:
                int(parts[0]), int(parts[1])
                continue  # "count dim" header
            except ValueError:
                pass
        token = parts[0]
        if lowercase:
            token = token.lower()
        try:
            values = [float(v) for v in parts[1:]]
        except ValueError as exc:
            raise LoadError(f"malformed vector at line {lineno}: {exc}") from exc
        if not values:
            raise LoadError(f"malformed vector at line {lineno}: no components")
        if dim is None:
            dim = len(values)
        elif len(values) != dim:
            raise LoadError(f"dimension mismatch at line {lineno}")
        if all(v == 0.0 for v in values):
            raise LoadError(f"zero-norm vector at line {lineno}")
        if token in seen:
            logger.debug("duplicate token %r at line %d kept first occurrence", token, lineno)
            continue
        seen.add(token)
        tokens.append(token)
        rows.append(values)
    if not tokens:
        raise LoadError("no vector lines in embedding input")
    return EmbeddingStore(tokens, np.array(rows, dtype=np.float64), lowercase=lowercase)

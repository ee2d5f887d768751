"""Loading, holding, and serving distributional word vector spaces.

Spaces are parsed from the two standard on-disk formats (word2vec text,
word2vec binary) into an immutable vocabulary -> row-index map plus a dense
matrix. Token normalization is configurable and applied both at load time
(to the stored vocabulary) and at lookup time (to queries), so that a space
and the term lists probed against it agree on surface forms.
"""
from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass, field
from fractions import Fraction  # noqa: F401  (re-exported convenience for callers)
from pathlib import Path
from typing import Any, Iterable, Iterator

import numpy as np


class EmbeddingLoadError(Exception):
    """Raised when an embedding file cannot be parsed into a space."""


# Arabic harakat / tanwin / shadda / sukun / superscript alef, plus tatweel.
_DIACRITICS = re.compile(r"[ؐ-ًؚ-ٰٟۖ-ۜ۟-۪ۤۧۨ-ۭـ]")
_ALEF_VARIANTS = str.maketrans({"أ": "ا", "إ": "ا", "آ": "ا", "ٱ": "ا"})


@dataclass(frozen=True)
class NormalizationPolicy:
    """Deterministic, idempotent token normalization.

    Defaults keep alef and teh-marbuta variants distinct: term lists may
    encode those forms deliberately (e.g. explicit masculine and feminine
    variants of a profession noun).
    """

    strip_diacritics: bool = True
    normalize_alef: bool = False
    normalize_teh_marbuta: bool = False
    unicode_nfc: bool = True
    lowercase: bool = False

    def apply(self, text: str) -> str:
        if self.unicode_nfc:
            text = unicodedata.normalize("NFC", text)
        if self.strip_diacritics:
            text = _DIACRITICS.sub("", text)
        if self.normalize_alef:
            text = text.translate(_ALEF_VARIANTS)
        if self.normalize_teh_marbuta:
            text = text.replace("ة", "ه")
        if self.lowercase:
            text = text.lower()
        if self.unicode_nfc:
            # Stripping marks can expose new composition opportunities;
            # re-normalizing keeps apply() idempotent.
            text = unicodedata.normalize("NFC", text)
        return text

    @classmethod
    def identity(cls) -> "NormalizationPolicy":
        """Policy that leaves every token untouched."""
        return cls(strip_diacritics=False, normalize_alef=False,
                   normalize_teh_marbuta=False, unicode_nfc=False, lowercase=False)

    def to_dict(self) -> dict[str, bool]:
        return {
            "strip_diacritics": self.strip_diacritics,
            "normalize_alef": self.normalize_alef,
            "normalize_teh_marbuta": self.normalize_teh_marbuta,
            "unicode_nfc": self.unicode_nfc,
            "lowercase": self.lowercase,
        }

    @classmethod
    def from_dict(cls, d: dict[str, bool]) -> "NormalizationPolicy":
        known = {f: bool(d[f]) for f in d if f in cls.__dataclass_fields__}
        unknown = set(d) - set(known)
        if unknown:
            raise ValueError(f"unknown normalization options: {sorted(unknown)}")
        return cls(**known)


@dataclass(frozen=True)
class EmbeddingSpace:
    """Immutable token -> vector map with dimension metadata.

    `vocab` maps each token to its row in `vectors`; insertion order is the
    file order (first occurrence wins on duplicates). All rows are finite
    and exactly `dim` wide.
    """

    name: str
    dim: int
    vocab: dict[str, int]
    vectors: np.ndarray
    source_meta: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.dim <= 0:
            raise ValueError(f"dim must be positive, got {self.dim}")
        if self.vectors.ndim != 2 or self.vectors.shape != (len(self.vocab), self.dim):
            raise ValueError(
                f"vectors shape {self.vectors.shape} does not match "
                f"({len(self.vocab)}, {self.dim})"
            )
        if not np.all(np.isfinite(self.vectors)):
            raise ValueError("non-finite values in embedding matrix")
        self.vectors.setflags(write=False)

    def __len__(self) -> int:
        return len(self.vocab)

    def __contains__(self, token: str) -> bool:
        return token in self.vocab

    def vector(self, token: str) -> np.ndarray:
        return self.vectors[self.vocab[token]]

    def tokens(self) -> Iterator[str]:
        return iter(self.vocab)

    @classmethod
    def from_arrays(cls, name: str, tokens: Iterable[str], vectors: np.ndarray,
                    source_meta: dict[str, Any] | None = None) -> "EmbeddingSpace":
        """Build a space directly from parallel token / row arrays."""
        vocab = {t: i for i, t in enumerate(tokens)}
        matrix = np.ascontiguousarray(vectors)
        if len(vocab) != matrix.shape[0]:
            raise ValueError("duplicate tokens or token/row count mismatch")
        return cls(name=name, dim=int(matrix.shape[1]), vocab=vocab,
                   vectors=matrix, source_meta=dict(source_meta or {}))


@dataclass(frozen=True)
class LookupResult:
    """Outcome of resolving one term against a space.

    status is "exact", "normalized", "phrase-averaged", or "oov"; the vector
    is present exactly when the status is not "oov".
    """

    term: str
    status: str
    vector: np.ndarray | None

    @property
    def found(self) -> bool:
        return self.status != "oov"


def load_text_format(path: str | Path, limit: int | None = None,
                     policy: NormalizationPolicy | None = None, *,
                     strict: bool = True, name: str | None = None) -> EmbeddingSpace:
    """Parse a word2vec/fastText ``.vec`` text file.

    The optional ``count dim`` header is auto-detected: a first line of
    exactly two integer fields is treated as a header. The space's dim is
    the per-row vector length of the first accepted row. Rows with wrong
    arity raise in strict mode and are skipped (and counted) otherwise;
    rows with NaN/Inf components are always skipped and counted. Duplicate
    tokens (after normalization) keep the first occurrence.
    """
    path = Path(path)
    policy = policy if policy is not None else NormalizationPolicy()
    tokens: list[str] = []
    vocab: dict[str, int] = {}
    rows: list[np.ndarray] = []
    dim: int | None = None
    duplicates = skipped = nonfinite = 0
    header: tuple[int, int] | None = None

    try:
        fh = path.open("r", encoding="utf-8")
    except OSError as exc:
        raise EmbeddingLoadError(f"cannot read {path}: {exc}") from exc

    with fh:
        for lineno, line in enumerate(fh):
            fields = line.split()
            if not fields:
                continue
            if lineno == 0 and len(fields) == 2 and _all_int(fields):
                header = (int(fields[0]), int(fields[1]))
                continue
            if limit is not None and len(tokens) >= limit:
                break
            token = policy.apply(fields[0])
            values = fields[1:]
            if dim is not None and len(values) != dim:
                if strict:
                    raise EmbeddingLoadError(
                        f"{path}:{lineno + 1}: expected {dim} components, got {len(values)}"
                    )
                skipped += 1
                continue
            try:
                vec = np.array(values, dtype=np.float32)
            except ValueError:
                if strict:
                    raise EmbeddingLoadError(f"{path}:{lineno + 1}: unparsable vector component")
                skipped += 1
                continue
            if vec.size == 0 or not token:
                skipped += 1
                continue
            if not np.all(np.isfinite(vec)):
                nonfinite += 1
                continue
            if dim is None:
                dim = vec.size
            if token in vocab:
                duplicates += 1
                continue
            vocab[token] = len(tokens)
            tokens.append(token)
            rows.append(vec)

    if not rows or dim is None:
        raise EmbeddingLoadError(f"{path}: zero parsable rows")

    meta: dict[str, Any] = {
        "path": str(path), "format": "text", "header": header is not None,
        "duplicates": duplicates, "skipped": skipped, "nonfinite": nonfinite,
        "policy": policy.to_dict(),
    }
    if header is not None:
        meta["declared_count"], meta["declared_dim"] = header
    return EmbeddingSpace(name=name or path.stem, dim=dim, vocab=vocab,
                          vectors=np.vstack(rows), source_meta=meta)


def load_binary_format(path: str | Path, policy: NormalizationPolicy | None = None, *,
                       limit: int | None = None, name: str | None = None) -> EmbeddingSpace:
    """Parse a word2vec binary file.

    Layout: ASCII header ``<count> <dim>\\n``, then per entry the token
    bytes terminated by a single space followed by ``dim`` little-endian
    32-bit floats. Decoding is bit-exact. Truncated payloads and header
    mismatches raise EmbeddingLoadError.
    """
    path = Path(path)
    policy = policy if policy is not None else NormalizationPolicy()
    try:
        blob = path.read_bytes()
    except OSError as exc:
        raise EmbeddingLoadError(f"cannot read {path}: {exc}") from exc

    nl = blob.find(b"\n")
    if nl < 0:
        raise EmbeddingLoadError(f"{path}: missing header line")
    try:
        count_s, dim_s = blob[:nl].split()
        count, dim = int(count_s), int(dim_s)
    except ValueError as exc:
        raise EmbeddingLoadError(f"{path}: malformed header {blob[:nl]!r}") from exc
    if count < 0 or dim <= 0:
        raise EmbeddingLoadError(f"{path}: invalid header counts {count} {dim}")

    vec_bytes = dim * 4
    pos = nl + 1
    tokens: list[str] = []
    vocab: dict[str, int] = {}
    rows: list[np.ndarray] = []
    duplicates = skipped = nonfinite = 0

    for _ in range(count):
        while pos < len(blob) and blob[pos : pos + 1] in (b"\n", b" "):
            pos += 1
        sep = blob.find(b" ", pos)
        if sep < 0:
            raise EmbeddingLoadError(f"{path}: truncated payload (token at byte {pos})")
        raw_token = blob[pos:sep]
        pos = sep + 1
        if pos + vec_bytes > len(blob):
            raise EmbeddingLoadError(f"{path}: truncated payload (vector at byte {pos})")
        vec = np.frombuffer(blob, dtype="<f4", count=dim, offset=pos).copy()
        pos += vec_bytes
        if limit is not None and len(tokens) >= limit:
            continue
        try:
            token = policy.apply(raw_token.decode("utf-8"))
        except UnicodeDecodeError:
            skipped += 1
            continue
        if not token:
            skipped += 1
            continue
        if not np.all(np.isfinite(vec)):
            nonfinite += 1
            continue
        if token in vocab:
            duplicates += 1
            continue
        vocab[token] = len(tokens)
        tokens.append(token)
        rows.append(vec)

    if blob[pos:].strip(b"\n "):
        raise EmbeddingLoadError(f"{path}: payload longer than declared count {count}")
    if not rows:
        raise EmbeddingLoadError(f"{path}: zero parsable rows")

    meta = {
        "path": str(path), "format": "binary", "header": True,
        "declared_count": count, "declared_dim": dim,
        "duplicates": duplicates, "skipped": skipped, "nonfinite": nonfinite,
        "policy": policy.to_dict(),
    }
    return EmbeddingSpace(name=name or path.stem, dim=dim, vocab=vocab,
                          vectors=np.vstack(rows), source_meta=meta)


def write_text_format(space: EmbeddingSpace, path: str | Path, *, header: bool = True) -> None:
    """Write a space as word2vec text; floats round-trip exactly."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        if header:
            fh.write(f"{len(space)} {space.dim}\n")
        for token, idx in space.vocab.items():
            comps = " ".join(repr(float(v)) for v in space.vectors[idx])
            fh.write(f"{token} {comps}\n")


def write_binary_format(space: EmbeddingSpace, path: str | Path) -> None:
    """Write a space as word2vec binary (little-endian float32 payload)."""
    path = Path(path)
    with path.open("wb") as fh:
        fh.write(f"{len(space)} {space.dim}\n".encode("ascii"))
        matrix = space.vectors.astype("<f4", copy=False)
        for token, idx in space.vocab.items():
            fh.write(token.encode("utf-8") + b" ")
            fh.write(matrix[idx].tobytes())
            fh.write(b"\n")


_WS = re.compile(r"\s+")


def lookup(space: EmbeddingSpace, term: str, policy: NormalizationPolicy | None = None) -> LookupResult:
    """Resolve a term against a space.

    Resolution order: exact token, normalized token (an underscore-joined
    variant of a multi-word term counts as normalized, since phrase merging
    at training time stores n-grams that way), then the componentwise mean
    of whichever constituent tokens of a multi-word term are in-vocabulary,
    and finally oov. Pure function of (space, term, policy).
    """
    policy = policy if policy is not None else NormalizationPolicy()
    if term in space.vocab:
        return LookupResult(term, "exact", space.vector(term))
    normalized = policy.apply(term)
    if normalized != term and normalized in space.vocab:
        return LookupResult(term, "normalized", space.vector(normalized))
    if _WS.search(normalized) or _WS.search(term):
        for joined in (_WS.sub("_", term), _WS.sub("_", normalized)):
            if joined in space.vocab:
                return LookupResult(term, "normalized", space.vector(joined))
        parts = [p for p in _WS.split(normalized) if p]
        found = [space.vector(p) for p in parts if p in space.vocab]
        if found:
            mean = np.mean(np.array(found, dtype=np.float64), axis=0)
            return LookupResult(term, "phrase-averaged", mean.astype(space.vectors.dtype))
    return LookupResult(term, "oov", None)


def unit_normalize(space: EmbeddingSpace) -> EmbeddingSpace:
    """Scale every nonzero row to Euclidean norm 1; zero rows are kept."""
    norms = np.linalg.norm(space.vectors.astype(np.float64), axis=1)
    zero = norms == 0.0
    safe = np.where(zero, 1.0, norms)
    scaled = (space.vectors / safe[:, None]).astype(space.vectors.dtype)
    meta = dict(space.source_meta)
    meta["unit_normalized"] = True
    meta["zero_rows"] = int(zero.sum())
    return EmbeddingSpace(name=space.name, dim=space.dim, vocab=dict(space.vocab),
                          vectors=scaled, source_meta=meta)


def cosine(x: np.ndarray, y: np.ndarray) -> float:
    """Cosine similarity; 0.0 when either vector is zero."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")
    nx = np.linalg.norm(x)
    ny = np.linalg.norm(y)
    if nx == 0.0 or ny == 0.0:
        return 0.0
    return float(np.dot(x, y) / (nx * ny))


def _all_int(fields: list[str]) -> bool:
    try:
        for f in fields:
            int(f)
    except ValueError:
        return False
    return True

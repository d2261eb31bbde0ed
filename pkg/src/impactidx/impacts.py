"""Per-document term impact maps: BM25 baseline and impact-file I/O.

The impact file is the single cross-component contract: JSON lines of
`{"id": ..., "impacts": {term: score}}` with scores written with exactly
three fractional digits and parsed back without rescaling.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from dataclasses import dataclass, field
from decimal import Decimal, ROUND_HALF_UP

from .errors import ConfigError, DataError, ParseError


@dataclass
class DocumentImpacts:
    doc_id: str
    impacts: dict[str, float]


@dataclass
class ImpactCollection:
    documents: list[DocumentImpacts] = field(default_factory=list)

    @property
    def doc_count(self) -> int:
        return len(self.documents)

    @property
    def vocabulary(self) -> set[str]:
        vocab: set[str] = set()
        for doc in self.documents:
            vocab.update(doc.impacts)
        return vocab

    def max_impact(self) -> float:
        """Largest impact over all documents and terms; 0.0 when empty."""
        best = 0.0
        for doc in self.documents:
            for score in doc.impacts.values():
                if score > best:
                    best = score
        return best


@dataclass(frozen=True)
class Bm25Params:
    k1: float = 0.9
    b: float = 0.4

    def __post_init__(self):
        if self.k1 <= 0:
            raise ConfigError(f"k1 must be > 0, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ConfigError(f"b must be in [0, 1], got {self.b}")


def compute_bm25_impacts(corpus, params: Bm25Params = Bm25Params()) -> ImpactCollection:
    """BM25 term impacts with the query-side factor fixed at 1.

    For each unique term t of document d (body and injected tokens count
    alike): idf(t) * tf*(k1+1) / (tf + k1*(1-b+b*|d|/avgdl)) with
    idf(t) = ln(1 + (N-df+0.5)/(df+0.5)). The +1 inside the log keeps
    every impact strictly positive, which the quantizer requires.
    """
    passages = list(corpus)
    if not passages:
        raise ConfigError("cannot compute BM25 impacts over an empty corpus")

    n_docs = len(passages)
    term_freqs = [Counter(p.terms) for p in passages]
    doc_lens = [len(p.terms) for p in passages]
    avgdl = sum(doc_lens) / n_docs
    df: Counter[str] = Counter()
    for tf in term_freqs:
        df.update(tf.keys())

    idf = {t: math.log(1.0 + (n_docs - n + 0.5) / (n + 0.5)) for t, n in df.items()}

    k1, b = params.k1, params.b
    documents = []
    for passage, tf, dl in zip(passages, term_freqs, doc_lens):
        norm = k1 * (1.0 - b + b * dl / avgdl) if dl else k1
        impacts = {
            t: idf[t] * freq * (k1 + 1.0) / (freq + norm)
            for t, freq in tf.items()
        }
        documents.append(DocumentImpacts(passage.doc_id, impacts))
    return ImpactCollection(documents)


def format_score(score: float) -> str:
    """Serialize a score with exactly three fractional digits.

    Rounds half away from zero on the decimal value of the float's
    shortest repr, so 1.2345 -> "1.235" regardless of binary rounding.
    """
    return str(Decimal(repr(score)).quantize(Decimal("0.001"), rounding=ROUND_HALF_UP))


def write_impact_file(collection: ImpactCollection, path) -> None:
    """Write JSON lines; terms whose 3-digit rounding is <= 0 are dropped.

    Numbers are formatted by hand because json.dumps would collapse
    1.250 to 1.25.
    """
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for doc in collection.documents:
            parts = []
            for term, score in doc.impacts.items():
                text = format_score(score)
                if float(text) > 0.0:
                    parts.append(f"{json.dumps(term)}: {text}")
            fh.write(f'{{"id": {json.dumps(doc.doc_id)}, "impacts": {{{", ".join(parts)}}}}}\n')


def _parse_score(token: str) -> float:
    if Decimal(token).as_tuple().exponent < -3:
        raise ValueError(f"score {token} has more than three fractional digits")
    return float(token)


def _reject_duplicate_keys(pairs):
    obj = {}
    for key, value in pairs:
        if key in obj:
            raise ValueError(f"duplicate key {key!r}")
        obj[key] = value
    return obj


def load_impact_file(path) -> ImpactCollection:
    """Parse an impact file exactly as written; no rescaling.

    Raises ParseError (with line number) for malformed lines or duplicate
    terms within one document, DataError for duplicate doc ids or
    non-positive scores.
    """
    documents = []
    seen_ids = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line, parse_float=_parse_score,
                                 object_pairs_hook=_reject_duplicate_keys)
            except (json.JSONDecodeError, ValueError) as exc:
                raise ParseError(str(exc), path=path, line=lineno) from exc
            if not isinstance(obj, dict) or "id" not in obj or "impacts" not in obj:
                raise ParseError("expected object with 'id' and 'impacts'", path=path, line=lineno)
            doc_id = obj["id"]
            impacts = obj["impacts"]
            if not isinstance(doc_id, str) or not doc_id or not isinstance(impacts, dict):
                raise ParseError("'id' must be a non-empty string and 'impacts' an object",
                                 path=path, line=lineno)
            if doc_id in seen_ids:
                raise DataError(f"duplicate doc_id {doc_id!r}")
            seen_ids.add(doc_id)
            clean: dict[str, float] = {}
            for term, score in impacts.items():
                if not isinstance(score, (int, float)):
                    raise ParseError(f"score for term {term!r} is not a number",
                                     path=path, line=lineno)
                score = float(score)
                if score <= 0.0:
                    raise DataError(f"non-positive score {score} for term {term!r} in {doc_id!r}")
                clean[term] = score
            documents.append(DocumentImpacts(doc_id, clean))
    return ImpactCollection(documents)

"""Passages, tokenization, and expansion-term merging.

A passage keeps its original body tokens separate from expansion tokens
that were injected (terms not already present in the body), so downstream
consumers can tell the two regions apart. Expansion terms that already
occur in the body only rewrite term frequencies and are appended to the
body region.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from enum import Enum

from ._porter import porter_stem
from .errors import DataError, ParseError

_WORD_RE = re.compile(r"[^\W_]+", re.UNICODE)


class ExpansionMode(Enum):
    FULL = "full"
    REWRITE = "rewrite"
    INJECT = "inject"
    NONE = "none"


@dataclass(frozen=True)
class TokenizerConfig:
    lowercase: bool = True
    strip_punctuation: bool = True
    stemming: bool = False
    stopwords: frozenset[str] | None = None


DEFAULT_TOKENIZER = TokenizerConfig()


@dataclass
class Passage:
    doc_id: str
    body_terms: list[str]
    injected_terms: list[str] = field(default_factory=list)

    @property
    def terms(self) -> list[str]:
        """Body plus injected tokens, in order."""
        return self.body_terms + self.injected_terms


def tokenize(text: str, config: TokenizerConfig = DEFAULT_TOKENIZER) -> list[str]:
    """Split raw text into normalized tokens. Total and deterministic.

    Order of operations: lowercase, split (on punctuation boundaries or
    plain whitespace), stopword removal, stemming.
    """
    if config.lowercase:
        text = text.lower()
    if config.strip_punctuation:
        tokens = _WORD_RE.findall(text)
    else:
        tokens = text.split()
    if config.stopwords:
        tokens = [t for t in tokens if t not in config.stopwords]
    if config.stemming:
        tokens = [porter_stem(t) for t in tokens]
    return tokens


def classify_expansion_terms(body_terms, expansion_terms):
    """Split expansion terms into (rewrite_terms, inject_terms).

    Rewrite terms already occur in the body; inject terms are new. Order
    and duplicates of the expansion stream are preserved within each class.
    """
    body_set = set(body_terms)
    rewrite = [t for t in expansion_terms if t in body_set]
    inject = [t for t in expansion_terms if t not in body_set]
    return rewrite, inject


def merge_expansion(body_terms, expansion_terms, mode: ExpansionMode):
    """Merge expansion terms into a passage under the given mode.

    Returns (body_terms, injected_terms). Rewrite-class terms are appended
    to the body (raising their frequencies); inject-class terms go to the
    separate injected region so the boundary between original and new
    content survives.
    """
    if mode is ExpansionMode.NONE:
        return list(body_terms), []
    rewrite, inject = classify_expansion_terms(body_terms, expansion_terms)
    if mode is ExpansionMode.FULL:
        return list(body_terms) + rewrite, inject
    if mode is ExpansionMode.REWRITE:
        return list(body_terms) + rewrite, []
    if mode is ExpansionMode.INJECT:
        return list(body_terms), inject
    raise ValueError(f"unhandled expansion mode: {mode!r}")


def read_corpus_tsv(path):
    """Yield (doc_id, text) pairs from a `doc_id<TAB>text` file."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t", 1)
            if len(parts) != 2 or not parts[0]:
                raise ParseError("expected doc_id<TAB>text", path=path, line=lineno)
            yield parts[0], parts[1]


def read_expansion_jsonl(path):
    """Load expansion queries: one JSON object per line with `id` and `queries`.

    All predicted queries of a document are treated as a single
    concatenated expansion stream, so the value is their joined text.
    """
    expansions: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad JSON: {exc}", path=path, line=lineno) from exc
            if not isinstance(obj, dict) or "id" not in obj or "queries" not in obj:
                raise ParseError("expected object with 'id' and 'queries'", path=path, line=lineno)
            queries = obj["queries"]
            if not isinstance(queries, list) or not all(isinstance(q, str) for q in queries):
                raise ParseError("'queries' must be an array of strings", path=path, line=lineno)
            if obj["id"] in expansions:
                raise DataError(f"duplicate expansion entry for doc_id {obj['id']!r}")
            expansions[obj["id"]] = " ".join(queries)
    return expansions


def build_passages(corpus_entries, expansions, mode: ExpansionMode,
                   config: TokenizerConfig = DEFAULT_TOKENIZER) -> list[Passage]:
    """Tokenize raw corpus entries and merge their expansion streams.

    `corpus_entries` is an iterable of (doc_id, raw_text); `expansions`
    maps doc_id to raw expansion text (missing ids mean no expansion).
    Both sides are tokenized with the same config.
    """
    passages = []
    seen = set()
    for doc_id, text in corpus_entries:
        if not doc_id:
            raise DataError("empty doc_id")
        if doc_id in seen:
            raise DataError(f"duplicate doc_id {doc_id!r}")
        seen.add(doc_id)
        body = tokenize(text, config)
        expansion = tokenize(expansions.get(doc_id, ""), config)
        body_terms, injected = merge_expansion(body, expansion, mode)
        passages.append(Passage(doc_id, body_terms, injected))
    return passages


def write_expanded_tsv(passages, path):
    """Write tokenized passages as `doc_id<TAB>body<TAB>injected` (space-joined)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in passages:
            fh.write(f"{p.doc_id}\t{' '.join(p.body_terms)}\t{' '.join(p.injected_terms)}\n")


def read_expanded_tsv(path) -> list[Passage]:
    """Read passages written by :func:`write_expanded_tsv`."""
    passages = []
    seen = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3 or not parts[0]:
                raise ParseError("expected doc_id<TAB>body<TAB>injected", path=path, line=lineno)
            doc_id, body, injected = parts
            if doc_id in seen:
                raise DataError(f"duplicate doc_id {doc_id!r}")
            seen.add(doc_id)
            passages.append(Passage(doc_id, body.split(), injected.split()))
    return passages

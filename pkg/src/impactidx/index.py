"""Impact inverted index: lexicon, compressed postings, doc table.

On-disk layout (all integers little-endian, strings length-prefixed UTF-8):

    header:  magic "IMPX" | version u32 | bits u32 | s_max f64
             | doc_count u64 | term_count u64 | payload crc32 u32
    lexicon: per term (sorted): term | posting_count u32 | max_impact u32
             | offset u64 | byte_len u64   (offset into the postings blob)
    blob:    u64 length, then per-term blocks: doc-ordinal gaps varbyte
             encoded, then posting_count impacts as ceil(bits/8)-byte values
    docs:    doc_count length-prefixed doc ids, ordinal order

Saving the same build twice produces identical bytes.
"""

from __future__ import annotations

import struct
import zlib
from bisect import bisect_left
from typing import NamedTuple

import numpy as np

from .errors import FormatError
from .quantize import LinearQuantizer

MAGIC = b"IMPX"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sIIdQQI")


class Posting(NamedTuple):
    doc_ordinal: int
    impact: int


def vb_encode(values) -> bytes:
    """Variable-byte encode non-negative ints, 7 bits per byte, high bit = more."""
    out = bytearray()
    for value in values:
        while True:
            byte = value & 0x7F
            value >>= 7
            out.append(byte | (0x80 if value else 0))
            if not value:
                break
    return bytes(out)


def vb_decode(buf: bytes, offset: int, count: int):
    """Decode `count` varbyte ints starting at `offset`; returns (values, offset)."""
    values = []
    for _ in range(count):
        value = 0
        shift = 0
        while True:
            if offset >= len(buf):
                raise FormatError("truncated varbyte sequence")
            byte = buf[offset]
            offset += 1
            value |= (byte & 0x7F) << shift
            if not byte & 0x80:
                break
            shift += 7
        values.append(value)
    return values, offset


class PostingsCursor:
    """Forward-only iterator over one term's postings with skip support."""

    def __init__(self, doc_ordinals, impacts):
        self._docs = doc_ordinals
        self._imps = impacts
        self._pos = 0

    def __iter__(self):
        return self

    def __next__(self) -> Posting:
        if self._pos >= len(self._docs):
            raise StopIteration
        p = Posting(int(self._docs[self._pos]), int(self._imps[self._pos]))
        self._pos += 1
        return p

    def next_geq(self, doc_ordinal: int):
        """Advance to the first posting with ordinal >= doc_ordinal.

        Returns that posting, or None when the list is exhausted; the
        cursor never moves backwards.
        """
        i = bisect_left(self._docs, doc_ordinal, lo=self._pos)
        if i >= len(self._docs):
            self._pos = len(self._docs)
            return None
        self._pos = i + 1
        return Posting(int(self._docs[i]), int(self._imps[i]))


class ImpactIndex:
    """Immutable in-memory index over flat postings arrays.

    Per-term postings live in `doc_ords[offsets[s]:offsets[s+1]]` and
    `imps[...]` where s is the term's slot in the sorted lexicon; the flat
    layout is what the query kernels consume directly.
    """

    def __init__(self, bits, s_max, terms, offsets, doc_ords, imps, term_max, doc_table):
        self.bits = bits
        self.s_max = s_max
        self.terms = terms
        self.term_slot = {t: i for i, t in enumerate(terms)}
        self.offsets = offsets
        self.doc_ords = doc_ords
        self.imps = imps
        self.term_max = term_max
        self.doc_table = doc_table

    @property
    def doc_count(self) -> int:
        return len(self.doc_table)

    @property
    def term_count(self) -> int:
        return len(self.terms)

    @property
    def quantizer(self) -> LinearQuantizer:
        return LinearQuantizer(bits=self.bits, s_max=self.s_max)

    def postings(self, term: str) -> PostingsCursor:
        """Cursor over a term's postings; empty for unknown terms."""
        slot = self.term_slot.get(term)
        if slot is None:
            empty = np.empty(0, dtype=np.int32)
            return PostingsCursor(empty, empty)
        lo, hi = int(self.offsets[slot]), int(self.offsets[slot + 1])
        return PostingsCursor(self.doc_ords[lo:hi], self.imps[lo:hi])

    def max_impact(self, term: str) -> int:
        slot = self.term_slot.get(term)
        return int(self.term_max[slot]) if slot is not None else 0


def build(collection, quantizer: LinearQuantizer) -> ImpactIndex:
    """Quantize a collection into an index; ordinals follow collection order.

    Documents without a single surviving term still occupy a doc-table
    slot so ordinals stay aligned with the source collection.
    """
    doc_table = [doc.doc_id for doc in collection.documents]
    per_term: dict[str, list] = {}
    for ordinal, doc in enumerate(collection.documents):
        for term, score in doc.impacts.items():
            per_term.setdefault(term, []).append((ordinal, quantizer.quantize(score)))

    terms = sorted(per_term)
    counts = [len(per_term[t]) for t in terms]
    offsets = np.zeros(len(terms) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum(counts, dtype=np.int64)
    total = int(offsets[-1])
    doc_ords = np.empty(total, dtype=np.int32)
    imps = np.empty(total, dtype=np.int32)
    term_max = np.empty(len(terms), dtype=np.int32)
    for slot, term in enumerate(terms):
        postings = per_term[term]
        lo = int(offsets[slot])
        for i, (ordinal, impact) in enumerate(postings):
            doc_ords[lo + i] = ordinal
            imps[lo + i] = impact
        term_max[slot] = max(impact for _, impact in postings)
    return ImpactIndex(quantizer.bits, quantizer.s_max, terms, offsets,
                       doc_ords, imps, term_max, doc_table)


def _impact_width(bits: int) -> int:
    return (bits + 7) // 8


def save(index: ImpactIndex, path) -> None:
    """Persist to a single file; byte-deterministic for identical builds."""
    width = _impact_width(index.bits)
    lexicon = bytearray()
    blob = bytearray()
    for slot, term in enumerate(index.terms):
        lo, hi = int(index.offsets[slot]), int(index.offsets[slot + 1])
        ords = index.doc_ords[lo:hi]
        gaps = [int(ords[0])] + np.diff(ords).tolist() if len(ords) else []
        block = vb_encode(gaps) + b"".join(
            int(v).to_bytes(width, "little") for v in index.imps[lo:hi]
        )
        encoded = term.encode("utf-8")
        lexicon += struct.pack("<I", len(encoded)) + encoded
        lexicon += struct.pack("<IIQQ", hi - lo, int(index.term_max[slot]),
                               len(blob), len(block))
        blob += block

    docs = bytearray()
    for doc_id in index.doc_table:
        encoded = doc_id.encode("utf-8")
        docs += struct.pack("<I", len(encoded)) + encoded

    payload = bytes(lexicon) + struct.pack("<Q", len(blob)) + bytes(blob) + bytes(docs)
    header = _HEADER.pack(MAGIC, FORMAT_VERSION, index.bits, index.s_max,
                          index.doc_count, index.term_count,
                          zlib.crc32(payload))
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(payload)
    except OSError as exc:
        raise OSError(f"cannot write index to {path}: {exc}") from exc


class _Reader:
    """Bounds-checked byte reader; truncation surfaces as FormatError."""

    def __init__(self, buf: bytes, offset: int = 0):
        self.buf = buf
        self.offset = offset

    def take(self, n: int) -> bytes:
        if self.offset + n > len(self.buf):
            raise FormatError("truncated index file")
        out = self.buf[self.offset:self.offset + n]
        self.offset += n
        return out

    def unpack(self, fmt: str):
        s = struct.Struct(fmt)
        return s.unpack(self.take(s.size))

    def string(self) -> str:
        (length,) = self.unpack("<I")
        return self.take(length).decode("utf-8")


def load(path) -> ImpactIndex:
    """Load an index written by :func:`save`; observationally identical."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read index from {path}: {exc}") from exc

    if len(data) < _HEADER.size:
        raise FormatError("truncated index file (no header)")
    magic, version, bits, s_max, doc_count, term_count, crc = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported index format version {version}, "
                          f"this build reads version {FORMAT_VERSION}")
    payload = data[_HEADER.size:]
    if zlib.crc32(payload) != crc:
        raise FormatError("checksum mismatch, index file is corrupt")

    reader = _Reader(data, _HEADER.size)
    width = _impact_width(bits)
    terms = []
    entries = []
    for _ in range(term_count):
        term = reader.string()
        count, max_imp, off, length = reader.unpack("<IIQQ")
        terms.append(term)
        entries.append((count, max_imp, off, length))

    (blob_len,) = reader.unpack("<Q")
    blob = reader.take(blob_len)

    offsets = np.zeros(len(terms) + 1, dtype=np.int64)
    offsets[1:] = np.cumsum([e[0] for e in entries], dtype=np.int64)
    total = int(offsets[-1])
    doc_ords = np.empty(total, dtype=np.int32)
    imps = np.empty(total, dtype=np.int32)
    term_max = np.empty(len(terms), dtype=np.int32)
    for slot, (count, max_imp, off, length) in enumerate(entries):
        if off + length > len(blob):
            raise FormatError("postings block out of range")
        gaps, pos = vb_decode(blob, off, count)
        lo = int(offsets[slot])
        ordinal = 0
        for i, gap in enumerate(gaps):
            ordinal = gap if i == 0 else ordinal + gap
            doc_ords[lo + i] = ordinal
        for i in range(count):
            imps[lo + i] = int.from_bytes(blob[pos:pos + width], "little")
            pos += width
        if pos != off + length:
            raise FormatError(f"postings block for term {terms[slot]!r} has trailing bytes")
        term_max[slot] = max_imp

    doc_table = [reader.string() for _ in range(doc_count)]
    if reader.offset != len(data):
        raise FormatError("trailing bytes after doc table")
    return ImpactIndex(bits, s_max, terms, offsets, doc_ords, imps, term_max, doc_table)

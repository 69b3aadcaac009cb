"""Corpus ingestion, the immutable searchable index, and EIC snippets.

Documents arrive as JSONL records carrying raw text, optional keyphrase
annotations and optional entity annotations. Ingestion tokenizes the text,
canonicalizes keyphrases and builds postings; the resulting index is frozen
and safe to share across threads.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .errors import (
    CorpusParseError,
    DuplicateDocumentError,
    UnknownDocumentError,
    ValidationError,
)

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)

DEFAULT_SNIPPET_WINDOW = 25


def tokenize(text: str) -> list[str]:
    """Split on whitespace/punctuation, keeping original case."""
    return _TOKEN_RE.findall(text)


def canonicalize(keyphrase: str) -> str:
    """Lowercase and collapse internal whitespace. No stemming."""
    return " ".join(keyphrase.lower().split())


def fallback_extract_keyphrases(tokens: list[str]) -> dict[str, int]:
    """Extract keyphrases from capitalized token runs when no annotations exist.

    Maximal runs of capitalized tokens become phrases; a run splits where a
    token repeats its predecessor (a repeated mention is two occurrences, not
    one longer phrase) and is chunked to at most 4 tokens.
    """
    phrases: Counter[str] = Counter()
    run: list[str] = []

    def flush() -> None:
        for start in range(0, len(run), 4):
            chunk = run[start : start + 4]
            if chunk:
                phrases[" ".join(t.lower() for t in chunk)] += 1
        run.clear()

    for tok in tokens:
        if tok[:1].isupper():
            if run and tok.lower() == run[-1].lower():
                flush()
            run.append(tok)
        else:
            flush()
    flush()
    return dict(phrases)


@dataclass(frozen=True)
class Document:
    """One judgeable unit: tokens plus keyphrase and entity annotations."""

    doc_id: str
    tokens: tuple[str, ...]
    keyphrases: dict[str, int]
    entities: tuple[tuple[str, str, int], ...] = ()

    def validate(self) -> None:
        if not self.tokens:
            raise ValidationError(f"document {self.doc_id!r} has no tokens")
        for kp, count in self.keyphrases.items():
            if kp != canonicalize(kp):
                raise ValidationError(f"keyphrase {kp!r} is not canonical")
            if count < 1:
                raise ValidationError(f"keyphrase {kp!r} has count {count}")
        for _eid, _mention, offset in self.entities:
            if not 0 <= offset < len(self.tokens):
                raise ValidationError(
                    f"entity offset {offset} outside document {self.doc_id!r}"
                )

    def entity_ids(self) -> set[str]:
        return {eid for eid, _m, _o in self.entities}


@dataclass(frozen=True)
class EicSnippet:
    """A name match in context, with the keyphrases visible in the window."""

    doc_id: str
    window_text: str
    mention: str
    highlighted_keyphrases: list[str]


@dataclass
class CorpusIndex:
    """Immutable searchable view over a document collection.

    Postings are derivable from ``documents``; phrase-level statistics are
    memoized lazily (set-once caches, safe under concurrent readers).
    """

    documents: dict[str, Document] = field(default_factory=dict)
    term_postings: dict[str, dict[str, int]] = field(default_factory=dict)
    keyphrase_postings: dict[str, set[str]] = field(default_factory=dict)
    entity_postings: dict[str, set[str]] = field(default_factory=dict)
    total_tokens: int = 0
    collection_tf: dict[str, int] = field(default_factory=dict)
    _phrase_cache: dict[str, dict[str, int]] = field(default_factory=dict, repr=False)

    def add(self, doc: Document) -> None:
        doc.validate()
        if doc.doc_id in self.documents:
            raise DuplicateDocumentError(f"duplicate doc_id {doc.doc_id!r}")
        self.documents[doc.doc_id] = doc
        counts = Counter(doc.tokens)
        for term, tf in counts.items():
            self.term_postings.setdefault(term, {})[doc.doc_id] = tf
            self.collection_tf[term] = self.collection_tf.get(term, 0) + tf
        for kp in doc.keyphrases:
            self.keyphrase_postings.setdefault(kp, set()).add(doc.doc_id)
        for eid in doc.entity_ids():
            self.entity_postings.setdefault(eid, set()).add(doc.doc_id)
        self.total_tokens += len(doc.tokens)

    def get(self, doc_id: str) -> Document:
        try:
            return self.documents[doc_id]
        except KeyError:
            raise UnknownDocumentError(f"unknown doc_id {doc_id!r}") from None

    def doc_length(self, doc_id: str) -> int:
        return len(self.get(doc_id).tokens)

    def phrase_occurrences(self, phrase: str) -> dict[str, int]:
        """doc_id -> count of contiguous token-sequence matches of ``phrase``.

        Single tokens come straight from term postings; multi-token phrases
        scan only the docs in the rarest token's postings.
        """
        cached = self._phrase_cache.get(phrase)
        if cached is not None:
            return cached
        words = phrase.split()
        if not words:
            result: dict[str, int] = {}
        elif len(words) == 1:
            result = dict(self.term_postings.get(words[0], {}))
        else:
            postings = [self.term_postings.get(w, {}) for w in words]
            if any(not p for p in postings):
                result = {}
            else:
                candidates = min(postings, key=len)
                result = {}
                for doc_id in candidates:
                    if all(doc_id in p for p in postings):
                        count = _count_seq(self.documents[doc_id].tokens, words)
                        if count:
                            result[doc_id] = count
        self._phrase_cache[phrase] = result
        return result

    def phrase_collection_freq(self, phrase: str) -> int:
        return sum(self.phrase_occurrences(phrase).values())

    def matching_docs(self, phrase: str) -> set[str]:
        """Docs containing ``phrase`` as a token n-gram or keyphrase annotation."""
        docs = set(self.phrase_occurrences(phrase))
        docs |= self.keyphrase_postings.get(phrase, set())
        return docs

    def stats(self) -> dict[str, int]:
        return {
            "documents": len(self.documents),
            "total_tokens": self.total_tokens,
            "terms": len(self.term_postings),
            "keyphrases": len(self.keyphrase_postings),
            "entities": len(self.entity_postings),
        }


def _count_seq(tokens: tuple[str, ...], words: list[str]) -> int:
    n = len(words)
    first = words[0]
    count = 0
    for i in range(len(tokens) - n + 1):
        if tokens[i] == first and list(tokens[i : i + n]) == words:
            count += 1
    return count


def document_from_record(record: dict, line_no: int = 0) -> Document:
    """Build a Document from one external JSONL record."""
    try:
        doc_id = record["id"]
        text = record["text"]
    except KeyError as exc:
        raise CorpusParseError(line_no, f"missing field {exc}") from None
    if not isinstance(doc_id, str) or not doc_id:
        raise CorpusParseError(line_no, "id must be a non-empty string")
    original = tokenize(text)
    tokens = tuple(t.lower() for t in original)
    if not tokens:
        raise CorpusParseError(line_no, f"document {doc_id!r} has no tokens")

    raw_kps = record.get("keyphrases")
    keyphrases: dict[str, int] = {}
    if raw_kps:
        for item in raw_kps:
            kp = canonicalize(item["text"])
            if not kp:
                raise CorpusParseError(line_no, "empty keyphrase")
            count = int(item.get("count", 1))
            if count < 1:
                raise CorpusParseError(line_no, f"keyphrase {kp!r} count < 1")
            keyphrases[kp] = keyphrases.get(kp, 0) + count
    else:
        keyphrases = fallback_extract_keyphrases(original)
        for eid_rec in record.get("entities", []) or []:
            span = canonicalize(eid_rec.get("mention", ""))
            if span:
                keyphrases[span] = keyphrases.get(span, 0) + 1

    entities = []
    for ent in record.get("entities", []) or []:
        try:
            entities.append((str(ent["id"]), str(ent["mention"]), int(ent["offset"])))
        except (KeyError, TypeError, ValueError):
            raise CorpusParseError(line_no, "malformed entity annotation") from None

    doc = Document(doc_id=doc_id, tokens=tokens, keyphrases=keyphrases, entities=tuple(entities))
    try:
        doc.validate()
    except ValidationError as exc:
        raise CorpusParseError(line_no, str(exc)) from None
    return doc


def ingest_corpus(path: str | Path) -> CorpusIndex:
    """Read a JSONL corpus file into a fresh index.

    Rejects malformed lines (with line numbers), duplicate doc ids and
    exact-token-stream duplicates.
    """
    index = CorpusIndex()
    seen_texts: dict[tuple[str, ...], str] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusParseError(line_no, f"invalid JSON: {exc.msg}") from None
            doc = document_from_record(record, line_no)
            if doc.tokens in seen_texts:
                raise DuplicateDocumentError(
                    f"doc {doc.doc_id!r} duplicates text of {seen_texts[doc.tokens]!r}"
                )
            seen_texts[doc.tokens] = doc.doc_id
            index.add(doc)
    return index


def save_index(index: CorpusIndex, out_dir: str | Path) -> None:
    """Persist normalized documents plus stats; postings rebuild on load."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "documents.jsonl", "w", encoding="utf-8") as fh:
        for doc_id in sorted(index.documents):
            doc = index.documents[doc_id]
            fh.write(
                json.dumps(
                    {
                        "id": doc.doc_id,
                        "tokens": list(doc.tokens),
                        "keyphrases": doc.keyphrases,
                        "entities": [list(e) for e in doc.entities],
                    },
                    sort_keys=True,
                )
                + "\n"
            )
    with open(out / "meta.json", "w", encoding="utf-8") as fh:
        json.dump(index.stats(), fh, sort_keys=True, indent=2)


def load_index(index_dir: str | Path) -> CorpusIndex:
    index = CorpusIndex()
    with open(Path(index_dir) / "documents.jsonl", encoding="utf-8") as fh:
        for line in fh:
            rec = json.loads(line)
            index.add(
                Document(
                    doc_id=rec["id"],
                    tokens=tuple(rec["tokens"]),
                    keyphrases=dict(rec["keyphrases"]),
                    entities=tuple(tuple(e) for e in rec["entities"]),
                )
            )
    return index


def make_snippets(
    index: CorpusIndex,
    doc_id: str,
    names: list[str],
    window: int = DEFAULT_SNIPPET_WINDOW,
) -> list[EicSnippet]:
    """One snippet per name match, merged when windows overlap."""
    if window < 1:
        raise ValidationError("window must be >= 1")
    doc = index.get(doc_id)
    tokens = doc.tokens
    matches: list[tuple[int, int, str]] = []
    for name in names:
        words = canonicalize(name).split()
        if not words:
            continue
        n = len(words)
        for i in range(len(tokens) - n + 1):
            if list(tokens[i : i + n]) == words:
                matches.append((i, i + n, name))
    matches.sort()
    if not matches:
        return []

    # merge overlapping [start-window, end+window) intervals
    merged: list[list] = []
    for start, end, name in matches:
        lo = max(0, start - window)
        hi = min(len(tokens), end + window)
        if merged and lo <= merged[-1][1]:
            merged[-1][1] = max(merged[-1][1], hi)
        else:
            merged.append([lo, hi, name])

    snippets = []
    for lo, hi, name in merged:
        slice_tokens = tokens[lo:hi]
        text = " ".join(slice_tokens)
        highlighted = sorted(
            kp for kp in doc.keyphrases if _count_seq(slice_tokens, kp.split()) > 0
        )
        snippets.append(
            EicSnippet(
                doc_id=doc_id,
                window_text=text,
                mention=name,
                highlighted_keyphrases=highlighted,
            )
        )
    return snippets


def cooccurrence_histogram(index: CorpusIndex, workload) -> dict[int, float]:
    """Distribution of per-document relevant-keyphrase co-occurrence counts.

    For every ground-truth-relevant document of every workload entry, counts
    |K_d ∩ K_e|; returns bucket -> fraction of counted documents.
    """
    buckets: Counter[int] = Counter()
    total = 0
    for entry in workload:
        truth = entry.truth if hasattr(entry, "truth") else entry
        k_e = set(truth.relevant_keyphrases)
        for doc_id in truth.relevant_docs:
            if doc_id not in index.documents:
                continue
            n = len(k_e & set(index.documents[doc_id].keyphrases))
            buckets[n] += 1
            total += 1
    if not total:
        return {}
    return {n: count / total for n, count in sorted(buckets.items())}

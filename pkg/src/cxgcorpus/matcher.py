"""Match the construction inventory against annotated sentences.

The engine is an inverted index keyed by each construction's globally
rarest slot facet: a sentence only pays for the constructions whose
rarest facet it actually contains, so lookup cost for absent facets is
independent of inventory size. Candidate constructions are then verified
with an in-order alignment that allows up to max_gap skipped tokens
between consecutive slots (never before the first or after the last).

brute_force_match is the deliberately naive reference implementation
used as the correctness oracle; it shares no matching code with the
indexed path.
"""

from __future__ import annotations

import logging
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass
from multiprocessing import get_context
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import FacetMissingError, ParseError
from .ingest import AnnotatedSentence
from .inventory import Inventory

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MatchSpan:
    cxg_id: int
    start: int
    end: int  # exclusive
    gaps_used: int


class MatchIndex:
    """Immutable rarest-slot inverted index over an inventory.

    entries maps a slot facet (kind, value) to the (cxg_id, slot_offset)
    pairs anchored on it; every construction appears exactly once, under
    its rarest facet (rarity measured by inventory-wide facet counts,
    ties broken by the leftmost slot).
    """

    def __init__(self, inventory: Inventory):
        facet_counts: Counter = Counter()
        for con in inventory:
            for slot in con.slots:
                facet_counts[slot.facet] += 1

        # Dense integer ids for every facet any slot uses; tokens are
        # translated once per sentence and matching works on ints.
        self._facet_ids: dict[tuple[str, str], int] = {}
        for con in inventory:
            for slot in con.slots:
                if slot.facet not in self._facet_ids:
                    self._facet_ids[slot.facet] = len(self._facet_ids)

        self.entries: dict[tuple[str, str], list[tuple[int, int]]] = {}
        self._anchor: dict[int, list[int]] = {}
        self._slots: dict[int, tuple[int, ...]] = {}
        self._slot_sets: dict[int, frozenset[int]] = {}
        for con in inventory:
            offset = min(
                range(len(con.slots)),
                key=lambda i: (facet_counts[con.slots[i].facet], i),
            )
            facet = con.slots[offset].facet
            self.entries.setdefault(facet, []).append((con.cxg_id, offset))
            self._anchor.setdefault(self._facet_ids[facet], []).append(con.cxg_id)
            fids = tuple(self._facet_ids[s.facet] for s in con.slots)
            self._slots[con.cxg_id] = fids
            self._slot_sets[con.cxg_id] = frozenset(fids)

        self.uses_sem = inventory.uses_sem
        self.cxg_ids = sorted(self._slots)
        self.size = len(self.cxg_ids)

    def token_facet_ids(self, sentence: AnnotatedSentence) -> list[frozenset[int]]:
        """Per-token sets of inventory-relevant facet ids."""
        get = self._facet_ids.get
        out = []
        for tok in sentence.tokens:
            fids = []
            f = get(("LEX", tok.form))
            if f is not None:
                fids.append(f)
            f = get(("POS", tok.pos))
            if f is not None:
                fids.append(f)
            if tok.sem is not None:
                f = get(("SEM", str(tok.sem)))
                if f is not None:
                    fids.append(f)
            out.append(frozenset(fids))
        return out


def _check_facets(uses_sem: bool, sentence: AnnotatedSentence) -> None:
    if uses_sem and all(t.sem is None for t in sentence.tokens):
        raise FacetMissingError(
            f"sentence {sentence.sentence_id} carries no SEM annotations "
            "but the inventory uses SEM slots"
        )


def _find_span(
    slots: tuple[int, ...], tok_fids: list[frozenset[int]], max_gap: int
) -> tuple[int, int, int] | None:
    """Leftmost-start, then gap-minimal alignment of slots to tokens.

    Scans start positions in order; at each start a frontier of
    reachable positions is advanced one slot at a time, so the first
    successful start is leftmost and min(frontier) gives the minimal
    total gap there.
    """
    n = len(tok_fids)
    k = len(slots)
    s0 = slots[0]
    for start in range(n - k + 1):
        if s0 not in tok_fids[start]:
            continue
        frontier: Sequence[int] = (start,)
        for si in range(1, k):
            s = slots[si]
            nxt: list[int] = []
            for p in frontier:
                hi = p + 2 + max_gap
                if hi > n:
                    hi = n
                for q in range(p + 1, hi):
                    if s in tok_fids[q] and q not in nxt:
                        nxt.append(q)
            if not nxt:
                frontier = ()
                break
            frontier = nxt
        if frontier:
            last = min(frontier)
            return start, last + 1, last - start - (k - 1)
    return None


def build_index(inventory: Inventory) -> MatchIndex:
    return MatchIndex(inventory)


def match_sentence(
    index: MatchIndex, sentence: AnnotatedSentence, max_gap: int = 1
) -> list[MatchSpan]:
    """All constructions the sentence instantiates, one span each.

    The reported span is the leftmost one, with minimal total gaps among
    alignments at that start.
    """
    _check_facets(index.uses_sem, sentence)
    tok_fids = index.token_facet_ids(sentence)
    anchor = index._anchor
    candidates: set[int] = set()
    sent_facets: set[int] = set()
    for fids in tok_fids:
        for f in fids:
            sent_facets.add(f)
            hits = anchor.get(f)
            if hits is not None:
                candidates.update(hits)
    spans = []
    slot_sets = index._slot_sets
    slot_seqs = index._slots
    for cid in sorted(candidates):
        if not slot_sets[cid] <= sent_facets:
            continue
        found = _find_span(slot_seqs[cid], tok_fids, max_gap)
        if found is not None:
            spans.append(MatchSpan(cid, *found))
    return spans


def brute_force_match(
    inventory: Inventory, sentence: AnnotatedSentence, max_gap: int = 1
) -> list[MatchSpan]:
    """Reference matcher: direct recursion over slots and gaps at every
    start position, for every construction. Oracle for match_sentence.
    """
    _check_facets(inventory.uses_sem, sentence)
    tokens = sentence.tokens
    n = len(tokens)

    def satisfies(slot, tok) -> bool:
        if slot.kind == "LEX":
            return tok.form == slot.value
        if slot.kind == "POS":
            return tok.pos == slot.value
        return tok.sem is not None and str(tok.sem) == slot.value

    def ends(slots, i: int, pos: int) -> list[int]:
        if pos >= n or not satisfies(slots[i], tokens[pos]):
            return []
        if i == len(slots) - 1:
            return [pos]
        collected = []
        for q in range(pos + 1, min(pos + 2 + max_gap, n)):
            collected.extend(ends(slots, i + 1, q))
        return collected

    spans = []
    for con in sorted(inventory, key=lambda c: c.cxg_id):
        for start in range(n):
            finals = ends(con.slots, 0, start)
            if finals:
                last = min(finals)
                spans.append(
                    MatchSpan(con.cxg_id, start, last + 1, last - start - (len(con.slots) - 1))
                )
                break
    return spans


class OccurrenceTable:
    """Bidirectional construction <-> sentence membership mapping.

    forward maps cxg_id to the sorted sentence ids instantiating it
    (zero-frequency inventory entries keep an empty list); reverse is
    the exact transpose; discarded lists sentences matching nothing.
    """

    def __init__(
        self,
        forward: dict[int, list[int]],
        reverse: dict[int, list[int]] | None = None,
        discarded: list[int] | None = None,
    ):
        self.forward = forward
        if reverse is None:
            reverse = {}
            for cid in sorted(forward):
                for sid in forward[cid]:
                    reverse.setdefault(sid, []).append(cid)
            reverse = {sid: sorted(cids) for sid, cids in sorted(reverse.items())}
        self.reverse = reverse
        self.discarded = list(discarded or [])

    @property
    def sentence_ids(self) -> list[int]:
        return sorted(self.reverse)

    def freq(self, cxg_id: int) -> int:
        return len(self.forward[cxg_id])

    def frequencies(self) -> dict[int, int]:
        return {cid: len(sids) for cid, sids in self.forward.items()}

    def instances(self, cxg_id: int) -> list[int]:
        return self.forward[cxg_id]

    def constructions_of(self, sentence_id: int) -> list[int]:
        return self.reverse.get(sentence_id, [])

    def is_transpose_consistent(self) -> bool:
        n_fwd = sum(len(v) for v in self.forward.values())
        n_rev = sum(len(v) for v in self.reverse.values())
        if n_fwd != n_rev:
            return False
        for sid, cids in self.reverse.items():
            for cid in cids:
                fwd = self.forward.get(cid)
                if fwd is None:
                    return False
                i = bisect_left(fwd, sid)
                if i >= len(fwd) or fwd[i] != sid:
                    return False
        return True

    def write(self, table_path: str | Path, discards_path: str | Path | None = None) -> None:
        with open(table_path, "w", encoding="utf-8") as fh:
            for cid in sorted(self.forward):
                fh.write(f"{cid}\t{' '.join(str(s) for s in self.forward[cid])}\n")
        if discards_path is not None:
            with open(discards_path, "w", encoding="utf-8") as fh:
                for sid in self.discarded:
                    fh.write(f"{sid}\n")

    @classmethod
    def read(
        cls, table_path: str | Path, discards_path: str | Path | None = None
    ) -> "OccurrenceTable":
        forward: dict[int, list[int]] = {}
        with open(table_path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, 1):
                line = line.rstrip("\n")
                if not line:
                    continue
                cid_field, sep, rest = line.partition("\t")
                if not sep:
                    raise ParseError(f"{table_path}:{lineno}: expected cxg_id<TAB>ids")
                try:
                    cid = int(cid_field)
                    sids = [int(s) for s in rest.split()] if rest else []
                except ValueError:
                    raise ParseError(f"{table_path}:{lineno}: non-integer id")
                if cid in forward:
                    raise ParseError(f"{table_path}:{lineno}: duplicate cxg_id {cid}")
                forward[cid] = sids
        discarded = []
        if discards_path is not None and Path(discards_path).exists():
            with open(discards_path, encoding="utf-8") as fh:
                discarded = [int(line) for line in fh if line.strip()]
        return cls(forward, discarded=discarded)


_POOL_STATE: tuple[MatchIndex, int] | None = None


def _pool_init(index: MatchIndex, max_gap: int) -> None:
    global _POOL_STATE
    _POOL_STATE = (index, max_gap)


def _pool_match(chunk: list[AnnotatedSentence]) -> list[tuple[int, list[int]]]:
    index, max_gap = _POOL_STATE  # type: ignore[misc]
    return [
        (s.sentence_id, [m.cxg_id for m in match_sentence(index, s, max_gap)])
        for s in chunk
    ]


def _chunks(items: Iterable, size: int) -> Iterator[list]:
    chunk: list = []
    for item in items:
        chunk.append(item)
        if len(chunk) >= size:
            yield chunk
            chunk = []
    if chunk:
        yield chunk


def match_corpus(
    index: MatchIndex,
    corpus: Iterable[AnnotatedSentence],
    max_gap: int = 1,
    jobs: int = 1,
    chunk_size: int = 512,
) -> OccurrenceTable:
    """Match a whole corpus, producing the occurrence table.

    Sentences are processed independently and merged in corpus order, so
    the result does not depend on the worker count.
    """
    forward: dict[int, list[int]] = {cid: [] for cid in index.cxg_ids}
    reverse: dict[int, list[int]] = {}
    discarded: list[int] = []

    if jobs <= 1:
        results: Iterable[tuple[int, list[int]]] = (
            (s.sentence_id, [m.cxg_id for m in match_sentence(index, s, max_gap)])
            for s in corpus
        )
        for sid, cids in results:
            if cids:
                for cid in cids:
                    forward[cid].append(sid)
                reverse[sid] = cids
            else:
                discarded.append(sid)
    else:
        ctx = get_context()
        with ctx.Pool(jobs, initializer=_pool_init, initargs=(index, max_gap)) as pool:
            for chunk_result in pool.imap(_pool_match, _chunks(corpus, chunk_size)):
                for sid, cids in chunk_result:
                    if cids:
                        for cid in cids:
                            forward[cid].append(sid)
                        reverse[sid] = cids
                    else:
                        discarded.append(sid)
    matched = len(reverse)
    logger.info(
        "matched corpus: %d sentences instantiate >=1 construction, %d discarded",
        matched, len(discarded),
    )
    return OccurrenceTable(forward, reverse, discarded)


@dataclass(frozen=True)
class BandCount:
    lo: int
    hi: int | None  # None = unbounded
    count: int


@dataclass
class OccurrenceStats:
    bands: list[BandCount]
    below_min: int  # constructions with freq below the first edge
    histogram: dict[int, int]  # frequency -> number of constructions

    @property
    def total_in_bands(self) -> int:
        return sum(b.count for b in self.bands)


def bands_from_edges(band_edges: Sequence[int]) -> list[tuple[int, int | None]]:
    """Non-overlapping inclusive bands from increasing edges.

    Edges [2, 50, 100] give [2, 50], [51, 100], [101, None]: the first
    band is closed at both edges, later bands start one past the
    previous edge, and a final unbounded band is always appended.
    """
    edges = list(band_edges)
    if len(edges) < 1 or any(b <= a for a, b in zip(edges, edges[1:])):
        raise ParseError(f"band edges must be strictly increasing, got {edges}")
    bands: list[tuple[int, int | None]] = []
    for i in range(len(edges) - 1):
        lo = edges[i] if i == 0 else edges[i] + 1
        bands.append((lo, edges[i + 1]))
    bands.append((edges[-1] + 1 if len(edges) > 1 else edges[-1], None))
    return bands


def occurrence_stats(
    table: OccurrenceTable, band_edges: Sequence[int] = (2, 10000)
) -> OccurrenceStats:
    """Histogram of construction frequencies plus per-band counts."""
    bands = bands_from_edges(band_edges)
    freqs = list(table.frequencies().values())
    histogram = dict(sorted(Counter(freqs).items()))
    counts = []
    for lo, hi in bands:
        c = sum(1 for f in freqs if f >= lo and (hi is None or f <= hi))
        counts.append(BandCount(lo, hi, c))
    below = sum(1 for f in freqs if f < band_edges[0])
    return OccurrenceStats(counts, below, histogram)


def write_stats(stats: OccurrenceStats, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for band in stats.bands:
            hi = "inf" if band.hi is None else str(band.hi)
            fh.write(f"{band.lo}\t{hi}\t{band.count}\n")

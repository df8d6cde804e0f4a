"""The construction inventory: slot-constraint sequences, their file
format, and a minimal frequency/association induction procedure.

A construction is an ordered sequence of at least two slot constraints,
each requiring an exact surface form (LEX), a POS tag (POS), or a
semantic cluster id (SEM). Inventories are normally loaded from a file;
induction exists so the pipeline is usable end to end without one.
"""

from __future__ import annotations

import itertools
import logging
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import ParseError
from .ingest import UNIVERSAL_TAGS, AnnotatedSentence

logger = logging.getLogger(__name__)

KINDS = ("LEX", "POS", "SEM")


@dataclass(frozen=True)
class SlotConstraint:
    kind: str  # LEX | POS | SEM
    value: str

    @property
    def facet(self) -> tuple[str, str]:
        return (self.kind, self.value)

    def render(self) -> str:
        if self.kind == "LEX":
            return self.value
        if self.kind == "POS":
            return self.value
        return f"SEM{self.value}"

    def spec(self) -> str:
        return f"{self.kind.lower()}:{self.value}"


@dataclass(frozen=True)
class Construction:
    cxg_id: int
    slots: tuple[SlotConstraint, ...]

    @property
    def name(self) -> str:
        return render_name(self)

    def spec_line(self) -> str:
        return f"{self.cxg_id}\t" + " ".join(s.spec() for s in self.slots)


def render_name(construction: Construction) -> str:
    """Human-readable rendering: slots joined with ' + '."""
    return " + ".join(s.render() for s in construction.slots)


@dataclass
class Inventory:
    constructions: list[Construction]
    source: str = ""
    by_id: dict[int, Construction] = field(init=False, repr=False)

    def __post_init__(self):
        self.by_id = {}
        seen_slots: dict[tuple, int] = {}
        for con in self.constructions:
            if con.cxg_id in self.by_id:
                raise ParseError(f"duplicate cxg_id {con.cxg_id}")
            dup = seen_slots.get(con.slots)
            if dup is not None:
                raise ParseError(
                    f"constructions {dup} and {con.cxg_id} have identical slot sequences"
                )
            seen_slots[con.slots] = con.cxg_id
            self.by_id[con.cxg_id] = con

    def __len__(self) -> int:
        return len(self.constructions)

    def __iter__(self):
        return iter(self.constructions)

    @property
    def uses_sem(self) -> bool:
        return any(s.kind == "SEM" for c in self.constructions for s in c.slots)


def parse_construction_spec(
    line: str, tagset: Sequence[str] = UNIVERSAL_TAGS
) -> Construction:
    """Parse one `<id><TAB>slot slot ...` line.

    Slots are `lex:<form>`, `pos:<TAG>` or `sem:<int>`; errors report the
    column (1-based character position) of the offending slot.
    """
    line = line.rstrip("\n")
    head, sep, rest = line.partition("\t")
    if not sep:
        raise ParseError("construction spec needs <id><TAB><slots>")
    try:
        cxg_id = int(head)
    except ValueError:
        raise ParseError(f"bad construction id {head!r}")
    tags = frozenset(tagset)
    slots = []
    col = len(head) + 2  # 1-based column of the first slot character
    for piece in rest.split(" "):
        if piece:
            kind, sep2, value = piece.partition(":")
            if not sep2 or not value:
                raise ParseError(f"column {col}: slot {piece!r} is not kind:value")
            if kind == "lex":
                slots.append(SlotConstraint("LEX", value))
            elif kind == "pos":
                if value not in tags:
                    raise ParseError(f"column {col}: unknown POS tag {value!r}")
                slots.append(SlotConstraint("POS", value))
            elif kind == "sem":
                if not value.isdigit():
                    raise ParseError(f"column {col}: sem id {value!r} is not an integer")
                slots.append(SlotConstraint("SEM", str(int(value))))
            else:
                raise ParseError(f"column {col}: unknown slot prefix {kind!r}")
        col += len(piece) + 1
    if len(slots) < 2:
        raise ParseError(f"construction {cxg_id} has {len(slots)} slot(s); minimum is 2")
    return Construction(cxg_id, tuple(slots))


def load_inventory(
    path: str | Path, tagset: Sequence[str] = UNIVERSAL_TAGS
) -> Inventory:
    """Load an inventory file, rejecting malformed lines and duplicates."""
    constructions = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                constructions.append(parse_construction_spec(line, tagset))
            except ParseError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}") from exc
    inv = Inventory(constructions, source=str(path))
    logger.info("loaded %d constructions from %s", len(inv), path)
    return inv


def write_inventory(inventory: Inventory, path: str | Path) -> None:
    """Write spec lines sorted by cxg_id (load ∘ write is an identity)."""
    with open(path, "w", encoding="utf-8") as fh:
        for con in sorted(inventory.constructions, key=lambda c: c.cxg_id):
            fh.write(con.spec_line() + "\n")


@dataclass
class InductionParams:
    max_len: int = 4
    min_support: int = 5
    min_assoc: float = 0.1
    max_inventory: int = 10000

    def __post_init__(self):
        if self.max_len < 2:
            raise ParseError("max_len must be >= 2")
        if self.min_support < 2:
            raise ParseError("min_support must be >= 2")
        if self.max_inventory <= 0:
            raise ParseError("max_inventory must be positive")


def _token_facets(token) -> list[tuple[str, str]]:
    facets = [("LEX", token.form), ("POS", token.pos)]
    if token.sem is not None:
        facets.append(("SEM", str(token.sem)))
    return facets


def induce_inventory(
    corpus: Iterable[AnnotatedSentence], params: InductionParams
) -> Inventory:
    """Minimal association-based induction.

    Candidates are every choice of one facet per token over contiguous
    windows of length 2..max_len. Support is counted per sentence (a
    candidate occurring twice in one sentence counts once). Surviving
    candidates are scored by the mean directional association of their
    adjacent slot pairs,

        dP(a -> b) = P(b at i+1 | a at i) - P(b at i+1 | not a at i),

    estimated over all adjacent token positions in the corpus. A
    candidate is dropped when its sentence set is covered by a kept
    candidate of equal or higher score; the result is truncated to
    max_inventory by score, then length, then name.

    Deterministic: no randomness anywhere.
    """
    sentences = list(corpus)

    support: Counter = Counter()          # candidate -> sentence count
    match_sets: dict[tuple, set[int]] = {}
    left: Counter = Counter()             # facet at position i of an adjacent pair
    right: Counter = Counter()            # facet at position i+1
    pair: Counter = Counter()             # (facet_i, facet_i+1)
    total_pairs = 0

    for sent in sentences:
        toks = sent.tokens
        facets = [_token_facets(t) for t in toks]
        n = len(toks)
        for i in range(n - 1):
            total_pairs += 1
            for fa in facets[i]:
                left[fa] += 1
            for fb in facets[i + 1]:
                right[fb] += 1
            for fa in facets[i]:
                for fb in facets[i + 1]:
                    pair[(fa, fb)] += 1
        seen_here = set()
        for length in range(2, params.max_len + 1):
            for start in range(n - length + 1):
                for combo in itertools.product(*facets[start : start + length]):
                    seen_here.add(combo)
        for combo in seen_here:
            support[combo] += 1
            match_sets.setdefault(combo, set()).add(sent.sentence_id)

    candidates = [c for c, s in support.items() if s >= params.min_support]

    def delta_p(fa: tuple[str, str], fb: tuple[str, str]) -> float:
        a = left[fa]
        ab = pair[(fa, fb)]
        b = right[fb]
        if a == 0:
            return 0.0
        p_given = ab / a
        rest = total_pairs - a
        p_other = (b - ab) / rest if rest > 0 else 0.0
        return p_given - p_other

    scored = []
    for combo in candidates:
        assoc = [delta_p(combo[i], combo[i + 1]) for i in range(len(combo) - 1)]
        score = sum(assoc) / len(assoc)
        if score >= params.min_assoc:
            scored.append((score, combo))

    def name_of(combo) -> str:
        return " + ".join(
            SlotConstraint(k, v).render() for k, v in combo
        )

    # Prune in an order that prefers lexically specific candidates among
    # ties, so the observed surface sequence survives as the
    # representative when a categorial variant covers the same sentences
    # at the same score.
    def specificity(combo) -> int:
        return sum(1 for kind, _ in combo if kind != "LEX")

    scored.sort(key=lambda sc: (-sc[0], -len(sc[1]), specificity(sc[1]), name_of(sc[1])))

    kept: list[tuple[float, tuple, frozenset]] = []
    for score, combo in scored:
        mset = frozenset(match_sets[combo])
        covered = any(mset <= kept_set for _, _, kept_set in kept)
        if not covered:
            kept.append((score, combo, mset))

    # Truncation order: score, then longer sequence, then name.
    kept.sort(key=lambda kc: (-kc[0], -len(kc[1]), name_of(kc[1])))
    kept = kept[: params.max_inventory]
    constructions = [
        Construction(i, tuple(SlotConstraint(k, v) for k, v in combo))
        for i, (_, combo, _) in enumerate(kept)
    ]
    if not constructions:
        logger.warning(
            "induction produced an empty inventory (%d sentences, min_support=%d)",
            len(sentences), params.min_support,
        )
    source = (
        f"induced: max_len={params.max_len} min_support={params.min_support} "
        f"min_assoc={params.min_assoc} max_inventory={params.max_inventory}"
    )
    return Inventory(constructions, source=source)

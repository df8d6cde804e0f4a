"""Corpus ingestion: article parsing, sentence splitting, tokenization,
and per-token annotation with the three facets (surface form, POS tag,
semantic cluster) that slot constraints match against.

The pipeline is deliberately rule-based and deterministic; anyone with a
better annotator can bypass it entirely through the pre-annotated TSV
ingestion path (`mode="pre-annotated"`).

Case is never folded anywhere: surface forms pass through annotation
unchanged.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple

from .errors import DecodeError, ParseError

UNIVERSAL_TAGS = (
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
    "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X",
)

DEFAULT_ABBREVIATIONS = frozenset({
    "Mr.", "Mrs.", "Ms.", "Dr.", "Prof.", "St.", "Mt.", "Jr.", "Sr.",
    "vs.", "etc.", "e.g.", "i.e.", "cf.", "ca.", "al.", "Inc.", "Ltd.",
    "Co.", "Corp.", "Fig.", "No.", "Vol.", "pp.", "U.S.", "U.K.",
})

# A heading line delimited by a single `=` on each side marks an article
# break; `= =`-style lines are lower-level section headings, i.e. content.
_HEADING_RE = re.compile(r"^=\s*[^=]+?\s*=$")

# Words may contain internal apostrophes ("didn't" stays whole); every
# other punctuation character becomes its own token.
_TOKEN_RE = re.compile(r"\w+(?:['’]\w+)*|[^\w\s]")

_SENT_PUNCT = ".!?"


@dataclass(frozen=True)
class Token:
    """One token with its three matchable facets."""

    form: str
    pos: str
    sem: int | None = None


@dataclass(frozen=True)
class AnnotatedSentence:
    sentence_id: int
    article_id: int
    position_in_article: int
    tokens: tuple[Token, ...]

    @property
    def text(self) -> str:
        return " ".join(t.form for t in self.tokens)


class AnnotationResources:
    """Immutable lookup tables for the fallback annotator.

    pos_lexicon maps a word to its most frequent tag, suffix_rules are
    ordered longest-suffix-first, and cluster_map assigns semantic
    cluster ids (required to be contiguous from 0).
    """

    def __init__(
        self,
        pos_lexicon: dict[str, str],
        suffix_rules: list[tuple[str, str]],
        cluster_map: dict[str, int],
        tagset: tuple[str, ...] = UNIVERSAL_TAGS,
        default_tag: str = "NOUN",
    ):
        self.tagset = tuple(tagset)
        tags = frozenset(self.tagset)
        for word, tag in pos_lexicon.items():
            if tag not in tags:
                raise ParseError(f"lexicon entry {word!r} uses unknown tag {tag!r}")
        for suffix, tag in suffix_rules:
            if tag not in tags:
                raise ParseError(f"suffix rule {suffix!r} uses unknown tag {tag!r}")
        if cluster_map:
            ids = sorted(set(cluster_map.values()))
            if ids[0] != 0 or ids[-1] != len(ids) - 1:
                raise ParseError(
                    f"cluster ids must form a contiguous range from 0, got {ids[:5]}..{ids[-1]}"
                )
        if default_tag not in tags:
            raise ParseError(f"default tag {default_tag!r} not in tagset")
        self.pos_lexicon = dict(pos_lexicon)
        # Longest suffix first; ties keep file order (stable sort).
        self.suffix_rules = sorted(suffix_rules, key=lambda r: -len(r[0]))
        self.cluster_map = dict(cluster_map)
        self.default_tag = default_tag
        self._tags = tags

    @classmethod
    def load(
        cls,
        lexicon_path: str | Path,
        suffix_path: str | Path,
        cluster_path: str | Path | None = None,
        tagset_path: str | Path | None = None,
    ) -> "AnnotationResources":
        """Load resources from TSV files (word<TAB>tag etc.)."""
        tagset = UNIVERSAL_TAGS
        if tagset_path is not None:
            tagset = tuple(
                line.strip() for line in Path(tagset_path).read_text("utf-8").splitlines()
                if line.strip()
            )
        lexicon = {}
        for word, tag in _read_tsv_pairs(lexicon_path):
            lexicon[word] = tag
        suffixes = list(_read_tsv_pairs(suffix_path))
        clusters: dict[str, int] = {}
        if cluster_path is not None:
            for word, cid in _read_tsv_pairs(cluster_path):
                try:
                    clusters[word] = int(cid)
                except ValueError:
                    raise ParseError(f"cluster id {cid!r} for {word!r} is not an integer")
        return cls(lexicon, suffixes, clusters, tagset=tagset)

    @classmethod
    def default(cls) -> "AnnotationResources":
        """Resources bundled with the package."""
        base = Path(__file__).parent / "resources"
        return cls.load(
            base / "pos_lexicon.tsv",
            base / "suffix_rules.tsv",
            base / "clusters.tsv",
            base / "tagset.txt",
        )


def _read_tsv_pairs(path: str | Path) -> Iterator[tuple[str, str]]:
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(f"{path}:{lineno}: expected 2 tab-separated fields, got {len(parts)}")
            yield parts[0], parts[1]


def load_abbreviations(path: str | Path) -> frozenset[str]:
    lines = Path(path).read_text("utf-8").splitlines()
    return frozenset(line.strip() for line in lines if line.strip())


def iter_raw_lines(path: str | Path) -> Iterator[str]:
    """Yield decoded lines from a raw UTF-8 corpus file.

    Decoding is done per line so an invalid byte can be reported with
    its absolute offset in the file ('\\n' never occurs inside a
    multi-byte UTF-8 sequence, so line splitting is byte-safe).
    """
    offset = 0
    with open(path, "rb") as fh:
        for raw in fh:
            try:
                yield raw.decode("utf-8")
            except UnicodeDecodeError as exc:
                raise DecodeError(
                    f"{path}: invalid UTF-8 at byte offset {offset + exc.start}"
                ) from exc
            offset += len(raw)


def parse_wikitext(stream: str | Iterable[str]) -> Iterator[tuple[int, str]]:
    """Split a WikiText-style stream into (article_id, article_text) pairs.

    Articles are the maximal runs of lines between top-level heading
    lines; headings themselves are dropped, as are articles with no
    non-whitespace content.
    """
    if isinstance(stream, str):
        stream = stream.splitlines(keepends=True)
    article_id = 0
    buf: list[str] = []
    for line in stream:
        if _HEADING_RE.match(line.strip()):
            text = "".join(buf)
            buf.clear()
            if text.strip():
                yield article_id, text
                article_id += 1
        else:
            buf.append(line)
    text = "".join(buf)
    if text.strip():
        yield article_id, text


def split_sentences(
    text: str, abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS
) -> list[str]:
    """Rule-based sentence splitting.

    A boundary is a run of `.`, `!`, `?` followed by whitespace and an
    uppercase letter, unless the word ending in that punctuation is a
    known abbreviation. End-of-text always closes the last sentence.
    Newlines are treated as hard boundaries.
    """
    sentences: list[str] = []
    for line in text.split("\n"):
        sentences.extend(_split_line(line, abbreviations))
    return sentences


def _split_line(text: str, abbreviations: frozenset[str]) -> list[str]:
    out = []
    n = len(text)
    start = 0
    i = 0
    while i < n:
        if text[i] in _SENT_PUNCT:
            j = i + 1
            while j < n and text[j] in _SENT_PUNCT:
                j += 1
            k = j
            while k < n and text[k].isspace():
                k += 1
            if k > j and k < n and text[k].isupper():
                back = i - 1
                while back >= start and not text[back].isspace():
                    back -= 1
                word = text[back + 1 : j]
                if word not in abbreviations:
                    piece = text[start:j].strip()
                    if piece:
                        out.append(piece)
                    start = k
            i = j
        else:
            i += 1
    tail = text[start:].strip()
    if tail:
        out.append(tail)
    return out


def tokenize(sentence: str) -> list[str]:
    """Whitespace/punctuation tokenizer; apostrophe contractions stay whole."""
    return _TOKEN_RE.findall(sentence)


def tag_pos(tokens: list[str], resources: AnnotationResources) -> list[str]:
    """Lexicon lookup, then longest matching suffix rule, then the default tag."""
    lexicon = resources.pos_lexicon
    rules = resources.suffix_rules
    default = resources.default_tag
    tags = []
    for tok in tokens:
        tag = lexicon.get(tok)
        if tag is None:
            for suffix, rule_tag in rules:
                if tok.endswith(suffix) and len(tok) > len(suffix):
                    tag = rule_tag
                    break
            else:
                tag = default
        tags.append(tag)
    return tags


def annotate_corpus(
    stream: str | Iterable[str],
    resources: AnnotationResources,
    mode: str = "raw",
    abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS,
) -> Iterator[AnnotatedSentence]:
    """Annotate a corpus stream, yielding AnnotatedSentence in order.

    mode:
      raw          -- article parsing + sentence splitting + tokenization
      pre-split    -- article parsing; each non-blank line is one sentence
      pre-annotated -- the TSV format written by write_annotated, verbatim
    """
    if mode == "pre-annotated":
        yield from read_annotated(stream, resources)
        return
    if mode not in ("raw", "pre-split"):
        raise ParseError(f"unknown ingestion mode {mode!r}")

    cluster_map = resources.cluster_map
    sentence_id = 0
    for article_id, text in parse_wikitext(stream):
        if mode == "raw":
            sents = split_sentences(text, abbreviations)
        else:
            sents = [line.strip() for line in text.split("\n") if line.strip()]
        position = 0
        for sent in sents:
            forms = tokenize(sent)
            if not forms:
                continue
            tags = tag_pos(forms, resources)
            tokens = tuple(
                Token(form, tag, cluster_map.get(form))
                for form, tag in zip(forms, tags)
            )
            yield AnnotatedSentence(sentence_id, article_id, position, tokens)
            sentence_id += 1
            position += 1


def write_annotated(
    sentences: Iterable[AnnotatedSentence], path: str | Path
) -> int:
    """Write the pre-annotated TSV: one token per row,
    sentence_id, article_id, position_in_article, form, pos, sem ('-' if absent),
    with a blank line between sentences. Returns the sentence count.
    """
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for sent in sentences:
            if count:
                fh.write("\n")
            for tok in sent.tokens:
                sem = "-" if tok.sem is None else str(tok.sem)
                fh.write(
                    f"{sent.sentence_id}\t{sent.article_id}\t{sent.position_in_article}"
                    f"\t{tok.form}\t{tok.pos}\t{sem}\n"
                )
            count += 1
    return count


def read_annotated(
    stream: str | Iterable[str], resources: AnnotationResources | None = None
) -> Iterator[AnnotatedSentence]:
    """Read the pre-annotated TSV back into AnnotatedSentence objects.

    Facets are taken verbatim; only structural validity is enforced:
    column count, tag membership when resources are given, strictly
    increasing sentence ids, and strictly increasing position within
    each article (which implies corpus-wide uniqueness of
    (article_id, position) without holding every pair in memory).
    """
    if isinstance(stream, str):
        stream = stream.splitlines()
    tags = frozenset(resources.tagset) if resources is not None else None

    cur_key: tuple[int, int, int] | None = None
    cur_tokens: list[Token] = []
    last_sid = -1
    last_pos_by_article: dict[int, int] = {}

    def finish(key: tuple[int, int, int]) -> AnnotatedSentence:
        nonlocal last_sid
        sid, aid, pos = key
        if sid <= last_sid:
            raise ParseError(
                f"sentence ids must be strictly increasing; saw {sid} after {last_sid}"
            )
        if pos <= last_pos_by_article.get(aid, -1):
            raise ParseError(
                f"position {pos} in article {aid} repeats or goes backwards"
            )
        last_pos_by_article[aid] = pos
        last_sid = sid
        sent = AnnotatedSentence(sid, aid, pos, tuple(cur_tokens))
        cur_tokens.clear()
        return sent

    for lineno, line in enumerate(stream, 1):
        line = line.rstrip("\n")
        if not line.strip():
            if cur_key is not None:
                yield finish(cur_key)
                cur_key = None
            continue
        parts = line.split("\t")
        if len(parts) != 6:
            raise ParseError(f"line {lineno}: expected 6 columns, got {len(parts)}")
        try:
            sid, aid, pos = int(parts[0]), int(parts[1]), int(parts[2])
        except ValueError:
            raise ParseError(f"line {lineno}: non-integer id field")
        form, tag, sem_field = parts[3], parts[4], parts[5]
        if not form:
            raise ParseError(f"line {lineno}: empty token form")
        if tags is not None and tag not in tags:
            raise ParseError(f"line {lineno}: unknown POS tag {tag!r}")
        if sem_field == "-":
            sem = None
        else:
            try:
                sem = int(sem_field)
            except ValueError:
                raise ParseError(f"line {lineno}: bad sem field {sem_field!r}")
            if sem < 0:
                raise ParseError(f"line {lineno}: negative cluster id {sem}")
        key = (sid, aid, pos)
        if cur_key is not None and key != cur_key:
            yield finish(cur_key)
        cur_key = key
        cur_tokens.append(Token(form, tag, sem))
    if cur_key is not None:
        yield finish(cur_key)


def load_annotated_file(
    path: str | Path, resources: AnnotationResources | None = None
) -> list[AnnotatedSentence]:
    with open(path, encoding="utf-8") as fh:
        return list(read_annotated(fh, resources))


class SentenceRef(NamedTuple):
    """Position metadata of one sentence, without its tokens."""

    sentence_id: int
    article_id: int
    position_in_article: int


def scan_annotated(path: str | Path) -> Iterator[tuple[SentenceRef, str]]:
    """Stream (metadata, detokenized text) from a pre-annotated TSV
    without materializing Token objects; used where only document
    structure and sentence texts are needed.
    """
    with open(path, encoding="utf-8") as fh:
        cur: tuple[int, int, int] | None = None
        forms: list[str] = []
        for line in fh:
            line = line.rstrip("\n")
            if not line.strip():
                if cur is not None:
                    yield SentenceRef(*cur), " ".join(forms)
                    cur, forms = None, []
                continue
            parts = line.split("\t")
            if len(parts) != 6:
                raise ParseError(f"{path}: expected 6 columns, got {len(parts)}")
            key = (int(parts[0]), int(parts[1]), int(parts[2]))
            if cur is not None and key != cur:
                yield SentenceRef(*cur), " ".join(forms)
                forms = []
            cur = key
            forms.append(parts[3])
        if cur is not None:
            yield SentenceRef(*cur), " ".join(forms)

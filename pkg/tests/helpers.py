"""Synthetic corpora, inventories, and resources shared by the tests.

The desk corpus draws tokens i.i.d. from tag-class pools so matcher,
corpus-builder, sampler and baseline behaviour can be exercised at a
controlled scale:

  * 40 anchor constructions (lex:azNN lex:bzNN), planted into 20-45
    sentences each -> the low-frequency band;
  * a few lexical mid-frequency constructions (e.g. lex:of pos:DET);
  * POS-bigram constructions so generic they match >3/4 of all
    sentences -> the >10000 band at 13k sentences.

The lexical corpus is the clean probe-learnability setting: every
sentence realizes exactly one two-word lexically anchored construction
over an otherwise huge disjoint vocabulary.

Every word carries a semantic cluster so SEM slots always have facets
to match against.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from cxgcorpus.ingest import AnnotatedSentence, AnnotationResources, Token
from cxgcorpus.inventory import Construction, Inventory, SlotConstraint


def S(kind: str, value) -> SlotConstraint:
    return SlotConstraint(kind, str(value))


def sent(sid, toks, aid=0, pos=0) -> AnnotatedSentence:
    """toks: list of (form, pos) or (form, pos, sem) tuples."""
    tokens = tuple(
        Token(t[0], t[1], t[2] if len(t) > 2 else None) for t in toks
    )
    return AnnotatedSentence(sid, aid, pos, tokens)


# --------------------------------------------------------------------------
# randomized matcher cases (oracle sweeps)

_CASE_TAGS = ("NOUN", "VERB", "DET", "ADJ", "ADP")
_CASE_FORMS = tuple(f"w{i}" for i in range(30))


def _rand_token(rng) -> Token:
    return Token(rng.choice(_CASE_FORMS), rng.choice(_CASE_TAGS), rng.randrange(5))


def _rand_slot(rng) -> SlotConstraint:
    r = rng.random()
    if r < 0.45:
        return S("LEX", rng.choice(_CASE_FORMS))
    if r < 0.85:
        return S("POS", rng.choice(_CASE_TAGS))
    return S("SEM", rng.randrange(5))


def _satisfying_token(slot: SlotConstraint, rng) -> Token:
    if slot.kind == "LEX":
        return Token(slot.value, rng.choice(_CASE_TAGS), rng.randrange(5))
    if slot.kind == "POS":
        return Token(rng.choice(_CASE_FORMS), slot.value, rng.randrange(5))
    return Token(rng.choice(_CASE_FORMS), rng.choice(_CASE_TAGS), int(slot.value))


def random_matcher_case(rng, max_gap: int) -> tuple[Inventory, AnnotatedSentence]:
    """A random inventory and sentence; ~60% of cases have a guaranteed
    planted instance of one construction (with gaps up to max_gap)."""
    toks = [_rand_token(rng) for _ in range(rng.randrange(6, 16))]
    constructions = []
    seen = set()
    for cid in range(rng.randrange(1, 25)):
        slots = tuple(_rand_slot(rng) for _ in range(rng.randrange(2, 5)))
        if slots in seen:
            continue
        seen.add(slots)
        constructions.append(Construction(cid, slots))
    if constructions and rng.random() < 0.6:
        target = rng.choice(constructions)
        realization = []
        for i, slot in enumerate(target.slots):
            if i:
                realization.extend(_rand_token(rng) for _ in range(rng.randrange(0, max_gap + 1)))
            realization.append(_satisfying_token(slot, rng))
        at = rng.randrange(0, len(toks) + 1)
        toks = toks[:at] + realization + toks[at:]
    return Inventory(constructions), AnnotatedSentence(0, 0, 0, tuple(toks))


# --------------------------------------------------------------------------
# the desk corpus

@dataclass
class DeskCorpus:
    sentences: list[AnnotatedSentence]
    inventory: Inventory
    resources: AnnotationResources
    anchor_cxg_ids: list[int]
    upper_cxg_ids: list[int]
    raw_lines: list[str]  # pre-split text with article headings

    @property
    def texts(self) -> dict[int, str]:
        return {s.sentence_id: s.text for s in self.sentences}


def make_desk(
    seed: int = 13,
    n_sentences: int = 13000,
    n_articles: int = 260,
    n_anchors: int = 40,
) -> DeskCorpus:
    rng = random.Random(seed)
    nouns = [f"n{i:04d}" for i in range(6000)]
    verbs = [f"v{i:04d}" for i in range(4000)]
    dets = ["the", "a", "this", "that", "each", "some", "every", "another"]
    adps = ["of", "in", "on", "at", "with", "from", "by", "for"]
    puncts = [".", ",", ";"]
    anchors = [(f"az{i:02d}", f"bz{i:02d}") for i in range(n_anchors)]
    anchor_words = [w for pair in anchors for w in pair]

    tag_of = {}
    for pool, tag in ((nouns, "NOUN"), (verbs, "VERB"), (dets, "DET"),
                      (adps, "ADP"), (puncts, "PUNCT"), (anchor_words, "NOUN")):
        for w in pool:
            tag_of[w] = tag
    vocab = sorted(tag_of)
    cluster_map = {w: i % 10 for i, w in enumerate(vocab)}

    pools = [nouns, verbs, dets, adps, puncts]
    weights = [0.40, 0.20, 0.25, 0.10, 0.05]

    def draw_tokens(n):
        classes = rng.choices(pools, weights, k=n)
        return [rng.choice(pool) for pool in classes]

    raw = [draw_tokens(rng.randrange(18, 23)) for _ in range(n_sentences)]

    # plant each anchor as an `azNN bzNN` bigram in a few sentences
    available = list(range(n_sentences))
    rng.shuffle(available)
    cursor = 0
    for first, second in anchors:
        m = rng.randrange(20, 46)
        for _ in range(m):
            sid = available[cursor]
            cursor += 1
            at = rng.randrange(0, len(raw[sid]) + 1)
            raw[sid][at:at] = [first, second]

    sentences = []
    per_article = max(1, n_sentences // n_articles)
    for sid, forms in enumerate(raw):
        aid = min(sid // per_article, n_articles - 1)
        pos = sid - aid * per_article
        tokens = tuple(Token(w, tag_of[w], cluster_map[w]) for w in forms)
        sentences.append(AnnotatedSentence(sid, aid, pos, tokens))

    constructions = []
    cid = 0
    anchor_ids = []
    for first, second in anchors:
        constructions.append(Construction(cid, (S("LEX", first), S("LEX", second))))
        anchor_ids.append(cid)
        cid += 1
    mids = [
        (S("LEX", "of"), S("POS", "DET")),
        (S("LEX", "in"), S("POS", "DET")),
        (S("LEX", "the"), S("POS", "NOUN")),
        (S("LEX", "a"), S("POS", "VERB")),
        (S("SEM", 3), S("POS", "PUNCT")),
        (S("LEX", "with"), S("POS", "NOUN"), S("POS", "PUNCT")),
    ]
    for slots in mids:
        constructions.append(Construction(cid, tuple(slots)))
        cid += 1
    upper_ids = []
    for pair in (("NOUN", "NOUN"), ("DET", "NOUN"), ("NOUN", "VERB"), ("VERB", "NOUN")):
        constructions.append(Construction(cid, (S("POS", pair[0]), S("POS", pair[1]))))
        upper_ids.append(cid)
        cid += 1

    inventory = Inventory(constructions, source="desk synthetic")
    lexicon = dict(tag_of)
    resources = AnnotationResources(lexicon, [], cluster_map)

    raw_lines = []
    last_aid = None
    for s in sentences:
        if s.article_id != last_aid:
            raw_lines.append(f" = Article {s.article_id} = ")
            last_aid = s.article_id
        raw_lines.append(s.text)

    return DeskCorpus(sentences, inventory, resources, anchor_ids, upper_ids, raw_lines)


def make_lexical_corpus(
    seed: int = 101,
    n_anchors: int = 60,
    freq: tuple[int, int] = (150, 250),
) -> tuple[list[AnnotatedSentence], Inventory]:
    """Partition-style corpus: each sentence realizes exactly one
    lexically anchored two-slot construction, over rare filler words."""
    rng = random.Random(seed)
    nouns = [f"n{i:06d}" for i in range(100000)]
    verbs = [f"v{i:06d}" for i in range(50000)]
    dets = ["the", "a"]
    adps = ["of", "in"]
    anchors = [(f"az{i:03d}", f"bz{i:03d}") for i in range(n_anchors)]
    tag_of = {}
    flat = [w for pair in anchors for w in pair]
    for pool, tag in ((nouns, "NOUN"), (verbs, "VERB"), (dets, "DET"),
                      (adps, "ADP"), (flat, "NOUN")):
        for w in pool:
            tag_of[w] = tag
    cluster_map = {w: i % 10 for i, w in enumerate(sorted(tag_of))}
    pools = [nouns, verbs, dets, adps]
    weights = [0.62, 0.30, 0.04, 0.04]
    sentences = []
    sid = 0
    for first, second in anchors:
        m = rng.randrange(*freq)
        for _ in range(m):
            forms = [
                rng.choice(pool)
                for pool in rng.choices(pools, weights, k=rng.randrange(6, 9))
            ]
            at = rng.randrange(0, len(forms) + 1)
            forms[at:at] = [first, second]
            tokens = tuple(Token(w, tag_of[w], cluster_map[w]) for w in forms)
            sentences.append(AnnotatedSentence(sid, sid // 50, sid % 50, tokens))
            sid += 1
    constructions = [
        Construction(i, (S("LEX", a), S("LEX", b))) for i, (a, b) in enumerate(anchors)
    ]
    return sentences, Inventory(constructions, source="lexical synthetic")


def write_desk_files(desk: DeskCorpus, root) -> dict[str, str]:
    """Write the desk corpus as CLI-consumable files; returns paths."""
    from cxgcorpus.inventory import write_inventory

    root.mkdir(parents=True, exist_ok=True)
    paths = {
        "corpus": str(root / "corpus.txt"),
        "lexicon": str(root / "lexicon.tsv"),
        "suffixes": str(root / "suffixes.tsv"),
        "clusters": str(root / "clusters.tsv"),
        "inventory": str(root / "inventory.tsv"),
        "config": str(root / "workspace.cfg"),
    }
    (root / "corpus.txt").write_text("\n".join(desk.raw_lines) + "\n", encoding="utf-8")
    with open(paths["lexicon"], "w", encoding="utf-8") as fh:
        for w in sorted(desk.resources.pos_lexicon):
            fh.write(f"{w}\t{desk.resources.pos_lexicon[w]}\n")
    (root / "suffixes.tsv").write_text("zzzz\tNOUN\n", encoding="utf-8")
    with open(paths["clusters"], "w", encoding="utf-8") as fh:
        for w in sorted(desk.resources.cluster_map):
            fh.write(f"{w}\t{desk.resources.cluster_map[w]}\n")
    write_inventory(desk.inventory, paths["inventory"])
    (root / "workspace.cfg").write_text(
        "seed = 7\nband = 2:10000\nmax_gap = 1\nstrictness = anchor\n"
        "band_edges = 2,50,100,1000,10000\n",
        encoding="utf-8",
    )
    return paths

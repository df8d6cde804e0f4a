import random

import pytest

from cxgcorpus.errors import FacetMissingError
from cxgcorpus.inventory import Construction, Inventory, parse_construction_spec
from cxgcorpus.matcher import (
    OccurrenceTable,
    bands_from_edges,
    brute_force_match,
    build_index,
    match_corpus,
    match_sentence,
    occurrence_stats,
)

from helpers import S, random_matcher_case, sent


def spans(matches):
    return [(m.cxg_id, m.start, m.end, m.gaps_used) for m in matches]


@pytest.fixture(scope="module")
def table1_construction():
    return parse_construction_spec("7\tpos:PRON lex:didn't pos:VERB lex:how")


class TestBuildIndex:
    def test_single_construction(self):
        inv = Inventory([Construction(0, (S("LEX", "a"), S("POS", "NOUN")))])
        index = build_index(inv)
        assert sum(len(v) for v in index.entries.values()) == 1

    def test_shared_rare_lex_key(self):
        # POS facets appear in four constructions each, the LEX facet in
        # two: both constructions using it anchor on it.
        inv = Inventory([
            Construction(0, (S("LEX", "rare"), S("POS", "NOUN"))),
            Construction(1, (S("LEX", "rare"), S("POS", "VERB"))),
            Construction(2, (S("POS", "NOUN"), S("POS", "VERB"))),
            Construction(3, (S("POS", "VERB"), S("POS", "NOUN"))),
            Construction(4, (S("POS", "NOUN"), S("POS", "NOUN"))),
        ])
        index = build_index(inv)
        assert {cid for cid, _ in index.entries[("LEX", "rare")]} == {0, 1}

    def test_rarest_slot_selected(self):
        # "common" appears in three constructions, "scarce" in one: the
        # third construction must be anchored on "scarce", offset 1.
        inv = Inventory([
            Construction(0, (S("LEX", "common"), S("POS", "NOUN"))),
            Construction(1, (S("LEX", "common"), S("POS", "VERB"))),
            Construction(2, (S("LEX", "common"), S("LEX", "scarce"))),
        ])
        index = build_index(inv)
        assert index.entries[("LEX", "scarce")] == [(2, 1)]

    def test_full_scale_entry_count(self):
        rng = random.Random(3)
        words = [f"w{i}" for i in range(40000)]
        cons = []
        seen = set()
        while len(cons) < 22000:
            slots = (S("LEX", rng.choice(words)), S("POS", rng.choice(("NOUN", "VERB"))))
            if slots not in seen:
                seen.add(slots)
                cons.append(Construction(len(cons), slots))
        index = build_index(Inventory(cons))
        assert sum(len(v) for v in index.entries.values()) == 22000


class TestMatchSentence:
    def test_table1_contiguous(self, table1_construction):
        inv = Inventory([table1_construction])
        index = build_index(inv)
        s = sent(0, [
            ("She", "PRON"), ("didn't", "AUX"), ("understand", "VERB"), ("how", "ADV"),
            ("I", "PRON"), ("could", "AUX"), ("do", "AUX"), ("so", "ADV"),
            ("poorly", "ADV"), (".", "PUNCT"),
        ])
        got = match_sentence(index, s, max_gap=0)
        assert spans(got) == [(7, 0, 4, 0)]

    def test_table1_gap_case(self, table1_construction):
        inv = Inventory([table1_construction])
        index = build_index(inv)
        s = sent(0, [
            ("he", "PRON"), ("really", "ADV"), ("didn't", "AUX"),
            ("know", "VERB"), ("how", "ADV"),
        ])
        assert match_sentence(index, s, max_gap=0) == []
        got = match_sentence(index, s, max_gap=1)
        assert spans(got) == [(7, 0, 5, 1)]

    def test_empty_inventory(self):
        index = build_index(Inventory([]))
        s = sent(0, [("a", "NOUN"), ("b", "VERB")])
        assert match_sentence(index, s, max_gap=2) == []

    def test_construction_longer_than_sentence(self):
        inv = Inventory([Construction(0, tuple(S("POS", "NOUN") for _ in range(5)))])
        s = sent(0, [("a", "NOUN"), ("b", "NOUN")])
        assert brute_force_match(inv, s, 2) == []
        assert match_sentence(build_index(inv), s, 2) == []

    def test_facet_missing_error(self):
        inv = Inventory([Construction(0, (S("SEM", 1), S("POS", "NOUN")))])
        index = build_index(inv)
        s = sent(4, [("a", "NOUN"), ("b", "NOUN")])  # no sem anywhere
        with pytest.raises(FacetMissingError, match="sentence 4"):
            match_sentence(index, s, 1)
        with pytest.raises(FacetMissingError, match="sentence 4"):
            brute_force_match(inv, s, 1)

    def test_leftmost_then_gap_minimal(self):
        inv = Inventory([Construction(0, (S("LEX", "a"), S("LEX", "b")))])
        index = build_index(inv)
        # a at 0 can only reach b at 2 (gap 1); a at 3 reaches b at 4 with
        # gap 0 -- leftmost start wins regardless.
        s = sent(0, [("a", "X"), ("x", "X"), ("b", "X"), ("a", "X"), ("b", "X")])
        assert spans(match_sentence(index, s, 1)) == [(0, 0, 3, 1)]

    def test_backtracking_alignment(self):
        # greedy earliest-next-match would die here: only the second b
        # can reach c within one gap.
        inv = Inventory([Construction(0, (S("LEX", "a"), S("LEX", "b"), S("LEX", "c")))])
        index = build_index(inv)
        s = sent(0, [("a", "X"), ("b", "X"), ("b", "X"), ("x", "X"), ("c", "X")])
        got = match_sentence(index, s, 1)
        assert spans(got) == [(0, 0, 5, 2)]
        assert spans(got) == spans(brute_force_match(inv, s, 1))


class TestOracleEquivalence:
    def test_random_sweep(self):
        rng = random.Random(2024)
        for case in range(300):
            max_gap = rng.choice((0, 1, 2))
            inv, s = random_matcher_case(rng, max_gap)
            index = build_index(inv)
            assert spans(match_sentence(index, s, max_gap)) == spans(
                brute_force_match(inv, s, max_gap)
            ), f"case {case}"

    def test_gap_monotonicity(self):
        rng = random.Random(7)
        for _ in range(100):
            inv, s = random_matcher_case(rng, 1)
            index = build_index(inv)
            ids = [
                {m.cxg_id for m in match_sentence(index, s, g)} for g in (0, 1, 2)
            ]
            assert ids[0] <= ids[1] <= ids[2]

    def test_adding_construction_never_removes_matches(self):
        rng = random.Random(8)
        for _ in range(50):
            inv, s = random_matcher_case(rng, 1)
            extra = Construction(10_000, (S("LEX", "w0"), S("POS", "NOUN")))
            bigger = Inventory(list(inv.constructions) + [extra])
            before = {m.cxg_id for m in match_sentence(build_index(inv), s, 1)}
            after = {m.cxg_id for m in match_sentence(build_index(bigger), s, 1)}
            assert before <= after


class TestMatchCorpus:
    def test_single_membership_reverse(self):
        inv = Inventory([
            Construction(0, (S("LEX", "aa"), S("LEX", "bb"))),
            Construction(1, (S("LEX", "cc"), S("LEX", "dd"))),
        ])
        corpus = [
            sent(0, [("aa", "X"), ("bb", "X")]),
            sent(1, [("cc", "X"), ("dd", "X")], pos=1),
        ]
        table = match_corpus(build_index(inv), corpus, 0)
        assert all(len(v) == 1 for v in table.reverse.values())

    def test_transpose_and_discards(self, desk, desk_table):
        assert desk_table.is_transpose_consistent()
        matched = set(desk_table.sentence_ids)
        discarded = set(desk_table.discarded)
        assert matched.isdisjoint(discarded)
        assert len(matched) + len(discarded) == len(desk.sentences)

    def test_jobs_do_not_change_results(self, desk):
        index = build_index(desk.inventory)
        corpus = desk.sentences[:400]
        t1 = match_corpus(index, corpus, 1, jobs=1)
        t2 = match_corpus(index, corpus, 1, jobs=4)
        assert t1.forward == t2.forward
        assert t1.reverse == t2.reverse
        assert t1.discarded == t2.discarded

    def test_round_trip_serialization(self, tmp_path, desk_table):
        table_path = tmp_path / "table.tsv"
        discards_path = tmp_path / "discards.txt"
        desk_table.write(table_path, discards_path)
        loaded = OccurrenceTable.read(table_path, discards_path)
        assert loaded.forward == desk_table.forward
        assert loaded.reverse == desk_table.reverse
        assert loaded.discarded == desk_table.discarded


class TestOccurrenceStats:
    def test_single_band_when_frequencies_equal(self):
        table = OccurrenceTable({0: [1, 2, 3], 1: [4, 5, 6]})
        stats = occurrence_stats(table, (2, 5, 10))
        assert [b.count for b in stats.bands] == [2, 0, 0]

    def test_inclusive_bounds(self):
        table = OccurrenceTable({0: list(range(2)), 1: list(range(5)), 2: list(range(6))})
        stats = occurrence_stats(table, (2, 5))
        assert stats.bands[0].count == 2  # freq 2 and freq 5 both inside [2, 5]
        assert stats.bands[1].count == 1  # freq 6 in [6, inf)

    def test_below_min_reported_separately(self):
        table = OccurrenceTable({0: [], 1: [9], 2: [1, 2]})
        stats = occurrence_stats(table, (2, 10))
        assert stats.below_min == 2
        assert stats.bands[0].count == 1

    def test_bands_from_edges(self):
        assert bands_from_edges((2, 50, 100)) == [(2, 50), (51, 100), (101, None)]

    def test_desk_recount_oracle(self, desk_table):
        stats = occurrence_stats(desk_table, (2, 50, 100, 1000, 10000))
        freqs = list(desk_table.frequencies().values())
        for band in stats.bands:
            expected = sum(
                1 for f in freqs if f >= band.lo and (band.hi is None or f <= band.hi)
            )
            assert band.count == expected

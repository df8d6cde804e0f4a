"""Construction-grammar corpus engine.

Matches an inventory of slot-constraint constructions against annotated
corpora, builds the construction-clustered / article / randomized
pre-training corpus variants, generates audited same-construction pair
datasets, and ships a linear baseline probe for them.
"""

from .ingest import (
    AnnotatedSentence,
    AnnotationResources,
    Token,
    annotate_corpus,
    parse_wikitext,
    split_sentences,
    tag_pos,
    tokenize,
)
from .inventory import (
    Construction,
    InductionParams,
    Inventory,
    SlotConstraint,
    induce_inventory,
    load_inventory,
    parse_construction_spec,
    render_name,
    write_inventory,
)
from .matcher import (
    MatchIndex,
    MatchSpan,
    OccurrenceTable,
    brute_force_match,
    build_index,
    match_corpus,
    match_sentence,
    occurrence_stats,
)
from .corpus_builder import (
    BuildManifest,
    CorpusDocument,
    build_base_clone,
    build_cxg_corpus,
    build_random,
    verify_multiset,
    write_pretraining_file,
)
from .pair_sampler import (
    PairExample,
    PairText,
    SamplerConfig,
    audit_pairs,
    make_inoculation_subsets,
    read_pairs,
    sample_pairs,
    write_pairs,
)
from .baseline import (
    Hyperparams,
    LinearModel,
    evaluate,
    featurize_pair,
    shuffle_control,
    train,
)

__version__ = "0.1.0"

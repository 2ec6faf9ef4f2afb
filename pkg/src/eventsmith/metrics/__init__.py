from .bleu import TooFewSequences, bleu_score, self_bleu
from .control import (
    ControlProbe,
    ControlReport,
    DictionaryCoref,
    controllability_eval,
    entity_presence,
    tuple_role_tagger,
)
from .diversity import DiversityReport, diversity_protocol
from .overlap import read_gold_schemas, read_synonym_map, schema_overlap
from .perplexity import (
    EmptyQuestionSet,
    PerplexityReport,
    TooFewDocuments,
    applicable_guidances,
    marginalized_logprob,
    narrative_cloze,
    perplexity,
)

__all__ = [
    "TooFewSequences",
    "bleu_score",
    "self_bleu",
    "ControlProbe",
    "ControlReport",
    "DictionaryCoref",
    "controllability_eval",
    "entity_presence",
    "tuple_role_tagger",
    "DiversityReport",
    "diversity_protocol",
    "read_gold_schemas",
    "read_synonym_map",
    "schema_overlap",
    "EmptyQuestionSet",
    "PerplexityReport",
    "TooFewDocuments",
    "applicable_guidances",
    "marginalized_logprob",
    "narrative_cloze",
    "perplexity",
]

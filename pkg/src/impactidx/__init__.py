"""Learned-sparse retrieval engine: quantized term-impact inverted indexes
with safe MaxScore top-k query processing."""

from ._backend import available_backends, load_kernels
from .corpus import (
    DEFAULT_TOKENIZER,
    ExpansionMode,
    Passage,
    TokenizerConfig,
    build_passages,
    classify_expansion_terms,
    merge_expansion,
    tokenize,
)
from .errors import (
    ConfigError,
    DataError,
    DomainError,
    FormatError,
    ImpactIdxError,
    ParseError,
)
from .evaluation import (
    MetricReport,
    map_metric,
    mrr_at_k,
    ndcg_at_k,
    paired_ttest_bonferroni,
    parse_qrels,
    read_trec_run,
    recall_at_k,
)
from .impacts import (
    Bm25Params,
    DocumentImpacts,
    ImpactCollection,
    compute_bm25_impacts,
    load_impact_file,
    write_impact_file,
)
from .index import ImpactIndex, Posting, build, load, save
from .quantize import LinearQuantizer, fit
from .query import (
    Query,
    Strategy,
    TopKResult,
    batch_search,
    read_queries_tsv,
    search_exhaustive,
    search_maxscore,
    write_trec_run,
)

__version__ = "0.1.0"

"""Exemplar-guided, multi-agent generation of meta titles and descriptions."""
from ._kernels import BACKEND
from .config import PipelineConfig, Settings, load_config
from .core import Exemplar, Guardrails, ProductPage, RequiredElement, Snippet
from .embedding import HashingEmbedder, HttpEmbeddingProvider
from .library import ExemplarLibrary, build_library, load_library, save_library
from .metrics import compare_methods, mrr, ndcg_for_item
from .pipeline import PageResult, Pipeline
from .refinement import Evaluator, run_loop
from .retrieval import relevance_filter, resolve_queries
from .selection import select_exemplars

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "PipelineConfig", "Settings", "load_config", "Exemplar", "Guardrails", "ProductPage",
    "RequiredElement", "Snippet", "HashingEmbedder", "HttpEmbeddingProvider", "ExemplarLibrary",
    "build_library", "load_library", "save_library", "compare_methods", "mrr", "ndcg_for_item",
    "PageResult", "Pipeline", "Evaluator", "run_loop", "relevance_filter", "resolve_queries",
    "select_exemplars",
]

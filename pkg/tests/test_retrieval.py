import pytest

from metasynth.clients import MockGenerator, SimulatedCorpusDoc, SimulatedSearch
from metasynth.config import PipelineConfig
from metasynth.core import ProductPage
from metasynth.embedding import embed_page
from metasynth.errors import ExpansionEmptyError, NoCoverageError, TransportError
from metasynth.library import ExemplarLibrary, build_library
from metasynth.retrieval import (EXPANDED, MATCHED, augment_library, canonical_url, expand_queries,
                                 relevance_filter, resolve_queries)

from .helpers import TARGET_URL, ScriptedLLM, StaticSearch, ranked_target_corpus

MUG = ProductPage("p1", "https://shop.example/p/red-mug", (("name", "Red Ceramic Mug"), ("brand", "Acme")))


def test_expand_mock_template():
    assert expand_queries(MUG, MockGenerator()) == ["acme red ceramic mug", "red ceramic mug", "acme mug"]


def test_expand_dedups_and_strips_markers():
    llm = ScriptedLLM(["1. Red Mug\n- red mug\n  RED   MUG  \n* 12 oz mug\n\n2) blue mug"])
    assert expand_queries(MUG, llm) == ["red mug", "12 oz mug", "blue mug"]


def test_expand_respects_count():
    assert len(expand_queries(MUG, ScriptedLLM(["a\nb\nc\nd"]), n_expand=2)) == 2


def test_expand_whitespace_only():
    with pytest.raises(ExpansionEmptyError):
        expand_queries(MUG, ScriptedLLM(["  \n\t\n"]))


def test_expand_client_failure_propagates():
    with pytest.raises(TransportError):
        expand_queries(MUG, ScriptedLLM([TransportError("down")]))


def test_relevance_filter_rank_boundary(embedder):
    corpus, queries = ranked_target_corpus()
    search = SimulatedSearch(corpus, embedder)
    ranks = [[r.url for r in search.search(q, 10)].index(TARGET_URL) + 1 for q in queries]
    assert ranks == [1, 3, 4]  # construction check
    assert relevance_filter(queries, TARGET_URL, search, K_hit=3) == queries[:2]
    assert relevance_filter(queries, TARGET_URL, search, K_hit=1) == queries[:1]


def test_relevance_filter_trivia(embedder):
    corpus, queries = ranked_target_corpus()
    search = SimulatedSearch(corpus, embedder)
    assert relevance_filter([], TARGET_URL, search, 3) == []
    assert relevance_filter(queries, "https://absent.example/x", search, 10) == []
    # url canonicalization: host case and trailing slash
    assert relevance_filter(queries[:1], "https://SHOP.example/target/", search, 1) == queries[:1]


def test_relevance_filter_drops_failing_query():
    search = StaticSearch({"ok": [(TARGET_URL, "t", "d")]})
    assert relevance_filter(["bad", "ok"], TARGET_URL, search, 3) == ["ok"]


def test_canonical_url():
    assert canonical_url("HTTPS://Shop.Example/p/1/") == "https://shop.example/p/1"


def _fresh(prefix, n):
    return [(f"https://{prefix}.example/{i}", f"{prefix.title()} item {i}", f"{prefix} thing {i} with detail {i * 13}.")
            for i in range(n)]


def test_augment_skips_target(embedder):
    results = [(MUG.url, "Acme Red Mug", "Target page.")] + _fresh("cup", 2)
    lib = ExemplarLibrary(embedder)
    added = augment_library(lib, ["q"], StaticSearch({"q": results}), 3, MUG.url)
    assert added == 2
    assert all(e.url != MUG.url for e in lib.exemplars)


def test_augment_duplicates_add_nothing(embedder):
    search = StaticSearch({"q": _fresh("cup", 3), "dup": [("https://mirror.example/x", t, d) for _, t, d in _fresh("cup", 3)]})
    lib = ExemplarLibrary(embedder)
    augment_library(lib, ["q"], search, 3, MUG.url)
    before = list(lib.exemplars)
    assert augment_library(lib, ["dup"], search, 3, MUG.url) == 0
    assert lib.exemplars == before


def test_augment_two_disjoint_queries(embedder):
    search = StaticSearch({"a": _fresh("lamp", 5), "b": _fresh("rug", 5)})
    lib = ExemplarLibrary(embedder)
    assert augment_library(lib, ["a", "b"], search, 2, MUG.url) == 4


def test_resolve_matched_never_searches(embedder):
    lib = ExemplarLibrary(embedder)
    lib.ensure_query("name: Red Ceramic Mug\nbrand: Acme")
    search = StaticSearch({})
    llm = ScriptedLLM(["should not be called"])
    res = resolve_queries(MUG, lib, search, llm, PipelineConfig())
    assert res.mode == MATCHED and res.queries and not res.expansion_attempted
    assert search.calls == [] and llm.calls == 0


def _expansion_world(embedder):
    corpus = [
        SimulatedCorpusDoc(MUG.url, "Acme Red Ceramic Mug | Shop", "Red ceramic mug from Acme."),
        SimulatedCorpusDoc("https://other.example/1", "Northwind Red Ceramic Mug", "Glossy red ceramic mug for tea."),
        SimulatedCorpusDoc("https://other.example/2", "Acme Blue Mug", "Blue stoneware mug by Acme."),
        SimulatedCorpusDoc("https://other.example/3", "Oak Desk Lamp", "Warm light for study desks."),
    ]
    search = SimulatedSearch(corpus, embedder)
    lib = build_library(["oak desk lamp"], search, PipelineConfig(K_lib=1), embedder)
    return search, lib


def test_resolve_expanded_augments(embedder):
    search, lib = _expansion_world(embedder)
    cfg = PipelineConfig(K_hit=2, K_aug=3)
    res = resolve_queries(MUG, lib, search, MockGenerator(), cfg)
    assert res.mode == EXPANDED and res.augmented_count > 0
    # every kept query passes the filter on replay
    for q in res.query_texts:
        assert MUG.url in [r.url for r in search.search(q, cfg.K_hit)]
    assert all(e.url != MUG.url for e in lib.exemplars)
    # a second resolution is matched, or expands again without adding anything
    again = resolve_queries(MUG, lib, search, MockGenerator(), cfg)
    assert again.mode == MATCHED or again.augmented_count == 0


def test_resolve_no_coverage(embedder):
    lib = ExemplarLibrary(embedder)
    with pytest.raises(NoCoverageError):
        resolve_queries(MUG, lib, StaticSearch({}), ScriptedLLM([" "]), PipelineConfig())
    with pytest.raises(NoCoverageError) as info:
        resolve_queries(MUG, lib, StaticSearch({}), MockGenerator(), PipelineConfig())
    assert info.value.trace["kept"] == []


def test_branch_exclusivity_over_catalog(embedder, catalog):
    search = SimulatedSearch(catalog.corpus, embedder)
    cfg = PipelineConfig()
    lib = build_library(catalog.seeds, search, cfg, embedder)
    for page in catalog.pages[:60]:
        calls = search.calls
        try:
            res = resolve_queries(page, lib, search, MockGenerator(), cfg)
        except NoCoverageError:
            continue
        assert res.mode in (MATCHED, EXPANDED)
        if res.mode == MATCHED:
            assert search.calls == calls
            assert res.s_star >= cfg.tau_q
            assert lib.nearest_query(embed_page(page, embedder))[1] == res.s_star
        else:
            assert res.s_star < cfg.tau_q

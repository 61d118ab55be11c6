import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from metasynth.clients import SimulatedSearch
from metasynth.config import PipelineConfig
from metasynth.core import Exemplar
from metasynth.embedding import HashingEmbedder
from metasynth.errors import BuildError, LibraryFormatError, LibraryNotFoundError, NotFoundError
from metasynth.library import ExemplarLibrary, build_library, load_library, save_library

from .conftest import unit
from .helpers import StaticSearch
from .oracles import argmax_query, pairwise_max_cosine

CFG = PipelineConfig()


def _doc(i, topic="mug"):
    return (f"https://s.example/{topic}/{i}", f"{topic.title()} model {i}", f"A {topic} numbered {i} with feature {i * 7}.")


def test_build_one_query_three_results(embedder):
    search = StaticSearch({"mugs": [_doc(1), _doc(2, "lamp"), _doc(3, "rug")]})
    lib = build_library(["mugs"], search, CFG, embedder)
    assert len(lib) == 3
    assert lib.query_index["mugs"] == [0, 1, 2]
    assert (lib.build_report.fetched, lib.build_report.duplicates, lib.build_report.stored) == (3, 0, 3)


def test_build_shared_result_stored_once(embedder):
    shared = _doc(9, "vase")
    search = StaticSearch({"a": [_doc(1), shared], "b": [("https://other.example/x", shared[1], shared[2]), _doc(2, "rug")]})
    lib = build_library(["a", "b"], search, CFG, embedder)
    assert len(lib) == 3
    assert lib.build_report.duplicates == 1
    assert [lib.get(i).url for i in lib.query_index["b"]] == ["https://s.example/rug/2"]
    assert pairwise_max_cosine(lib.exemplar_matrix) <= CFG.epsilon_dup + 1e-9


def test_build_all_queries_fail(embedder):
    with pytest.raises(BuildError):
        build_library(["a", "b"], StaticSearch({}), CFG, embedder)
    with pytest.raises(BuildError):
        build_library([], StaticSearch({}), CFG, embedder)


def test_build_skips_failing_query(embedder):
    lib = build_library(["ok", "bad"], StaticSearch({"ok": [_doc(1)]}), CFG, embedder)
    assert lib.queries == ["ok"]
    assert "bad" in lib.build_report.skipped


def _lib2():
    return ExemplarLibrary(HashingEmbedder(dimension=2), 0.95)


def _ex(vec, query="q", url="https://a.example/1"):
    return Exemplar(query, url, "t", "d", 1, unit(vec))


def test_add_exemplar_examples():
    lib = _lib2()
    assert lib.add_exemplar(_ex([1, 0])).added
    again = lib.add_exemplar(_ex([1, 0], url="https://a.example/2"))
    assert not again.added and again.exemplar_id == 0 and again.similarity == pytest.approx(1.0)
    # cosine 0.93 by construction
    other = _ex([0.93, math.sqrt(1 - 0.93 ** 2)], url="https://a.example/3")
    assert float(other.embedding @ lib.get(0).embedding) == pytest.approx(0.93)
    assert lib.add_exemplar(other).added
    assert len(lib) == 2


def test_dedup_threshold_is_strict():
    lib = ExemplarLibrary(HashingEmbedder(dimension=2), 0.6)
    lib.add_exemplar(_ex([1, 0]))
    # cosine exactly 0.6 is not "greater than" the threshold
    assert lib.add_exemplar(_ex([0.6, 0.8], url="https://a.example/2")).added


def test_nearest_query_matches_scan(embedder):
    lib = ExemplarLibrary(embedder)
    queries = ["coffee mugs", "desk lamps", "yoga mats", "area rugs", "bath towels"]
    for q in queries:
        lib.ensure_query(q)
    rng = np.random.default_rng(0)
    vectors = [embedder.embed_text(q) for q in queries]
    for _ in range(20):
        z = unit(rng.normal(size=embedder.dimension))
        q, s = lib.nearest_query(z)
        oq, os_ = argmax_query(queries, vectors, z)
        assert q == oq and s == pytest.approx(os_, abs=1e-12)
    assert lib.nearest_query(embedder.embed_text("yoga mats")) == ("yoga mats", pytest.approx(1.0))


def test_nearest_query_single_and_empty(embedder):
    lib = ExemplarLibrary(embedder)
    with pytest.raises(NotFoundError):
        lib.nearest_query(embedder.embed_text("x"))
    lib.ensure_query("red mug")
    z = embedder.embed_text("red mug cup")
    assert lib.nearest_query(z) == ("red mug", pytest.approx(float(z @ embedder.embed_text("red mug"))))


def test_nearest_query_tie_goes_to_smallest_text():
    emb = HashingEmbedder(bigrams=False)
    lib = ExemplarLibrary(emb)
    lib.ensure_query("red mug")
    lib.ensure_query("mug red")  # same unigram bag, same vector
    assert lib.nearest_query(emb.embed_text("red mug"))[0] == "mug red"


def test_queries_above(embedder):
    lib = ExemplarLibrary(embedder)
    queries = ["coffee mugs", "ceramic coffee mug", "desk lamps", "yoga mats"]
    for q in queries:
        lib.ensure_query(q)
    z = embedder.embed_text("coffee mug")
    got = lib.queries_above(z, 0.5)
    oracle = sorted(((q, float(embedder.embed_text(q) @ z)) for q in queries
                     if float(embedder.embed_text(q) @ z) >= 0.5), key=lambda t: (-t[1], t[0]))
    assert [q for q, _ in got] == [q for q, _ in oracle]
    assert all(s >= 0 for _, s in lib.queries_above(z, 0.0))
    assert len(lib.queries_above(z, 0.0)) == sum(float(embedder.embed_text(q) @ z) >= 0 for q in queries)
    assert lib.queries_above(z, 1.0 + 1e-9) == []


def test_exemplars_for_queries_union(embedder):
    lib = ExemplarLibrary(embedder)
    for i, (q, topic) in enumerate([("a", "mug"), ("a", "lamp"), ("b", "rug"), ("b", "vase"), ("c", "tee")]):
        lib.add_exemplar(lib.make_exemplar(q, *_doc(i, topic), rank=1))
    assert [e.exemplar_id for e in lib.exemplars_for_queries(["a"])] == [0, 1]
    assert [e.exemplar_id for e in lib.exemplars_for_queries(["a", "b"])] == [0, 1, 2, 3]
    got = {e.exemplar_id for e in lib.exemplars_for_queries(["b", "a", "b", "c"])}
    oracle = {i for q in ("a", "b", "c") for i, e in enumerate(lib.exemplars) if e.query == q}
    assert got == oracle
    assert lib.exemplars_for_queries(["missing"]) == []


def test_round_trip_small(tmp_path, embedder):
    lib = ExemplarLibrary(embedder)
    save_library(lib, tmp_path / "empty.jsonl")
    assert load_library(tmp_path / "empty.jsonl", embedder) == lib

    for i, topic in enumerate(["mug", "lamp", "rug"]):
        lib.add_exemplar(lib.make_exemplar("q", *_doc(i, topic), rank=i + 1))
    lib.ensure_query("empty query")
    save_library(lib, tmp_path / "three.jsonl")
    back = load_library(tmp_path / "three.jsonl", embedder)
    assert back == lib
    assert back.query_index["empty query"] == []


def test_header_and_file_errors(tmp_path, embedder):
    with pytest.raises(LibraryNotFoundError):
        load_library(tmp_path / "nope.jsonl", embedder)
    bad = tmp_path / "bad.jsonl"
    bad.write_text(json.dumps({"format": "other/9", "dimension": 256}) + "\n")
    with pytest.raises(LibraryFormatError):
        load_library(bad, embedder)
    bad.write_text(json.dumps({"format": "metasynth-lib/1", "dimension": 8}) + "\n")
    with pytest.raises(LibraryFormatError):
        load_library(bad, embedder)


def test_truncated_file_reports_line(tmp_path, embedder):
    lib = ExemplarLibrary(embedder)
    for i, topic in enumerate(["mug", "lamp", "rug"]):
        lib.add_exemplar(lib.make_exemplar("q", *_doc(i, topic), rank=1))
    path = tmp_path / "lib.jsonl"
    save_library(lib, path)
    text = path.read_text()
    path.write_text(text[: len(text) - 40])
    with pytest.raises(LibraryFormatError) as info:
        load_library(path, embedder)
    assert info.value.lineno == 4


@settings(max_examples=25)
@given(st.integers(0, 10 ** 6), st.floats(0.3, 0.99))
def test_dedup_invariant_random(seed, eps):
    rng = np.random.default_rng(seed)
    lib = ExemplarLibrary(HashingEmbedder(dimension=6), eps)
    base = rng.normal(size=(4, 6))
    for i in range(40):
        v = base[rng.integers(4)] + rng.normal(scale=0.3, size=6)
        lib.add_exemplar(Exemplar("q", f"https://a.example/{i}", "t", "d", 1, unit(v)))
    assert pairwise_max_cosine(lib.exemplar_matrix) <= eps + 1e-9


def test_simulated_build_on_small_fixture(embedder, catalog):
    corpus = catalog.corpus[:12]
    lib = build_library(["coffee mugs", "wall art", "storage cabinets"], SimulatedSearch(corpus, embedder),
                        PipelineConfig(K_lib=4), embedder)
    assert len(lib) <= 12
    assert lib.build_report.fetched == 12
    assert lib.build_report.stored + lib.build_report.duplicates == 12

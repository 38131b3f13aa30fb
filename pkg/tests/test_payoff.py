import math

import numpy as np
import pytest

from senseflow.errors import ParseError, UnknownConcept
from senseflow.payoff import (
    Provider,
    Taxonomy,
    TaxonomyRecord,
    build_gloss_vectors,
    build_payoff_store,
    cosine,
    jcn,
    load_glosses,
    load_precomputed,
    load_relations,
    load_taxonomy,
    partial_payoff,
    serialize_payoffs,
    wup,
)

# five-node tree: root -> (animal -> (cat, dog)), rock
TREE = """root\t1\t0.0\t-
animal\t2\t1.0\troot
cat\t3\t3.0\tanimal
dog\t3\t4.0\tanimal
rock\t2\t2.0\troot
"""


@pytest.fixture
def tree() -> Taxonomy:
    return load_taxonomy(TREE)


class TestWup:
    def test_identity_is_one(self, tree):
        for concept in ("root", "animal", "cat"):
            assert wup(concept, concept, tree) == 1.0

    def test_siblings_at_depth_three(self, tree):
        assert wup("cat", "dog", tree) == pytest.approx(4 / 6)

    def test_ancestor_relation(self, tree):
        assert wup("animal", "cat", tree) == pytest.approx(4 / 5)

    def test_disjoint_taxonomies_give_zero(self):
        two_roots = load_taxonomy(
            "r1\t1\t0.0\t-\nr2\t1\t0.0\t-\na\t2\t1.0\tr1\nb\t2\t1.0\tr2\n"
        )
        assert wup("a", "b", two_roots) == 0.0

    def test_unknown_concept_raises(self, tree):
        with pytest.raises(UnknownConcept):
            wup("cat", "unicorn", tree)

    def test_range(self, tree):
        concepts = ("root", "animal", "cat", "dog", "rock")
        for a in concepts:
            for b in concepts:
                assert 0.0 < wup(a, b, tree) <= 1.0


class TestJcn:
    def test_identity_cancels(self, tree):
        assert jcn("cat", "cat", tree) == 0.0

    def test_fixture_arithmetic(self, tree):
        # IC(cat)=3, IC(dog)=4, IC(msa=animal)=1
        assert jcn("cat", "dog", tree) == pytest.approx(5.0)

    def test_raw_value_is_a_distance_not_a_similarity(self, tree):
        assert jcn("cat", "dog", tree) > jcn("cat", "cat", tree)

    def test_inversion_of_zero_hits_the_cap(self, tree):
        assert jcn("cat", "cat", tree, invert=True) == 1e9

    def test_inversion_of_positive_distance(self, tree):
        assert jcn("cat", "dog", tree, invert=True) == pytest.approx(1 / 5.0, rel=1e-8)

    def test_missing_concept_maps_to_zero(self, tree):
        assert jcn("cat", "unicorn", tree) == 0.0

    def test_disjoint_roots_map_to_zero(self):
        two_roots = load_taxonomy("r1\t1\t0.0\t-\nr2\t1\t0.5\t-\n")
        assert jcn("r1", "r2", two_roots) == 0.0


class TestGlossVectors:
    def test_raw_counts(self):
        vectors = build_gloss_vectors({"c": "a b b"}, weighting="raw")
        assert vectors["c"] == {"a": 1.0, "b": 2.0}

    def test_ubiquitous_term_weighs_nothing_under_tfidf(self):
        glosses = {"c1": "shared alpha", "c2": "shared beta", "c3": "shared gamma"}
        vectors = build_gloss_vectors(glosses, weighting="tfidf")
        for v in vectors.values():
            assert v["shared"] == 0.0
        assert vectors["c1"]["alpha"] == pytest.approx(math.log(3))

    def test_relation_link_extends_the_super_gloss(self):
        glosses = {"c1": "alpha beta", "c2": "gamma"}
        relations = {"c1": ("c2",)}
        vectors = build_gloss_vectors(glosses, relations, weighting="raw")
        assert set(vectors["c1"]) == {"alpha", "beta", "gamma"}
        assert set(vectors["c2"]) == {"gamma"}  # records are directed

    def test_relation_to_unknown_concept_ignored(self):
        vectors = build_gloss_vectors({"c1": "alpha"}, {"c1": ("ghost",)}, "raw")
        assert set(vectors["c1"]) == {"alpha"}

    def test_unknown_weighting_rejected(self):
        with pytest.raises(ValueError):
            build_gloss_vectors({"c": "x"}, weighting="idf")


class TestCosine:
    def test_identical_vectors(self):
        v = {"a": 1.0, "b": 2.0}
        assert cosine(v, v) == pytest.approx(1.0)

    def test_disjoint_supports(self):
        assert cosine({"a": 1.0}, {"b": 1.0}) == 0.0

    def test_worked_example(self):
        assert cosine({"a": 1.0, "b": 1.0}, {"a": 1.0}) == pytest.approx(1 / math.sqrt(2))

    def test_zero_vector_convention(self):
        assert cosine({}, {"a": 1.0}) == 0.0
        assert cosine({"a": 0.0}, {"a": 1.0}) == 0.0

    def test_bounded_for_nonnegative_vectors(self, rng):
        terms = [f"t{k}" for k in range(8)]
        for _ in range(100):
            a = {t: float(rng.uniform(0, 3)) for t in terms if rng.uniform() < 0.5}
            b = {t: float(rng.uniform(0, 3)) for t in terms if rng.uniform() < 0.5}
            assert 0.0 <= cosine(a, b) <= 1.0 + 1e-12


GLOSSES = {
    "c1": "water river flow",
    "c2": "money bank loan",
    "c3": "river bank water",
}


class TestBuildPayoffStore:
    def test_gloss_store_matches_pairwise_cosine(self):
        concepts = ("c1", "c2", "c3")
        vectors = build_gloss_vectors(GLOSSES, weighting="raw")
        store = build_payoff_store(
            concepts, Provider.GLOSS_COSINE_RAW, glosses=GLOSSES
        )
        for h, a in enumerate(concepts):
            for k, b in enumerate(concepts):
                assert store.z[h, k] == pytest.approx(cosine(vectors[a], vectors[b]))

    def test_symmetry_for_every_provider(self, tree):
        taxonomy_store = build_payoff_store(
            ("cat", "dog", "rock"), Provider.WUP, taxonomy=tree
        )
        gloss_store = build_payoff_store(
            ("c1", "c2", "c3"), Provider.GLOSS_COSINE_TFIDF, glosses=GLOSSES
        )
        jcn_store = build_payoff_store(
            ("cat", "dog", "rock"), Provider.JCN, taxonomy=tree, jcn_invert=True
        )
        for store in (taxonomy_store, gloss_store, jcn_store):
            assert np.array_equal(store.z, store.z.T)
            assert np.all(np.isfinite(store.z))

    def test_singleton_concept_list(self):
        store = build_payoff_store(("c1",), Provider.GLOSS_COSINE_RAW, glosses=GLOSSES)
        assert store.z.shape == (1, 1)

    def test_unknown_concept_becomes_zero_with_warning(self, tree):
        store = build_payoff_store(("cat", "unicorn"), Provider.WUP, taxonomy=tree)
        assert store.z[0, 1] == 0.0
        assert store.warnings > 0

    def test_empty_gloss_participates_with_zero_similarity(self):
        glosses = {"c1": "alpha", "c2": ""}
        store = build_payoff_store(
            ("c1", "c2"), Provider.GLOSS_COSINE_RAW, glosses=glosses
        )
        assert store.z[0, 1] == 0.0
        assert store.warnings > 0

    def test_precomputed_round_trip_is_exact(self, rng):
        concepts = tuple(f"c{k}" for k in range(4))
        entries = {}
        for h in range(4):
            for k in range(h, 4):
                entries[(concepts[h], concepts[k])] = float(np.round(rng.uniform(), 6))
        store = build_payoff_store(concepts, Provider.PRECOMPUTED, precomputed=entries)
        text = serialize_payoffs(store)
        back = build_payoff_store(
            concepts, Provider.PRECOMPUTED, precomputed=load_precomputed(text)
        )
        assert np.array_equal(back.z, store.z)

    def test_precomputed_entries_outside_concept_list_ignored(self):
        store = build_payoff_store(
            ("a", "b"),
            Provider.PRECOMPUTED,
            precomputed={("a", "b"): 0.5, ("a", "zzz"): 0.9},
        )
        assert store.z[0, 1] == 0.5

    def test_missing_resources_rejected(self):
        with pytest.raises(ValueError):
            build_payoff_store(("a",), Provider.WUP)
        with pytest.raises(ValueError):
            build_payoff_store(("a",), Provider.GLOSS_COSINE_TFIDF)
        with pytest.raises(ValueError):
            build_payoff_store(("a",), Provider.PRECOMPUTED)

    def test_provider_parse(self):
        assert Provider.parse("gloss-cosine-tfidf") is Provider.GLOSS_COSINE_TFIDF
        with pytest.raises(ValueError):
            Provider.parse("resnik")


class TestPartialPayoff:
    def setup_method(self):
        self.concepts = ("c1", "c2", "c3")
        self.store = build_payoff_store(
            self.concepts, Provider.GLOSS_COSINE_RAW, glosses=GLOSSES
        )

    def test_full_slice_is_z_itself(self):
        sliced = partial_payoff(self.store, list(self.concepts), list(self.concepts))
        assert np.array_equal(sliced, self.store.z)

    def test_rectangular_slice_spot_check(self):
        sliced = partial_payoff(self.store, ["c2", "c3"], ["c1", "c2", "c3"])
        assert sliced.shape == (2, 3)
        assert sliced[0, 0] == self.store.z[1, 0]
        assert sliced[1, 2] == self.store.z[2, 2]

    def test_transpose_property_on_random_slices(self, rng):
        names = list(self.concepts)
        for _ in range(50):
            mi = [names[i] for i in rng.integers(0, 3, size=rng.integers(1, 4))]
            mj = [names[i] for i in rng.integers(0, 3, size=rng.integers(1, 4))]
            assert np.array_equal(
                partial_payoff(self.store, mi, mj),
                partial_payoff(self.store, mj, mi).T,
            )

    def test_unknown_concept_rejected(self):
        with pytest.raises(UnknownConcept):
            partial_payoff(self.store, ["c1", "nope"], ["c2"])

    def test_repeated_calls_identical(self):
        a = partial_payoff(self.store, ["c1", "c2"], ["c3"])
        b = partial_payoff(self.store, ["c1", "c2"], ["c3"])
        assert np.array_equal(a, b)


class TestResourceParsers:
    def test_taxonomy_rejects_cycles(self):
        looped = load_taxonomy("a\t2\t1.0\tb\nb\t2\t1.0\ta\n")
        with pytest.raises(Exception, match="cycle"):
            looped.ancestors("a")

    def test_taxonomy_bad_depth_located(self):
        with pytest.raises(ParseError) as err:
            load_taxonomy("a\t0\t1.0\t-\n")
        assert err.value.line == 1

    def test_gloss_text_may_contain_tabs_free_text(self):
        glosses = load_glosses("c1\tsome gloss text\n")
        assert glosses["c1"] == "some gloss text"

    def test_duplicate_gloss_rejected(self):
        with pytest.raises(ParseError):
            load_glosses("c1\tx\nc1\ty\n")

    def test_relations_grouped_by_source(self):
        relations = load_relations("a\tb\na\tc\nb\tc\n")
        assert relations == {"a": ("b", "c"), "b": ("c",)}

    def test_precomputed_bad_value_located(self):
        with pytest.raises(ParseError) as err:
            load_precomputed("a\tb\tmuch\n")
        assert err.value.line == 1

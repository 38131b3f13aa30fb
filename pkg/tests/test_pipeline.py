from dataclasses import replace
import numpy as np
import pytest

from senseflow import riverbank_dir
from senseflow.contingency import Measure
from senseflow.dynamics import GameConfig
from senseflow.errors import ConfigError, ParseError
from senseflow.evaluate import load_gold, mfs_baseline, score_outcome
from senseflow.graph import load_occurrences, serialize_graph
from senseflow.payoff import Provider, build_payoff_store, load_glosses, serialize_payoffs
from senseflow.pipeline import (
    PipelineConfig,
    PipelineOptions,
    ResourceTexts,
    build_graph_from_texts,
    config_from_mapping,
    parse_flat_config,
    run_from_texts,
    run_pipeline,
)
from senseflow.senses import load_inventory


def options(n=1, **kwargs):
    defaults = dict(
        measure=Measure.MDICE,
        provider=Provider.GLOSS_COSINE_TFIDF,
        ngram=n,
        game=GameConfig(max_iterations=2000, epsilon=1e-8),
    )
    defaults.update(kwargs)
    return PipelineOptions(**defaults)


def answer_map(result):
    return {
        a.player.instance_id: a.concept
        for a in result.outcome.assignments
        if a.concept is not None
    }


class TestRiverbankRun:
    def test_window_zero_prefers_the_financial_sense(self, riverbank):
        result = run_from_texts(riverbank, options(n=0))
        assert answer_map(result)["d1.t5"] == "bank.n.02"

    def test_window_one_flips_bank_to_sloping_land(self, riverbank):
        result = run_from_texts(riverbank, options(n=1))
        answers = answer_map(result)
        assert answers["d1.t5"] == "bank.n.01"
        assert answers["d1.t4"] == "river.n.01"
        assert answers["d1.t3"] == "institution.n.01"

    def test_window_one_answers_everything(self, riverbank):
        result = run_from_texts(riverbank, options(n=1))
        assert result.report is not None
        assert result.report.precision_equals_recall
        assert result.report.overall.answered == result.report.overall.total == 5
        assert result.report.f1 == 100.0
        assert result.outcome.converged

    def test_game_beats_most_frequent_sense_on_fixture(self, riverbank):
        players = load_occurrences(riverbank.occurrences)
        inventories = load_inventory(riverbank.inventory)
        gold = load_gold(riverbank.gold)
        mfs_report = score_outcome(mfs_baseline(players, inventories), gold)
        game_report = run_from_texts(riverbank, options(n=1)).report
        assert mfs_report.f1 == pytest.approx(80.0)
        assert game_report.f1 > mfs_report.f1

    def test_answers_text_lists_instances_in_file_order(self, riverbank):
        result = run_from_texts(riverbank, options(n=1))
        ids = [line.split("\t")[0] for line in result.answers_text.splitlines()]
        assert ids == ["d1.t1", "d1.t2", "d1.t3", "d1.t4", "d1.t5"]

    def test_payoff_warnings_zero_on_fixture(self, riverbank):
        assert run_from_texts(riverbank, options(n=1)).payoff_warnings == 0


class TestUnassignedAndFallback:
    def isolate_be(self, riverbank):
        """Strip the be-* pair records: at n=0 'be' has no edges at all."""
        counts = "\n".join(
            line
            for line in riverbank.counts.splitlines()
            if not line.startswith("be\t")
        )
        return replace(riverbank, counts=counts)

    def test_isolated_uniform_player_stays_unassigned(self, riverbank):
        result = run_from_texts(self.isolate_be(riverbank), options(n=0))
        assert "d1.t1" not in answer_map(result)
        [be] = [a for a in result.outcome.assignments if a.player.instance_id == "d1.t1"]
        assert not be.updated
        assert result.report.overall.answered == 4
        assert result.report.overall.total == 5
        assert not result.report.precision_equals_recall

    def test_first_sense_fallback_answers_it(self, riverbank):
        result = run_from_texts(
            self.isolate_be(riverbank),
            options(
                n=0,
                game=GameConfig(max_iterations=2000, epsilon=1e-8, fallback="first_sense"),
            ),
        )
        assert answer_map(result)["d1.t1"] == "be.v.01"
        assert result.report.overall.answered == 5

    def test_window_one_reconnects_it_instead(self, riverbank):
        # augmentation restores proximity edges for non-stop-word players;
        # "be" is a stop word here, so it stays isolated even at n=1
        result = run_from_texts(self.isolate_be(riverbank), options(n=1))
        assert "d1.t1" not in answer_map(result)


class TestDroppedPlayers:
    def test_uncovered_occurrence_is_dropped_and_counts_against_recall(self, riverbank):
        extended = replace(
            riverbank,
            occurrences=riverbank.occurrences + "d1\t9\tzzz\tn\td1.t6\n",
            gold=riverbank.gold + "d1.t6\tzzz.n.01\n",
        )
        result = run_from_texts(extended, options(n=1))
        assert [p.lemma for p in result.dropped] == ["zzz"]
        assert "d1.t6" not in answer_map(result)
        assert result.report.overall.total == 6
        assert result.report.overall.answered == 5
        assert result.report.precision == 100.0
        assert result.report.recall == pytest.approx(500 / 6)

    def test_all_players_dropped_is_an_error(self, riverbank):
        with pytest.raises(ConfigError):
            run_from_texts(
                replace(riverbank, inventory="other\tn\tx.n.01\n"), options()
            )


class TestRoundTrips:
    def test_prebuilt_graph_reproduces_the_full_run(self, riverbank):
        opts = options(n=1)
        g, players, _ = build_graph_from_texts(riverbank, opts)
        direct = run_from_texts(riverbank, opts)
        via_graph = run_from_texts(
            replace(riverbank, counts=None, unigrams=None, graph=serialize_graph(g)),
            opts,
        )
        assert via_graph.answers_text == direct.answers_text
        assert via_graph.report.f1 == direct.report.f1
        assert np.allclose(via_graph.graph.weights, direct.graph.weights)

    def test_precomputed_payoffs_reproduce_the_gloss_run(self, riverbank):
        opts = options(n=1)
        direct = run_from_texts(riverbank, opts)
        inventories = load_inventory(riverbank.inventory)
        players = load_occurrences(riverbank.occurrences)
        from senseflow.senses import concept_list

        concepts = concept_list(inventories, players)
        store = build_payoff_store(
            concepts,
            Provider.GLOSS_COSINE_TFIDF,
            glosses=load_glosses(riverbank.glosses),
        )
        via_z = run_from_texts(
            replace(riverbank, glosses=None, payoffs=serialize_payoffs(store)),
            options(n=1, provider=Provider.PRECOMPUTED),
        )
        assert via_z.answers_text == direct.answers_text

    def test_trajectory_serialization_replays_the_run(self, riverbank):
        result = run_from_texts(riverbank, options(n=1, collect_trajectory=True))
        lines = result.trajectory_text.splitlines()
        assert len(lines) == (result.outcome.iterations + 1) * sum(
            len(s) for s in result.state.supports
        )
        first = lines[0].split("\t")
        assert first[0] == "0" and first[1] == "d1.t1"
        # final records hold the converged probabilities
        last_by_key = {}
        for line in lines:
            t, instance, concept, prob = line.split("\t")
            last_by_key[(instance, concept)] = float(prob)
        for a in result.outcome.assignments:
            assert last_by_key[(a.player.instance_id, a.concept)] == pytest.approx(
                a.probability
            )


class TestDeterminism:
    def test_repeated_runs_are_byte_identical(self, riverbank):
        first = run_from_texts(riverbank, options(n=1, collect_trajectory=True))
        second = run_from_texts(riverbank, options(n=1, collect_trajectory=True))
        assert first.answers_text == second.answers_text
        assert first.trajectory_text == second.trajectory_text

    def test_worker_counts_are_byte_identical(self, riverbank):
        outs = [
            run_from_texts(
                riverbank,
                options(
                    n=1,
                    game=GameConfig(max_iterations=2000, epsilon=1e-8, workers=w),
                ),
            )
            for w in (1, 3)
        ]
        assert outs[0].answers_text == outs[1].answers_text
        assert np.array_equal(outs[0].state.matrix, outs[1].state.matrix)


class TestFilePipeline:
    def config_for(self, tmp_path, **overrides):
        d = riverbank_dir()
        cfg = PipelineConfig(
            occurrences=d / "occurrences.tsv",
            inventory=d / "inventory.tsv",
            counts=d / "pairs.tsv",
            unigrams=d / "unigrams.tsv",
            glosses=d / "glosses.tsv",
            stopwords=d / "stopwords.txt",
            gold=d / "gold.tsv",
            answers_out=tmp_path / "answers.tsv",
            report_out=tmp_path / "report.tsv",
            options=options(n=1),
        )
        return replace(cfg, **overrides)

    def test_writes_answers_and_report(self, tmp_path):
        cfg = self.config_for(tmp_path)
        result = run_pipeline(cfg)
        assert cfg.answers_out.read_text() == result.answers_text
        assert "\t100.00" in cfg.report_out.read_text()

    def test_missing_counts_file_aborts_without_output(self, tmp_path):
        cfg = self.config_for(tmp_path, counts=tmp_path / "nowhere.tsv")
        with pytest.raises(ConfigError, match="counts"):
            run_pipeline(cfg)
        assert not cfg.answers_out.exists()
        assert not cfg.report_out.exists()

    def test_parse_error_names_the_real_path_and_line(self, tmp_path):
        bad = tmp_path / "bad_counts.tsv"
        bad.write_text("river\tbank\t25\nbroken\n", encoding="utf-8")
        cfg = self.config_for(tmp_path, counts=bad)
        with pytest.raises(ParseError) as err:
            run_pipeline(cfg)
        assert err.value.source == str(bad)
        assert err.value.line == 2
        assert not cfg.answers_out.exists()

    def test_trajectory_request_via_output_path(self, tmp_path):
        out = tmp_path / "trace.tsv"
        cfg = self.config_for(tmp_path, trajectory_out=out)
        run_pipeline(cfg)
        assert out.exists() and out.read_text().startswith("0\td1.t1\t")


class TestFlatConfig:
    def test_parse_and_build(self, tmp_path):
        text = (
            "occurrences = occ.tsv\n"
            "inventory = inv.tsv\n"
            "# comment\n"
            "n = 2\n"
            "p = 0.5\n"
            "measure = dice\n"
            "fallback = first-sense\n"
        )
        values = parse_flat_config(text)
        cfg = config_from_mapping(values, tmp_path)
        assert cfg.occurrences == tmp_path / "occ.tsv"
        assert cfg.options.ngram == 2
        assert cfg.options.measure is Measure.DICE
        assert cfg.options.game.fallback == "first_sense"

    def test_defaults_match_the_documented_configuration(self, tmp_path):
        cfg = config_from_mapping(
            {"occurrences": "o", "inventory": "i"}, tmp_path
        )
        assert cfg.options.measure is Measure.MDICE
        assert cfg.options.provider is Provider.GLOSS_COSINE_TFIDF
        assert cfg.options.ngram == 5
        assert cfg.options.p == 0.4
        assert cfg.options.init == "uniform"
        assert cfg.options.game.epsilon == 1e-6
        assert cfg.options.game.max_iterations == 1000

    def test_unknown_keys_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="window"):
            config_from_mapping(
                {"occurrences": "o", "inventory": "i", "window": "3"}, tmp_path
            )

    def test_duplicate_key_located(self):
        with pytest.raises(ParseError) as err:
            parse_flat_config("n = 1\nn = 2\n")
        assert err.value.line == 2

    def test_missing_equals_located(self):
        with pytest.raises(ParseError):
            parse_flat_config("just words\n")

    def test_bundled_config_file_parses(self):
        text = (riverbank_dir() / "riverbank.conf").read_text()
        cfg = config_from_mapping(parse_flat_config(text), riverbank_dir())
        assert cfg.options.ngram == 1
        result = run_pipeline(cfg)
        assert answer_map(result)["d1.t5"] == "bank.n.01"


class TestOptionValidation:
    def test_bad_init_rejected(self):
        with pytest.raises(ConfigError):
            PipelineOptions(init="random")

    def test_bad_p_rejected(self):
        with pytest.raises(ConfigError):
            PipelineOptions(init="geometric", p=1.5)

    def test_provider_resources_cross_checked(self, riverbank):
        with pytest.raises(ConfigError, match="taxonomy"):
            run_from_texts(riverbank, options(provider=Provider.WUP))
        with pytest.raises(ConfigError, match="payoffs"):
            run_from_texts(riverbank, options(provider=Provider.PRECOMPUTED))
        with pytest.raises(ConfigError, match="glosses"):
            run_from_texts(replace(riverbank, glosses=None), options())

    def test_graph_or_counts_required(self, riverbank):
        with pytest.raises(ConfigError, match="counts"):
            run_from_texts(replace(riverbank, counts=None), options())

"""Attack-scenario orchestration tests."""

import numpy as np
import pytest

from keytap.datasets import extract_dataset
from keytap.defense import EqConfig
from keytap.errors import ContractError
from keytap.features import MfccConfig
from keytap.scenarios import (DEFAULT_RETENTION_SCHEDULE,
                              ENGLISH_FREQUENCY_ORDER, KIND_COMPLETE,
                              ScenarioReport, ScenarioSpec, classify_device,
                              make_frequency_subset, mfcc_config_for_length,
                              run_channel_comparison, run_complete_profiling,
                              run_countermeasure_eval, run_model_profiling,
                              run_user_profiling, sweep_segment_length)
from keytap.synth import CorpusSpec, build_corpus

FEW_KEYS = ("a", "b", "c", "d", "e")


@pytest.fixture(scope="module")
def small_data():
    spec = CorpusSpec(seed=31, samples_per_key=8, keys=FEW_KEYS,
                      separation=2.0)
    segset, _ = build_corpus(spec)
    return extract_dataset(segset, "mfcc", MfccConfig())


@pytest.fixture(scope="module")
def two_unit_data():
    spec = CorpusSpec(seed=32, samples_per_key=6, keys=FEW_KEYS,
                      separation=2.0, n_models=2, units_per_model=2,
                      n_users=2, unit_jitter=0.02, user_amp_sigma=0.3)
    segset, _ = build_corpus(spec)
    return extract_dataset(segset, "mfcc", MfccConfig())


class TestRetentionSchedule:
    def test_frequency_order_is_letter_permutation(self):
        assert sorted(ENGLISH_FREQUENCY_ORDER) == sorted(
            "abcdefghijklmnopqrstuvwxyz")
        assert ENGLISH_FREQUENCY_ORDER[0] == "e"

    def test_schedule_shape(self):
        assert len(DEFAULT_RETENTION_SCHEDULE) == 26
        assert sum(DEFAULT_RETENTION_SCHEDULE) == 105
        assert all(a >= b for a, b in zip(DEFAULT_RETENTION_SCHEDULE,
                                          DEFAULT_RETENTION_SCHEDULE[1:]))
        assert DEFAULT_RETENTION_SCHEDULE[0] == 10
        assert DEFAULT_RETENTION_SCHEDULE[-1] == 1


@pytest.fixture(scope="module")
def full_data():
    segset, _ = build_corpus(CorpusSpec(seed=33, samples_per_key=10))
    return extract_dataset(segset, "mfcc", MfccConfig())


class TestFrequencySubset:

    def test_counts_follow_schedule(self, full_data):
        sub = make_frequency_subset(full_data, seed=0)
        assert sub.n_samples == 105
        counts = {k: sub.labels.count(k) for k in set(sub.labels)}
        for rank, letter in enumerate(ENGLISH_FREQUENCY_ORDER):
            assert counts[letter] == DEFAULT_RETENTION_SCHEDULE[rank]

    def test_seed_changes_selection(self, full_data):
        a = make_frequency_subset(full_data, seed=0)
        b = make_frequency_subset(full_data, seed=1)
        assert not np.array_equal(a.ids, b.ids)
        c = make_frequency_subset(full_data, seed=0)
        assert np.array_equal(a.ids, c.ids)

    def test_insufficient_samples_rejected(self, full_data):
        thin = full_data.subset(np.arange(0, full_data.n_samples, 2))
        with pytest.raises(ContractError, match="schedule"):
            make_frequency_subset(thin, seed=0)

    def test_schedule_validation(self, full_data):
        with pytest.raises(ContractError):
            make_frequency_subset(full_data, 0, schedule=(10,) * 25)
        increasing = (1,) + (2,) * 25
        with pytest.raises(ContractError):
            make_frequency_subset(full_data, 0, schedule=increasing)
        with_zero = (10,) * 25 + (0,)
        with pytest.raises(ContractError):
            make_frequency_subset(full_data, 0, schedule=with_zero)


class TestScenarioSpec:
    def test_kind_checked(self):
        with pytest.raises(ContractError):
            ScenarioSpec(kind="Nonsense")

    def test_rfe_fraction_checked(self):
        with pytest.raises(ContractError):
            ScenarioSpec(kind=KIND_COMPLETE, rfe_fraction=0.0)


class TestScenarioReport:
    def test_accuracy_bounds_checked(self):
        with pytest.raises(ContractError):
            ScenarioReport(kind=KIND_COMPLETE, top_n=(1,), mean={1: 1.5},
                           std={}, baseline={1: 0.2}, n_repetitions=1,
                           n_classes=5)

    def test_std_required_for_repeats(self):
        with pytest.raises(ContractError):
            ScenarioReport(kind=KIND_COMPLETE, top_n=(1,), mean={1: 0.5},
                           std={}, baseline={1: 0.2}, n_repetitions=3,
                           n_classes=5)

    def test_to_dict_stringifies_top_n_keys(self):
        rep = ScenarioReport(kind=KIND_COMPLETE, top_n=(1, 5),
                             mean={1: 0.5, 5: 0.9}, std={},
                             baseline={1: 0.2, 5: 1.0}, n_repetitions=1,
                             n_classes=5)
        doc = rep.to_dict()
        assert doc["mean"] == {"1": 0.5, "5": 0.9}
        assert doc["baseline"]["5"] == 1.0


class TestCompleteProfiling:
    def test_report_shape(self, small_data):
        rep = run_complete_profiling(small_data, folds=4, top_n=(1, 5),
                                     rfe_fraction=None, seed=0)
        assert rep.kind == KIND_COMPLETE
        assert rep.n_repetitions == 4
        assert set(rep.mean) == {1, 5}
        assert set(rep.std) == {1, 5}
        assert rep.n_classes == len(FEW_KEYS)

    def test_top_n_at_class_count_is_one(self, small_data):
        rep = run_complete_profiling(small_data, folds=4, top_n=(1, 5),
                                     rfe_fraction=None, seed=0)
        # n = 5 = #classes: every ranking contains the true label
        assert rep.mean[5] == 1.0
        assert rep.baseline[5] == 1.0

    def test_seed_reproducible(self, small_data):
        a = run_complete_profiling(small_data, folds=3, top_n=(1,),
                                   rfe_fraction=0.5, seed=7)
        b = run_complete_profiling(small_data, folds=3, top_n=(1,),
                                   rfe_fraction=0.5, seed=7)
        assert a.mean == b.mean and a.std == b.std

    def test_separable_corpus_is_learnable(self, small_data):
        rep = run_complete_profiling(small_data, folds=4, top_n=(1,),
                                     rfe_fraction=None, seed=0)
        assert rep.mean[1] >= 0.9


class TestUserProfiling:
    def test_disjointness_enforced(self, small_data):
        with pytest.raises(ContractError, match="leak"):
            run_user_profiling(small_data, small_data, top_n=(1,))

    def test_cross_unit_transfer(self, two_unit_data):
        model0 = two_unit_data.meta[0].device_model
        user0 = two_unit_data.meta[0].user
        units = sorted({m.device_unit for m in two_unit_data.meta
                        if m.device_model == model0})
        train = two_unit_data.filter(user=user0, device_unit=units[0])
        test = two_unit_data.filter(user=user0, device_unit=units[1])
        rep = run_user_profiling(train, test, top_n=(1, 5))
        assert rep.n_repetitions == 1
        assert rep.mean[1] > rep.baseline[1]

    def test_repetitions_produce_spread(self, two_unit_data):
        model0 = two_unit_data.meta[0].device_model
        user0 = two_unit_data.meta[0].user
        units = sorted({m.device_unit for m in two_unit_data.meta
                        if m.device_model == model0})
        train = two_unit_data.filter(user=user0, device_unit=units[0])
        test = two_unit_data.filter(user=user0, device_unit=units[1])
        rep = run_user_profiling(train, test, top_n=(1,), repetitions=3,
                                 seed=5)
        assert rep.n_repetitions == 3
        assert 1 in rep.std


class TestDeviceClassification:
    def test_known_model_identified(self, two_unit_data):
        target = two_unit_data.meta[0].device_model
        target_user = two_unit_data.meta[0].user
        query = two_unit_data.filter(device_model=target, user=target_user)
        db_idx = [i for i, m in enumerate(two_unit_data.meta)
                  if m.user != target_user]
        db = two_unit_data.subset(db_idx)
        label, confidence, known = classify_device(db, query.X)
        assert label == target
        assert known and confidence > 0.33

    def test_single_model_db_is_degenerate(self, small_data):
        half = small_data.subset(np.arange(0, small_data.n_samples, 2))
        rest = small_data.subset(np.arange(1, small_data.n_samples, 2))
        label, confidence, known = classify_device(half, rest.X)
        # one candidate model: the vote carries no information
        assert confidence == 0.0
        assert not known


class TestModelProfiling:
    def test_victim_in_db_rejected(self, two_unit_data):
        victim_user = two_unit_data.meta[0].user
        victim = two_unit_data.filter(user=victim_user)
        with pytest.raises(ContractError, match="victim"):
            run_model_profiling(two_unit_data, victim)

    def test_single_donor_and_crowd(self, two_unit_data):
        victim_user = two_unit_data.meta[0].user
        victim_model = two_unit_data.meta[0].device_model
        victim = two_unit_data.filter(user=victim_user,
                                      device_model=victim_model)
        db_idx = [i for i, m in enumerate(two_unit_data.meta)
                  if m.user != victim_user]
        db = two_unit_data.subset(db_idx)
        single = run_model_profiling(db, victim, crowd=False, top_n=(1, 5),
                                     seed=3)
        crowd = run_model_profiling(db, victim, crowd=True, top_n=(1, 5),
                                    seed=3)
        assert single.extras["device"]["identified_model"] == victim_model
        assert len(single.extras["device"]["donor_users"]) == 1
        assert len(crowd.extras["device"]["donor_users"]) >= 1
        assert crowd.mean[5] >= single.mean[5] - 0.25

    def test_training_excludes_victim_unit(self, two_unit_data):
        victim_user = two_unit_data.meta[0].user
        victim_model = two_unit_data.meta[0].device_model
        victim_unit = two_unit_data.meta[0].device_unit
        victim = two_unit_data.filter(user=victim_user,
                                      device_unit=victim_unit)
        db_idx = [i for i, m in enumerate(two_unit_data.meta)
                  if m.user != victim_user]
        db = two_unit_data.subset(db_idx)
        rep = run_model_profiling(db, victim, crowd=True, top_n=(1,))
        donor_units = {
            m.device_unit for m in db.meta
            if m.device_model == victim_model
            and m.user in rep.extras["device"]["donor_users"]}
        # the victim's own unit never contributes training data
        assert victim_unit not in donor_units or len(donor_units) > 1


class TestSegmentLengthTools:
    def test_config_shrinks_below_window(self):
        base = MfccConfig()
        cfg = mfcc_config_for_length(0.003, base)
        assert cfg.window_s == pytest.approx(0.003)
        assert cfg.step_s <= cfg.window_s
        unchanged = mfcc_config_for_length(0.050, base)
        assert unchanged.window_s == base.window_s

    def test_sweep_reports_per_length(self):
        spec = CorpusSpec(seed=35, samples_per_key=6, keys=FEW_KEYS,
                          separation=2.0)
        segset, _ = build_corpus(spec)
        out = sweep_segment_length(segset, lengths=(0.003, 0.050, 0.100),
                                   folds=3, top_n=(1,), seed=0)
        assert set(out) == {0.003, 0.050, 0.100}
        # every truncation stays usable on a separable corpus
        for rep in out.values():
            assert rep.mean[1] > rep.baseline[1]


class TestRobustnessSweeps:
    def test_channel_comparison_identity_and_order(self):
        spec = CorpusSpec(seed=36, samples_per_key=6, keys=FEW_KEYS,
                          separation=0.6)
        segset, _ = build_corpus(spec)
        out = run_channel_comparison(segset, kbps_list=(70, 20), folds=3,
                                     top_n=(1,), seed=0)
        data = extract_dataset(segset, "mfcc", MfccConfig())
        plain = run_complete_profiling(data, folds=3, top_n=(1,),
                                       rfe_fraction=None, seed=0)
        assert out[70].mean[1] == plain.mean[1]
        assert out[20].mean[1] <= out[70].mean[1]

    def test_countermeasure_eval_shape(self):
        spec = CorpusSpec(seed=37, samples_per_key=6, keys=FEW_KEYS,
                          separation=2.0)
        segset, _ = build_corpus(spec)
        out = run_countermeasure_eval(segset, EqConfig(seed=1), folds=3,
                                      top_n=(1,), kinds=("mfcc",), seed=0)
        assert set(out) == {"mfcc"}
        assert set(out["mfcc"]) == {"clean", "equalized"}
        assert out["mfcc"]["equalized"].mean[1] <= out["mfcc"]["clean"].mean[1]

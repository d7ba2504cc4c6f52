"""Tests for models, datasets, client splits and the learning loops."""

import math

import numpy as np
import pytest

from adversary.behaviors import AdversaryKind, RecipientRule
from core.errors import DatasetError, DimensionMismatchError, InvalidParamsError
from learning.data import (
    Dataset, generate_blobs, load_csv_dataset, train_test_split, write_csv_dataset,
)
from learning.loops import (
    AggregationRule, Architecture, LearningConfig, LearningContext, aggregate, centralized_round,
    decentralized_round, initial_state, learning_rate, mean_accuracy, run_learning,
)
from learning.models import MAX_HIDDEN, Model, ModelKind, accuracy, loss_and_gradient, predict
from learning.splits import DataSplit, SplitKind, mild_shares, split_dataset
from core.params import SystemParams

FD_STEP = 1e-6


def finite_difference(model, theta, x, y):
    grad = np.zeros_like(theta)
    for i in range(theta.size):
        up, down = theta.copy(), theta.copy()
        up[i] += FD_STEP
        down[i] -= FD_STEP
        grad[i] = (loss_and_gradient(model, up, x, y)[0] - loss_and_gradient(model, down, x, y)[0]) / (2 * FD_STEP)
    return grad


def small_data(seed=0):
    return generate_blobs(num_classes=3, per_class=20, input_dim=4, seed=seed)


def context(n, t, f, rule, data=None, identical=False, **kwargs):
    data = data if data is not None else small_data()
    model = Model(ModelKind.SOFTMAX, data.input_dim, data.num_classes)
    cfg = LearningConfig(n=n, t=t, f=f, model=model, rule=rule, **kwargs)
    if identical:
        split = DataSplit(SplitKind.UNIFORM, (data,) * n)
    else:
        split = split_dataset(data, n, SplitKind.UNIFORM, seed=cfg.seed)
    return LearningContext(config=cfg, split=split, test=data)


# ── models ─────────────────────────────────────────────────────────


class TestModels:

    def test_param_counts(self):
        assert Model(ModelKind.SOFTMAX, 16, 10).param_count == 170
        assert Model(ModelKind.MLP, 16, 10, hidden=8).param_count == 226

    def test_hidden_limit(self):
        with pytest.raises(InvalidParamsError):
            Model(ModelKind.MLP, 4, 3, hidden=MAX_HIDDEN + 1)

    def test_wrong_theta_size(self):
        model = Model(ModelKind.SOFTMAX, 4, 3)
        with pytest.raises(DimensionMismatchError):
            loss_and_gradient(model, np.zeros(7), np.zeros((2, 4)), [0, 1])

    def test_zero_softmax_is_uniform(self):
        model = Model(ModelKind.SOFTMAX, 4, 5)
        x = np.random.default_rng(0).normal(size=(6, 4))
        loss, _ = loss_and_gradient(model, model.init_params(), x, [0, 1, 2, 3, 4, 0])
        assert loss == pytest.approx(math.log(5))

    @pytest.mark.parametrize("kind", list(ModelKind))
    @pytest.mark.parametrize("seed", range(3))
    def test_gradient_matches_finite_differences(self, kind, seed):
        rng = np.random.default_rng(seed)
        model = Model(kind, 3, 4, hidden=5)
        theta = rng.normal(0.0, 0.5, size=model.param_count)
        x = rng.normal(size=(6, 3))
        y = rng.integers(0, 4, size=6)
        _, grad = loss_and_gradient(model, theta, x, y)
        np.testing.assert_allclose(grad, finite_difference(model, theta, x, y), rtol=1e-5, atol=1e-7)

    @pytest.mark.parametrize("kind", list(ModelKind))
    def test_duplicated_batch_is_unchanged(self, kind):
        rng = np.random.default_rng(4)
        model = Model(kind, 3, 4, hidden=5)
        theta = rng.normal(size=model.param_count)
        x, y = rng.normal(size=(5, 3)), rng.integers(0, 4, size=5)
        loss, grad = loss_and_gradient(model, theta, x, y)
        loss2, grad2 = loss_and_gradient(model, theta, np.vstack([x, x]), np.concatenate([y, y]))
        assert loss2 == pytest.approx(loss, rel=1e-12)
        np.testing.assert_allclose(grad2, grad, rtol=1e-12, atol=1e-15)

    def test_mlp_init_is_seeded(self):
        model = Model(ModelKind.MLP, 4, 3, hidden=6)
        np.testing.assert_array_equal(model.init_params(3), model.init_params(3))
        assert model.init_params(3).size == model.param_count

    def test_predict_and_accuracy(self):
        data = small_data()
        model = Model(ModelKind.SOFTMAX, 4, 3)
        theta = np.random.default_rng(1).normal(size=model.param_count)
        assert predict(model, theta, data.features).shape == (len(data),)
        assert 0.0 <= accuracy(model, theta, data.features, data.labels) <= 1.0


# ── datasets ───────────────────────────────────────────────────────


class TestDatasets:

    def test_blobs_shape_and_seed(self):
        a, b = generate_blobs(seed=3), generate_blobs(seed=3)
        assert len(a) == 2000 and a.input_dim == 16 and a.num_classes == 10
        np.testing.assert_array_equal(a.features, b.features)

    def test_blobs_need_samples(self):
        with pytest.raises(DatasetError):
            generate_blobs(per_class=0)

    def test_label_range(self):
        with pytest.raises(DatasetError):
            Dataset(np.zeros((2, 3)), [0, 3], num_classes=3)

    def test_load_scales_and_skips_header(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("label,a,b\n3,0,255\n1,255,0\n")
        data = load_csv_dataset(str(path))
        np.testing.assert_array_equal(data.labels, [3, 1])
        np.testing.assert_array_equal(data.features, [[0.0, 1.0], [1.0, 0.0]])
        assert data.num_classes == 4

    def test_load_reports_row(self, tmp_path):
        path = tmp_path / "data.csv"
        path.write_text("0,1,2\n1,3,4\n2,x,6\n")
        with pytest.raises(DatasetError, match="row 3"):
            load_csv_dataset(str(path))

    def test_load_empty_file(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(DatasetError):
            load_csv_dataset(str(path))

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(DatasetError):
            load_csv_dataset(str(tmp_path / "missing.csv"))

    def test_write_then_load(self, tmp_path):
        data = small_data()
        path = str(tmp_path / "blobs.csv")
        write_csv_dataset(data, path, max_value=1.0)
        again = load_csv_dataset(path, max_value=1.0, num_classes=3)
        np.testing.assert_array_equal(again.features, data.features)
        np.testing.assert_array_equal(again.labels, data.labels)

    def test_train_test_split(self):
        data = generate_blobs(num_classes=2, per_class=50, input_dim=3)
        train, test = train_test_split(data, 0.1, seed=0)
        assert (len(train), len(test)) == (90, 10)
        rows = {tuple(r) for r in train.features} | {tuple(r) for r in test.features}
        assert len(rows) == 100
        with pytest.raises(DatasetError):
            train_test_split(data, 1.0)


class TestSplits:

    data = generate_blobs(num_classes=10, per_class=20, input_dim=4)

    @pytest.mark.parametrize("kind", list(SplitKind))
    def test_equal_shard_sizes(self, kind):
        split = split_dataset(self.data, 10, kind, seed=1)
        assert len(split.shards) == 10
        assert {len(s) for s in split.shards} == {split.shard_size}
        assert split.shard_size > 0

    def test_mild_shares(self):
        shares = mild_shares(10, 3)
        assert shares.sum() == pytest.approx(1.0)
        assert shares[3] == pytest.approx(0.05)
        assert shares[4] == pytest.approx(0.15)
        assert sorted(shares)[1:-1] == pytest.approx([0.1] * 8)

    def test_extreme_gives_at_most_two_classes(self):
        split = split_dataset(self.data, 10, SplitKind.EXTREME, seed=2)
        assert max(split.classes_per_client()) <= 2

    def test_uniform_mixes_classes(self):
        split = split_dataset(self.data, 2, SplitKind.UNIFORM, seed=3)
        assert min(split.classes_per_client()) > 2

    def test_too_many_clients(self):
        tiny = generate_blobs(num_classes=2, per_class=2, input_dim=2)
        with pytest.raises(DatasetError):
            split_dataset(tiny, 10, SplitKind.UNIFORM)


# ── loops ──────────────────────────────────────────────────────────


class TestLearningRate:

    def test_schedule(self):
        assert learning_rate(0.5, 100, 0) == 0.5
        assert learning_rate(0.5, 100, 100) == pytest.approx(0.25)
        assert learning_rate(1.0, 10, 10) == pytest.approx(0.1)
        assert all(learning_rate(0.5, 50, t) > 0 for t in range(50))


class TestMeanAccuracy:

    @pytest.mark.parametrize("value,count", [(0.7, 9), (0.6833333333333333, 9), (0.1, 3)])
    def test_equal_accuracies_are_exact(self, value, count):
        assert mean_accuracy([value] * count) == value

    def test_within_range(self):
        rng = np.random.default_rng(3)
        for _ in range(200):
            accs = list(rng.integers(0, 200, size=9) / 200)
            m = mean_accuracy(accs)
            assert min(accs) <= m <= max(accs)
            assert m == pytest.approx(sum(accs) / len(accs))


class TestLearningConfig:

    def test_decentralized_needs_agreement_rule(self):
        with pytest.raises(InvalidParamsError):
            context(4, 1, 0, AggregationRule.MEAN, architecture=Architecture.DECENTRALIZED)

    def test_rejects_oscillation_attack(self):
        with pytest.raises(InvalidParamsError):
            context(4, 1, 1, AggregationRule.MEAN, attack=AdversaryKind.MD_OSCILLATION)

    def test_rejects_bad_system(self):
        with pytest.raises(InvalidParamsError):
            context(3, 1, 1, AggregationRule.MEAN)


class TestCentralized:

    def test_single_client_is_plain_gradient_descent(self):
        ctx = context(1, 0, 0, AggregationRule.MEAN, batch_size=None, learning_rate=0.3)
        shard = ctx.split.shards[0]
        _, g = loss_and_gradient(ctx.config.model, np.zeros(ctx.config.model.param_count),
                                 shard.features, shard.labels)
        state = centralized_round(initial_state(ctx), ctx)
        np.testing.assert_allclose(state.thetas[0], -0.3 * g, atol=1e-12)
        assert state.iteration == 1

    @pytest.mark.parametrize("rule", list(AggregationRule))
    def test_identical_gradients_pass_through(self, rule):
        ctx = context(4, 1, 0, rule, identical=True, batch_size=None, learning_rate=0.3)
        data = ctx.test
        _, g = loss_and_gradient(ctx.config.model, np.zeros(ctx.config.model.param_count),
                                 data.features, data.labels)
        state = centralized_round(initial_state(ctx), ctx)
        np.testing.assert_allclose(state.thetas[0], -0.3 * g, atol=1e-9)

    def test_geometric_median_resists_sign_flip(self):
        rng = np.random.default_rng(5)
        params = SystemParams(n=10, t=3, f=1, d=6)
        base = rng.normal(size=6) * 5
        honest = base + 0.1 * rng.normal(size=(9, 6))
        vectors = np.vstack([honest, -honest[:1]])
        target = aggregate(AggregationRule.GEO_MEDIAN, honest, params)
        robust = aggregate(AggregationRule.GEO_MEDIAN, vectors, params)
        plain = aggregate(AggregationRule.MEAN, vectors, params)
        assert np.linalg.norm(robust - target) < np.linalg.norm(plain - target)

    def test_single_iteration_records_one_row(self):
        trace = run_learning(context(4, 1, 1, AggregationRule.KRUM, iterations=1))
        assert len(trace.records) == 1
        assert 0.0 <= trace.final_accuracy <= 1.0

    @pytest.mark.parametrize("rule", [AggregationRule.MEAN, AggregationRule.KRUM, AggregationRule.BOX_GEO])
    def test_attack_is_irrelevant_without_byzantine_clients(self, rule):
        traces = [
            run_learning(context(4, 1, 0, rule, iterations=3, attack=attack))
            for attack in (AdversaryKind.SIGN_FLIP, AdversaryKind.CRASH, AdversaryKind.FIXED_VECTOR)
        ]
        for other in traces[1:]:
            assert other.records == traces[0].records

    def test_loss_decreases_with_full_batches(self):
        ctx = context(4, 1, 0, AggregationRule.MEAN, batch_size=None, learning_rate=0.05, iterations=40)
        losses = [r.loss for r in run_learning(ctx).records]
        assert all(b <= a + 1e-12 for a, b in zip(losses, losses[1:]))

    def test_progress_callback(self):
        seen = []
        run_learning(context(4, 1, 0, AggregationRule.MEAN, iterations=3), on_iteration=lambda i, n: seen.append((i, n)))
        assert seen == [(1, 3), (2, 3), (3, 3)]


class TestDecentralized:

    def test_identical_data_keeps_models_equal(self):
        ctx = context(4, 1, 0, AggregationRule.BOX_GEO, identical=True, batch_size=None,
                      architecture=Architecture.DECENTRALIZED)
        state = initial_state(ctx)
        assert len(state.thetas) == 4
        for _ in range(3):
            state = decentralized_round(state, ctx)
        for theta in state.thetas[1:]:
            np.testing.assert_array_equal(theta, state.thetas[0])

    @pytest.mark.parametrize("rule", [AggregationRule.BOX_GEO, AggregationRule.MD_GEO, AggregationRule.BOX_MEAN])
    def test_runs_under_sign_flip(self, rule):
        ctx = context(4, 1, 1, rule, architecture=Architecture.DECENTRALIZED, iterations=4)
        trace = run_learning(ctx)
        assert len(trace.records) == 4
        assert len(trace.agreed_diameters) == 4
        assert len(trace.clients) == 4 * 3
        assert all(0.0 <= r.accuracy_min <= r.accuracy_mean <= 1.0 for r in trace.records)

    @pytest.mark.parametrize("rule", [AggregationRule.BOX_MEAN, AggregationRule.BOX_GEO])
    def test_partial_delivery_splits_honest_models(self, rule):
        def thetas(recipients):
            ctx = context(10, 2, 1, rule, batch_size=None, architecture=Architecture.DECENTRALIZED,
                          attack_recipients=recipients)
            return decentralized_round(initial_state(ctx), ctx).thetas

        everyone = thetas(RecipientRule.ALL)
        for theta in everyone[1:]:
            np.testing.assert_array_equal(theta, everyone[0])
        half = thetas(RecipientRule.HALF)
        assert any(not np.array_equal(theta, half[0]) for theta in half[1:])


# ── longer runs ────────────────────────────────────────────────────


def suite_context(f, rule, architecture, seed=0, split=SplitKind.MILD):
    data = generate_blobs(seed=seed)
    train, test = train_test_split(data, 0.1, seed=seed)
    model = Model(ModelKind.SOFTMAX, data.input_dim, data.num_classes)
    cfg = LearningConfig(n=10, t=2, f=f, model=model, rule=rule, architecture=architecture, seed=seed)
    return LearningContext(config=cfg, split=split_dataset(train, 10, split, seed=seed), test=test)


@pytest.mark.slow
class TestLearningSuite:

    def test_baseline_accuracy(self):
        trace = run_learning(suite_context(0, AggregationRule.MEAN, Architecture.CENTRALIZED))
        assert trace.final_accuracy >= 0.95

    def test_separable_blobs_are_learned(self):
        data = generate_blobs(spread=0.0)
        model = Model(ModelKind.SOFTMAX, data.input_dim, data.num_classes)
        cfg = LearningConfig(n=1, t=0, f=0, model=model, rule=AggregationRule.MEAN, iterations=300)
        ctx = LearningContext(config=cfg, split=split_dataset(data, 1, SplitKind.UNIFORM), test=data)
        assert run_learning(ctx).final_accuracy >= 0.99

    def test_hyperbox_agreement_close_to_baseline(self):
        baseline = run_learning(suite_context(0, AggregationRule.MEAN, Architecture.CENTRALIZED)).final_accuracy
        attacked = run_learning(suite_context(1, AggregationRule.BOX_GEO, Architecture.DECENTRALIZED))
        assert attacked.final_accuracy >= 0.75 * baseline


SUITE_SEEDS = (1, 2, 3)


def median_accuracy(f, rule, architecture, split=SplitKind.MILD):
    return float(np.median([
        run_learning(suite_context(f, rule, architecture, seed, split)).final_accuracy for seed in SUITE_SEEDS
    ]))


@pytest.mark.slow
class TestRuleOrdering:

    def test_geometric_rules_beat_krum_on_extreme_split(self):
        acc = {
            rule: median_accuracy(2, rule, Architecture.CENTRALIZED, SplitKind.EXTREME)
            for rule in (AggregationRule.KRUM, AggregationRule.MULTI_KRUM,
                         AggregationRule.MD_GEO, AggregationRule.BOX_GEO)
        }
        for rule in (AggregationRule.MD_GEO, AggregationRule.BOX_GEO):
            assert acc[rule] > acc[AggregationRule.KRUM], acc
            assert acc[rule] > acc[AggregationRule.MULTI_KRUM], acc
        assert acc[AggregationRule.MD_GEO] >= acc[AggregationRule.BOX_GEO] - 0.02, acc

    @pytest.mark.parametrize("rule", [AggregationRule.MD_GEO, AggregationRule.BOX_GEO])
    def test_decentralized_partial_delivery_stays_near_baseline(self, rule):
        baseline = median_accuracy(0, AggregationRule.MEAN, Architecture.CENTRALIZED)
        assert median_accuracy(1, rule, Architecture.DECENTRALIZED) >= 0.75 * baseline

"""Tests for learners, SGD, accuracy, aggregation and the parameter codec."""

import numpy as np
import pytest

from app.models.dataset import Dataset
from app.models.learner import Model, ModelSpec, ParamVector, TrainConfig
from app.services.data_service import generate_synthetic
from app.services.training_service import (
    aggregate,
    decode_params,
    encode_params,
    evaluate_accuracy,
    fedavg_weights,
    init_model,
    load_checkpoint,
    loss_and_gradient,
    predict,
    save_checkpoint,
    train_local,
)
from app.utils.errors import (
    AggregationError,
    DataValidationError,
    EmptyDatasetError,
    ModelShapeError,
    OutputError,
)


def numeric_gradient(model: Model, data: Dataset, eps: float = 1e-6) -> np.ndarray:
    base = np.array(model.params.values)
    grad = np.zeros_like(base)
    for i in range(base.size):
        plus, minus = base.copy(), base.copy()
        plus[i] += eps
        minus[i] -= eps
        loss_plus, _ = loss_and_gradient(model.with_values(plus), data)
        loss_minus, _ = loss_and_gradient(model.with_values(minus), data)
        grad[i] = (loss_plus - loss_minus) / (2 * eps)
    return grad


class TestInitModel:
    def test_deterministic(self, softmax_spec):
        assert init_model(softmax_spec, 3) == init_model(softmax_spec, 3)
        assert init_model(softmax_spec, 3) != init_model(softmax_spec, 4)

    def test_biases_start_at_zero(self, mlp_spec):
        tensors = init_model(mlp_spec, 0).params.tensors()
        assert not tensors["b1"].any()
        assert not tensors["b2"].any()
        assert tensors["W1"].any()


class TestGradients:
    """Analytic gradients agree with central differences."""

    @pytest.mark.parametrize("seed", range(25))
    @pytest.mark.parametrize("spec_fixture", ["softmax_spec", "mlp_spec"])
    def test_gradient_check(self, request, spec_fixture, seed, synthetic_data):
        spec: ModelSpec = request.getfixturevalue(spec_fixture)
        data = synthetic_data.subset(np.arange(seed % 6, synthetic_data.n, 6))
        model = init_model(spec, 100 + seed)
        _, analytic = loss_and_gradient(model, data)
        numeric = numeric_gradient(model, data)

        abs_diff = np.abs(analytic.values - numeric)
        rel_diff = abs_diff / np.maximum(np.abs(numeric), 1e-12)
        assert np.all((abs_diff < 1e-7) | (rel_diff < 1e-4))

    def test_gradient_layout(self, softmax_spec, synthetic_data):
        model = init_model(softmax_spec, 0)
        loss, grad = loss_and_gradient(model, synthetic_data)
        assert grad.layout == model.params.layout
        assert loss > 0.0


class TestTrainLocal:
    def test_reduces_loss(self, softmax_spec, node_data):
        model = init_model(softmax_spec, 1)
        trained = train_local(model, node_data.train, TrainConfig(epochs=5, seed=2))
        before, _ = loss_and_gradient(model, node_data.train)
        after, _ = loss_and_gradient(trained, node_data.train)
        assert after < before

    def test_tiny_learning_rate_keeps_model(self, softmax_spec, node_data):
        model = init_model(softmax_spec, 1)
        trained = train_local(model, node_data.train, TrainConfig(learning_rate=1e-15))
        np.testing.assert_allclose(trained.params.values, model.params.values, rtol=0, atol=1e-12)

    def test_deterministic_per_seed(self, mlp_spec, node_data):
        model = init_model(mlp_spec, 1)
        cfg = TrainConfig(epochs=2, batch_size=8, seed=5)
        assert train_local(model, node_data.train, cfg) == train_local(model, node_data.train, cfg)

    def test_does_not_mutate_input(self, softmax_spec, node_data):
        model = init_model(softmax_spec, 1)
        snapshot = np.array(model.params.values)
        train_local(model, node_data.train, TrainConfig())
        np.testing.assert_array_equal(model.params.values, snapshot)

    def test_empty_dataset(self, softmax_spec):
        empty = Dataset(np.zeros((0, 5)), np.zeros(0, dtype=np.int64), 4)
        with pytest.raises(EmptyDatasetError):
            train_local(init_model(softmax_spec, 0), empty, TrainConfig())

    def test_dimension_mismatch(self, node_data):
        spec = ModelSpec(input_dim=3, num_classes=4)
        with pytest.raises(ModelShapeError):
            train_local(init_model(spec, 0), node_data.train, TrainConfig())

    def test_separable_blobs_match_reference_fit(self):
        data = generate_synthetic(num_classes=2, dim=2, per_class=100, separation=6.0, seed=21)
        spec = ModelSpec(input_dim=2, num_classes=2)
        trained = train_local(init_model(spec, 0), data, TrainConfig(epochs=50, seed=1))

        # closed-form least-squares linear classifier on the same rows
        design = np.hstack([data.features, np.ones((data.n, 1))])
        target = np.where(data.labels == 1, 1.0, -1.0)
        coef, *_ = np.linalg.lstsq(design, target, rcond=None)
        reference = float(np.mean((design @ coef > 0) == (data.labels == 1)))

        accuracy = evaluate_accuracy(trained, data)
        assert reference >= 0.95
        assert accuracy >= 0.95
        assert accuracy >= reference - 0.02


class TestEvaluateAccuracy:
    def test_well_trained_model_is_accurate(self, softmax_spec, node_data):
        model = train_local(init_model(softmax_spec, 0), node_data.train, TrainConfig(epochs=20))
        assert evaluate_accuracy(model, node_data.test) > 0.8

    def test_range_and_ties(self, softmax_spec, synthetic_data, constant_model):
        zero = constant_model(softmax_spec, 0.0)
        # all logits tie, so every row predicts class 0
        assert set(predict(zero, synthetic_data.features)) == {0}
        acc = evaluate_accuracy(zero, synthetic_data)
        assert acc == pytest.approx(0.25)

    def test_row_order_does_not_matter(self, softmax_spec, synthetic_data):
        model = train_local(init_model(softmax_spec, 0), synthetic_data, TrainConfig(epochs=2))
        expected = evaluate_accuracy(model, synthetic_data)
        rng = np.random.default_rng(8)
        for _ in range(5):
            shuffled = synthetic_data.subset(rng.permutation(synthetic_data.n))
            assert evaluate_accuracy(model, shuffled) == expected

    def test_empty(self, softmax_spec):
        empty = Dataset(np.zeros((0, 5)), np.zeros(0, dtype=np.int64), 4)
        with pytest.raises(EmptyDatasetError):
            evaluate_accuracy(init_model(softmax_spec, 0), empty)


class TestAggregate:
    """Weighted parameter averaging."""

    def test_weighted_sum(self, softmax_spec, constant_model):
        result = aggregate([constant_model(softmax_spec, 1.0), constant_model(softmax_spec, 3.0)],
                           [0.25, 0.75])
        np.testing.assert_allclose(result.params.values, 2.5)

    def test_single_model_identity(self, softmax_spec):
        model = init_model(softmax_spec, 9)
        assert aggregate([model], [1.0]) == model

    def test_within_coordinate_envelope(self, mlp_spec):
        models = [init_model(mlp_spec, s) for s in range(5)]
        rng = np.random.default_rng(0)
        for _ in range(20):
            weights = rng.dirichlet(np.ones(5)).tolist()
            weights[-1] = 1.0 - sum(weights[:-1])
            result = aggregate(models, weights).params.values
            stacked = np.stack([m.params.values for m in models])
            assert np.all(result >= stacked.min(axis=0))
            assert np.all(result <= stacked.max(axis=0))

    def test_nested_weights_combine(self, mlp_spec):
        a, b, c = (init_model(mlp_spec, s) for s in (1, 2, 3))
        inner = aggregate([a, b], [0.25, 0.75])
        nested = aggregate([inner, c], [0.4, 0.6])
        flat = aggregate([a, b, c], [0.4 * 0.25, 0.4 * 0.75, 0.6])
        np.testing.assert_allclose(nested.params.values, flat.params.values, rtol=0, atol=1e-12)

    def test_identical_models_exact(self, mlp_spec):
        model = init_model(mlp_spec, 4)
        assert aggregate([model] * 7, [1 / 7] * 7) == model

    def test_zero_weight_ignores_model(self, softmax_spec):
        a, b = init_model(softmax_spec, 1), init_model(softmax_spec, 2)
        assert aggregate([a, b], [0.0, 1.0]) == b

    def test_weights_must_sum_to_one(self, softmax_spec):
        model = init_model(softmax_spec, 1)
        with pytest.raises(AggregationError):
            aggregate([model, model], [0.5, 0.6])

    def test_spec_mismatch(self, softmax_spec, mlp_spec):
        with pytest.raises(ModelShapeError):
            aggregate([init_model(softmax_spec, 0), init_model(mlp_spec, 0)], [0.5, 0.5])

    def test_empty(self):
        with pytest.raises(AggregationError):
            aggregate([], [])


class TestFedAvgWeights:
    def test_data_share(self):
        assert fedavg_weights([30, 70]) == [0.3, 0.7]

    def test_zero_total(self):
        with pytest.raises(AggregationError):
            fedavg_weights([0, 0])


class TestParamCodec:
    def test_encode_decode(self, mlp_spec):
        model = init_model(mlp_spec, 8)
        params, metadata = decode_params(encode_params(model.params, {"node": 3}))
        assert params == model.params
        assert metadata == {"node": 3}

    def test_bad_magic(self):
        with pytest.raises(DataValidationError):
            decode_params(b"XXXX\x00\x00\x00\x00")

    def test_checkpoint_file(self, tmp_path, softmax_spec):
        model = init_model(softmax_spec, 2)
        path = tmp_path / "node_0.pvec"
        save_checkpoint(model, path)
        assert load_checkpoint(path) == model

    def test_checkpoint_write_failure(self, tmp_path, softmax_spec):
        with pytest.raises(OutputError):
            save_checkpoint(init_model(softmax_spec, 2), tmp_path / "missing" / "node.pvec")

    def test_checkpoint_without_spec(self, tmp_path):
        path = tmp_path / "raw.pvec"
        path.write_bytes(encode_params(ParamVector(np.zeros(2), (("b", (2,)),))))
        with pytest.raises(DataValidationError):
            load_checkpoint(path)

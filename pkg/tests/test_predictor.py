import numpy as np
import pytest

from adastream.errors import ArgumentError, DivergenceError, ModelCorruptError, SchemaError
from adastream.features import FeatureVector
from adastream.ladder import DEFAULT_LADDER
from adastream.predictor import (PredictorModel, TrainConfig, TrainingExample,
                                 forward, forward_batch, load_model,
                                 loss_and_gradients, new_model, predict_classes,
                                 read_training_csv, save_model, train,
                                 train_arrays, write_training_csv)


def fv(*values):
    return FeatureVector(*values)


def zero_model():
    model = new_model(seed=0)
    for w in model.weights:
        w[:] = 0.0
    return model


def test_zero_weights_give_uniform_heads():
    model = zero_model()
    p_f, p_r = forward(model, fv(0.3, 0.1, 0.05, 0.2, 0.4, 0.5, 0.6))
    assert np.allclose(p_f, 0.1)
    assert np.allclose(p_r, 0.2)


def test_heads_normalize(rng):
    for seed in range(10):
        model = new_model(seed=seed)
        x = rng.uniform(0, 1, (8, 7))
        p_f, p_r = forward_batch(model, x)
        assert np.allclose(p_f.sum(axis=1), 1.0, atol=1e-6)
        assert np.allclose(p_r.sum(axis=1), 1.0, atol=1e-6)
        assert np.all(p_f > 0) and np.all(p_f < 1)


def test_forward_deterministic(rng):
    model = new_model(seed=3)
    x = fv(0.5, 0.2, 0.1, 0.3, 0.4, 0.8, 0.5)
    a = forward(model, x)
    b = forward(model, x)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_non_finite_weights_rejected():
    model = new_model(seed=0)
    model.weights[1][0, 0] = np.nan
    with pytest.raises(ModelCorruptError):
        forward(model, fv(0.5, 0.2, 0.1, 0.3, 0.4, 0.8, 0.5))


def _finite_difference(model, x, yf, yr, h=1e-5):
    fd_w, fd_b = [], []
    for arr_list, out in ((model.weights, fd_w), (model.biases, fd_b)):
        for arr in arr_list:
            g = np.zeros_like(arr)
            it = np.nditer(arr, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = arr[idx]
                arr[idx] = orig + h
                up, _, _ = loss_and_gradients(model, x, yf, yr)
                arr[idx] = orig - h
                down, _, _ = loss_and_gradients(model, x, yf, yr)
                arr[idx] = orig
                g[idx] = (up - down) / (2 * h)
            out.append(g)
    return fd_w, fd_b


def _relu_inputs_away_from_kink(model, x, margin=1e-3):
    h = x
    for i, (w, b) in enumerate(zip(model.weights, model.biases)):
        z = h @ w + b
        if i < len(model.weights) - 1:
            if np.abs(z).min() < margin:
                return False
            h = np.maximum(z, 0.0)
    return True


def test_gradients_match_finite_differences():
    checked = 0
    seed = 0
    rng_sizes = [(3,), (4,), (5, 3), (6, 4), (2,)]
    while checked < 50:
        rng = np.random.default_rng(seed)
        hidden = rng_sizes[seed % len(rng_sizes)]
        model = new_model(seed=seed, hidden_sizes=hidden)
        n = int(rng.integers(1, 5))
        x = rng.uniform(0, 1, (n, 7))
        yf = rng.integers(0, 10, n)
        yr = rng.integers(0, 5, n)
        seed += 1
        if not _relu_inputs_away_from_kink(model, x):
            continue  # finite differences are invalid across the rectifier kink
        _, gw, gb = loss_and_gradients(model, x, yf, yr)
        fd_w, fd_b = _finite_difference(model, x, yf, yr)
        for analytic, numeric in zip(gw + gb, fd_w + fd_b):
            denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-8)
            rel = np.abs(analytic - numeric) / denom
            assert rel.max() <= 1e-4
        checked += 1
    assert checked == 50


def test_single_example_loss_decreases_monotonically():
    examples = [TrainingExample(fv(0.5, 0.2, 0.1, 0.3, 0.4, 0.8, 0.5), 60, 720)]
    history = []
    train(examples, TrainConfig(epochs=10, batch_size=1, seed=0),
          loss_history=history)
    assert len(history) == 10
    assert all(a > b for a, b in zip(history, history[1:]))


def _separable_examples(rng, n=200):
    """Velocity splits the frame-rate label, bandwidth the resolution label."""
    examples = []
    for _ in range(n):
        nv = float(rng.uniform(0, 1))
        nb = float(rng.uniform(0, 1))
        target_f = 30 if nv < 0.5 else 120
        target_r = 360 if nb < 0.5 else 1080
        x = fv(float(rng.uniform(0, 1)), 0.1, 0.05, 0.2, 0.3, nv, nb)
        examples.append(TrainingExample(x, target_f, target_r))
    return examples


def test_separable_fixture_reaches_95_pct(rng):
    examples = _separable_examples(rng)
    model = train(examples, TrainConfig(epochs=80, batch_size=16, seed=1))
    x = np.stack([e.features.as_array() for e in examples])
    pred_f, pred_r = predict_classes(model, x)
    acc_f = np.mean([p == e.target_f for p, e in zip(pred_f, examples)])
    acc_r = np.mean([p == e.target_r for p, e in zip(pred_r, examples)])
    assert acc_f >= 0.95
    assert acc_r >= 0.95


def test_training_is_bit_reproducible(rng):
    examples = _separable_examples(rng, n=60)
    cfg = TrainConfig(epochs=5, batch_size=8, seed=9)
    m1 = train(examples, cfg)
    m2 = train(examples, cfg)
    for w1, w2 in zip(m1.weights + m1.biases, m2.weights + m2.biases):
        assert np.array_equal(w1, w2)


def test_empty_training_set_rejected():
    with pytest.raises(ArgumentError):
        train([], TrainConfig())


def test_divergence_reports_epoch(rng):
    examples = _separable_examples(rng, n=16)
    with np.errstate(invalid="ignore", over="ignore"):
        with pytest.raises(DivergenceError, match="epoch"):
            train(examples, TrainConfig(learning_rate=1e200, epochs=3,
                                        batch_size=4, seed=0))


def test_train_arrays_validation():
    with pytest.raises(ArgumentError):
        train_arrays(np.zeros((0, 7)), np.zeros(0, int), np.zeros(0, int))
    with pytest.raises(ArgumentError):
        TrainConfig(learning_rate=0.0)
    with pytest.raises(ArgumentError):
        TrainConfig(epochs=0)


def test_model_round_trip(tmp_path, rng):
    examples = _separable_examples(rng, n=40)
    model = train(examples, TrainConfig(epochs=3, batch_size=8, seed=4))
    path = tmp_path / "model.json"
    save_model(model, path)
    loaded = load_model(path)
    assert loaded.layer_sizes == model.layer_sizes
    assert loaded.head_sizes == (10, 5)
    assert loaded.seed == 4
    for w1, w2 in zip(model.weights + model.biases,
                      loaded.weights + loaded.biases):
        assert np.array_equal(w1, w2)
    # identical models serialize to identical bytes
    path2 = tmp_path / "model2.json"
    save_model(loaded, path2)
    assert path.read_bytes() == path2.read_bytes()


def test_model_file_validation(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(SchemaError):
        load_model(path)
    path.write_text('{"weights": [], "biases": []}')
    with pytest.raises(SchemaError, match="header"):
        load_model(path)


def test_model_ladder_mismatch_rejected(tmp_path):
    from adastream.ladder import Ladder

    model = new_model(seed=0)
    path = tmp_path / "model.json"
    save_model(model, path)
    assert load_model(path, DEFAULT_LADDER).layer_sizes == model.layer_sizes
    other = Ladder(frame_rates_hz=(30, 60), heights=(360, 720))
    with pytest.raises(SchemaError, match="different ladder"):
        load_model(path, other)


def test_training_csv_round_trip(tmp_path, rng):
    examples = _separable_examples(rng, n=10)
    path = tmp_path / "training.csv"
    write_training_csv(examples, path)
    back = read_training_csv(path)
    assert back == examples


def test_training_csv_schema_errors(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("mean_luma,wrong\n0.5,1\n")
    with pytest.raises(SchemaError, match="rms_contrast"):
        read_training_csv(path)
    path.write_text("")
    with pytest.raises(SchemaError, match="empty"):
        read_training_csv(path)


def test_targets_validated_against_ladder():
    ex = TrainingExample(fv(0.5, 0.2, 0.1, 0.3, 0.4, 0.8, 0.5), 63, 720)
    with pytest.raises(ArgumentError):
        train([ex], TrainConfig(epochs=1))

import numpy as np
import pytest

from drugscreen.cnn import (
    Adam,
    CnnConfig,
    TrainingError,
    backward,
    forward,
    init_params,
    load_checkpoint,
    loss_and_grad,
    param_names,
    predict,
    predict_texts,
    save_checkpoint,
    train,
    weighted_cross_entropy,
)
from drugscreen.container import ContainerError
from drugscreen.embed import EmbeddingTable, embed_tokens
from drugscreen.toydata import make_toy_texts
from helpers import gradient_check, naive_forward, plain_cross_entropy

TINY = CnnConfig(window_length=8, embedding_dim=6, filter_heights=(2, 3), filters_per_height=2,
                 stride=4)


def tiny_params(seed=0):
    rng = np.random.default_rng(seed)
    p = init_params(TINY, rng)
    for k in p:
        p[k] = rng.normal(0, 0.5, p[k].shape)
    return p


class TestConfig:
    def test_defaults(self):
        c = CnnConfig()
        assert c.n_features == 320 and c.filter_heights == (3, 4, 5, 6, 7)
        assert (c.window_length, c.embedding_dim, c.batch_size, c.learning_rate) == (50, 400, 64, 1e-4)

    def test_param_shapes(self):
        p = init_params(CnnConfig(), np.random.default_rng(0))
        assert p["conv3.weight"].shape == (3, 400, 64)
        assert p["out.weight"].shape == (320, 2)
        assert list(p) == param_names(CnnConfig())

    def test_glorot_bounds(self):
        p = init_params(CnnConfig(), np.random.default_rng(0))
        lim = np.sqrt(6 / (7 * 400 + 64))
        assert np.abs(p["conv7.weight"]).max() <= lim
        assert not p["conv7.bias"].any()

    @pytest.mark.parametrize("kw", [dict(pos_weight=0), dict(filter_heights=(60,)), dict(num_outputs=3),
                                    dict(dtype="int8"), dict(stride=0), dict(epochs=-1)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            CnnConfig(**kw)

    def test_items_roundtrip(self):
        c = CnnConfig(filter_heights=(2, 5), pos_weight=6.153, shuffle=False, pad="random")
        assert CnnConfig.from_items(c.to_items()) == c


class TestForward:
    def test_zero_network(self):
        p = {k: np.zeros_like(v) for k, v in tiny_params().items()}
        res = forward(np.zeros((8, 6)), p, TINY)
        np.testing.assert_array_equal(res.logits, [0, 0])
        assert res.yhat == 0.5

    def test_matches_loop_oracle(self):
        p = tiny_params(1)
        x = np.random.default_rng(2).normal(size=(8, 6))
        res = forward(x, p, TINY)
        logits, yhat, feats = naive_forward(x, p, TINY)
        np.testing.assert_allclose(res.logits, logits, atol=1e-12)
        np.testing.assert_allclose(res.features, feats, atol=1e-12)
        assert res.yhat == pytest.approx(yhat, abs=1e-12)

    def test_batch_equals_singles(self):
        p = tiny_params(3)
        xb = np.random.default_rng(4).normal(size=(5, 8, 6))
        batch = forward(xb, p, TINY).yhat
        singles = [forward(x, p, TINY).yhat for x in xb]
        np.testing.assert_allclose(batch, singles, atol=1e-14)

    def test_output_scaling_keeps_argmax(self):
        p = tiny_params(5)
        x = np.random.default_rng(6).normal(size=(8, 6))
        before = forward(x, p, TINY).logits.argmax()
        p["out.weight"] *= 3.7
        p["out.bias"] *= 3.7
        assert forward(x, p, TINY).logits.argmax() == before

    def test_probabilities(self):
        p = tiny_params(7)
        xb = np.random.default_rng(8).normal(size=(20, 8, 6)) * 3
        res = forward(xb, p, TINY)
        probs = res.cache["probs"]
        assert np.all((res.yhat > 0) & (res.yhat < 1))
        np.testing.assert_allclose(probs.sum(axis=1), 1.0, atol=1e-12)

    def test_padding_rows_can_be_permuted(self):
        # with only zero rows below the tokens, shuffling them changes nothing
        p = tiny_params(9)
        x = np.zeros((8, 6))
        x[:3] = np.random.default_rng(1).normal(size=(3, 6))
        a = forward(x, p, TINY).features
        x2 = x.copy()
        x2[3:] = x[3:][::-1]
        np.testing.assert_array_equal(forward(x2, p, TINY).features, a)

    def test_shape_violation(self):
        with pytest.raises(ValueError, match="shape"):
            forward(np.zeros((7, 6)), tiny_params(), TINY)

    def test_accepts_embedded_window(self, toy_table):
        cfg = CnnConfig(window_length=5, embedding_dim=8, filter_heights=(2,), filters_per_height=3,
                        stride=2)
        (w,) = embed_tokens(["weed"], toy_table, 5)
        p = init_params(cfg, np.random.default_rng(0))
        assert forward(w, p, cfg).features.shape == (3,)


class TestLoss:
    def test_confident_positive(self):
        assert weighted_cross_entropy(1, 0.999999) == pytest.approx(0, abs=2e-6)

    def test_negative_ignores_weight(self):
        assert weighted_cross_entropy(0, 0.5, 3.0) == pytest.approx(0.693147, abs=1e-6)

    def test_weighted_positive(self):
        assert weighted_cross_entropy(1, 0.5, 2.0) == pytest.approx(1.386294, abs=1e-6)

    def test_unit_weight_is_plain_cross_entropy(self, rng):
        y = rng.integers(0, 2, 1000)
        p = rng.uniform(1e-6, 1 - 1e-6, 1000)
        np.testing.assert_allclose(weighted_cross_entropy(y, p, 1.0), plain_cross_entropy(y, p),
                                   rtol=0, atol=1e-12)

    def test_clamped(self):
        assert np.isfinite(weighted_cross_entropy(1, 0.0))
        assert weighted_cross_entropy(1, 0.0) == pytest.approx(-np.log(1e-12))

    def test_nonnegative(self, rng):
        assert (weighted_cross_entropy(rng.integers(0, 2, 100), rng.random(100), 2.5) >= 0).all()

    def test_bad_weight(self):
        with pytest.raises(ValueError):
            weighted_cross_entropy(1, 0.5, 0.0)


class TestBackward:
    @pytest.mark.parametrize("seed", range(25))
    def test_finite_differences(self, seed):
        worst, _ = gradient_check(seed)
        assert worst < 1e-4

    def test_saturated_positive_has_no_gradient(self):
        p = tiny_params(0)
        p["out.bias"][:] = [-40.0, 40.0]
        _, g = loss_and_grad(np.random.default_rng(0).normal(size=(1, 8, 6)), [1], p, TINY)
        assert all(np.abs(v).max() < 1e-12 for v in g.values())

    def test_duplicate_example_doubles_contribution(self):
        p = tiny_params(2)
        x = np.random.default_rng(3).normal(size=(2, 8, 6))
        y = np.array([1, 0])
        _, g1 = loss_and_grad(x, y, p, TINY)
        xd = np.concatenate([x, x[:1]])
        _, g2 = loss_and_grad(xd, np.array([1, 0, 1]), p, TINY)
        _, ga = loss_and_grad(x[:1], y[:1], p, TINY)
        for k in g1:
            # sum over examples = mean * batch size
            np.testing.assert_allclose(3 * g2[k], 2 * g1[k] + ga[k], atol=1e-12)

    def test_label_count_mismatch(self):
        res = forward(np.zeros((2, 8, 6)), tiny_params(), TINY)
        with pytest.raises(ValueError):
            backward(res.cache, [1], tiny_params(), TINY)


def test_adam_matches_hand_update():
    params = {"w": np.array([1.0, -2.0])}
    g = {"w": np.array([0.5, 0.25])}
    opt = Adam(learning_rate=0.1)
    opt.step(params, g)
    # first step of bias-corrected Adam moves each weight by lr * sign(g)
    np.testing.assert_allclose(params["w"], [0.9, -2.1], atol=1e-7)
    w1 = params["w"][0]
    opt.step(params, g)
    m = 0.9 * 0.05 + 0.1 * 0.5
    v = 0.999 * 0.00025 + 0.001 * 0.25
    expect = w1 - 0.1 * (m / (1 - 0.81)) / (np.sqrt(v / (1 - 0.999 ** 2)) + 1e-8)
    assert params["w"][0] == pytest.approx(expect, abs=1e-12)


def small_config(**kw):
    base = dict(window_length=10, embedding_dim=8, filter_heights=(2, 3), filters_per_height=8,
                learning_rate=1e-3, batch_size=16, epochs=5, stride=5)
    base.update(kw)
    return CnnConfig(**base)


class TestTraining:
    def test_learns_toy_corpus(self, toy_table):
        texts, labels = make_toy_texts(100, 100, seed=0)
        res = train(texts, labels, toy_table, small_config(epochs=8))
        assert res.trace[-1].accuracy >= 0.95
        assert res.trace[-1].loss < res.trace[0].loss
        test_x, test_y = make_toy_texts(50, 50, seed=1)
        pred, _ = predict_texts(test_x, res.params, toy_table, small_config())
        assert np.mean(pred == test_y) >= 0.9

    def test_zero_epochs_returns_init(self, toy_table):
        cfg = small_config(epochs=0)
        res = train([["weed"]], [1], toy_table, cfg)
        init = init_params(cfg, np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(3)[0]))
        assert res.trace == []
        for k in init:
            np.testing.assert_array_equal(res.params[k], init[k])

    def test_reproducible(self, toy_table):
        texts, labels = make_toy_texts(30, 30, seed=4)
        a = train(texts, labels, toy_table, small_config(epochs=2))
        b = train(texts, labels, toy_table, small_config(epochs=2))
        for k in a.params:
            np.testing.assert_array_equal(a.params[k], b.params[k])

    def test_validation_selects_best(self, toy_table):
        texts, labels = make_toy_texts(40, 40, seed=5)
        vx, vy = make_toy_texts(20, 20, seed=6)
        res = train(texts, labels, toy_table, small_config(epochs=3), validation=(vx, vy))
        assert res.best_epoch in (1, 2, 3)
        best = max(s.val_accuracy for s in res.trace)
        assert res.trace[res.best_epoch - 1].val_accuracy == best

    def test_errors(self, toy_table):
        with pytest.raises(TrainingError, match="empty"):
            train([], [], toy_table, small_config())
        with pytest.raises(TrainingError, match="K="):
            train([["weed"]], [1], toy_table, small_config(embedding_dim=4))

    def test_nonfinite_loss_aborts(self):
        table = EmbeddingTable(["a", "b"], [[np.inf] * 8, [-np.inf] * 8])
        cfg = small_config(epochs=1)
        with pytest.raises(TrainingError, match="non-finite"):
            with np.errstate(all="ignore"):
                train([["a", "b"]] * 4, [1, 0, 1, 0], table, cfg)

    def test_float32(self, toy_table):
        texts, labels = make_toy_texts(20, 20, seed=2)
        res = train(texts, labels, toy_table, small_config(epochs=1, dtype="float32"))
        assert res.params["out.weight"].dtype == np.float32


class TestPredict:
    def test_score_is_max_over_windows(self, toy_table):
        cfg = small_config(window_length=4, stride=2)
        params = init_params(cfg, np.random.default_rng(1))
        toks = ["weed", "news", "lit", "snort", "police", "party", "meth", "ban"]
        windows = embed_tokens(toks, toy_table, 4, stride=2)
        per_window = [forward(w, params, cfg).yhat for w in windows]
        label, score = predict(toks, params, toy_table, cfg)
        assert len(per_window) > 1
        assert score == pytest.approx(max(per_window), abs=1e-12)
        assert label == int(max(per_window) >= cfg.threshold)

    def test_threshold(self, toy_table):
        cfg = small_config()
        params = {k: np.zeros_like(v) for k, v in init_params(cfg, np.random.default_rng(0)).items()}
        params["out.bias"][:] = [0.0, np.log(0.7 / 0.3)]
        assert predict(["weed"], params, toy_table, cfg) == (1, pytest.approx(0.7))
        params["out.bias"][:] = [0.0, np.log(0.4 / 0.6)]
        label, score = predict(["weed"], params, toy_table, cfg)
        assert label == 0 and score == pytest.approx(0.4)

    def test_empty_text(self, toy_table):
        cfg = small_config()
        params = init_params(cfg, np.random.default_rng(0))
        with pytest.warns(UserWarning):
            assert predict([], params, toy_table, cfg) == (0, 0.0)
        labels, scores = predict_texts([[], ["weed"]], params, toy_table, cfg)
        assert labels[0] == 0 and scores[0] == 0.0


class TestCheckpoint:
    def test_roundtrip_and_bytes(self, tmp_path, toy_table):
        cfg = small_config(pos_weight=6.153)
        params = init_params(cfg, np.random.default_rng(0))
        a, b = tmp_path / "a.bin", tmp_path / "b.bin"
        save_checkpoint(a, params, cfg)
        save_checkpoint(b, params, cfg)
        assert a.read_bytes() == b.read_bytes()
        cfg2, p2 = load_checkpoint(a)
        assert cfg2 == cfg
        for k in params:
            np.testing.assert_allclose(p2[k], params[k].astype(np.float32), rtol=0, atol=0)
        assert a.read_bytes().startswith(b"DRUGSCREEN-CNN\nversion=1\n")

    def test_wrong_magic(self, tmp_path):
        p = tmp_path / "x.bin"
        p.write_bytes(b"OTHER\nversion=1\nend\n")
        with pytest.raises(ContainerError, match="magic"):
            load_checkpoint(p)

    def test_truncated(self, tmp_path):
        cfg = small_config()
        p = tmp_path / "t.bin"
        save_checkpoint(p, init_params(cfg, np.random.default_rng(0)), cfg)
        p.write_bytes(p.read_bytes()[:-4])
        with pytest.raises(ContainerError, match="past end"):
            load_checkpoint(p)

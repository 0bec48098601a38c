import numpy as np
import pytest

from emofuse.adapters import AdapterNet, EmotionAdapter, extract_adapted
from emofuse.errors import DataError, DimensionError
from emofuse.nn import grad_check, weighted_smoothed_ce


def _clusters(n_per_class, k=4, sep=1.0, seed=0, dim=512):
    # class means are fixed unit directions scaled by `sep`; `seed` only varies
    # the noise, so train/val splits share the same class geometry
    mean_rng = np.random.default_rng(1234)
    means = np.stack(
        [(lambda v: v / np.linalg.norm(v))(mean_rng.standard_normal(dim)) for _ in range(k)]
    ) * sep
    rng = np.random.default_rng(seed)
    xs, ys = [], []
    for cls in range(k):
        xs.append(means[cls] + 0.1 * rng.standard_normal((n_per_class, dim)))
        ys.extend([cls] * n_per_class)
    return np.concatenate(xs).astype(np.float32), np.asarray(ys, dtype=np.int64)


class TestAdapterNet:
    def test_forward_shapes(self):
        net = AdapterNet(n_classes=7).eval()
        logits, pen = net.forward(np.zeros((3, 512), dtype=np.float32))
        assert logits.shape == (3, 7)
        assert pen.shape == (3, 128)

    def test_penultimate_nonnegative(self):
        # the exported feature sits after a ReLU
        net = AdapterNet().eval()
        _, pen = net.forward(np.random.default_rng(0).standard_normal((5, 512)))
        assert np.all(pen >= 0)

    def test_wrong_input_dim(self):
        with pytest.raises(DimensionError):
            AdapterNet().forward(np.zeros((2, 100)))

    def test_eval_deterministic(self):
        net = AdapterNet().eval()
        x = np.random.default_rng(1).standard_normal((4, 512)).astype(np.float32)
        a, _ = net.forward(x)
        b, _ = net.forward(x)
        np.testing.assert_array_equal(a, b)

    def test_training_dropout_varies(self):
        net = AdapterNet(dropout_rate=0.5, rng=np.random.default_rng(0)).train()
        x = np.random.default_rng(1).standard_normal((8, 512)).astype(np.float32)
        a, _ = net.forward(x)
        b, _ = net.forward(x)
        assert not np.array_equal(a, b)

    def test_save_load_round_trip(self, tmp_path):
        net = AdapterNet(n_classes=4, rng=np.random.default_rng(3))
        x = np.random.default_rng(4).standard_normal((16, 512)).astype(np.float32)
        net.train()
        net.forward(x)  # move batchnorm running stats off their init
        net.eval()
        base, base_pen = net.forward(x)
        path = tmp_path / "a.adp1"
        net.save(path)
        back = AdapterNet.load(path)
        assert back.n_classes == 4
        logits, pen = back.eval().forward(x)
        np.testing.assert_array_equal(logits, base)
        np.testing.assert_array_equal(pen, base_pen)

    def test_gradients_sampled(self):
        """Whole-net gradient vs finite differences on sampled coordinates
        (training-mode batchnorm, eval-mode dropout, batch of 8, float64)."""
        x = np.random.default_rng(0).standard_normal((8, 512))
        y = np.array([0, 1, 2, 3, 0, 1, 2, 3])

        def make_net():
            net = AdapterNet(n_classes=4, rng=np.random.default_rng(1), dtype=np.float64)
            net.train()
            net.drop1.training = False
            net.drop2.training = False
            return net

        def f(params):
            net = make_net()
            for i, layer in enumerate(net.layers()):
                for k in layer.params:
                    layer.params[k] = params[f"layer{i}.{k}"]
            net.zero_grad()
            logits, _ = net.forward(x)
            loss, dlogits = weighted_smoothed_ce(logits, y)
            net.backward(dlogits)
            return loss, dict(net.grads())

        params = {k: v.copy() for k, v in make_net().params().items()}
        # rel_floor 1e-4: biases feeding straight into batchnorm have an
        # exactly-zero analytic gradient, where finite differences only see noise
        res = grad_check(
            f, params, sample=20, rng=np.random.default_rng(2), rel_floor=1e-4
        )
        assert res.max_rel_err < 1e-6


class TestEmotionAdapter:
    def test_fit_separable_data(self):
        X, y = _clusters(20)
        Xv, yv = _clusters(8, seed=1)
        adapter = EmotionAdapter(n_classes=4, max_epochs=20, seed=0)
        adapter.fit(X, y, X_val=Xv, y_val=yv)
        assert adapter.best_val_f1_ > 0.95
        assert (adapter.predict(Xv) == yv).mean() > 0.95

    def test_transform_is_128d(self):
        X, y = _clusters(10)
        adapter = EmotionAdapter(n_classes=4, max_epochs=3, seed=0)
        adapter.fit(X, y, X_val=X, y_val=y)
        z = adapter.transform(X[:5])
        assert z.shape == (5, 128)
        np.testing.assert_array_equal(z, extract_adapted(X[:5], adapter.net_))

    def test_requires_validation(self):
        X, y = _clusters(4)
        with pytest.raises(DataError):
            EmotionAdapter(n_classes=4).fit(X, y)

    def test_history_schema(self):
        X, y = _clusters(6)
        adapter = EmotionAdapter(n_classes=4, max_epochs=2, seed=0)
        adapter.fit(X, y, X_val=X, y_val=y)
        assert [r["epoch"] for r in adapter.history_] == [1, 2]
        assert set(adapter.history_[0]) == {
            "epoch", "train_loss", "val_accuracy", "val_macro_f1", "lr",
        }

    def test_deterministic_given_seed(self):
        X, y = _clusters(8)
        losses = []
        for _ in range(2):
            adapter = EmotionAdapter(n_classes=4, max_epochs=3, seed=7)
            adapter.fit(X, y, X_val=X, y_val=y)
            losses.append([r["train_loss"] for r in adapter.history_])
        assert losses[0] == losses[1]

    def test_early_stop_and_best_restore(self):
        X, y = _clusters(16, sep=8.0)
        Xv, yv = _clusters(6, sep=8.0, seed=3)
        adapter = EmotionAdapter(
            n_classes=4, max_epochs=100, early_stop_patience=5, seed=0
        )
        adapter.fit(X, y, X_val=Xv, y_val=yv)
        assert len(adapter.history_) < 100
        assert len(adapter.history_) == adapter.best_epoch_ + 5
        from emofuse.metrics import confusion_from_indices, macro_f1

        cm = confusion_from_indices(yv, adapter.predict(Xv), 4)
        assert macro_f1(cm) == pytest.approx(adapter.best_val_f1_, abs=1e-9)

    def test_plateau_reduces_lr_on_frozen_metric(self):
        # perfectly learned from epoch 1 -> metric frozen at 1.0 -> after
        # plateau_patience+1 flat epochs the recorded lr drops by the factor
        X, y = _clusters(16, sep=10.0)
        Xv, yv = _clusters(6, sep=10.0, seed=4)
        adapter = EmotionAdapter(
            n_classes=4, max_epochs=100, early_stop_patience=10,
            plateau_patience=5, plateau_factor=0.1, seed=0,
        )
        adapter.fit(X, y, X_val=Xv, y_val=yv)
        lrs = [r["lr"] for r in adapter.history_]
        assert lrs[0] == pytest.approx(1e-3)
        assert min(lrs) == pytest.approx(1e-4)

    def test_shuffled_labels_score_chance(self):
        X, y = _clusters(20)
        rng = np.random.default_rng(0)
        y_shuf = rng.permutation(y)
        Xv, yv = _clusters(35, seed=5)
        yv_shuf = rng.permutation(yv)
        adapter = EmotionAdapter(n_classes=4, max_epochs=5, seed=0)
        adapter.fit(X, y_shuf, X_val=Xv, y_val=yv_shuf)
        acc = (adapter.predict(Xv) == yv_shuf).mean()
        assert abs(acc - 0.25) < 0.12

    def test_save_load_round_trip(self, tmp_path):
        X, y = _clusters(10)
        adapter = EmotionAdapter(n_classes=4, max_epochs=3, seed=0)
        adapter.fit(X, y, X_val=X, y_val=y)
        base = adapter.transform(X)
        path = tmp_path / "ad.adp1"
        adapter.save(path)
        back = EmotionAdapter().load(path)
        np.testing.assert_array_equal(back.transform(X), base)
        np.testing.assert_array_equal(back.predict(X), adapter.predict(X))

    def test_get_params_sklearn_contract(self):
        adapter = EmotionAdapter(lr=0.5, seed=3)
        params = adapter.get_params()
        assert params["lr"] == 0.5
        assert params["seed"] == 3
        clone = EmotionAdapter(**params)
        assert clone.get_params() == params

"""Modality adapters: 512 -> 256 -> 128 -> K MLPs trained on unimodal
emotion embeddings; the 128-d penultimate activation is the exported feature.
"""

from __future__ import annotations

import copy

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .data.adp1 import read_adp1, write_adp1
from .errors import DataError, DimensionError
from .metrics import accuracy, confusion_from_indices, macro_f1
from .nn import (
    Adam,
    BatchNorm1d,
    Dropout,
    Linear,
    PlateauScheduler,
    ReLU,
    weighted_smoothed_ce,
)

IN_DIM = 512
HIDDEN1 = 256
HIDDEN2 = 128


class AdapterNet:
    """linear -> BN -> ReLU -> dropout, twice, then a linear head.

    The penultimate feature is the 128-d activation after the second ReLU
    (post-batchnorm, pre-dropout).
    """

    def __init__(self, n_classes=7, dropout_rate=0.3, rng=None, dtype=np.float32):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.linear1 = Linear(IN_DIM, HIDDEN1, rng=rng, dtype=dtype)
        self.bn1 = BatchNorm1d(HIDDEN1, dtype=dtype)
        self.relu1 = ReLU()
        self.drop1 = Dropout(dropout_rate, rng=rng)
        self.linear2 = Linear(HIDDEN1, HIDDEN2, rng=rng, dtype=dtype)
        self.bn2 = BatchNorm1d(HIDDEN2, dtype=dtype)
        self.relu2 = ReLU()
        self.drop2 = Dropout(dropout_rate, rng=rng)
        self.linear3 = Linear(HIDDEN2, n_classes, rng=rng, dtype=dtype)
        self.n_classes = n_classes

    def layers(self):
        return [
            self.linear1,
            self.bn1,
            self.relu1,
            self.drop1,
            self.linear2,
            self.bn2,
            self.relu2,
            self.drop2,
            self.linear3,
        ]

    def train(self, mode=True):
        for layer in self.layers():
            layer.train(mode)
        return self

    def eval(self):
        return self.train(False)

    def zero_grad(self):
        for layer in self.layers():
            layer.zero_grad()

    def params(self):
        out = {}
        for i, layer in enumerate(self.layers()):
            for k, v in layer.params.items():
                out[f"layer{i}.{k}"] = v
        return out

    def grads(self):
        out = {}
        for i, layer in enumerate(self.layers()):
            for k, v in layer.grads.items():
                out[f"layer{i}.{k}"] = v
        return out

    def forward(self, x):
        """Returns (logits, penultimate)."""
        x = np.asarray(x)
        if x.ndim != 2 or x.shape[1] != IN_DIM:
            raise DimensionError(f"adapter expects (n,{IN_DIM}) input, got {x.shape}")
        h = self.drop1.forward(self.relu1.forward(self.bn1.forward(self.linear1.forward(x))))
        pen = self.relu2.forward(self.bn2.forward(self.linear2.forward(h)))
        logits = self.linear3.forward(self.drop2.forward(pen))
        return logits, pen

    def backward(self, dlogits):
        d = self.linear3.backward(dlogits)
        d = self.drop2.backward(d)
        d = self.relu2.backward(d)
        d = self.bn2.backward(d)
        d = self.linear2.backward(d)
        d = self.drop1.backward(d)
        d = self.relu1.backward(d)
        d = self.bn1.backward(d)
        return self.linear1.backward(d)

    # ADP1 serialization ----------------------------------------------------

    def state_tensors(self):
        t = {}
        for i, layer in enumerate(self.layers()):
            for k, v in layer.params.items():
                t[f"layer{i}.{k}"] = v
            if isinstance(layer, BatchNorm1d):
                t[f"layer{i}.running_mean"] = layer.running_mean
                t[f"layer{i}.running_var"] = layer.running_var
        return t

    def load_state_tensors(self, tensors):
        for i, layer in enumerate(self.layers()):
            for k in layer.params:
                layer.params[k] = tensors[f"layer{i}.{k}"].copy()
            if isinstance(layer, BatchNorm1d):
                layer.running_mean = tensors[f"layer{i}.running_mean"].copy()
                layer.running_var = tensors[f"layer{i}.running_var"].copy()
            layer.zero_grad()

    def save(self, path):
        write_adp1(self.state_tensors(), path)

    @classmethod
    def load(cls, path, dropout_rate=0.3):
        tensors = read_adp1(path)
        n_classes = tensors["layer8.b"].shape[0]
        net = cls(n_classes=n_classes, dropout_rate=dropout_rate)
        net.load_state_tensors(tensors)
        return net


def adapter_forward(x, net, training=False):
    net.train(training)
    return net.forward(x)


def extract_adapted(x, net):
    """Eval-mode 128-d penultimate features; deterministic."""
    net.eval()
    _, pen = net.forward(np.asarray(x))
    return pen


class EmotionAdapter(BaseEstimator, TransformerMixin):
    """sklearn-style wrapper: fit on (n,512) embeddings + integer labels,
    transform to the 128-d adapted space, predict emotion classes."""

    def __init__(
        self,
        n_classes=7,
        lr=1e-3,
        weight_decay=1e-5,
        batch_size=32,
        max_epochs=100,
        early_stop_patience=10,
        plateau_factor=0.1,
        plateau_patience=5,
        dropout_rate=0.3,
        seed=0,
    ):
        self.n_classes = n_classes
        self.lr = lr
        self.weight_decay = weight_decay
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.early_stop_patience = early_stop_patience
        self.plateau_factor = plateau_factor
        self.plateau_patience = plateau_patience
        self.dropout_rate = dropout_rate
        self.seed = seed

    def _validate(self, X, y=None):
        X = np.asarray(X, dtype=np.float32)
        if X.ndim != 2 or X.shape[1] != IN_DIM:
            raise DimensionError(f"expected (n,{IN_DIM}) embeddings, got {X.shape}")
        if y is None:
            return X
        y = np.asarray(y, dtype=np.int64)
        if len(y) != len(X):
            raise DataError("X and y length mismatch")
        return X, y

    def fit(self, X, y, X_val=None, y_val=None):
        X, y = self._validate(X, y)
        if len(X) == 0:
            raise DataError("empty training set")
        if X_val is None or y_val is None:
            raise DataError("adapter training requires a validation split")
        X_val, y_val = self._validate(X_val, y_val)
        if len(X_val) == 0:
            raise DataError("empty validation set")

        net = AdapterNet(
            n_classes=self.n_classes,
            dropout_rate=self.dropout_rate,
            rng=np.random.default_rng(self.seed),
        )
        opt = Adam(net.params(), lr=self.lr, weight_decay=self.weight_decay)
        sched = PlateauScheduler(
            opt, factor=self.plateau_factor, patience=self.plateau_patience, mode="max"
        )

        best_metric = -np.inf
        best_state = None
        best_epoch = 0
        bad_epochs = 0
        history = []
        n = len(X)

        for epoch in range(1, self.max_epochs + 1):
            order = np.random.default_rng([self.seed, epoch]).permutation(n)
            net.train()
            total_loss = 0.0
            for start in range(0, n, self.batch_size):
                idx = order[start : start + self.batch_size]
                if len(idx) < 2:
                    continue  # batchnorm needs at least 2 rows
                net.zero_grad()
                logits, _ = net.forward(X[idx])
                loss, dlogits = weighted_smoothed_ce(logits, y[idx])
                net.backward(dlogits.astype(np.float32))
                opt.step(net.grads())
                total_loss += loss * len(idx)
            train_loss = total_loss / n

            val_pred = self._predict_net(net, X_val)
            cm = confusion_from_indices(y_val, val_pred, self.n_classes)
            val_acc = accuracy(cm)
            val_f1 = macro_f1(cm)
            history.append(
                {
                    "epoch": epoch,
                    "train_loss": train_loss,
                    "val_accuracy": val_acc,
                    "val_macro_f1": val_f1,
                    "lr": opt.lr,
                }
            )
            if val_f1 > best_metric:
                best_metric = val_f1
                best_epoch = epoch
                best_state = copy.deepcopy(net.state_tensors())
                bad_epochs = 0
            else:
                bad_epochs += 1
            sched.step(val_f1)
            if bad_epochs >= self.early_stop_patience:
                break

        net.load_state_tensors(best_state)
        self.net_ = net
        self.history_ = history
        self.best_epoch_ = best_epoch
        self.best_val_f1_ = best_metric
        return self

    @staticmethod
    def _predict_net(net, X):
        net.eval()
        logits, _ = net.forward(X)
        return logits.argmax(axis=1)

    def predict(self, X):
        return self._predict_net(self.net_, self._validate(X))

    def transform(self, X):
        return extract_adapted(self._validate(X), self.net_)

    def save(self, path):
        self.net_.save(path)

    def load(self, path):
        self.net_ = AdapterNet.load(path, dropout_rate=self.dropout_rate)
        return self

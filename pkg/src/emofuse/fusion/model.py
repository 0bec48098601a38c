"""Fusion classifier: Mamba block -> masked mean pooling -> linear head."""

from __future__ import annotations

import copy

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin

from ..data.adp1 import read_adp1, write_adp1
from ..errors import DataError, DimensionError, LabelError
from ..metrics import accuracy, confusion_from_indices, weighted_f1
from ..nn import AdamW, Linear, weighted_smoothed_ce
from .align import FusedSequence, masked_mean_pool
from .mamba import MambaBlock, MambaConfig

HISTORY_FIELDS = ["epoch", "train_loss", "val_accuracy", "val_weighted_f1", "lr"]


class FusionModel:
    """Holds the block and classifier head; operates on FusedSequence lists."""

    def __init__(self, config, n_classes, rng=None, dtype=np.float32):
        rng = rng if rng is not None else np.random.default_rng(0)
        self.config = config
        self.n_classes = n_classes
        self.block = MambaBlock(config, rng=rng, dtype=dtype)
        self.classifier = Linear(config.d_model, n_classes, rng=rng, dtype=dtype)

    def params(self):
        out = {f"block.{k}": v for k, v in self.block.params.items()}
        out.update({f"classifier.{k}": v for k, v in self.classifier.params.items()})
        return out

    def grads(self):
        out = {f"block.{k}": v for k, v in self.block.grads.items()}
        out.update({f"classifier.{k}": v for k, v in self.classifier.grads.items()})
        return out

    def zero_grad(self):
        self.block.zero_grad()
        self.classifier.zero_grad()

    def _check_seq(self, seq):
        if seq.tokens.shape[1] != self.config.d_model:
            raise DimensionError(
                f"sequence d_model {seq.tokens.shape[1]} != model "
                f"d_model {self.config.d_model}"
            )
        if seq.n_valid < 1:
            raise DataError("sequence has no valid positions")

    def pool_one(self, seq):
        """Block output pooled over valid positions. Only the valid prefix is
        fed to the block; causality makes this identical to running the padded
        sequence and pooling with the mask."""
        self._check_seq(seq)
        n = seq.n_valid
        out = self.block.forward(np.ascontiguousarray(seq.tokens[:n]))
        return out.mean(axis=0)

    def forward(self, sequences):
        """Logits (batch, K) for a list of FusedSequence."""
        pooled = np.stack([self.pool_one(s) for s in sequences])
        return self.classifier.forward(pooled)

    def train_step(self, sequences, targets, opt, class_weights, smoothing):
        """One optimizer step over a mini-batch; returns the batch loss.

        The batch loss couples samples only through the per-sample weight sum
        (known from the targets up front), so each sequence runs one forward
        and one backward while its block cache is still fresh.
        """
        from ..nn.losses import log_softmax

        self.zero_grad()
        targets = np.asarray(targets, dtype=np.int64)
        k = self.n_classes
        if class_weights is None:
            w = np.ones(len(targets))
        else:
            w = np.asarray(class_weights, dtype=np.float64)[targets]
        wsum = w.sum()
        total = 0.0
        for i, seq in enumerate(sequences):
            n = seq.n_valid
            self._check_seq(seq)
            out = self.block.forward(np.ascontiguousarray(seq.tokens[:n]))
            pooled = out.mean(axis=0, keepdims=True)
            logits = self.classifier.forward(pooled)
            logp = log_softmax(logits)
            q = np.full((1, k), smoothing / k, dtype=logits.dtype)
            q[0, targets[i]] += 1.0 - smoothing
            total += w[i] * float(-(q * logp).sum())
            dlogits = (w[i] / wsum) * (np.exp(logp) - q)
            dpooled = self.classifier.backward(dlogits.astype(logits.dtype))
            self.block.backward(np.repeat(dpooled / n, n, axis=0))
        opt.step(self.grads())
        return total / wsum

    def save(self, path):
        write_adp1(self.params(), path)

    @classmethod
    def load(cls, path):
        tensors = read_adp1(path)
        w_in = tensors["block.W_in"]
        a_log = tensors["block.A_log"]
        conv_w = tensors["block.conv_w"]
        d_model = w_in.shape[1]
        d_inner = w_in.shape[0] // 2
        config = MambaConfig(
            d_model=d_model,
            d_state=a_log.shape[1],
            expand=d_inner // d_model,
            d_conv=conv_w.shape[1],
        )
        n_classes = tensors["classifier.b"].shape[0]
        model = cls(config, n_classes)
        for k in model.block.params:
            model.block.params[k] = tensors[f"block.{k}"].copy()
        for k in model.classifier.params:
            model.classifier.params[k] = tensors[f"classifier.{k}"].copy()
        model.zero_grad()
        return model


def fusion_forward(sequences, model):
    """Batch logits; every sequence must share the model's d_model."""
    dims = {s.tokens.shape[1] for s in sequences}
    if len(dims) > 1:
        raise DimensionError(f"mixed d_model in batch: {sorted(dims)}")
    return model.forward(sequences)


class MambaFusionClassifier(BaseEstimator, ClassifierMixin):
    """sklearn-style classifier over FusedSequence inputs."""

    def __init__(
        self,
        n_classes=7,
        d_state=64,
        expand=2,
        d_conv=4,
        lr=1e-5,
        batch_size=32,
        max_epochs=200,
        early_stop_patience=10,
        class_weights=None,
        smoothing=0.2,
        weight_decay=0.01,
        seed=0,
    ):
        self.n_classes = n_classes
        self.d_state = d_state
        self.expand = expand
        self.d_conv = d_conv
        self.lr = lr
        self.batch_size = batch_size
        self.max_epochs = max_epochs
        self.early_stop_patience = early_stop_patience
        self.class_weights = class_weights
        self.smoothing = smoothing
        self.weight_decay = weight_decay
        self.seed = seed

    def _targets(self, y):
        y = np.asarray(y, dtype=np.int64)
        if y.min(initial=0) < 0 or y.max(initial=0) >= self.n_classes:
            raise LabelError(f"class index outside [0,{self.n_classes})")
        return y

    def fit(self, X, y, X_val=None, y_val=None):
        if len(X) == 0:
            raise DataError("empty training set")
        y = self._targets(y)
        if X_val is None or y_val is None:
            raise DataError("fusion training requires a validation split")
        y_val = self._targets(y_val)
        dims = {s.tokens.shape[1] for s in list(X) + list(X_val)}
        if len(dims) != 1:
            raise DimensionError(f"inconsistent d_model across splits: {sorted(dims)}")
        d_model = dims.pop()

        config = MambaConfig(
            d_model=d_model, d_state=self.d_state, expand=self.expand, d_conv=self.d_conv
        )
        model = FusionModel(
            config, self.n_classes, rng=np.random.default_rng(self.seed)
        )
        opt = AdamW(model.params(), lr=self.lr, weight_decay=self.weight_decay)
        weights = (
            None
            if self.class_weights is None
            else np.asarray(self.class_weights, dtype=np.float32)
        )

        best_metric = -np.inf
        best_state = None
        best_epoch = 0
        bad_epochs = 0
        history = []
        n = len(X)

        for epoch in range(1, self.max_epochs + 1):
            order = np.random.default_rng([self.seed, epoch]).permutation(n)
            total_loss = 0.0
            for start in range(0, n, self.batch_size):
                idx = order[start : start + self.batch_size]
                batch = [X[i] for i in idx]
                loss = model.train_step(
                    batch, y[idx], opt, weights, self.smoothing
                )
                total_loss += loss * len(idx)
            train_loss = total_loss / n

            val_pred = model.forward(list(X_val)).argmax(axis=1)
            cm = confusion_from_indices(y_val, val_pred, self.n_classes)
            val_acc = accuracy(cm)
            val_wf1 = weighted_f1(cm)
            history.append(
                {
                    "epoch": epoch,
                    "train_loss": train_loss,
                    "val_accuracy": val_acc,
                    "val_weighted_f1": val_wf1,
                    "lr": opt.lr,
                }
            )
            if val_wf1 > best_metric:
                best_metric = val_wf1
                best_epoch = epoch
                best_state = copy.deepcopy(model.params())
                bad_epochs = 0
            else:
                bad_epochs += 1
            if bad_epochs >= self.early_stop_patience:
                break

        for k, v in best_state.items():
            model.params()[k][...] = v
        self.model_ = model
        self.history_ = history
        self.best_epoch_ = best_epoch
        self.best_val_weighted_f1_ = best_metric
        return self

    def predict(self, X):
        return fusion_forward(list(X), self.model_).argmax(axis=1)

    def predict_logits(self, X):
        return fusion_forward(list(X), self.model_)

    def save(self, path):
        self.model_.save(path)

    def load(self, path):
        self.model_ = FusionModel.load(path)
        return self


def write_history_csv(history, path, fields=None):
    import csv

    fields = fields or (list(history[0]) if history else HISTORY_FIELDS)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields)
        writer.writeheader()
        for row in history:
            writer.writerow({k: row[k] for k in fields})

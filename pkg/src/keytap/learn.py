"""From-scratch supervised learning for keystroke classification.

Five classifier families behind one interface: multinomial logistic
regression (the primary key classifier), linear SVM, LDA, random forest and
k-nearest-neighbors (used for device identification). Plus stratified
cross-validation, recursive feature elimination, ranked prediction with the
top-n accuracy metric, hyper-parameter grid search and JSON model files.

Every stochastic operation takes an explicit seed; training is deterministic
given data order. All models standardize features with statistics estimated
on their own training data only.
"""

import itertools
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractError

TYPING_STYLES = ("HP", "Touch")
CHANNELS = ("plain", "skype", "hangouts", "simulated")

KIND_LR = "lr"
KIND_SVM = "svm"
KIND_LDA = "lda"
KIND_RF = "rf"
KIND_KNN = "knn"


@dataclass(frozen=True)
class SampleMeta:
    user: str = "u0"
    device_model: str = "m0"
    device_unit: str = "m0-a"
    typing_style: str = "HP"
    channel: str = "plain"

    def __post_init__(self):
        if self.typing_style not in TYPING_STYLES:
            raise ContractError(
                f"typing_style must be one of {TYPING_STYLES}")
        if self.channel not in CHANNELS:
            raise ContractError(f"channel must be one of {CHANNELS}")


class LabeledDataset:
    """Feature matrix with labels and per-sample recording metadata.

    `ids` are stable sample identities used to prove train/test disjointness;
    they survive subsetting and filtering.
    """

    def __init__(self, X, labels, meta, kind="mfcc", ids=None):
        self.X = np.asarray(X, dtype=np.float64)
        if self.X.ndim != 2:
            raise ContractError("X must be a (samples, features) matrix")
        self.labels = list(labels)
        self.meta = list(meta)
        self.kind = kind
        if not (len(self.labels) == len(self.meta) == self.X.shape[0]):
            raise ContractError("vectors, labels and meta must align")
        if ids is None:
            ids = np.arange(self.X.shape[0])
        self.ids = np.asarray(ids)
        if len(self.ids) != self.X.shape[0]:
            raise ContractError("ids must align with samples")

    @classmethod
    def from_feature_vectors(cls, vectors, labels, meta, ids=None):
        if not vectors:
            raise ContractError("need at least one feature vector")
        kinds = {v.kind for v in vectors}
        lengths = {len(v.values) for v in vectors}
        if len(kinds) > 1 or len(lengths) > 1:
            raise ContractError("all vectors must share kind and length")
        X = np.stack([v.values for v in vectors])
        return cls(X, labels, meta, kind=kinds.pop(), ids=ids)

    @property
    def n_samples(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    @property
    def classes(self):
        return sorted(set(self.labels))

    def subset(self, indices):
        indices = np.asarray(indices)
        if indices.dtype == bool:
            indices = np.flatnonzero(indices)
        indices = indices.astype(np.intp)
        return LabeledDataset(
            self.X[indices],
            [self.labels[i] for i in indices],
            [self.meta[i] for i in indices],
            kind=self.kind,
            ids=self.ids[indices],
        )

    def filter(self, **meta_equals):
        """Keep samples whose metadata matches every given field value."""
        keep = [i for i, m in enumerate(self.meta)
                if all(getattr(m, k) == v for k, v in meta_equals.items())]
        return self.subset(keep)

    def relabel(self, new_labels):
        """Same samples, different label column (e.g. device_model)."""
        return LabeledDataset(self.X, list(new_labels), self.meta,
                              kind=self.kind, ids=self.ids)

    @staticmethod
    def concat(datasets):
        datasets = list(datasets)
        if not datasets:
            raise ContractError("cannot concatenate zero datasets")
        kinds = {d.kind for d in datasets}
        if len(kinds) > 1:
            raise ContractError("datasets differ in feature kind")
        return LabeledDataset(
            np.vstack([d.X for d in datasets]),
            [l for d in datasets for l in d.labels],
            [m for d in datasets for m in d.meta],
            kind=kinds.pop(),
            ids=np.concatenate([d.ids for d in datasets]),
        )

    def class_counts(self):
        counts = {}
        for label in self.labels:
            counts[label] = counts.get(label, 0) + 1
        return counts


@dataclass(frozen=True)
class RankedPrediction:
    entries: tuple  # ((class, score), ...) descending score

    def top(self, n):
        return [c for c, _s in self.entries[:n]]

    @property
    def best(self):
        return self.entries[0][0]


@dataclass
class KeyClassifier:
    kind: str
    classes: list
    mean: np.ndarray
    std: np.ndarray
    feature_mask: np.ndarray | None = None  # over the original feature count
    weights: np.ndarray | None = None       # (features, classes) linear kinds
    bias: np.ndarray | None = None          # (classes,)
    exemplars: np.ndarray | None = None     # kNN, standardized
    exemplar_labels: np.ndarray | None = None  # kNN, class indices
    k_neighbors: int | None = None
    trees: list | None = None               # random forest
    converged: bool = True
    train_info: dict = field(default_factory=dict)

    @property
    def input_length(self):
        """Expected raw feature-vector length (before masking)."""
        if self.feature_mask is not None:
            return len(self.feature_mask)
        return len(self.mean)


def _standardize_fit(X):
    mean = X.mean(axis=0)
    std = X.std(axis=0)
    std = np.where(std < 1e-12, 1.0, std)
    return mean, std


def _prepare(model, X):
    X = np.asarray(X, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.shape[1] != model.input_length:
        raise ContractError(
            f"feature length {X.shape[1]} does not match the model's "
            f"expected input length {model.input_length}")
    if model.feature_mask is not None:
        X = X[:, model.feature_mask]
    return (X - model.mean) / model.std, single


def _softmax(Z):
    Z = Z - Z.max(axis=1, keepdims=True)
    E = np.exp(Z)
    return E / E.sum(axis=1, keepdims=True)


def _one_hot(labels, classes):
    index = {c: i for i, c in enumerate(classes)}
    Y = np.zeros((len(labels), len(classes)))
    for i, label in enumerate(labels):
        Y[i, index[label]] = 1.0
    return Y


def _power_iteration_lmax(X, iters=30):
    """Largest eigenvalue of X^T X by deterministic power iteration."""
    d = X.shape[1]
    v = np.ones(d) / math.sqrt(d)
    lam = 0.0
    for _ in range(iters):
        w = X.T @ (X @ v)
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        v = w / norm
        lam = norm
    return lam


def ce_loss_and_grad(W, b, X, Y, l2):
    """L2-regularized multinomial cross-entropy and its exact gradient."""
    n = X.shape[0]
    P = _softmax(X @ W + b)
    # clip only inside the log; the gradient uses the exact P
    loss = -np.sum(Y * np.log(np.clip(P, 1e-300, None))) / n
    loss += 0.5 * l2 * np.sum(W * W)
    G = (P - Y) / n
    return loss, X.T @ G + l2 * W, G.sum(axis=0)


def _accelerated_descent(grad_fn, W, b, lipschitz, max_iter, tol):
    """Nesterov-accelerated gradient descent with a fixed 1/L step."""
    step = 1.0 / max(lipschitz, 1e-12)
    VW, Vb = W.copy(), b.copy()
    t = 1.0
    converged = False
    for _ in range(max_iter):
        GW, Gb = grad_fn(VW, Vb)
        if max(np.abs(GW).max(), np.abs(Gb).max()) < tol:
            GW2, Gb2 = grad_fn(W, b)
            if max(np.abs(GW2).max(), np.abs(Gb2).max()) < tol:
                converged = True
                break
        W_new = VW - step * GW
        b_new = Vb - step * Gb
        t_new = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        beta = (t - 1.0) / t_new
        VW = W_new + beta * (W_new - W)
        Vb = b_new + beta * (b_new - b)
        W, b, t = W_new, b_new, t_new
    return W, b, converged


def _require_multiclass(data):
    if len(data.classes) < 2:
        raise ContractError("training requires at least two classes")


def train_logistic_regression(train, l2=1e-2, max_iter=500, tol=1e-6,
                              feature_mask=None):
    """Multinomial softmax regression fit by accelerated full-batch descent.

    Initialization is all-zeros, so training is deterministic. The step size
    is 1/L with L an upper bound on the gradient's Lipschitz constant from
    the data Gram matrix. Returns converged=False when the gradient norm
    never falls below tol within max_iter iterations.
    """
    _require_multiclass(train)
    X = train.X if feature_mask is None else train.X[:, feature_mask]
    mean, std = _standardize_fit(X)
    Xs = (X - mean) / std
    classes = train.classes
    Y = _one_hot(train.labels, classes)
    n, d = Xs.shape

    X_aug = np.hstack([Xs, np.ones((n, 1))])
    lipschitz = 0.5 * _power_iteration_lmax(X_aug) * 1.05 / n + l2

    def grad_fn(W, b):
        _loss, GW, Gb = ce_loss_and_grad(W, b, Xs, Y, l2)
        return GW, Gb

    W0 = np.zeros((d, len(classes)))
    b0 = np.zeros(len(classes))
    W, b, converged = _accelerated_descent(grad_fn, W0, b0, lipschitz,
                                           max_iter, tol)
    return KeyClassifier(
        kind=KIND_LR, classes=classes, mean=mean, std=std,
        feature_mask=None if feature_mask is None else np.asarray(feature_mask, bool),
        weights=W, bias=b, converged=converged,
        train_info={"l2": l2, "max_iter": max_iter, "tol": tol},
    )


def train_svm(train, l2=1e-2, max_iter=500, tol=1e-6, feature_mask=None):
    """Linear one-vs-rest SVM with squared hinge loss, all classes at once."""
    _require_multiclass(train)
    X = train.X if feature_mask is None else train.X[:, feature_mask]
    mean, std = _standardize_fit(X)
    Xs = (X - mean) / std
    classes = train.classes
    Ypm = 2.0 * _one_hot(train.labels, classes) - 1.0
    n, d = Xs.shape

    X_aug = np.hstack([Xs, np.ones((n, 1))])
    lipschitz = 2.0 * _power_iteration_lmax(X_aug) * 1.05 / n + l2

    def grad_fn(W, b):
        margin = 1.0 - Ypm * (Xs @ W + b)
        active = np.maximum(margin, 0.0)
        G = -2.0 * Ypm * active / n
        return Xs.T @ G + l2 * W, G.sum(axis=0)

    W0 = np.zeros((d, len(classes)))
    b0 = np.zeros(len(classes))
    W, b, converged = _accelerated_descent(grad_fn, W0, b0, lipschitz,
                                           max_iter, tol)
    return KeyClassifier(
        kind=KIND_SVM, classes=classes, mean=mean, std=std,
        feature_mask=None if feature_mask is None else np.asarray(feature_mask, bool),
        weights=W, bias=b, converged=converged,
        train_info={"l2": l2, "max_iter": max_iter, "tol": tol},
    )


def train_lda(train, shrinkage=0.1, feature_mask=None):
    """LDA with a shared within-class covariance, shrunk toward the
    identity scaled by the average variance (needed when features
    outnumber samples)."""
    _require_multiclass(train)
    if not 0.0 <= shrinkage <= 1.0:
        raise ContractError("shrinkage must lie in [0, 1]")
    X = train.X if feature_mask is None else train.X[:, feature_mask]
    mean, std = _standardize_fit(X)
    Xs = (X - mean) / std
    classes = train.classes
    n, d = Xs.shape
    labels = np.asarray(train.labels)

    means = np.stack([Xs[labels == c].mean(axis=0) for c in classes])
    pooled = np.zeros((d, d))
    for i, c in enumerate(classes):
        centered = Xs[labels == c] - means[i]
        pooled += centered.T @ centered
    pooled /= max(n - len(classes), 1)
    avg_var = np.trace(pooled) / d if d else 1.0
    cov = (1.0 - shrinkage) * pooled + shrinkage * max(avg_var, 1e-12) * np.eye(d)

    solve = np.linalg.solve(cov, means.T)  # (d, k)
    priors = np.array([(labels == c).mean() for c in classes])
    bias = -0.5 * np.sum(means.T * solve, axis=0) + np.log(priors)
    return KeyClassifier(
        kind=KIND_LDA, classes=classes, mean=mean, std=std,
        feature_mask=None if feature_mask is None else np.asarray(feature_mask, bool),
        weights=solve, bias=bias,
        train_info={"shrinkage": shrinkage},
    )


# ---------------------------------------------------------------- forest

def _gini_best_split(Xf, y_idx, n_classes, feature_ids):
    """Best (feature, threshold) by Gini impurity over the given features."""
    n = len(y_idx)
    best = None  # (impurity, feature, threshold)
    counts_total = np.bincount(y_idx, minlength=n_classes).astype(np.float64)
    for f in feature_ids:
        values = Xf[:, f]
        order = np.argsort(values, kind="stable")
        sorted_vals = values[order]
        sorted_y = y_idx[order]
        left = np.zeros(n_classes)
        n_left = 0
        for i in range(n - 1):
            left[sorted_y[i]] += 1
            n_left += 1
            if sorted_vals[i] == sorted_vals[i + 1]:
                continue
            right = counts_total - left
            n_right = n - n_left
            gini_l = 1.0 - np.sum((left / n_left) ** 2)
            gini_r = 1.0 - np.sum((right / n_right) ** 2)
            imp = (n_left * gini_l + n_right * gini_r) / n
            if best is None or imp < best[0] - 1e-15:
                thr = 0.5 * (sorted_vals[i] + sorted_vals[i + 1])
                best = (imp, f, thr)
    return best


def _build_tree(Xs, y_idx, n_classes, rng, max_features, min_leaf):
    """CART tree as parallel arrays; leaves hold class distributions."""
    feature, threshold, left, right, dist = [], [], [], [], []

    def new_node():
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        dist.append(None)
        return len(feature) - 1

    def grow(node, idx):
        y = y_idx[idx]
        counts = np.bincount(y, minlength=n_classes).astype(np.float64)
        if len(idx) < 2 * min_leaf or counts.max() == len(idx):
            dist[node] = counts / counts.sum()
            return
        candidates = rng.choice(Xs.shape[1], size=max_features, replace=False)
        best = _gini_best_split(Xs[idx], y, n_classes, np.sort(candidates))
        if best is None:
            dist[node] = counts / counts.sum()
            return
        _imp, f, thr = best
        mask = Xs[idx, f] <= thr
        feature[node] = int(f)
        threshold[node] = float(thr)
        left[node] = new_node()
        right[node] = new_node()
        grow(left[node], idx[mask])
        grow(right[node], idx[~mask])

    root = new_node()
    grow(root, np.arange(len(y_idx)))
    return {
        "feature": np.array(feature),
        "threshold": np.array(threshold),
        "left": np.array(left),
        "right": np.array(right),
        "dist": [d if d is None else np.asarray(d) for d in dist],
    }


def _tree_predict_dist(tree, Xs, n_classes):
    out = np.zeros((len(Xs), n_classes))
    for i, x in enumerate(Xs):
        node = 0
        while tree["feature"][node] >= 0:
            if x[tree["feature"][node]] <= tree["threshold"][node]:
                node = tree["left"][node]
            else:
                node = tree["right"][node]
        out[i] = tree["dist"][node]
    return out


def train_random_forest(train, n_trees=50, seed=0, max_features="sqrt",
                        min_leaf=1, feature_mask=None):
    """Random forest of CART trees on seeded bootstrap resamples."""
    _require_multiclass(train)
    X = train.X if feature_mask is None else train.X[:, feature_mask]
    mean, std = _standardize_fit(X)
    Xs = (X - mean) / std
    classes = train.classes
    index = {c: i for i, c in enumerate(classes)}
    y_idx = np.array([index[l] for l in train.labels])
    n, d = Xs.shape
    if max_features == "sqrt":
        m = max(1, int(round(math.sqrt(d))))
    else:
        m = min(int(max_features), d)

    trees = []
    for child in np.random.SeedSequence(seed).spawn(n_trees):
        rng = np.random.default_rng(child)
        boot = rng.integers(0, n, n)
        trees.append(_build_tree(Xs[boot], y_idx[boot], len(classes),
                                 rng, m, min_leaf))
    return KeyClassifier(
        kind=KIND_RF, classes=classes, mean=mean, std=std,
        feature_mask=None if feature_mask is None else np.asarray(feature_mask, bool),
        trees=trees,
        train_info={"n_trees": n_trees, "seed": seed, "min_leaf": min_leaf},
    )


def train_knn(train, k=10, feature_mask=None):
    """k-nearest-neighbors by Euclidean distance on standardized features."""
    if k < 1:
        raise ContractError("k must be >= 1")
    if k > train.n_samples:
        raise ContractError(
            f"k={k} exceeds the {train.n_samples} training samples")
    X = train.X if feature_mask is None else train.X[:, feature_mask]
    mean, std = _standardize_fit(X)
    classes = train.classes
    index = {c: i for i, c in enumerate(classes)}
    return KeyClassifier(
        kind=KIND_KNN, classes=classes, mean=mean, std=std,
        feature_mask=None if feature_mask is None else np.asarray(feature_mask, bool),
        exemplars=(X - mean) / std,
        exemplar_labels=np.array([index[l] for l in train.labels]),
        k_neighbors=k,
        train_info={"k": k},
    )


TRAINERS = {
    KIND_LR: train_logistic_regression,
    KIND_SVM: train_svm,
    KIND_LDA: train_lda,
    KIND_RF: train_random_forest,
    KIND_KNN: train_knn,
}


def train_model(kind, train, **params):
    if kind not in TRAINERS:
        raise ContractError(f"unknown classifier kind {kind!r}")
    return TRAINERS[kind](train, **params)


# ------------------------------------------------------------- prediction

def _knn_neighbors(model, Xs):
    # expanded form keeps memory at (queries x exemplars) instead of
    # materializing the full difference tensor
    d2 = (np.sum(Xs * Xs, axis=1)[:, None]
          + np.sum(model.exemplars * model.exemplars, axis=1)[None, :]
          - 2.0 * (Xs @ model.exemplars.T))
    np.maximum(d2, 0.0, out=d2)
    order = np.argsort(d2, axis=1, kind="stable")[:, :model.k_neighbors]
    return order, d2


def predict_proba(model, X):
    """Posterior probability matrix (samples, classes); rows sum to 1."""
    Xs, single = _prepare(model, X)
    k = len(model.classes)
    if model.kind in (KIND_LR, KIND_SVM, KIND_LDA):
        scores = Xs @ model.weights + model.bias
        P = _softmax(scores)
    elif model.kind == KIND_RF:
        P = np.zeros((len(Xs), k))
        for tree in model.trees:
            P += _tree_predict_dist(tree, Xs, k)
        P /= len(model.trees)
    elif model.kind == KIND_KNN:
        order, _d2 = _knn_neighbors(model, Xs)
        P = np.zeros((len(Xs), k))
        for i in range(len(Xs)):
            votes = np.bincount(model.exemplar_labels[order[i]], minlength=k)
            P[i] = votes / votes.sum()
    else:
        raise ContractError(f"unknown classifier kind {model.kind!r}")
    return P[0] if single else P


def predict(model, X):
    """Per-sample class labels.

    kNN resolves vote ties with the label of the single nearest neighbor
    among the tied classes; other kinds take the posterior argmax (which
    breaks exact ties by class order).
    """
    Xs, single = _prepare(model, X)
    k = len(model.classes)
    if model.kind == KIND_KNN:
        order, _d2 = _knn_neighbors(model, Xs)
        out = []
        for i in range(len(Xs)):
            neighbor_labels = model.exemplar_labels[order[i]]
            votes = np.bincount(neighbor_labels, minlength=k)
            tied = np.flatnonzero(votes == votes.max())
            if len(tied) == 1:
                out.append(model.classes[tied[0]])
            else:
                for j in order[i]:  # nearest first
                    if model.exemplar_labels[j] in tied:
                        out.append(model.classes[model.exemplar_labels[j]])
                        break
    else:
        P = np.atleast_2d(predict_proba(model, X))
        out = [model.classes[i] for i in P.argmax(axis=1)]
    return out[0] if single else out


def predict_ranked(model, v):
    """All classes ordered by posterior, descending; ties by class order."""
    proba = predict_proba(model, np.asarray(v, dtype=np.float64))
    order = sorted(range(len(model.classes)), key=lambda i: (-proba[i], i))
    return RankedPrediction(tuple(
        (model.classes[i], float(proba[i])) for i in order))


def predict_mode(model, X):
    """Classify a whole set of samples with one label by majority vote.

    Returns (label, confidence) where confidence is the modal vote
    fraction minus the uniform share 1/#classes, so it is 1 - 1/#classes
    when unanimous and 0 when votes spread evenly over all classes.
    """
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if len(X) == 0:
        raise ContractError("predict_mode needs at least one sample")
    labels = predict(model, X)
    counts = {}
    for label in labels:
        counts[label] = counts.get(label, 0) + 1
    # ties broken by class order
    modal = max(counts, key=lambda c: (counts[c], -model.classes.index(c)))
    confidence = counts[modal] / len(X) - 1.0 / len(model.classes)
    return modal, confidence


# ---------------------------------------------------------------- metrics

def top_n_accuracy(model, test, n):
    """Fraction of samples whose true label is within the first n guesses."""
    if test.n_samples == 0:
        raise ContractError("empty test set")
    if not 1 <= n <= len(model.classes):
        raise ContractError(f"n must lie in [1, {len(model.classes)}]")
    hits = 0
    P = np.atleast_2d(predict_proba(model, test.X))
    for i, true_label in enumerate(test.labels):
        order = sorted(range(len(model.classes)), key=lambda j: (-P[i, j], j))
        top = [model.classes[j] for j in order[:n]]
        hits += true_label in top
    return hits / test.n_samples


def stratified_kfold(data, k, seed=0):
    """Per-class shuffled round-robin assignment into k folds.

    Returns a list of (train_indices, test_indices) pairs. Every sample
    lands in exactly one test fold and per-fold class counts differ from
    perfect proportionality by at most one sample.
    """
    if k < 2:
        raise ContractError("stratified k-fold needs k >= 2")
    rng = np.random.default_rng(seed)
    labels = np.asarray(data.labels)
    fold_of = np.empty(data.n_samples, dtype=int)
    for c in data.classes:
        idx = np.flatnonzero(labels == c)
        if len(idx) < k:
            raise ContractError(
                f"class {c!r} has only {len(idx)} samples for {k} folds")
        rng.shuffle(idx)
        for pos, sample in enumerate(idx):
            fold_of[sample] = pos % k
    splits = []
    for f in range(k):
        test = np.flatnonzero(fold_of == f)
        train = np.flatnonzero(fold_of != f)
        splits.append((train, test))
    return splits


@dataclass(frozen=True)
class RfeSelection:
    """Result of recursive feature elimination.

    elimination_order lists removed feature indices, earliest first; the
    kept mask for any intermediate size is reconstructible, and masks are
    nested across sizes by construction.
    """
    mask: np.ndarray
    elimination_order: tuple
    n_features: int

    def mask_at(self, target_count):
        removable = self.n_features - target_count
        if removable < 0 or removable > len(self.elimination_order):
            raise ContractError(
                f"target_count {target_count} not reachable from this run")
        mask = np.ones(self.n_features, dtype=bool)
        mask[list(self.elimination_order[:removable])] = False
        return mask


def rfe_select(train, target_count, step=None, l2=1e-2, max_iter=200,
               tol=1e-6):
    """Recursive feature elimination driven by logistic-regression weights.

    Each round fits LR on the surviving features and removes the `step`
    features with the smallest summed absolute weight across classes
    (default: 10% of the remaining count, at least 1, never overshooting
    target_count).
    """
    d = train.n_features
    if target_count < 1:
        raise ContractError("target_count must be >= 1")
    if target_count > d:
        raise ContractError(
            f"target_count {target_count} exceeds {d} features")
    alive = np.ones(d, dtype=bool)
    order = []
    while alive.sum() > target_count:
        remaining = int(alive.sum())
        batch = step if step is not None else max(1, round(0.10 * remaining))
        batch = min(batch, remaining - target_count)
        model = train_logistic_regression(
            train, l2=l2, max_iter=max_iter, tol=tol, feature_mask=alive)
        importance = np.abs(model.weights).sum(axis=1)
        alive_idx = np.flatnonzero(alive)
        drop = alive_idx[np.argsort(importance, kind="stable")[:batch]]
        alive[drop] = False
        order.extend(int(i) for i in drop)
    return RfeSelection(mask=alive, elimination_order=tuple(order),
                        n_features=d)


def grid_search(kind, train, param_grid, folds=5, seed=0, top_n=1):
    """Exhaustive hyper-parameter search by inner cross-validation.

    Returns (best_params, results) where results is a list of
    (params, mean_accuracy) in grid order. Ties keep the earlier grid
    point.
    """
    names = list(param_grid)
    combos = [dict(zip(names, values))
              for values in itertools.product(*(param_grid[n] for n in names))]
    if not combos:
        raise ContractError("empty parameter grid")
    splits = stratified_kfold(train, folds, seed=seed)
    results = []
    best = None
    for params in combos:
        scores = []
        for train_idx, test_idx in splits:
            model = train_model(kind, train.subset(train_idx), **params)
            scores.append(top_n_accuracy(model, train.subset(test_idx), top_n))
        mean_score = float(np.mean(scores))
        results.append((params, mean_score))
        if best is None or mean_score > best[1]:
            best = (params, mean_score)
    return best[0], results


# ------------------------------------------------------------ persistence

MODEL_FORMAT = "keytap-model"
MODEL_VERSION = 1


def _arr(x):
    return None if x is None else np.asarray(x).tolist()


def model_to_dict(model):
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "kind": model.kind,
        "classes": list(model.classes),
        "mean": _arr(model.mean),
        "std": _arr(model.std),
        "feature_mask": _arr(model.feature_mask),
        "weights": _arr(model.weights),
        "bias": _arr(model.bias),
        "exemplars": _arr(model.exemplars),
        "exemplar_labels": _arr(model.exemplar_labels),
        "k_neighbors": model.k_neighbors,
        "converged": bool(model.converged),
        "train_info": model.train_info,
        "trees": None,
    }
    if model.trees is not None:
        doc["trees"] = [{
            "feature": tree["feature"].tolist(),
            "threshold": tree["threshold"].tolist(),
            "left": tree["left"].tolist(),
            "right": tree["right"].tolist(),
            "dist": [None if d is None else d.tolist() for d in tree["dist"]],
        } for tree in model.trees]
    return doc


def model_from_dict(doc):
    if doc.get("format") != MODEL_FORMAT:
        raise ContractError("not a model file")
    if doc.get("version") != MODEL_VERSION:
        raise ContractError(f"unsupported model version {doc.get('version')}")

    def arr(key, dtype=np.float64):
        value = doc.get(key)
        return None if value is None else np.asarray(value, dtype=dtype)

    trees = None
    if doc.get("trees") is not None:
        trees = [{
            "feature": np.asarray(t["feature"], dtype=int),
            "threshold": np.asarray(t["threshold"], dtype=np.float64),
            "left": np.asarray(t["left"], dtype=int),
            "right": np.asarray(t["right"], dtype=int),
            "dist": [None if d is None else np.asarray(d, dtype=np.float64)
                     for d in t["dist"]],
        } for t in doc["trees"]]
    return KeyClassifier(
        kind=doc["kind"],
        classes=list(doc["classes"]),
        mean=arr("mean"),
        std=arr("std"),
        feature_mask=arr("feature_mask", dtype=bool),
        weights=arr("weights"),
        bias=arr("bias"),
        exemplars=arr("exemplars"),
        exemplar_labels=arr("exemplar_labels", dtype=int),
        k_neighbors=doc.get("k_neighbors"),
        trees=trees,
        converged=doc.get("converged", True),
        train_info=doc.get("train_info", {}),
    )


def save_model(path, model):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, sort_keys=True)


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))

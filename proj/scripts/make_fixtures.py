#!/usr/bin/env python3
"""Regenerates the bundled fixtures under data/.

Each fixture pairs a model JSON with a dataset CSV.  Models are trained on
features scaled the same way the library scales them before quantization:
per feature, the file-wide range [lo, hi] maps affinely onto
[0, 1 - 2**-fraction_bits] via  x * scale + offset  with
scale = span / (hi - lo), offset = -lo * scale.  Training in that domain
means the exported coefficients are exactly the ones the synthesized
circuits hardwire.

MLP and SVM fixtures target 4-bit unsigned inputs (fraction 4); decision
tree fixtures target 8-bit unsigned inputs (fraction 8).

Conventions matched to the C++ inference paths:
  - tree rule is `x >= threshold -> right`, so sklearn thresholds
    (`x <= t -> left`) are exported as nextafter(t, +inf);
  - argmax ties resolve to the lowest class index;
  - an SVM unit votes for positive_class when w.x + b >= 0;
  - a binary MLP head with a single logistic unit becomes two logits
    [0, z] so the output width equals the class count.

The script is a regeneration convenience: the generated files are
committed, and nothing at build or test time depends on Python.
"""

import json
from pathlib import Path

import numpy as np
from sklearn.datasets import load_breast_cancer, load_iris, load_wine
from sklearn.feature_selection import SelectKBest, f_classif
from sklearn.neural_network import MLPClassifier
from sklearn.preprocessing import QuantileTransformer
from sklearn.svm import LinearSVC
from sklearn.tree import DecisionTreeClassifier

ROOT = Path(__file__).resolve().parent.parent
DATA = ROOT / "data"


def scale_like_library(X, fraction_bits):
    """Maps each feature of X onto [0, span] exactly as fit_scalers does."""
    span = 1.0 - 2.0 ** (-fraction_bits)
    lo = X.min(axis=0)
    hi = X.max(axis=0)
    live = hi > lo
    scale = np.where(live, span / np.where(live, hi - lo, 1.0), 0.0)
    offset = -lo * scale
    return X * scale + offset


def write_csv(path, X, y):
    cols = [f"f{i}" for i in range(X.shape[1])] + ["label"]
    lines = [",".join(cols)]
    for row, label in zip(X, y):
        lines.append(",".join(repr(float(v)) for v in row) + f",{int(label)}")
    path.write_text("\n".join(lines) + "\n")


def write_model(path, body):
    path.write_text(json.dumps(body, indent=2) + "\n")


def mlp_body(clf, inputs, classes):
    layers = []
    depth = len(clf.coefs_)
    for li, (W, b) in enumerate(zip(clf.coefs_, clf.intercepts_)):
        layers.append(
            {
                "weights": W.T.tolist(),  # sklearn is (in, out); file is [out][in]
                "bias": b.tolist(),
                "activation": "relu" if li < depth - 1 else "none",
            }
        )
    head = layers[-1]
    if classes == 2 and len(head["weights"]) == 1:
        w = head["weights"][0]
        head["weights"] = [[0.0] * len(w), w]
        head["bias"] = [0.0, float(head["bias"][0])]
    return {
        "kind": "mlp-classifier",
        "inputs": inputs,
        "classes": classes,
        "mlp": {"layers": layers},
    }


def svm_body(X, y, inputs, classes, seed):
    units = []
    for a in range(classes):
        for b in range(a + 1, classes):
            mask = (y == a) | (y == b)
            target = (y[mask] == a).astype(int)  # decision >= 0 -> class a
            clf = LinearSVC(C=1.0, dual=False, max_iter=5000, random_state=seed)
            clf.fit(X[mask], target)
            units.append(
                {
                    "weights": clf.coef_[0].tolist(),
                    "bias": float(clf.intercept_[0]),
                    "positive_class": a,
                    "negative_class": b,
                }
            )
    return {
        "kind": "svm-classifier",
        "inputs": inputs,
        "classes": classes,
        "svm": {"classifiers": units},
    }


def tree_body(clf, inputs, classes):
    t = clf.tree_
    nodes = []
    for i in range(t.node_count):
        if t.children_left[i] < 0:
            nodes.append({"id": i, "class": int(np.argmax(t.value[i][0]))})
        else:
            nodes.append(
                {
                    "id": i,
                    "feature": int(t.feature[i]),
                    "threshold": float(np.nextafter(t.threshold[i], np.inf)),
                    "left": int(t.children_left[i]),
                    "right": int(t.children_right[i]),
                }
            )
    return {
        "kind": "decision-tree",
        "inputs": inputs,
        "classes": classes,
        "tree": {"nodes": nodes},
    }


def report(name, clf_acc):
    print(f"  {name:<12} train-domain accuracy {clf_acc:.4f}")


def make_blobs(rng, means, sigma, counts, noise_features):
    """Gaussian blobs in [0, 1] with appended uniform nuisance features."""
    rows, labels = [], []
    for c, (mean, count) in enumerate(zip(means, counts)):
        pts = rng.normal(mean, sigma, size=(count, len(mean)))
        rows.append(np.clip(pts, 0.0, 1.0))
        labels.append(np.full(count, c))
    X = np.vstack(rows)
    y = np.concatenate(labels)
    if noise_features:
        X = np.hstack([X, rng.uniform(0.0, 1.0, size=(len(y), noise_features))])
    order = rng.permutation(len(y))
    return X[order], y[order]


def make_grain(rng, count):
    """Three classes cut by axis-aligned rules on f0/f1/f2 with wide gaps;
    five nuisance features."""
    X = np.zeros((count, 7))
    y = np.zeros(count, dtype=int)
    for i in range(count):
        c = i % 3
        if c == 0:
            f0 = rng.uniform(0.00, 0.30)
            f1 = rng.uniform(0.00, 0.45)
        elif c == 1:
            f0 = rng.uniform(0.00, 0.30)
            f1 = rng.uniform(0.55, 1.00)
        else:
            f0 = rng.uniform(0.42, 1.00)
            f1 = rng.uniform(0.00, 1.00)
        X[i, 0] = f0
        X[i, 1] = f1
        X[i, 2:] = rng.uniform(0.0, 1.0, size=5)
        y[i] = c
    order = rng.permutation(count)
    return X[order], y[order]


def main():
    DATA.mkdir(exist_ok=True)
    print("datasets + models -> data/")

    # --- UCI corpus -------------------------------------------------------
    wine = load_wine()
    X_wine, y_wine = wine.data, wine.target

    # ten strongest features, then a per-feature quantile map to uniform:
    # the raw columns are heavy-tailed and would waste most of a coarse
    # input grid on outliers
    bcw = load_breast_cancer()
    keep = SelectKBest(f_classif, k=10).fit(bcw.data, bcw.target).get_support()
    X_bcw = QuantileTransformer(
        n_quantiles=256, output_distribution="uniform", random_state=0
    ).fit_transform(bcw.data[:, keep])
    y_bcw = bcw.target

    iris = load_iris()
    X_iris, y_iris = iris.data, iris.target

    # --- synthetic corpus -------------------------------------------------
    rng = np.random.default_rng(20260816)
    means_pulse = rng.uniform(0.15, 0.85, size=(3, 9))
    X_pulse, y_pulse = make_blobs(rng, means_pulse, 0.07, [300, 300, 300], 3)

    means_stream = rng.uniform(0.12, 0.88, size=(4, 8))
    X_stream, y_stream = make_blobs(rng, means_stream, 0.06, [200, 200, 200, 200], 2)

    X_grain, y_grain = make_grain(rng, 702)

    for name, X, y in [
        ("wine", X_wine, y_wine),
        ("bcw10", X_bcw, y_bcw),
        ("iris", X_iris, y_iris),
        ("pulse", X_pulse, y_pulse),
        ("stream", X_stream, y_stream),
        ("grain", X_grain, y_grain),
    ]:
        write_csv(DATA / f"{name}.csv", X, y)

    # --- MLP fixtures (4-bit input domain) --------------------------------
    # jitter_copies > 0 augments training with uniform noise of half an
    # input quantization step so decision boundaries settle between grid
    # points instead of on them
    mlp_plan = [
        ("mlp_pulse", X_pulse, y_pulse, 3, (8,), 3, 0),
        ("mlp_bcw10", X_bcw, y_bcw, 2, (6,), 0, 8),
        ("mlp_wine", X_wine, y_wine, 3, (6,), 0, 0),
        ("mlp_iris", X_iris, y_iris, 3, (5,), 3, 0),
    ]
    jitter_rng = np.random.default_rng(5)
    for name, X, y, classes, hidden, rs, jitter_copies in mlp_plan:
        Xs = scale_like_library(X, 4)
        span = 1.0 - 2.0**-4
        if jitter_copies:
            noisy = [
                np.clip(Xs + jitter_rng.uniform(-1 / 32, 1 / 32, Xs.shape), 0.0, span)
                for _ in range(jitter_copies)
            ]
            X_fit = np.vstack([Xs] + noisy)
            y_fit = np.tile(y, jitter_copies + 1)
        else:
            X_fit, y_fit = Xs, y
        clf = MLPClassifier(
            hidden_layer_sizes=hidden,
            activation="relu",
            solver="lbfgs",
            alpha=1e-3,
            max_iter=4000,
            random_state=rs,
        ).fit(X_fit, y_fit)
        write_model(DATA / f"{name}.json", mlp_body(clf, X.shape[1], classes))
        report(name, clf.score(Xs, y))

    # --- SVM fixture (4-bit input domain) ---------------------------------
    Xs = scale_like_library(X_stream, 4)
    write_model(DATA / "svm_stream.json", svm_body(Xs, y_stream, X_stream.shape[1], 4, 5))
    pair_hits = 0  # quick sanity: one-vs-one vote accuracy
    body = json.loads((DATA / "svm_stream.json").read_text())
    for row, label in zip(Xs, y_stream):
        votes = [0] * 4
        for u in body["svm"]["classifiers"]:
            acc = u["bias"] + float(np.dot(u["weights"], row))
            votes[u["positive_class"] if acc >= 0 else u["negative_class"]] += 1
        pair_hits += int(np.argmax(votes) == label)
    report("svm_stream", pair_hits / len(y_stream))

    # --- decision tree fixtures (8-bit input domain) -----------------------
    tree_plan = [
        ("dt_wine", X_wine, y_wine, 3, 3),
        ("dt_iris", X_iris, y_iris, 3, 3),
        ("dt_grain", X_grain, y_grain, 3, 4),
    ]
    for name, X, y, classes, depth in tree_plan:
        Xs = scale_like_library(X, 8)
        clf = DecisionTreeClassifier(max_depth=depth, random_state=0).fit(Xs, y)
        write_model(DATA / f"{name}.json", tree_body(clf, X.shape[1], classes))
        report(name, clf.score(Xs, y))


if __name__ == "__main__":
    main()

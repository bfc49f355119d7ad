"""Cross-validation, metrics, synthetic datasets, and the ablation runner.

The two dataset generators construct classification tasks where the weaker
descriptors are *provably* uninformative:

* :func:`gen_orientation_dataset` — class 1 graphs share positions,
  adjacency, and chemistry with their class 0 twins; only the node
  direction vectors are rotated (by one fixed global rotation). Distances
  are identical, and because both twins' directions differ by a shared
  rotation, so are all direction-direction angles. Distance-only and
  distance+theta features therefore cannot separate the classes, while the
  quadruplet's direction-to-segment angles can.

* :func:`gen_chirality_dataset` — class 0 graphs are jittered right-handed
  helices with tangent-aligned directions (a consistently handed family);
  class 1 graphs are their exact mirror images. PPF features of a mirror
  pair are bitwise identical, while the quadruplet's gamma flips sign.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .descriptor import DirectionalNode
from .geometry import _rotation_from_rng
from .molgraph import Dataset, MolGraph, featurize_edges
from .network import ModelConfig, TrainOptions, train


# ---------------------------------------------------------------------------
# metrics

def auc(scores, labels) -> float:
    """ROC AUC via the Mann-Whitney rank statistic; ties count 1/2."""
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be equal-length 1-D")
    pos = labels == 1
    neg = labels == 0
    if not pos.any() or not neg.any():
        raise ValueError("auc needs both classes present")
    ranks = _average_ranks(scores)
    n_pos = int(pos.sum())
    n_neg = int(neg.sum())
    u = ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    sorted_vals = values[order]
    i = 0
    n = len(values)
    while i < n:
        j = i
        while j + 1 < n and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def f1(predictions, labels, positive_class: int = 1) -> float:
    """Harmonic mean of precision and recall; 0 when both are undefined."""
    predictions = np.asarray(predictions, dtype=int)
    labels = np.asarray(labels, dtype=int)
    if predictions.shape != labels.shape or predictions.size == 0:
        raise ValueError("predictions and labels must be equal-length and non-empty")
    tp = int(((predictions == positive_class) & (labels == positive_class)).sum())
    fp = int(((predictions == positive_class) & (labels != positive_class)).sum())
    fn = int(((predictions != positive_class) & (labels == positive_class)).sum())
    denom = 2 * tp + fp + fn
    if denom == 0:
        return 0.0
    return 2.0 * tp / denom


def accuracy(predictions, labels) -> float:
    predictions = np.asarray(predictions, dtype=int)
    labels = np.asarray(labels, dtype=int)
    return float((predictions == labels).mean())


# ---------------------------------------------------------------------------
# folds

@dataclass(frozen=True)
class FoldSplit:
    k: int
    seed: int
    test_folds: tuple[tuple[int, ...], ...]

    def train_indices(self, fold: int) -> list[int]:
        test = set(self.test_folds[fold])
        n = sum(len(f) for f in self.test_folds)
        return [i for i in range(n) if i not in test]

    def test_indices(self, fold: int) -> list[int]:
        return list(self.test_folds[fold])


def kfold(labels, k: int, seed: int) -> FoldSplit:
    """Stratified, seeded, deterministic k-fold partition."""
    labels = np.asarray(labels, dtype=int)
    if k < 2:
        raise ValueError("k must be >= 2")
    rng = np.random.default_rng(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    for cls in sorted(set(labels.tolist())):
        idx = np.flatnonzero(labels == cls)
        if len(idx) < k:
            raise ValueError(f"class {cls} has {len(idx)} members, fewer than k={k}")
        idx = idx[rng.permutation(len(idx))]
        for pos, graph_idx in enumerate(idx):
            folds[pos % k].append(int(graph_idx))
    return FoldSplit(k=k, seed=seed, test_folds=tuple(tuple(sorted(f)) for f in folds))


# ---------------------------------------------------------------------------
# synthetic datasets

_SYNTH_FEATURE_WIDTH = 4


def _constant_features(n: int) -> np.ndarray:
    feats = np.zeros((n, _SYNTH_FEATURE_WIDTH))
    feats[:, 0] = 1.0
    return feats


def _cutoff_edges(positions: np.ndarray, cutoff: float) -> np.ndarray:
    n = len(positions)
    edges = [
        (i, j)
        for i in range(n)
        for j in range(i + 1, n)
        if np.linalg.norm(positions[i] - positions[j]) < cutoff
    ]
    return np.array(edges, dtype=int).reshape(-1, 2)


def gen_orientation_dataset(n_per_class: int, seed: int, cutoff: float = 15.0) -> Dataset:
    """Twin graphs that differ only in direction-vector orientation."""
    if n_per_class < 1:
        raise ValueError("need n_per_class >= 1")
    rng = np.random.default_rng(seed)
    # one fixed rotation is the entire class signature
    signature = _rotation_from_rng(np.random.default_rng(seed + 99991))
    graphs: list[MolGraph] = []
    for pair in range(n_per_class):
        n_nodes = int(rng.integers(8, 17))
        positions = rng.uniform(-6.0, 6.0, size=(n_nodes, 3))
        centroid = positions.mean(axis=0)
        rays = positions - centroid
        edges = _cutoff_edges(positions, cutoff)
        feats = _constant_features(n_nodes)
        for cls in (0, 1):
            dirs = rays if cls == 0 else rays @ signature.T
            nodes = [DirectionalNode(positions[i], dirs[i]) for i in range(n_nodes)]
            g = MolGraph(
                nodes=nodes,
                node_features=feats,
                edges=edges,
                label=cls,
                graph_id=f"orient-{pair}-c{cls}",
                cutoff=cutoff,
            )
            graphs.append(featurize_edges(g, "dnp"))
    return Dataset.from_graphs(graphs)


def gen_chirality_dataset(n_per_class: int, seed: int, cutoff: float = 15.0) -> Dataset:
    """Consistently handed helical graphs (class 0) and their mirrors (class 1)."""
    if n_per_class < 1:
        raise ValueError("need n_per_class >= 1")
    rng = np.random.default_rng(seed)
    graphs: list[MolGraph] = []
    for pair in range(n_per_class):
        n_nodes = int(rng.integers(8, 17))
        turn = rng.uniform(0.5, 0.9)
        radius = rng.uniform(2.0, 4.0)
        pitch = rng.uniform(0.4, 0.8)
        ts = np.arange(n_nodes) * turn
        positions = np.stack(
            [radius * np.cos(ts), radius * np.sin(ts), pitch * ts], axis=1
        )
        positions = positions + rng.normal(scale=0.15, size=positions.shape)
        tangents = np.stack(
            [-radius * turn * np.sin(ts), radius * turn * np.cos(ts), np.full(n_nodes, pitch)],
            axis=1,
        )
        tangents = tangents + rng.normal(scale=0.05, size=tangents.shape)
        edges = _cutoff_edges(positions, cutoff)
        feats = _constant_features(n_nodes)
        for cls in (0, 1):
            if cls == 0:
                pos, dirs = positions, tangents
            else:
                pos = positions.copy()
                pos[:, 2] = -pos[:, 2]
                dirs = tangents.copy()
                dirs[:, 2] = -dirs[:, 2]
            nodes = [DirectionalNode(pos[i], dirs[i]) for i in range(n_nodes)]
            g = MolGraph(
                nodes=nodes,
                node_features=feats,
                edges=edges,
                label=cls,
                graph_id=f"chiral-{pair}-c{cls}",
                cutoff=cutoff,
            )
            graphs.append(featurize_edges(g, "dnp"))
    return Dataset.from_graphs(graphs)


# ---------------------------------------------------------------------------
# cross-validation and ablations

@dataclass(frozen=True)
class AblationSpec:
    spec_id: str
    descriptor: str = "dnp"
    edge_in_node_update: bool = True
    edge_update: bool = True
    edge_in_readout: bool = True
    width: int = 128
    depth: int = 2


@dataclass
class MetricReport:
    """Cross-validated metrics at the selected epoch, plus final-epoch ones.

    The selected epoch maximizes test accuracy averaged over folds (an
    optimistic protocol; the final-epoch numbers are kept alongside for
    honesty).
    """

    per_fold: list[dict]
    selected_epoch: int
    final_epoch: dict = field(default_factory=dict)

    @property
    def auc(self) -> float:
        return float(np.mean([f["auc"] for f in self.per_fold]))

    @property
    def f1(self) -> float:
        return float(np.mean([f["f1"] for f in self.per_fold]))

    @property
    def accuracy(self) -> float:
        return float(np.mean([f["accuracy"] for f in self.per_fold]))

    @property
    def auc_std(self) -> float:
        return float(np.std([f["auc"] for f in self.per_fold]))

    @property
    def f1_std(self) -> float:
        return float(np.std([f["f1"] for f in self.per_fold]))

    @property
    def accuracy_std(self) -> float:
        return float(np.std([f["accuracy"] for f in self.per_fold]))

    def summary(self) -> dict:
        return {
            "auc": self.auc,
            "f1": self.f1,
            "accuracy": self.accuracy,
            "auc_std": self.auc_std,
            "f1_std": self.f1_std,
            "accuracy_std": self.accuracy_std,
            "selected_epoch": self.selected_epoch,
            "final_epoch": self.final_epoch,
        }


def cross_validate(
    dataset: Dataset, config: ModelConfig, opts: TrainOptions, k: int = 10, seed: int = 0
) -> MetricReport:
    """k-fold CV; per-epoch test metrics drive the epoch selection."""
    split = kfold(dataset.labels, k=k, seed=seed)
    fold_histories = []
    for fold in range(k):
        train_graphs = [dataset.graphs[i] for i in split.train_indices(fold)]
        test_graphs = [dataset.graphs[i] for i in split.test_indices(fold)]
        fold_opts = replace(opts, seed=opts.seed + fold)
        _, history = train(
            train_graphs,
            config,
            fold_opts,
            class_weights=dataset.class_weights,
            eval_graphs=test_graphs,
            eval_train=False,
        )
        fold_histories.append(history)
    n_epochs = len(fold_histories[0])
    mean_acc = [
        float(np.mean([h[e]["test_accuracy"] for h in fold_histories]))
        for e in range(n_epochs)
    ]
    selected = int(np.argmax(mean_acc))
    per_fold = [
        {
            "fold": fold,
            "auc": h[selected]["test_auc"],
            "f1": h[selected]["test_f1"],
            "accuracy": h[selected]["test_accuracy"],
            "scores": h[selected]["test_scores"],
            "predictions": h[selected]["test_predictions"],
            "labels": h[selected]["test_labels"],
        }
        for fold, h in enumerate(fold_histories)
    ]
    final = {
        "auc": float(np.mean([h[-1]["test_auc"] for h in fold_histories])),
        "f1": float(np.mean([h[-1]["test_f1"] for h in fold_histories])),
        "accuracy": float(np.mean([h[-1]["test_accuracy"] for h in fold_histories])),
    }
    return MetricReport(per_fold=per_fold, selected_epoch=selected, final_epoch=final)


def refeaturize(dataset: Dataset, kind: str) -> Dataset:
    graphs = [featurize_edges(g, kind) for g in dataset.graphs]
    return replace(dataset, graphs=graphs)


def run_ablation(
    dataset: Dataset,
    specs: list[AblationSpec],
    opts: TrainOptions,
    k: int = 10,
    seed: int = 0,
    norm: str = "batch",
) -> list[tuple[AblationSpec, MetricReport]]:
    results = []
    for spec in specs:
        featurized = refeaturize(dataset, spec.descriptor)
        config = ModelConfig(
            node_input_width=dataset.feature_width,
            class_count=dataset.class_count,
            width=spec.width,
            depth=spec.depth,
            norm=norm,
            edge_in_node_update=spec.edge_in_node_update,
            edge_update=spec.edge_update,
            edge_in_readout=spec.edge_in_readout,
        )
        report = cross_validate(featurized, config, opts, k=k, seed=seed)
        results.append((spec, report))
    return results


def ablation_csv(results: list[tuple[AblationSpec, MetricReport]]) -> str:
    """Per-fold rows plus one summary row per spec."""
    lines = ["spec_id,descriptor,node_update,edge_update,readout,width,depth,fold,auc,f1,accuracy"]
    for spec, report in results:
        base = (
            f"{spec.spec_id},{spec.descriptor},{int(spec.edge_in_node_update)},"
            f"{int(spec.edge_update)},{int(spec.edge_in_readout)},{spec.width},{spec.depth}"
        )
        for row in report.per_fold:
            lines.append(
                f"{base},{row['fold']},{row['auc']!r},{row['f1']!r},{row['accuracy']!r}"
            )
        lines.append(
            f"{base},summary,{report.auc!r},{report.f1!r},{report.accuracy!r}"
        )
    return "\n".join(lines) + "\n"

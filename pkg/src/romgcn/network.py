"""Edge-aware graph convolutional network with hand-derived gradients.

The forward pass implements, per layer (all sums over layer l-1 values, so
node and edge updates are parallel, not sequential):

    h_i^l = sigma_h^l( h_i^{l-1} + sum_{j in N(i)} h_j^{l-1}
                       [+ sum_{j in N(i)} e_ij^{l-1}] )
    e_ij^l = sigma_e^l( e_ij^{l-1} + h_i^{l-1} + h_j^{l-1} )   (or pass-through)

followed by a readout that concatenates, for k = 0..L, the graph-wise sums
of node features [plus edge features], and a 2-layer ReLU classifier. The
three bracketed edge pathways are independently switchable for ablations.

sigma_h/sigma_e are 2-layer MLPs with tanh activations (strictly monotone,
hence injective pointwise, and smooth enough for finite-difference gradient
verification); optional batch normalization sits after each linear map.

Everything is plain numpy in float64; training is deterministic for a given
seed. No ML framework is used — backward() is exact reverse-mode
differentiation of this fixed architecture, verified against central finite
differences in the test suite.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import CheckpointError, ConfigError
from .molgraph import MolGraph

BN_EPS = 1e-5
BN_MOMENTUM = 0.9

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class ModelConfig:
    node_input_width: int
    class_count: int
    width: int = 128
    depth: int = 2
    edge_input_width: int = 4
    norm: str = "batch"
    edge_in_node_update: bool = True
    edge_update: bool = True
    edge_in_readout: bool = True

    def __post_init__(self):
        if self.width < 1:
            raise ConfigError("width must be >= 1")
        if self.depth < 0:
            raise ConfigError("depth must be >= 0")
        if self.class_count < 2:
            raise ConfigError("need at least 2 classes")
        if self.norm not in ("batch", "none"):
            raise ConfigError(f"norm must be 'batch' or 'none', got {self.norm!r}")

    @property
    def readout_width(self) -> int:
        return (self.depth + 1) * self.width


@dataclass
class ModelParams:
    config: ModelConfig
    tensors: dict[str, np.ndarray]

    def trainable_names(self) -> list[str]:
        return [k for k in self.tensors if "running" not in k]

    def copy(self) -> "ModelParams":
        return ModelParams(self.config, {k: v.copy() for k, v in self.tensors.items()})


def _mlp_tensor_names(prefix: str, f_in: int, f_out: int, norm: str) -> dict[str, tuple]:
    names = {
        f"{prefix}.W1": (f_in, f_out),
        f"{prefix}.b1": (f_out,),
        f"{prefix}.W2": (f_out, f_out),
        f"{prefix}.b2": (f_out,),
    }
    if norm == "batch":
        for site in ("bn1", "bn2"):
            names[f"{prefix}.{site}.gamma"] = (f_out,)
            names[f"{prefix}.{site}.beta"] = (f_out,)
            names[f"{prefix}.{site}.running_mean"] = (f_out,)
            names[f"{prefix}.{site}.running_var"] = (f_out,)
    return names


def _tensor_layout(config: ModelConfig) -> dict[str, tuple]:
    F = config.width
    layout: dict[str, tuple] = {
        "node_proj.W": (config.node_input_width, F),
        "node_proj.b": (F,),
        "edge_proj.W": (config.edge_input_width, F),
        "edge_proj.b": (F,),
    }
    for l in range(1, config.depth + 1):
        layout.update(_mlp_tensor_names(f"conv{l}.h_mlp", F, F, config.norm))
        if config.edge_update:
            layout.update(_mlp_tensor_names(f"conv{l}.e_mlp", F, F, config.norm))
    layout["classifier.W1"] = (config.readout_width, F)
    layout["classifier.b1"] = (F,)
    if config.norm == "batch":
        layout["classifier.bn.gamma"] = (F,)
        layout["classifier.bn.beta"] = (F,)
        layout["classifier.bn.running_mean"] = (F,)
        layout["classifier.bn.running_var"] = (F,)
    layout["classifier.W2"] = (F, config.class_count)
    layout["classifier.b2"] = (config.class_count,)
    return layout


def init_params(config: ModelConfig, seed: int) -> ModelParams:
    """He-style uniform fan-in initialization, deterministic per seed."""
    rng = np.random.default_rng(seed)
    tensors: dict[str, np.ndarray] = {}
    for name, shape in _tensor_layout(config).items():
        if name.endswith(".gamma") or name.endswith(".running_var"):
            tensors[name] = np.ones(shape)
        elif name.endswith((".b", ".b1", ".b2", ".beta", ".running_mean")):
            tensors[name] = np.zeros(shape)
        else:
            limit = math.sqrt(6.0 / shape[0])
            tensors[name] = rng.uniform(-limit, limit, size=shape)
    return ModelParams(config=config, tensors=tensors)


# ---------------------------------------------------------------------------
# batching

@dataclass
class GraphBatch:
    x: np.ndarray  # (N, C) raw node features
    e: np.ndarray  # (M, 4) encoded edge features
    edges: np.ndarray  # (M, 2)
    node_graph: np.ndarray  # (N,)
    edge_graph: np.ndarray  # (M,)
    labels: np.ndarray | None
    n_graphs: int


def make_batch(graphs: list[MolGraph]) -> GraphBatch:
    """Disjoint-union batch of featurized graphs."""
    xs, es, edge_rows, ng, eg, labels = [], [], [], [], [], []
    offset = 0
    for gi, g in enumerate(graphs):
        if g.edge_features.shape != (g.n_edges, 4):
            raise ConfigError(f"graph {g.graph_id!r} has no encoded edge features")
        xs.append(g.node_features)
        es.append(g.edge_features)
        edge_rows.append(g.edges + offset)
        ng.append(np.full(g.n_nodes, gi))
        eg.append(np.full(g.n_edges, gi))
        labels.append(g.label)
        offset += g.n_nodes
    return GraphBatch(
        x=np.concatenate(xs, axis=0),
        e=np.concatenate(es, axis=0),
        edges=np.concatenate(edge_rows, axis=0).astype(int),
        node_graph=np.concatenate(ng).astype(int),
        edge_graph=np.concatenate(eg).astype(int),
        labels=None if any(l is None for l in labels) else np.array(labels, dtype=int),
        n_graphs=len(graphs),
    )


# ---------------------------------------------------------------------------
# building blocks

def _linear_fwd(x, W, b):
    return x @ W + b, x


def _linear_bwd(dout, cache_x, W):
    return dout @ W.T, cache_x.T @ dout, dout.sum(axis=0)


def _bn_fwd(z, gamma, beta, running_mean, running_var, train_mode):
    """Batch norm over axis 0. Returns (out, cache, new_running_stats)."""
    if z.shape[0] == 0:
        return z, None, (running_mean, running_var)
    if train_mode:
        mu = z.mean(axis=0)
        var = z.var(axis=0)
        std = np.sqrt(var + BN_EPS)
        xhat = (z - mu) / std
        new_rm = BN_MOMENTUM * running_mean + (1 - BN_MOMENTUM) * mu
        new_rv = BN_MOMENTUM * running_var + (1 - BN_MOMENTUM) * var
    else:
        std = np.sqrt(running_var + BN_EPS)
        xhat = (z - running_mean) / std
        new_rm, new_rv = running_mean, running_var
    out = gamma * xhat + beta
    return out, (xhat, std, gamma, train_mode), (new_rm, new_rv)


def _bn_bwd(dout, cache):
    if cache is None:
        return dout, 0.0, 0.0
    xhat, std, gamma, train_mode = cache
    dgamma = (dout * xhat).sum(axis=0)
    dbeta = dout.sum(axis=0)
    dxhat = dout * gamma
    if not train_mode:
        return dxhat / std, dgamma, dbeta
    n = xhat.shape[0]
    dz = (dxhat - dxhat.mean(axis=0) - xhat * (dxhat * xhat).mean(axis=0)) / std
    return dz, dgamma, dbeta


def _mlp_fwd(x, params, prefix, config, train_mode, activation):
    """2-layer MLP with optional BN after each linear map."""
    t = params.tensors
    cache = {"x": x, "activation": activation}
    z1, _ = _linear_fwd(x, t[f"{prefix}.W1"], t[f"{prefix}.b1"])
    if config.norm == "batch":
        n1, bn1_cache, (rm, rv) = _bn_fwd(
            z1,
            t[f"{prefix}.bn1.gamma"],
            t[f"{prefix}.bn1.beta"],
            t[f"{prefix}.bn1.running_mean"],
            t[f"{prefix}.bn1.running_var"],
            train_mode,
        )
        if train_mode:
            t[f"{prefix}.bn1.running_mean"], t[f"{prefix}.bn1.running_var"] = rm, rv
        cache["bn1"] = bn1_cache
    else:
        n1 = z1
    a1 = np.tanh(n1) if activation == "tanh" else np.maximum(n1, 0.0)
    z2, _ = _linear_fwd(a1, t[f"{prefix}.W2"], t[f"{prefix}.b2"])
    if config.norm == "batch":
        n2, bn2_cache, (rm, rv) = _bn_fwd(
            z2,
            t[f"{prefix}.bn2.gamma"],
            t[f"{prefix}.bn2.beta"],
            t[f"{prefix}.bn2.running_mean"],
            t[f"{prefix}.bn2.running_var"],
            train_mode,
        )
        if train_mode:
            t[f"{prefix}.bn2.running_mean"], t[f"{prefix}.bn2.running_var"] = rm, rv
        cache["bn2"] = bn2_cache
    else:
        n2 = z2
    out = np.tanh(n2) if activation == "tanh" else np.maximum(n2, 0.0)
    cache.update({"n1": n1, "a1": a1, "n2": n2, "out": out})
    return out, cache


def _mlp_bwd(dout, cache, params, grads, prefix, config):
    t = params.tensors
    act = cache["activation"]
    if act == "tanh":
        dn2 = dout * (1.0 - cache["out"] ** 2)
    else:
        dn2 = dout * (cache["n2"] > 0.0)
    if config.norm == "batch":
        dz2, dgamma2, dbeta2 = _bn_bwd(dn2, cache["bn2"])
        grads[f"{prefix}.bn2.gamma"] += dgamma2
        grads[f"{prefix}.bn2.beta"] += dbeta2
    else:
        dz2 = dn2
    da1, dW2, db2 = _linear_bwd(dz2, cache["a1"], t[f"{prefix}.W2"])
    grads[f"{prefix}.W2"] += dW2
    grads[f"{prefix}.b2"] += db2
    if act == "tanh":
        dn1 = da1 * (1.0 - cache["a1"] ** 2)
    else:
        dn1 = da1 * (cache["n1"] > 0.0)
    if config.norm == "batch":
        dz1, dgamma1, dbeta1 = _bn_bwd(dn1, cache["bn1"])
        grads[f"{prefix}.bn1.gamma"] += dgamma1
        grads[f"{prefix}.bn1.beta"] += dbeta1
    else:
        dz1 = dn1
    dx, dW1, db1 = _linear_bwd(dz1, cache["x"], t[f"{prefix}.W1"])
    grads[f"{prefix}.W1"] += dW1
    grads[f"{prefix}.b1"] += db1
    return dx


# ---------------------------------------------------------------------------
# graph operations

def project_inputs(batch: GraphBatch, params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Linear maps of raw node/edge features to the working width."""
    t = params.tensors
    cfg = params.config
    if batch.x.shape[1] != cfg.node_input_width:
        raise ConfigError(
            f"node feature width {batch.x.shape[1]} != config {cfg.node_input_width}"
        )
    if batch.e.shape[1] != cfg.edge_input_width:
        raise ConfigError(
            f"edge feature width {batch.e.shape[1]} != config {cfg.edge_input_width}"
        )
    h0 = batch.x @ t["node_proj.W"] + t["node_proj.b"]
    e0 = batch.e @ t["edge_proj.W"] + t["edge_proj.b"]
    return h0, e0


def node_aggregate(h, e, edges, include_edges: bool) -> np.ndarray:
    """h_i + sum of neighbor h_j [+ sum of incident e_ij], per node."""
    agg = h.copy()
    if edges.shape[0]:
        src, dst = edges[:, 0], edges[:, 1]
        np.add.at(agg, src, h[dst])
        np.add.at(agg, dst, h[src])
        if include_edges:
            np.add.at(agg, src, e)
            np.add.at(agg, dst, e)
    return agg


def edge_aggregate(e, h, edges) -> np.ndarray:
    """e_ij + h_i + h_j, per edge."""
    if not edges.shape[0]:
        return e.copy()
    return e + h[edges[:, 0]] + h[edges[:, 1]]


def conv_layer(h_prev, e_prev, edges, params, layer_index, train_mode=True):
    """One message-passing layer; both updates read layer l-1 values only."""
    cfg = params.config
    agg_h = node_aggregate(h_prev, e_prev, edges, cfg.edge_in_node_update)
    h_out, h_cache = _mlp_fwd(
        agg_h, params, f"conv{layer_index}.h_mlp", cfg, train_mode, "tanh"
    )
    if cfg.edge_update:
        agg_e = edge_aggregate(e_prev, h_prev, edges)
        e_out, e_cache = _mlp_fwd(
            agg_e, params, f"conv{layer_index}.e_mlp", cfg, train_mode, "tanh"
        )
    else:
        e_out, e_cache = e_prev, None
    return h_out, e_out, {"h": h_cache, "e": e_cache}


def readout(h_list, e_list, batch: GraphBatch, config: ModelConfig) -> np.ndarray:
    """Concatenation over layers of per-graph sums of node [and edge] features."""
    chunks = []
    for k in range(config.depth + 1):
        r = np.zeros((batch.n_graphs, config.width))
        np.add.at(r, batch.node_graph, h_list[k])
        if config.edge_in_readout and batch.edges.shape[0]:
            np.add.at(r, batch.edge_graph, e_list[k])
        chunks.append(r)
    return np.concatenate(chunks, axis=1)


def classify(h_g, params, train_mode=True):
    """2-layer MLP classifier with rectified-linear hidden activation."""
    t = params.tensors
    cfg = params.config
    cache = {"h_g": h_g}
    z1 = h_g @ t["classifier.W1"] + t["classifier.b1"]
    if cfg.norm == "batch":
        n1, bn_cache, (rm, rv) = _bn_fwd(
            z1,
            t["classifier.bn.gamma"],
            t["classifier.bn.beta"],
            t["classifier.bn.running_mean"],
            t["classifier.bn.running_var"],
            train_mode,
        )
        if train_mode:
            t["classifier.bn.running_mean"], t["classifier.bn.running_var"] = rm, rv
        cache["bn"] = bn_cache
    else:
        n1 = z1
    a1 = np.maximum(n1, 0.0)
    logits = a1 @ t["classifier.W2"] + t["classifier.b2"]
    cache.update({"n1": n1, "a1": a1})
    return logits, cache


@dataclass
class ForwardTrace:
    h: list  # h^0 .. h^L, each (N, F)
    e: list  # e^0 .. e^L, each (M, F)
    h_g: np.ndarray  # (B, (L+1)F)
    logits: np.ndarray  # (B, K)
    conv_caches: list
    classifier_cache: dict
    batch: GraphBatch


def forward(params: ModelParams, batch: GraphBatch, train_mode=True) -> ForwardTrace:
    cfg = params.config
    h0, e0 = project_inputs(batch, params)
    h_list, e_list, conv_caches = [h0], [e0], []
    for l in range(1, cfg.depth + 1):
        h_l, e_l, cache = conv_layer(h_list[-1], e_list[-1], batch.edges, params, l, train_mode)
        h_list.append(h_l)
        e_list.append(e_l)
        conv_caches.append(cache)
    h_g = readout(h_list, e_list, batch, cfg)
    logits, cls_cache = classify(h_g, params, train_mode)
    return ForwardTrace(
        h=h_list,
        e=e_list,
        h_g=h_g,
        logits=logits,
        conv_caches=conv_caches,
        classifier_cache=cls_cache,
        batch=batch,
    )


# ---------------------------------------------------------------------------
# loss and gradients

def log_softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=-1, keepdims=True))


def softmax(logits: np.ndarray) -> np.ndarray:
    return np.exp(log_softmax(logits))


def loss_weighted_ce(logits, label: int, class_weights) -> float:
    """-w[label] * log softmax(logits)[label], log-sum-exp stabilized."""
    logits = np.asarray(logits, dtype=float)
    w = np.asarray(class_weights, dtype=float)
    if not (0 <= label < logits.shape[-1]):
        raise ValueError(f"label {label} out of range for {logits.shape[-1]} classes")
    return float(-w[label] * log_softmax(logits)[label])


def batch_loss(trace: ForwardTrace, class_weights) -> float:
    """Sum of per-graph weighted cross-entropies (sum, not mean)."""
    labels = trace.batch.labels
    w = np.asarray(class_weights, dtype=float)
    ls = log_softmax(trace.logits)
    return float(-(w[labels] * ls[np.arange(len(labels)), labels]).sum())


def backward(trace: ForwardTrace, params: ModelParams, class_weights) -> dict[str, np.ndarray]:
    """Exact gradients of the summed weighted cross-entropy w.r.t. params."""
    cfg = params.config
    batch = trace.batch
    labels = batch.labels
    w = np.asarray(class_weights, dtype=float)
    grads = {k: np.zeros_like(v) for k, v in params.tensors.items() if "running" not in k}

    probs = softmax(trace.logits)
    dlogits = probs * w[labels][:, None]
    dlogits[np.arange(len(labels)), labels] -= w[labels]

    # classifier
    t = params.tensors
    cls = trace.classifier_cache
    da1, dW2, db2 = _linear_bwd(dlogits, cls["a1"], t["classifier.W2"])
    grads["classifier.W2"] += dW2
    grads["classifier.b2"] += db2
    dn1 = da1 * (cls["n1"] > 0.0)
    if cfg.norm == "batch":
        dz1, dgamma, dbeta = _bn_bwd(dn1, cls["bn"])
        grads["classifier.bn.gamma"] += dgamma
        grads["classifier.bn.beta"] += dbeta
    else:
        dz1 = dn1
    dh_g, dW1, db1 = _linear_bwd(dz1, cls["h_g"], t["classifier.W1"])
    grads["classifier.W1"] += dW1
    grads["classifier.b1"] += db1

    # readout: split per layer, scatter back to nodes/edges
    F = cfg.width
    dh = [np.zeros_like(h) for h in trace.h]
    de = [np.zeros_like(e) for e in trace.e]
    for k in range(cfg.depth + 1):
        dr = dh_g[:, k * F : (k + 1) * F]
        dh[k] += dr[batch.node_graph]
        if cfg.edge_in_readout and batch.edges.shape[0]:
            de[k] += dr[batch.edge_graph]

    # conv layers, reverse order
    edges = batch.edges
    for l in range(cfg.depth, 0, -1):
        cache = trace.conv_caches[l - 1]
        d_agg_h = _mlp_bwd(dh[l], cache["h"], params, grads, f"conv{l}.h_mlp", cfg)
        dh[l - 1] += d_agg_h
        if edges.shape[0]:
            src, dst = edges[:, 0], edges[:, 1]
            np.add.at(dh[l - 1], src, d_agg_h[dst])
            np.add.at(dh[l - 1], dst, d_agg_h[src])
            if cfg.edge_in_node_update:
                de[l - 1] += d_agg_h[src] + d_agg_h[dst]
        if cfg.edge_update:
            d_agg_e = _mlp_bwd(de[l], cache["e"], params, grads, f"conv{l}.e_mlp", cfg)
            de[l - 1] += d_agg_e
            if edges.shape[0]:
                np.add.at(dh[l - 1], edges[:, 0], d_agg_e)
                np.add.at(dh[l - 1], edges[:, 1], d_agg_e)
        else:
            de[l - 1] += de[l]

    # input projections
    grads["node_proj.W"] += batch.x.T @ dh[0]
    grads["node_proj.b"] += dh[0].sum(axis=0)
    grads["edge_proj.W"] += batch.e.T @ de[0]
    grads["edge_proj.b"] += de[0].sum(axis=0)
    return grads


# ---------------------------------------------------------------------------
# optimizer

@dataclass
class AdamState:
    m: dict[str, np.ndarray]
    v: dict[str, np.ndarray]
    t: int = 0

    @classmethod
    def for_params(cls, params: ModelParams) -> "AdamState":
        return cls(
            m={k: np.zeros_like(params.tensors[k]) for k in params.trainable_names()},
            v={k: np.zeros_like(params.tensors[k]) for k in params.trainable_names()},
        )


def adam_step(
    params: ModelParams,
    grads: dict[str, np.ndarray],
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[ModelParams, AdamState]:
    """Standard Adam update, in place."""
    state.t += 1
    bc1 = 1.0 - beta1 ** state.t
    bc2 = 1.0 - beta2 ** state.t
    for name, g in grads.items():
        state.m[name] = beta1 * state.m[name] + (1 - beta1) * g
        state.v[name] = beta2 * state.v[name] + (1 - beta2) * g * g
        m_hat = state.m[name] / bc1
        v_hat = state.v[name] / bc2
        params.tensors[name] -= lr * m_hat / (np.sqrt(v_hat) + eps)
    return params, state


# ---------------------------------------------------------------------------
# training

@dataclass(frozen=True)
class TrainOptions:
    epochs: int = 100
    batch_size: int = 16
    lr: float = 1e-3
    seed: int = 0
    lr_halving_epochs: int = 50


def schedule_lr(initial_lr: float, epoch: int, halving_epochs: int = 50) -> float:
    """Initial rate halved every ``halving_epochs`` epochs (epoch is 0-based)."""
    return initial_lr * 0.5 ** (epoch // halving_epochs)


def evaluate(params: ModelParams, graphs: list[MolGraph], class_weights=None) -> dict:
    """Eval-mode metrics: mean loss (if weights given), accuracy, scores."""
    from .evaluation import auc as auc_fn
    from .evaluation import f1 as f1_fn

    batch = make_batch(graphs)
    trace = forward(params, batch, train_mode=False)
    probs = softmax(trace.logits)
    preds = probs.argmax(axis=1)
    out = {"scores": probs, "predictions": preds}
    if batch.labels is not None:
        labels = batch.labels
        out["labels"] = labels
        out["accuracy"] = float((preds == labels).mean())
        if class_weights is not None:
            out["loss"] = batch_loss(trace, class_weights) / len(graphs)
        k = params.config.class_count
        if len(set(labels.tolist())) > 1:
            if k == 2:
                out["auc"] = auc_fn(probs[:, 1], labels)
                out["f1"] = f1_fn(preds, labels, positive_class=1)
            else:
                # one-vs-rest macro averages over the classes present
                aucs = []
                f1s = []
                for c in range(k):
                    binary = (labels == c).astype(int)
                    if 0 < binary.sum() < len(binary):
                        aucs.append(auc_fn(probs[:, c], binary))
                        f1s.append(f1_fn(preds, labels, positive_class=c))
                out["auc"] = float(np.mean(aucs))
                out["f1"] = float(np.mean(f1s))
    return out


def train(
    graphs: list[MolGraph],
    config: ModelConfig,
    opts: TrainOptions,
    class_weights=None,
    eval_graphs: list[MolGraph] | None = None,
    eval_train: bool = True,
) -> tuple[ModelParams, list[dict]]:
    """Adam training with the halving schedule; deterministic per seed.

    Returns the trained parameters and one history row per epoch with the
    learning rate, mean train loss, train accuracy (unless ``eval_train`` is
    off), and (when eval_graphs is given) test accuracy/auc/f1 at that epoch.
    """
    if not graphs:
        raise ValueError("empty training set")
    if class_weights is None:
        class_weights = np.ones(config.class_count)
    params = init_params(config, seed=opts.seed)
    state = AdamState.for_params(params)
    rng = np.random.default_rng(opts.seed + 1)
    history: list[dict] = []
    for epoch in range(opts.epochs):
        lr = schedule_lr(opts.lr, epoch, opts.lr_halving_epochs)
        order = rng.permutation(len(graphs))
        total_loss = 0.0
        for start in range(0, len(order), opts.batch_size):
            idx = order[start : start + opts.batch_size]
            batch = make_batch([graphs[i] for i in idx])
            trace = forward(params, batch, train_mode=True)
            total_loss += batch_loss(trace, class_weights)
            grads = backward(trace, params, class_weights)
            params, state = adam_step(params, grads, state, lr)
        row = {"epoch": epoch, "lr": lr, "loss": total_loss / len(graphs)}
        if eval_train:
            train_metrics = evaluate(params, graphs, class_weights)
            row["accuracy"] = train_metrics["accuracy"]
        if eval_graphs is not None:
            test_metrics = evaluate(params, eval_graphs, class_weights)
            row["test_accuracy"] = test_metrics["accuracy"]
            row["test_auc"] = test_metrics.get("auc", float("nan"))
            row["test_f1"] = test_metrics.get("f1", float("nan"))
            row["test_scores"] = test_metrics["scores"]
            row["test_predictions"] = test_metrics["predictions"]
            row["test_labels"] = test_metrics["labels"]
        history.append(row)
    return params, history


# ---------------------------------------------------------------------------
# checkpointing

def save_checkpoint(params: ModelParams, extra_config: dict | None = None) -> str:
    """Versioned JSON envelope; floats round-trip bitwise."""
    config = asdict(params.config)
    if extra_config:
        config.update(extra_config)
    payload = {
        "version": CHECKPOINT_VERSION,
        "config": config,
        "tensors": {
            name: {"shape": list(t.shape), "data": t.ravel().tolist()}
            for name, t in params.tensors.items()
        },
    }
    return json.dumps(payload)


def load_checkpoint(text: str | bytes) -> tuple[ModelParams, dict]:
    """Parse a checkpoint; returns (params, extra-config dict)."""
    try:
        payload = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise CheckpointError(f"corrupt checkpoint: {exc}") from None
    if not isinstance(payload, dict) or payload.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"unsupported checkpoint version {payload.get('version')!r}"
            if isinstance(payload, dict)
            else "corrupt checkpoint: not an object"
        )
    cfg_dict = dict(payload.get("config", {}))
    known = {f for f in ModelConfig.__dataclass_fields__}
    extra = {k: v for k, v in cfg_dict.items() if k not in known}
    try:
        config = ModelConfig(**{k: v for k, v in cfg_dict.items() if k in known})
    except (TypeError, ConfigError) as exc:
        raise CheckpointError(f"bad checkpoint config: {exc}") from None
    tensors = {}
    try:
        for name, spec in payload["tensors"].items():
            arr = np.array(spec["data"], dtype=float).reshape(spec["shape"])
            tensors[name] = arr
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"bad tensor payload: {exc}") from None
    expected = _tensor_layout(config)
    if set(tensors) != set(expected):
        raise CheckpointError("checkpoint tensors do not match the config layout")
    for name, shape in expected.items():
        if tensors[name].shape != shape:
            raise CheckpointError(
                f"tensor {name} has shape {tensors[name].shape}, expected {shape}"
            )
    return ModelParams(config=config, tensors=tensors), extra

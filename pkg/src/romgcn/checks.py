"""Executable property suites for the descriptor and network guarantees.

Each check runs a configurable number of randomized trials and reports the
worst observed deviation together with a counterexample when it fails. The
same functions back the ``romgcn check`` command and the acceptance tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import descriptor as dsc
from .descriptor import DirectionalNode
from .geometry import (
    RigidTransform,
    _rotation_from_rng,
    kabsch_rmsd,
    mirror_xy,
)
from .molgraph import MolGraph, featurize_edges
from .network import (
    ModelConfig,
    backward,
    batch_loss,
    forward,
    init_params,
    make_batch,
)

GENERAL_CASE_MARGIN = 1e-6


@dataclass
class CheckResult:
    name: str
    passed: bool
    trials: int
    max_deviation: float
    threshold: float
    detail: str = ""
    counterexample: str | None = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        msg = (
            f"{status} {self.name}: {self.trials} trials, "
            f"max deviation {self.max_deviation:.3e} (threshold {self.threshold:.0e})"
        )
        if self.detail:
            msg += f" [{self.detail}]"
        return msg


def _random_pair(rng: np.random.Generator, scale: float = 5.0) -> tuple[DirectionalNode, DirectionalNode]:
    a = DirectionalNode(rng.normal(size=3) * scale, rng.normal(size=3))
    b = DirectionalNode(rng.normal(size=3) * scale, rng.normal(size=3))
    return a, b


def _random_transform(rng: np.random.Generator) -> RigidTransform:
    return RigidTransform(rotation=_rotation_from_rng(rng), translation=rng.normal(size=3) * 10.0)


def _is_general(a: DirectionalNode, b: DirectionalNode, margin: float = GENERAL_CASE_MARGIN) -> bool:
    th = dsc.pair_angles(a, b)
    if th.theta_i is None or th.theta_j is None:
        return False
    for t in (th.theta_i, th.theta_j):
        if t < margin or t > math.pi - margin:
            return False
    if abs(th.theta_i - th.theta_j) < margin:
        return False
    q = dsc.dnp(a, b)
    if q.beta < margin or q.beta > math.pi - margin:
        return False
    if abs(q.gamma) < margin or abs(q.gamma) > math.pi - margin:
        return False
    return True


def _general_pair(rng: np.random.Generator) -> tuple[DirectionalNode, DirectionalNode]:
    while True:
        a, b = _random_pair(rng)
        if _is_general(a, b):
            return a, b


def check_invariance(trials: int = 10_000, seed: int = 0, threshold: float = 1e-9) -> CheckResult:
    """All four descriptors must be unchanged under random rigid motion."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_case = None
    for _ in range(trials):
        a, b = _random_pair(rng)
        t = _random_transform(rng)
        ta, tb = a.transformed(t), b.transformed(t)
        devs = [
            max(abs(x - y) for x, y in zip(dsc.dnp(a, b).as_tuple(), dsc.dnp(ta, tb).as_tuple())),
            max(abs(x - y) for x, y in zip(dsc.ppf(a, b), dsc.ppf(ta, tb))),
            max(abs(x - y) for x, y in zip(dsc.distance_theta(a, b), dsc.distance_theta(ta, tb))),
            abs(dsc.distance_only(a, b) - dsc.distance_only(ta, tb)),
        ]
        dev = max(devs)
        if dev > worst:
            worst = dev
            worst_case = (a, b, t)
    passed = worst < threshold
    return CheckResult(
        name="invariance",
        passed=passed,
        trials=trials,
        max_deviation=worst,
        threshold=threshold,
        detail="dnp/ppf/distance_theta/distance under random rigid transforms",
        counterexample=None if passed else repr(worst_case),
    )


def _tie_pair(rng: np.random.Generator) -> tuple[DirectionalNode, DirectionalNode]:
    """A pair whose two section angles are exactly equal."""
    d = float(rng.uniform(1.0, 8.0))
    phi = float(rng.uniform(0.2, math.pi - 0.2))
    psi_a = float(rng.uniform(0.0, 2 * math.pi))
    psi_b = float(rng.uniform(0.0, 2 * math.pi))
    # both directions at angle phi from their outgoing segment
    ua = np.array([math.cos(phi), math.sin(phi) * math.cos(psi_a), math.sin(phi) * math.sin(psi_a)])
    ub = np.array([-math.cos(phi), math.sin(phi) * math.cos(psi_b), math.sin(phi) * math.sin(psi_b)])
    a = DirectionalNode(np.zeros(3), ua)
    b = DirectionalNode(np.array([d, 0.0, 0.0]), ub)
    return a, b


def check_permutation(trials: int = 10_000, seed: int = 1, tie_every: int = 5) -> CheckResult:
    """dnp(a, b) must equal dnp(b, a) bitwise, ties included."""
    rng = np.random.default_rng(seed)
    mismatches = 0
    example = None
    for i in range(trials):
        if i % tie_every == 0:
            a, b = _tie_pair(rng)
        else:
            a, b = _random_pair(rng)
        qab = dsc.dnp(a, b).as_tuple()
        qba = dsc.dnp(b, a).as_tuple()
        if qab != qba:
            mismatches += 1
            if example is None:
                example = (a, b, qab, qba)
    return CheckResult(
        name="permutation",
        passed=mismatches == 0,
        trials=trials,
        max_deviation=float(mismatches),
        threshold=1.0,
        detail=f"{mismatches} exact mismatches (ties forced every {tie_every}th trial)",
        counterexample=None if example is None else repr(example),
    )


def check_injectivity(trials: int = 10_000, seed: int = 2,
                      quad_threshold: float = 1e-9, rmsd_threshold: float = 1e-6) -> CheckResult:
    """Reconstruction from the quadruplet must superimpose onto the original."""
    rng = np.random.default_rng(seed)
    worst_quad = 0.0
    worst_rmsd = 0.0
    example = None
    for _ in range(trials):
        a, b = _general_pair(rng)
        q = dsc.dnp(a, b)
        rs, rt = dsc.reconstruct_canonical_pair(q)
        q2 = dsc.dnp(rs, rt)
        quad_dev = max(abs(x - y) for x, y in zip(q.as_tuple(), q2.as_tuple()))
        fr = dsc.source_target(a, b)
        rmsd = kabsch_rmsd(
            dsc.frame_points(fr.source, fr.target), dsc.frame_points(rs, rt)
        )
        if quad_dev > worst_quad:
            worst_quad = quad_dev
            if quad_dev >= quad_threshold:
                example = (a, b, q)
        if rmsd > worst_rmsd:
            worst_rmsd = rmsd
            if rmsd >= rmsd_threshold:
                example = (a, b, q)
    passed = worst_quad < quad_threshold and worst_rmsd < rmsd_threshold
    return CheckResult(
        name="injectivity",
        passed=passed,
        trials=trials,
        max_deviation=max(worst_quad, worst_rmsd),
        threshold=rmsd_threshold,
        detail=(
            f"max quadruplet error {worst_quad:.3e} (threshold {quad_threshold:.0e}), "
            f"max round-trip RMSD {worst_rmsd:.3e} (threshold {rmsd_threshold:.0e})"
        ),
        counterexample=None if passed else repr(example),
    )


def _mirror_pair(a: DirectionalNode, b: DirectionalNode) -> tuple[DirectionalNode, DirectionalNode]:
    m = mirror_xy()
    return a.transformed(m), b.transformed(m)


def check_chirality(trials: int = 1_000, seed: int = 3,
                    ppf_threshold: float = 1e-12, gamma_threshold: float = 1e-9) -> CheckResult:
    """Mirror image: ppf identical, dnp gamma sign-flipped, on non-planar pairs."""
    rng = np.random.default_rng(seed)
    worst_ppf = 0.0
    worst_gamma = 0.0
    flips = 0
    example = None
    for _ in range(trials):
        a, b = _general_pair(rng)
        ma, mb = _mirror_pair(a, b)
        pd = max(abs(x - y) for x, y in zip(dsc.ppf(a, b), dsc.ppf(ma, mb)))
        q = dsc.dnp(a, b)
        qm = dsc.dnp(ma, mb)
        gd = abs(qm.gamma + q.gamma)
        base = max(abs(x - y) for x, y in zip((q.alpha, q.beta, q.d), (qm.alpha, qm.beta, qm.d)))
        dev = max(pd, gd, base)
        if qm.gamma * q.gamma < 0:
            flips += 1
        if dev > max(worst_ppf, worst_gamma):
            example = (a, b, q, qm)
        worst_ppf = max(worst_ppf, pd)
        worst_gamma = max(worst_gamma, gd, base)
    passed = worst_ppf < ppf_threshold and worst_gamma < gamma_threshold and flips == trials
    return CheckResult(
        name="chirality",
        passed=passed,
        trials=trials,
        max_deviation=max(worst_ppf, worst_gamma),
        threshold=gamma_threshold,
        detail=(
            f"ppf max dev {worst_ppf:.3e}, gamma-flip max dev {worst_gamma:.3e}, "
            f"sign flips {flips}/{trials}"
        ),
        counterexample=None if passed else repr(example),
    )


# ---------------------------------------------------------------------------
# gradients

def _random_graph(rng: np.random.Generator, n_nodes: int = 5, feature_width: int = 5) -> MolGraph:
    positions = rng.normal(size=(n_nodes, 3)) * 4.0
    nodes = [DirectionalNode(positions[i], rng.normal(size=3)) for i in range(n_nodes)]
    all_pairs = [(i, j) for i in range(n_nodes) for j in range(i + 1, n_nodes)]
    m = int(rng.integers(n_nodes - 1, len(all_pairs) + 1))
    chosen = sorted(rng.choice(len(all_pairs), size=m, replace=False).tolist())
    g = MolGraph(
        nodes=nodes,
        node_features=rng.normal(size=(n_nodes, feature_width)),
        edges=np.array([all_pairs[c] for c in chosen], dtype=int),
        label=int(rng.integers(0, 2)),
        graph_id="gradcheck",
        cutoff=15.0,
    )
    return featurize_edges(g, "dnp")


def all_flag_combinations() -> list[dict]:
    combos = []
    for nu in (True, False):
        for eu in (True, False):
            for ro in (True, False):
                combos.append(
                    {"edge_in_node_update": nu, "edge_update": eu, "edge_in_readout": ro}
                )
    return combos


def gradient_max_rel_error(
    graph: MolGraph | list[MolGraph],
    config: ModelConfig,
    seed: int,
    class_weights,
    fd_step: float = 1e-5,
) -> float:
    """Per-tensor sup-norm relative error between backward and central FD."""
    params = init_params(config, seed=seed)
    graphs = graph if isinstance(graph, list) else [graph]
    batch = make_batch(graphs)

    def loss_fn() -> float:
        trace = forward(params, batch, train_mode=True)
        return batch_loss(trace, class_weights)

    trace = forward(params, batch, train_mode=True)
    grads = backward(trace, params, class_weights)
    worst = 0.0
    for name in params.trainable_names():
        tensor = params.tensors[name]
        analytic = grads[name]
        fd = np.zeros_like(tensor)
        flat = tensor.ravel()
        fd_flat = fd.ravel()
        for idx in range(flat.size):
            orig = flat[idx]
            flat[idx] = orig + fd_step
            lp = loss_fn()
            flat[idx] = orig - fd_step
            lm = loss_fn()
            flat[idx] = orig
            fd_flat[idx] = (lp - lm) / (2.0 * fd_step)
        scale = max(1.0, float(np.abs(analytic).max()), float(np.abs(fd).max()))
        err = float(np.abs(analytic - fd).max()) / scale
        worst = max(worst, err)
    return worst


def check_gradients(
    n_graphs: int = 20,
    seed: int = 4,
    threshold: float = 1e-5,
    width: int = 6,
    depth: int = 2,
) -> CheckResult:
    """FD agreement on random graphs for every ablation flag combination."""
    rng = np.random.default_rng(seed)
    class_weights = np.array([1.0, 2.0])
    graphs = [_random_graph(rng) for _ in range(n_graphs)]
    worst = 0.0
    example = None
    for combo in all_flag_combinations():
        config = ModelConfig(
            node_input_width=5,
            class_count=2,
            width=width,
            depth=depth,
            norm="none",
            **combo,
        )
        for gi, graph in enumerate(graphs):
            err = gradient_max_rel_error(graph, config, seed=seed + gi, class_weights=class_weights)
            if err > worst:
                worst = err
                if err >= threshold:
                    example = (combo, gi)
    passed = worst < threshold
    return CheckResult(
        name="gradients",
        passed=passed,
        trials=n_graphs * len(all_flag_combinations()),
        max_deviation=worst,
        threshold=threshold,
        detail=f"{n_graphs} graphs x {len(all_flag_combinations())} flag combinations, norm=none",
        counterexample=None if passed else repr(example),
    )


def check_embedding_invariance(
    trials: int = 100, seed: int = 5, threshold: float = 1e-6
) -> CheckResult:
    """h_g of a structure equals h_g of its rigid transform (dnp edges)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    example = None
    config = ModelConfig(node_input_width=4, class_count=2, width=16, depth=2, norm="none")
    params = init_params(config, seed=seed)
    for i in range(trials):
        n_nodes = int(rng.integers(6, 13))
        positions = rng.uniform(-5.0, 5.0, size=(n_nodes, 3))
        nodes = [DirectionalNode(positions[k], rng.normal(size=3)) for k in range(n_nodes)]
        feats = rng.normal(size=(n_nodes, 4))
        edges = [
            (i2, j2)
            for i2 in range(n_nodes)
            for j2 in range(i2 + 1, n_nodes)
            if np.linalg.norm(positions[i2] - positions[j2]) < 12.0
        ]
        g = MolGraph(
            nodes=nodes,
            node_features=feats,
            edges=np.array(edges, dtype=int).reshape(-1, 2),
            label=0,
            graph_id=f"emb-{i}",
        )
        g = featurize_edges(g, "dnp")
        t = _random_transform(rng)
        gt = g.transformed(t)
        hg0 = forward(params, make_batch([g]), train_mode=False).h_g
        hg1 = forward(params, make_batch([gt]), train_mode=False).h_g
        dev = float(np.abs(hg0 - hg1).max())
        if dev > worst:
            worst = dev
            if dev >= threshold:
                example = (i,)
    passed = worst < threshold
    return CheckResult(
        name="embedding-invariance",
        passed=passed,
        trials=trials,
        max_deviation=worst,
        threshold=threshold,
        detail="componentwise |h_g - h_g(transformed)| with dnp edge features",
        counterexample=None if passed else repr(example),
    )


SUITES = {
    "invariance": lambda trials, seed: [
        check_invariance(trials=trials, seed=seed),
        check_permutation(trials=trials, seed=seed + 1),
    ],
    "injectivity": lambda trials, seed: [check_injectivity(trials=trials, seed=seed)],
    "chirality": lambda trials, seed: [check_chirality(trials=trials, seed=seed)],
    "gradients": lambda trials, seed: [
        check_gradients(n_graphs=max(1, trials), seed=seed)
    ],
}


def run_suite(name: str, trials: int, seed: int) -> list[CheckResult]:
    if name not in SUITES:
        raise ValueError(f"unknown suite {name!r}; expected one of {sorted(SUITES)}")
    return SUITES[name](trials, seed)

"""Structure ingestion and directional-node graph construction.

Proteins come from a fixed-column PDB subset (ATOM records only); one node
per residue at the alpha carbon, directed toward the backbone carboxyl
carbon, edges between residues whose CA-CA distance is strictly below the
cutoff (default 15 A). Small molecules come from a purpose-built JSON format
(see :func:`parse_molecule`); one node per heavy atom, directed away from
the molecule centroid, one edge per bond.

Edge features are descriptor outputs encoded to four channels in [0, 1]:

    dnp            [alpha/pi, beta/pi, (gamma+pi)/(2*pi), d/cutoff]
    distance       [d/cutoff, 0, 0, 0]
    distance_theta [d/cutoff, theta/pi, 0, 0]
    ppf            [d/cutoff, ang1/pi, ang2/pi, ang3/pi]
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from . import descriptor as dsc
from .descriptor import DirectionalNode
from .errors import ParseError, RomGcnError
from .geometry import norm, vec3

DEFAULT_CUTOFF = 15.0
DIRECTION_EPS = 1e-6  # below PDB coordinate precision (1e-3 A)

AMINO_ACIDS = (
    "ALA ARG ASN ASP CYS GLN GLU GLY HIS ILE "
    "LEU LYS MET PHE PRO SER THR TRP TYR VAL"
).split()
PROTEIN_FEATURE_WIDTH = len(AMINO_ACIDS) + 1  # +1 unknown bucket

ELEMENTS = ["C", "N", "O", "S", "P", "F", "Cl", "Br", "I"]
MOLECULE_FEATURE_WIDTH = len(ELEMENTS) + 1  # +1 "other" bucket

DESCRIPTOR_KINDS = ("dnp", "distance", "distance_theta", "ppf")


@dataclass(frozen=True)
class Residue:
    name: str
    c_alpha: np.ndarray
    carboxyl_c: np.ndarray | None
    chain: str
    seq: int
    icode: str = ""


@dataclass(frozen=True)
class SmallMolecule:
    atoms: list[tuple[str, np.ndarray]]
    bonds: list[tuple[int, int]]


@dataclass
class MolGraph:
    """Directional-node graph with chemical node features and edge features.

    Edges are undirected and stored once with i < j. ``edge_raw`` holds the
    untransformed descriptor values for the current ``descriptor`` kind
    (variable width); ``edge_features`` is the encoded width-4 form.
    """

    nodes: list[DirectionalNode]
    node_features: np.ndarray  # (N, C)
    edges: np.ndarray  # (M, 2) int, i < j
    edge_raw: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))
    edge_features: np.ndarray = field(default_factory=lambda: np.zeros((0, 4)))
    descriptor: str | None = None
    label: int | None = None
    graph_id: str = ""
    cutoff: float = DEFAULT_CUTOFF

    def __post_init__(self):
        self.node_features = np.asarray(self.node_features, dtype=float)
        self.edges = np.asarray(self.edges, dtype=int).reshape(-1, 2)
        if self.node_features.shape[0] != len(self.nodes):
            raise ValueError("node feature count does not match node count")
        for i, j in self.edges:
            if i == j:
                raise ValueError(f"self-loop on node {i}")
            if not (0 <= i < j < len(self.nodes)):
                raise ValueError(f"edge ({i}, {j}) out of order or out of range")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    def transformed(self, t) -> "MolGraph":
        """The same graph with all positions/directions rigidly moved."""
        g = replace(self, nodes=[n.transformed(t) for n in self.nodes])
        if self.descriptor is not None:
            return featurize_edges(g, self.descriptor)
        return g


# ---------------------------------------------------------------------------
# parsing

def parse_pdb(text: str | bytes) -> list[Residue]:
    """Residues from ATOM records of PDB-format text.

    Returns one Residue per (chain, resSeq, iCode) in file order. Residues
    with no CA atom are skipped (a single warning reports how many). For
    alternate locations the highest-occupancy atom wins, first-seen on ties.
    """
    if isinstance(text, bytes):
        text = text.decode("ascii", errors="replace")
    # key -> {"name", atoms: {atom_name: (occupancy, position)}}
    groups: dict[tuple[str, int, str], dict] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        record = line[:6].strip()
        if record != "ATOM":
            continue  # HETATM and any non-ATOM record types are ignored
        try:
            atom_name = line[12:16].strip()
            res_name = line[17:20].strip()
            chain = line[21:22]
            seq = int(line[22:26])
            icode = line[26:27].strip()
            x = float(line[30:38])
            y = float(line[38:46])
            z = float(line[46:54])
            occ_text = line[54:60].strip()
            occupancy = float(occ_text) if occ_text else 1.0
        except (ValueError, IndexError) as exc:
            raise ParseError(f"malformed ATOM record: {exc}", line_number=lineno) from None
        key = (chain, seq, icode)
        group = groups.setdefault(key, {"name": res_name, "atoms": {}})
        best = group["atoms"].get(atom_name)
        if best is None or occupancy > best[0]:
            group["atoms"][atom_name] = (occupancy, vec3(x, y, z))

    residues: list[Residue] = []
    skipped = 0
    for (chain, seq, icode), group in groups.items():
        atoms = group["atoms"]
        if "CA" not in atoms:
            skipped += 1
            continue
        carboxyl = atoms.get("C")
        residues.append(
            Residue(
                name=group["name"],
                c_alpha=atoms["CA"][1],
                carboxyl_c=None if carboxyl is None else carboxyl[1],
                chain=chain,
                seq=seq,
                icode=icode,
            )
        )
    if skipped:
        warnings.warn(f"skipped {skipped} residue(s) with no CA atom", stacklevel=2)
    return residues


def parse_molecule(text: str | bytes) -> SmallMolecule:
    """A heavy-atom molecule from the JSON format

        {"atoms": [{"element": "C", "xyz": [x, y, z]}, ...],
         "bonds": [[i, j], ...]}

    with 0-based indices. Hydrogens are dropped and bonds reindexed.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid molecule JSON: {exc}") from None
    if not isinstance(data, dict) or "atoms" not in data:
        raise ParseError("molecule JSON must be an object with an 'atoms' list")
    raw_atoms = data["atoms"]
    raw_bonds = data.get("bonds", [])
    try:
        atoms_all = [(str(a["element"]), vec3(*a["xyz"])) for a in raw_atoms]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"bad atom record: {exc}") from None

    n = len(atoms_all)
    bonds_all: list[tuple[int, int]] = []
    for bond in raw_bonds:
        try:
            i, j = int(bond[0]), int(bond[1])
        except (TypeError, ValueError, IndexError):
            raise ParseError(f"bad bond record: {bond!r}") from None
        if not (0 <= i < n and 0 <= j < n):
            raise ParseError(f"bond ({i}, {j}) references a missing atom (have {n})")
        if i == j:
            raise ParseError(f"self-bond on atom {i}")
        bonds_all.append((i, j))

    keep = [idx for idx, (el, _) in enumerate(atoms_all) if el != "H"]
    remap = {old: new for new, old in enumerate(keep)}
    atoms = [atoms_all[idx] for idx in keep]
    bonds = []
    seen = set()
    for i, j in bonds_all:
        if i in remap and j in remap:
            a, b = sorted((remap[i], remap[j]))
            if (a, b) not in seen:
                seen.add((a, b))
                bonds.append((a, b))
    return SmallMolecule(atoms=atoms, bonds=bonds)


# ---------------------------------------------------------------------------
# graph construction

def _one_hot(index: int, width: int) -> np.ndarray:
    v = np.zeros(width)
    v[index] = 1.0
    return v


def residue_feature(name: str) -> np.ndarray:
    try:
        idx = AMINO_ACIDS.index(name)
    except ValueError:
        idx = len(AMINO_ACIDS)
    return _one_hot(idx, PROTEIN_FEATURE_WIDTH)


def element_feature(element: str) -> np.ndarray:
    try:
        idx = ELEMENTS.index(element)
    except ValueError:
        idx = len(ELEMENTS)
    return _one_hot(idx, MOLECULE_FEATURE_WIDTH)


def build_protein_graph(residues: list[Residue], cutoff: float = DEFAULT_CUTOFF) -> MolGraph:
    """Residue-level graph: CA positions, CA->C directions, distance edges.

    Edges connect residues strictly closer than ``cutoff``; ties at exactly
    the cutoff are excluded.
    """
    if len(residues) < 2:
        raise ValueError("need at least 2 residues")
    nodes = []
    feats = []
    for r in residues:
        direction = None
        if r.carboxyl_c is not None:
            disp = r.carboxyl_c - r.c_alpha
            if norm(disp) >= DIRECTION_EPS:
                direction = disp
        nodes.append(DirectionalNode(r.c_alpha, direction))
        feats.append(residue_feature(r.name))
    edges = []
    for i in range(len(nodes)):
        for j in range(i + 1, len(nodes)):
            if norm(nodes[i].position - nodes[j].position) < cutoff:
                edges.append((i, j))
    return MolGraph(
        nodes=nodes,
        node_features=np.array(feats),
        edges=np.array(edges, dtype=int).reshape(-1, 2),
        cutoff=cutoff,
    )


def build_molecule_graph(mol: SmallMolecule, cutoff: float = DEFAULT_CUTOFF) -> MolGraph:
    """Heavy-atom graph: bond edges, centroid-to-atom directions.

    ``cutoff`` only sets the distance normalization scale for edge
    encoding; molecule edges come from bonds, not distances.
    """
    if len(mol.atoms) < 2:
        raise ValueError("need at least 2 heavy atoms")
    if not mol.bonds:
        raise ValueError("need at least 1 bond")
    positions = np.stack([pos for _, pos in mol.atoms])
    centroid = positions.mean(axis=0)
    nodes = []
    feats = []
    for element, pos in mol.atoms:
        disp = pos - centroid
        direction = disp if norm(disp) >= DIRECTION_EPS else None
        nodes.append(DirectionalNode(pos, direction))
        feats.append(element_feature(element))
    edges = sorted(set(tuple(sorted(b)) for b in mol.bonds))
    return MolGraph(
        nodes=nodes,
        node_features=np.array(feats),
        edges=np.array(edges, dtype=int),
        cutoff=cutoff,
    )


# ---------------------------------------------------------------------------
# edge featurization

def encode_quadruplet(q: dsc.DnpQuadruplet, cutoff: float) -> np.ndarray:
    return np.array(
        [q.alpha / math.pi, q.beta / math.pi, (q.gamma + math.pi) / (2 * math.pi), q.d / cutoff]
    )


def featurize_edges(g: MolGraph, kind: str) -> MolGraph:
    """A copy of ``g`` with raw + encoded features for the chosen descriptor.

    Descriptor failures are re-raised with the offending edge identified.
    """
    if kind not in DESCRIPTOR_KINDS:
        raise ValueError(f"unknown descriptor kind {kind!r}; expected one of {DESCRIPTOR_KINDS}")
    raw_rows = []
    enc_rows = []
    for i, j in g.edges:
        a, b = g.nodes[i], g.nodes[j]
        try:
            if kind == "dnp":
                q = dsc.dnp(a, b)
                raw = list(q.as_tuple())
                enc = encode_quadruplet(q, g.cutoff)
            elif kind == "distance":
                d = dsc.distance_only(a, b)
                raw = [d]
                enc = np.array([d / g.cutoff, 0.0, 0.0, 0.0])
            elif kind == "distance_theta":
                d, theta = dsc.distance_theta(a, b)
                raw = [d, theta]
                enc = np.array([d / g.cutoff, theta / math.pi, 0.0, 0.0])
            else:
                f = dsc.ppf(a, b)
                raw = list(f)
                enc = np.array([f[0] / g.cutoff, f[1] / math.pi, f[2] / math.pi, f[3] / math.pi])
        except RomGcnError as exc:
            raise type(exc)(f"edge ({i}, {j}) of graph {g.graph_id!r}: {exc}") from None
        raw_rows.append(raw)
        enc_rows.append(enc)
    raw_width = {"dnp": 4, "distance": 1, "distance_theta": 2, "ppf": 4}[kind]
    return replace(
        g,
        edge_raw=np.array(raw_rows, dtype=float).reshape(-1, raw_width),
        edge_features=np.array(enc_rows, dtype=float).reshape(-1, 4),
        descriptor=kind,
    )


# ---------------------------------------------------------------------------
# dataset + archive serialization

@dataclass
class Dataset:
    """Labeled graphs plus class weights for the loss."""

    graphs: list[MolGraph]
    class_count: int
    class_weights: np.ndarray
    feature_width: int

    @classmethod
    def from_graphs(cls, graphs: list[MolGraph]) -> "Dataset":
        if not graphs:
            raise ValueError("dataset needs at least one graph")
        widths = {g.node_features.shape[1] for g in graphs}
        if len(widths) != 1:
            raise ValueError(f"inconsistent node feature widths: {sorted(widths)}")
        labels = [g.label for g in graphs]
        if any(lbl is None for lbl in labels):
            raise ValueError("all graphs must be labeled")
        k = max(labels) + 1
        if min(labels) < 0:
            raise ValueError("labels must be non-negative")
        counts = np.bincount(labels, minlength=k).astype(float)
        if np.any(counts == 0):
            raise ValueError("every class in [0, K) needs at least one example")
        weights = len(graphs) / (k * counts)
        return cls(
            graphs=graphs,
            class_count=k,
            class_weights=weights,
            feature_width=widths.pop(),
        )

    @property
    def labels(self) -> np.ndarray:
        return np.array([g.label for g in self.graphs], dtype=int)


def graph_to_record(g: MolGraph) -> dict:
    return {
        "id": g.graph_id,
        "label": g.label,
        "cutoff": g.cutoff,
        "descriptor": g.descriptor,
        "positions": [list(n.position) for n in g.nodes],
        "directions": [None if n.direction is None else list(n.direction) for n in g.nodes],
        "node_features": g.node_features.tolist(),
        "edges": g.edges.tolist(),
        "edge_raw": g.edge_raw.tolist(),
        "edge_features": g.edge_features.tolist(),
    }


def graph_from_record(rec: dict) -> MolGraph:
    nodes = [
        DirectionalNode(np.array(p, dtype=float), None if d is None else np.array(d, dtype=float))
        for p, d in zip(rec["positions"], rec["directions"])
    ]
    n_edges = len(rec["edges"])
    raw = np.asarray(rec.get("edge_raw") or [], dtype=float)
    if raw.size == 0:
        raw = np.zeros((n_edges, 0))
    enc = np.asarray(rec.get("edge_features") or [], dtype=float)
    if enc.size == 0:
        enc = np.zeros((n_edges, 4))
    return MolGraph(
        nodes=nodes,
        node_features=np.asarray(rec["node_features"], dtype=float),
        edges=np.asarray(rec["edges"], dtype=int).reshape(-1, 2),
        edge_raw=raw,
        edge_features=enc.reshape(-1, 4),
        descriptor=rec.get("descriptor"),
        label=rec.get("label"),
        graph_id=rec.get("id", ""),
        cutoff=rec.get("cutoff", DEFAULT_CUTOFF),
    )


def save_archive(graphs: list[MolGraph], path) -> None:
    """JSON-lines archive, one graph per line. Deterministic bytes."""
    with open(path, "w") as fh:
        for g in graphs:
            fh.write(json.dumps(graph_to_record(g), separators=(",", ":")) + "\n")


def load_archive(path) -> list[MolGraph]:
    graphs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad archive record: {exc}", line_number=lineno) from None
            graphs.append(graph_from_record(rec))
    return graphs

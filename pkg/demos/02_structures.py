"""From structure files to directional-node graphs.

Parses a small PDB fragment and a molecule JSON record, builds their
graphs, and shows how the descriptor becomes per-edge features.
"""

import json

import numpy as np

from romgcn import (
    build_molecule_graph,
    build_protein_graph,
    featurize_edges,
    parse_molecule,
    parse_pdb,
)

# --- a three-residue protein fragment --------------------------------------
# Residue nodes sit on the alpha carbon and point toward the backbone
# carboxyl carbon; residues closer than 15 A get an edge.
PDB_FRAGMENT = """\
ATOM      1  N   ALA A   1       0.100   0.200   0.300  1.00  0.00
ATOM      2  CA  ALA A   1       1.000   2.000   3.000  1.00  0.00
ATOM      3  C   ALA A   1       2.500   2.000   3.000  1.00  0.00
ATOM      4  CA  GLY A   2       4.000   5.000   6.000  1.00  0.00
ATOM      5  C   GLY A   2       4.000   6.500   6.000  1.00  0.00
ATOM      6  CA  SER A   3       8.000   9.000  10.000  1.00  0.00
ATOM      7  C   SER A   3       9.200   9.800  10.000  1.00  0.00
"""

residues = parse_pdb(PDB_FRAGMENT)
print(f"parsed {len(residues)} residues: {[r.name for r in residues]}")

protein = build_protein_graph(residues)
print(f"protein graph: {protein.n_nodes} nodes, {protein.n_edges} edges")
print(f"node 0 direction (CA -> C, unit): {np.round(protein.nodes[0].direction, 4)}")

protein = featurize_edges(protein, "dnp")
print("per-edge quadruplets (alpha, beta, gamma, d):")
for (i, j), raw in zip(protein.edges, protein.edge_raw):
    print(f"  ({i}, {j}): {np.round(raw, 4)}")

# --- a small molecule -------------------------------------------------------
# Heavy atoms become nodes (hydrogens are stripped), bonds become edges, and
# each node points away from the molecule centroid.
MOLECULE = json.dumps(
    {
        "atoms": [
            {"element": "C", "xyz": [0.0, 0.0, 0.0]},
            {"element": "C", "xyz": [1.5, 0.0, 0.0]},
            {"element": "O", "xyz": [2.2, 1.2, 0.0]},
            {"element": "H", "xyz": [-0.6, 0.9, 0.0]},
            {"element": "H", "xyz": [-0.6, -0.9, 0.0]},
        ],
        "bonds": [[0, 1], [1, 2], [0, 3], [0, 4]],
    }
)

mol = parse_molecule(MOLECULE)
print(f"\nmolecule: {len(mol.atoms)} heavy atoms, {len(mol.bonds)} bonds (H stripped)")

graph = build_molecule_graph(mol)
graph = featurize_edges(graph, "dnp")
print(f"molecule graph features (encoded to [0, 1] channels):")
for (i, j), enc in zip(graph.edges, graph.edge_features):
    print(f"  ({i}, {j}): {np.round(enc, 4)}")
print(f"node one-hot width: {graph.node_features.shape[1]} (element vocabulary + other)")

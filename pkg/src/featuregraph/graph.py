"""The feature-graph tree: layered grouping of features into linear nodes.

Layer 0 nodes read disjoint slices of the (permuted) feature vector; each
higher layer reads consecutive blocks of the previous layer's node outputs,
shrinking by ceil-division until a single root remains. Every node holds a
LinearModel over its inputs, so the whole tree is an affine map and can be
flattened back to a single weight vector and bias.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError
from .svr import LinearModel


@dataclass(frozen=True)
class GraphLayout:
    """Tree shape for D features with group size M.

    layer_sizes[l] is the node count of layer l; consecutive blocks of at
    most M feature slots form the leaf groups (the last block may be short).
    """

    D: int
    M: int
    layer_sizes: tuple[int, ...]
    leaf_groups: tuple[tuple[int, ...], ...]

    @property
    def n_layers(self) -> int:
        return len(self.layer_sizes)

    @property
    def n_nodes(self) -> int:
        return sum(self.layer_sizes)

    def blocks(self, layer: int) -> list[tuple[int, ...]]:
        """Input index blocks feeding each node of the given layer."""
        if layer == 0:
            return [tuple(g) for g in self.leaf_groups]
        prev = self.layer_sizes[layer - 1]
        return [tuple(range(s, min(s + self.M, prev))) for s in range(0, prev, self.M)]


def build_layout(D: int, M: int) -> GraphLayout:
    """Group D feature slots into consecutive blocks of size M, then chain
    layers by repeated ceil-division until one node remains."""
    if D < 1:
        raise ConfigError(f"need D >= 1, got {D}")
    if M < 2:
        raise ConfigError(f"group size M must be >= 2, got {M}")
    groups = [tuple(range(s, min(s + M, D))) for s in range(0, D, M)]
    sizes = [len(groups)]
    while sizes[-1] > 1:
        sizes.append(-(-sizes[-1] // M))
    return GraphLayout(D=D, M=M, layer_sizes=tuple(sizes), leaf_groups=tuple(groups))


@dataclass
class Node:
    """One regressor in the tree.

    input_refs are original feature indices for layer 0 and previous-layer
    node positions otherwise.
    """

    layer: int
    position: int
    input_refs: tuple[int, ...]
    model: LinearModel
    retrained: bool = False


@dataclass
class FeatureGraph:
    """A layout plus its nodes and the feature permutation applied before
    leaf grouping. nodes[l][p] is the node at layer l, position p."""

    layout: GraphLayout
    nodes: list[list[Node]]
    permutation: np.ndarray

    def __post_init__(self):
        perm = np.asarray(self.permutation, dtype=int)
        if sorted(perm.tolist()) != list(range(self.layout.D)):
            raise ConfigError("permutation must be a bijection on 0..D-1")
        self.permutation = perm
        counts = [len(layer) for layer in self.nodes]
        if counts != list(self.layout.layer_sizes):
            raise ConfigError(f"node counts {counts} do not match layer sizes {self.layout.layer_sizes}")

    @property
    def n_nodes(self) -> int:
        return self.layout.n_nodes

    @property
    def root(self) -> Node:
        return self.nodes[-1][0]

    def node_ids(self) -> list[tuple[int, int]]:
        return [(l, p) for l, layer in enumerate(self.nodes) for p in range(len(layer))]

    def parent_position(self, layer: int, position: int) -> int:
        return position // self.layout.M


def identity_model(fan_in: int) -> LinearModel:
    """All-ones weights and zero bias: passes the sum of its inputs through."""
    return LinearModel(weights=np.ones(fan_in), bias=0.0)


def init_from_svm(layout: GraphLayout, svm: LinearModel, perm) -> FeatureGraph:
    """Build a graph whose output exactly reproduces the given linear SVM.

    Leaf node p takes the svm weights of its (permuted) features and an equal
    1/M_1 share of the svm bias; all higher nodes are identity models, so the
    leaf contributions telescope to w.x + b.
    """
    perm = np.asarray(perm, dtype=int)
    if svm.dim != layout.D:
        raise DataError(f"svm has dimension {svm.dim}, layout expects {layout.D}")
    if sorted(perm.tolist()) != list(range(layout.D)):
        raise ConfigError("permutation must be a bijection on 0..D-1")
    n_leaves = layout.layer_sizes[0]
    bias_share = svm.bias / n_leaves
    layers: list[list[Node]] = []
    leaf_layer = []
    for p, slots in enumerate(layout.leaf_groups):
        feats = tuple(int(perm[s]) for s in slots)
        w = svm.weights[list(feats)]
        leaf_layer.append(
            Node(layer=0, position=p, input_refs=feats, model=LinearModel(w, bias_share))
        )
    layers.append(leaf_layer)
    for l in range(1, layout.n_layers):
        layer_nodes = []
        for p, refs in enumerate(layout.blocks(l)):
            layer_nodes.append(
                Node(layer=l, position=p, input_refs=refs, model=identity_model(len(refs)))
            )
        layers.append(layer_nodes)
    return FeatureGraph(layout=layout, nodes=layers, permutation=perm)


def node_inputs(graph: FeatureGraph, X: np.ndarray, outputs, layer: int, position: int) -> np.ndarray:
    """Input matrix (m, fan_in) for one node, given cached layer outputs."""
    node = graph.nodes[layer][position]
    if layer == 0:
        return X[:, list(node.input_refs)]
    return np.column_stack([outputs[layer - 1][r] for r in node.input_refs])


def forward_outputs(graph: FeatureGraph, X: np.ndarray) -> list[list[np.ndarray]]:
    """Evaluate every node on the rows of X; outputs[l][p] is an (m,) vector."""
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != graph.layout.D:
        raise DataError(f"expected (m, {graph.layout.D}) inputs, got {X.shape}")
    outputs: list[list[np.ndarray]] = []
    for l, layer in enumerate(graph.nodes):
        outputs.append([])
        for p, node in enumerate(layer):
            Z = node_inputs(graph, X, outputs, l, p)
            outputs[l].append(Z @ node.model.weights + node.model.bias)
    return outputs


def evaluate_batch(graph: FeatureGraph, X: np.ndarray) -> np.ndarray:
    """Root-node predictions for each row of X."""
    return forward_outputs(graph, X)[-1][0]


def evaluate(graph: FeatureGraph, x) -> float:
    """Prediction for a single input vector (same arithmetic as the batch path)."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    return float(evaluate_batch(graph, x)[0])


def node_output_means(graph: FeatureGraph, X: np.ndarray) -> list[list[float]]:
    """Mean output of every node over the rows of X, from one forward pass."""
    outputs = forward_outputs(graph, X)
    return [[float(np.mean(col)) for col in layer] for layer in outputs]


def flatten(graph: FeatureGraph) -> LinearModel:
    """Compose all node affine maps into a single LinearModel.

    The returned weights are in original (un-permuted) feature order.
    """
    D = graph.layout.D
    # per node: (weight vector over original features, bias)
    acc: list[list[tuple[np.ndarray, float]]] = []
    for l, layer in enumerate(graph.nodes):
        acc.append([])
        for node in layer:
            w = np.zeros(D)
            b = float(node.model.bias)
            for k, ref in enumerate(node.input_refs):
                coef = node.model.weights[k]
                if l == 0:
                    w[ref] += coef
                else:
                    child_w, child_b = acc[l - 1][ref]
                    w += coef * child_w
                    b += coef * child_b
            acc[l].append((w, b))
    w, b = acc[-1][0]
    return LinearModel(weights=w, bias=b)

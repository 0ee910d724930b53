"""Looped multi-layer scattering network.

A :class:`LayeredNetwork` stacks ``layers`` copies of an m-mode chip in time;
a feedback loop couples the layers so a photon can re-enter a later layer,
its amplitude scaled by the per-traversal transition probability. The global
scattering matrix is block-structured: block ``(i, j)`` equals
``p**((j - i) mod N)`` times layer ``j``'s chip matrix, so the diagonal holds
the unscaled chip blocks and off-diagonal coupling decays geometrically with
cyclic layer distance. At ``p = 0`` (``0**0 == 1``) the matrix degenerates to
the plain direct sum of the blocks.

The matrix is intentionally NOT unitary for ``p > 0``: it is a lossy transfer
matrix, and downstream pattern probabilities are renormalized over the
post-selected outcome set.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .matrices import as_complex_matrix, haar_random_unitary, unitarity_deviation

__all__ = [
    "LayeredNetwork",
    "LayerGraph",
    "block_exponent",
    "build_scattering_matrix",
    "layer_graph",
    "random_network",
    "write_edge_list",
    "write_graph_json",
]

BLOCK_UNITARITY_TOL = 1e-8


@dataclass(frozen=True, eq=False)  # ndarray blocks: no auto __eq__
class LayeredNetwork:
    """``layers`` chip blocks of ``modes`` modes each, coupled with
    per-traversal amplitude ``transition``; ``loop_mode`` is the chip output
    channel wired back to the input."""

    modes: int
    layers: int
    transition: float
    blocks: tuple = field(repr=False)
    loop_mode: int = 0

    def __post_init__(self):
        if self.modes < 1 or self.layers < 1:
            raise ConfigError(
                f"modes and layers must be >= 1, got {self.modes}, {self.layers}"
            )
        if not (0.0 <= self.transition < 1.0):
            raise ConfigError(f"transition must be in [0, 1), got {self.transition}")
        if not (0 <= self.loop_mode < self.modes):
            raise ConfigError(f"loop_mode {self.loop_mode} outside 0..{self.modes - 1}")
        blocks = tuple(as_complex_matrix(b) for b in self.blocks)
        if len(blocks) != self.layers:
            raise ConfigError(f"expected {self.layers} blocks, got {len(blocks)}")
        for k, b in enumerate(blocks):
            if b.shape != (self.modes, self.modes):
                raise ConfigError(
                    f"block {k} has shape {b.shape}, expected "
                    f"({self.modes}, {self.modes})"
                )
            dev = unitarity_deviation(b)
            if dev > BLOCK_UNITARITY_TOL:
                raise ConfigError(
                    f"block {k} deviates from unitarity by {dev:.3e} "
                    f"(tolerance {BLOCK_UNITARITY_TOL})"
                )
        object.__setattr__(self, "blocks", blocks)

    @property
    def total_modes(self) -> int:
        return self.modes * self.layers


@dataclass(frozen=True)
class LayerGraph:
    """Directed layer-transition graph: node per layer, off-diagonal edge
    ``(i, j, transition**((j-i) mod N))``. Self-transitions all have implicit
    weight 1 and are not stored."""

    nodes: int
    edges: tuple  # of (i, j, weight), 1-based layer indices


def block_exponent(i: int, j: int, layers: int) -> int:
    """Power of the transition amplitude carried by block ``(i, j)``
    (1-based layer indices): ``(j - i) mod layers``."""
    if not (1 <= i <= layers and 1 <= j <= layers):
        raise ConfigError(f"layer indices ({i}, {j}) outside 1..{layers}")
    return (j - i) % layers


def build_scattering_matrix(net: LayeredNetwork, exponent=None) -> np.ndarray:
    """Assemble the global ``(N*m) x (N*m)`` scattering matrix.

    ``exponent`` optionally replaces the default cyclic-distance law
    ``(j - i) mod N`` with a custom ``(i, j, N) -> int`` to emulate other
    loop topologies; the default reproduces the single passive loop.
    """
    exp_fn = exponent if exponent is not None else block_exponent
    m, N, p = net.modes, net.layers, net.transition
    out = np.zeros((N * m, N * m), dtype=np.complex128)
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            e = exp_fn(i, j, N)
            if e == 0:
                scale = 1.0  # 0**0 == 1 so p=0 reduces to the direct sum
            else:
                scale = p**e
            if scale != 0.0:
                out[(i - 1) * m : i * m, (j - 1) * m : j * m] = scale * net.blocks[j - 1]
    return out


def layer_graph(net: LayeredNetwork, exponent=None) -> LayerGraph:
    """Layer-transition graph of the network; complete for ``0 < p < 1``."""
    exp_fn = exponent if exponent is not None else block_exponent
    N, p = net.layers, net.transition
    edges = []
    for i in range(1, N + 1):
        for j in range(1, N + 1):
            if i == j:
                continue
            w = p ** exp_fn(i, j, N)
            if w > 0.0:
                edges.append((i, j, w))
    return LayerGraph(nodes=N, edges=tuple(edges))


def random_network(
    modes: int, layers: int, transition: float, seed: int, loop_mode: int = 0
) -> LayeredNetwork:
    """Network with independent Haar-random chip blocks (one seed per layer,
    derived deterministically from ``seed``)."""
    blocks = tuple(
        haar_random_unitary(modes, seed + 7919 * k) for k in range(layers)
    )
    return LayeredNetwork(
        modes=modes,
        layers=layers,
        transition=transition,
        blocks=blocks,
        loop_mode=loop_mode,
    )


def write_edge_list(graph: LayerGraph, path) -> None:
    """Write ``i j weight`` lines (1-based layers, 17 significant digits)."""
    with open(path, "w", encoding="ascii") as fh:
        for i, j, w in graph.edges:
            fh.write(f"{i} {j} {w:.17g}\n")


def write_graph_json(graph: LayerGraph, path) -> None:
    """Write a JSON adjacency document: node count plus per-node outgoing
    ``{target: weight}`` maps, for plotting."""
    adjacency = {str(i): {} for i in range(1, graph.nodes + 1)}
    for i, j, w in graph.edges:
        adjacency[str(i)][str(j)] = w
    doc = {"nodes": graph.nodes, "adjacency": adjacency}
    with open(path, "w", encoding="ascii") as fh:
        json.dump(doc, fh, indent=1, sort_keys=True)
        fh.write("\n")

"""Networks as explicit (matrix, bias) sequences.

A network with layers ((A_1, b_1), ..., (A_L, b_L)) realizes the map
obtained by applying x -> A_l x + b_l layer by layer, with the activation
applied componentwise after every layer except the last.  A single-layer
network is therefore purely affine.  The representation is the object of
study, not a trained black box, so layers are held verbatim and immutable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.random import Generator, Philox

from . import _kernels
from .activations import Activation
from .calculus import Jet

__all__ = [
    "Architecture",
    "InputShapeError",
    "NeuralNetwork",
    "clamp_weights",
    "concat",
    "flatten_params",
    "load_network",
    "network",
    "param_count",
    "random_init",
    "realize",
    "realize_batch",
    "realize_jet",
    "save_network",
    "total_norm",
    "unflatten_params",
]


class InputShapeError(ValueError):
    """Input vector does not match the network's input dimension."""


@dataclass(frozen=True)
class Architecture:
    """Input dimension plus the output width of every layer."""

    input_dim: int
    widths: tuple[int, ...]

    def __post_init__(self):
        if self.input_dim < 1 or not self.widths or any(w < 1 for w in self.widths):
            raise ValueError(f"invalid architecture ({self.input_dim}, {self.widths})")

    @property
    def depth(self) -> int:
        return len(self.widths)

    @property
    def output_dim(self) -> int:
        return self.widths[-1]

    def dims(self) -> tuple[int, ...]:
        return (self.input_dim,) + self.widths


@dataclass(frozen=True)
class NeuralNetwork:
    """Immutable sequence of affine layers."""

    layers: tuple[tuple[np.ndarray, np.ndarray], ...]
    arch: Architecture

    @property
    def depth(self) -> int:
        return self.arch.depth


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.flags.writeable = False
    return a


def network(layers) -> NeuralNetwork:
    """Build a network from an iterable of (matrix, bias) pairs."""
    frozen = []
    for idx, (A, b) in enumerate(layers):
        A = np.atleast_2d(np.asarray(A, dtype=np.float64))
        b = np.asarray(b, dtype=np.float64).reshape(-1)
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise ValueError(f"layer {idx + 1}: matrix {A.shape} and bias {b.shape} disagree")
        if not (np.isfinite(A).all() and np.isfinite(b).all()):
            raise ValueError(f"layer {idx + 1}: non-finite entries")
        if frozen and A.shape[1] != frozen[-1][0].shape[0]:
            raise ValueError(
                f"layer {idx + 1}: expects width {A.shape[1]}, previous layer yields {frozen[-1][0].shape[0]}"
            )
        frozen.append((_freeze(A), _freeze(b)))
    if not frozen:
        raise ValueError("a network needs at least one layer")
    arch = Architecture(frozen[0][0].shape[1], tuple(A.shape[0] for A, _ in frozen))
    return NeuralNetwork(tuple(frozen), arch)


def realize(net: NeuralNetwork, act: Activation, x) -> np.ndarray:
    """Evaluate the realized map at a single input vector."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != net.arch.input_dim:
        raise InputShapeError(f"input has length {x.shape[0]}, network expects {net.arch.input_dim}")
    return realize_batch(net, act, x[:, None])[:, 0]


def realize_batch(net: NeuralNetwork, act: Activation, X: np.ndarray) -> np.ndarray:
    """Evaluate at many inputs; X has shape (input_dim, n)."""
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] != net.arch.input_dim:
        raise InputShapeError(f"batch has shape {X.shape}, network expects ({net.arch.input_dim}, n)")
    zero = np.zeros(net.arch.input_dim)
    return _kernels.jet_forward(net.layers, act.plan, X, zero, 0)[0]


def realize_jet(net: NeuralNetwork, act: Activation, x, direction, order: int) -> Jet:
    """Directional derivatives of a scalar-output realization.

    ``direction`` is an axis index or a vector; component j of the result is
    the j-th derivative of t -> R(x + t v) at t = 0, so component 0 equals
    ``realize`` exactly (same arithmetic, shared kernel).
    """
    if net.arch.output_dim != 1:
        raise InputShapeError("jets are defined for scalar-output networks")
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    if x.shape[0] != net.arch.input_dim:
        raise InputShapeError(f"input has length {x.shape[0]}, network expects {net.arch.input_dim}")
    v = _as_direction(direction, net.arch.input_dim)
    coeffs = _kernels.jet_forward(net.layers, act.plan, x[:, None], v, order)[:, 0, 0]
    fact = 1.0
    comps = []
    for j in range(order + 1):
        if j > 1:
            fact *= j
        comps.append(coeffs[j] * fact)
    return Jet(tuple(comps))


def _as_direction(direction, d: int) -> np.ndarray:
    if isinstance(direction, (int, np.integer)):
        if not 0 <= int(direction) < d:
            raise InputShapeError(f"axis {direction} outside input dimension {d}")
        v = np.zeros(d)
        v[int(direction)] = 1.0
        return v
    v = np.asarray(direction, dtype=np.float64).reshape(-1)
    if v.shape[0] != d:
        raise InputShapeError(f"direction has length {v.shape[0]}, network expects {d}")
    return v


def concat(phi1: NeuralNetwork, phi2: NeuralNetwork) -> NeuralNetwork:
    """Network whose realization is (realization of phi1) o (realization of phi2).

    The last layer of ``phi2`` is merged with the first layer of ``phi1``,
    giving depth L1 + L2 - 1; no activation separates the merged pair.
    """
    if phi2.arch.output_dim != phi1.arch.input_dim:
        raise InputShapeError(
            f"cannot compose: inner network yields {phi2.arch.output_dim}, outer expects {phi1.arch.input_dim}"
        )
    A1, b1 = phi1.layers[0]
    A2, b2 = phi2.layers[-1]
    merged = (A1 @ A2, A1 @ b2 + b1)
    return network(list(phi2.layers[:-1]) + [merged] + list(phi1.layers[1:]))


def total_norm(net: NeuralNetwork) -> float:
    """Largest matrix entry magnitude plus largest bias entry magnitude."""
    a_max = max(float(np.abs(A).max()) for A, _ in net.layers)
    b_max = max(float(np.abs(b).max()) for _, b in net.layers)
    return a_max + b_max


def clamp_weights(net: NeuralNetwork, c: float) -> NeuralNetwork:
    """Entrywise projection of all matrices and biases onto [-c, c]."""
    if c < 0:
        raise ValueError("clamp bound must be nonnegative")
    return network([(np.clip(A, -c, c), np.clip(b, -c, c)) for A, b in net.layers])


def random_init(arch: Architecture, seed: int, scale: float = 1.0, stream: int = 0) -> NeuralNetwork:
    """Gaussian entries scaled by ``scale`` from a counter-based generator.

    The generator is keyed by (seed, stream), so distinct streams from one
    seed are independent and reproducible regardless of draw interleaving
    elsewhere.
    """
    rng = Generator(Philox(key=np.array([seed, stream], dtype=np.uint64)))
    dims = arch.dims()
    layers = []
    for l in range(arch.depth):
        A = rng.standard_normal((dims[l + 1], dims[l])) * scale
        b = rng.standard_normal(dims[l + 1]) * scale
        layers.append((A, b))
    return network(layers)


def param_count(net: NeuralNetwork) -> int:
    return sum(A.size + b.size for A, b in net.layers)


def flatten_params(net: NeuralNetwork) -> np.ndarray:
    """All parameters as one vector: A_1 row-major, b_1, A_2, b_2, ..."""
    return np.concatenate([np.concatenate([A.ravel(), b]) for A, b in net.layers])


def unflatten_params(theta: np.ndarray, arch: Architecture) -> NeuralNetwork:
    theta = np.asarray(theta, dtype=np.float64).reshape(-1)
    dims = arch.dims()
    layers = []
    pos = 0
    for l in range(arch.depth):
        rows, cols = dims[l + 1], dims[l]
        A = theta[pos : pos + rows * cols].reshape(rows, cols)
        pos += rows * cols
        b = theta[pos : pos + rows]
        pos += rows
        layers.append((A, b))
    if pos != theta.size:
        raise ValueError(f"parameter vector has length {theta.size}, architecture needs {pos}")
    return network(layers)


_FORMAT_HEADER = "sobnn-network 1"


def save_network(net: NeuralNetwork, path) -> None:
    """Write a plain-text representation; decimals round-trip exactly."""
    lines = [_FORMAT_HEADER, "arch " + " ".join(str(d) for d in net.arch.dims())]
    for idx, (A, b) in enumerate(net.layers):
        lines.append(f"layer {idx + 1}")
        for row in A:
            lines.append(" ".join(repr(v) for v in row.tolist()))
        lines.append(" ".join(repr(v) for v in b.tolist()))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def load_network(path) -> NeuralNetwork:
    with open(path, encoding="ascii") as fh:
        raw = [ln.strip() for ln in fh if ln.strip()]
    if not raw or raw[0] != _FORMAT_HEADER:
        raise ValueError(f"{path}: not a saved network (missing '{_FORMAT_HEADER}' header)")
    if len(raw) < 2 or not raw[1].startswith("arch "):
        raise ValueError(f"{path}: missing architecture line")
    dims = [int(tok) for tok in raw[1].split()[1:]]
    if len(dims) < 2:
        raise ValueError(f"{path}: architecture needs at least input and one layer")
    pos = 2
    layers = []
    for l in range(len(dims) - 1):
        if pos >= len(raw) or raw[pos] != f"layer {l + 1}":
            raise ValueError(f"{path}: expected 'layer {l + 1}' at line {pos + 1}")
        pos += 1
        rows, cols = dims[l + 1], dims[l]
        A = np.empty((rows, cols))
        for r in range(rows):
            vals = [float(tok) for tok in raw[pos].split()]
            if len(vals) != cols:
                raise ValueError(f"{path}: layer {l + 1} row {r + 1} has {len(vals)} entries, expected {cols}")
            A[r] = vals
            pos += 1
        bvals = [float(tok) for tok in raw[pos].split()]
        if len(bvals) != rows:
            raise ValueError(f"{path}: layer {l + 1} bias has {len(bvals)} entries, expected {rows}")
        pos += 1
        layers.append((A, np.array(bvals)))
    if pos != len(raw):
        raise ValueError(f"{path}: trailing content after layer {len(dims) - 1}")
    return network(layers)

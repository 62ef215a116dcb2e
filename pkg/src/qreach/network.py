"""Feedforward ReLU networks over exact rationals, with quantised evaluation.

A network is a list of affine layers (A, b); ReLU is applied entrywise after
every layer, optionally excluding the last.  Quantised evaluation rounds and
range-handles each neuron's exact affine sum once (the semantics the automata
backends recognise); a per-operation variant quantises after every multiply
and add instead.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DimensionMismatch, NotRepresentable, ParseError
from .formats import (
    ArithmeticFormat, FixedFormat, Overflow, Rounding, format_rational,
    is_representable, parse_rational, to_format,
)

Vector = list[Fraction]
Matrix = list[list[Fraction]]


@dataclass(frozen=True)
class Layer:
    weights: tuple[tuple[Fraction, ...], ...]
    bias: tuple[Fraction, ...]

    @property
    def out_dim(self) -> int:
        return len(self.weights)

    @property
    def in_dim(self) -> int:
        return len(self.weights[0])


@dataclass(frozen=True)
class Network:
    layers: tuple[Layer, ...]
    final_relu: bool = True

    def __post_init__(self):
        if not self.layers:
            raise DimensionMismatch("a network needs at least one layer")
        for layer in self.layers:
            if layer.out_dim < 1 or layer.in_dim < 1:
                raise DimensionMismatch("layer dimensions must be positive")
            if len(layer.bias) != layer.out_dim:
                raise DimensionMismatch("bias length must match layer size")
            if any(len(row) != layer.in_dim for row in layer.weights):
                raise DimensionMismatch("ragged weight matrix")
        for prev, nxt in zip(self.layers, self.layers[1:]):
            if prev.out_dim != nxt.in_dim:
                raise DimensionMismatch(
                    f"layer sizes do not chain: {prev.out_dim} -> {nxt.in_dim}")

    @property
    def input_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def output_dim(self) -> int:
        return self.layers[-1].out_dim

    @property
    def depth(self) -> int:
        return len(self.layers)

    def relu_layer_indices(self) -> list[int]:
        last = self.depth if self.final_relu else self.depth - 1
        return list(range(last))

    def relu_node_count(self) -> int:
        return sum(self.layers[i].out_dim for i in self.relu_layer_indices())


def make_network(layers: list[tuple[Matrix, Vector]], final_relu: bool = True) -> Network:
    built = tuple(
        Layer(tuple(tuple(Fraction(w) for w in row) for row in a),
              tuple(Fraction(v) for v in b))
        for a, b in layers)
    return Network(built, final_relu)


def _affine(layer: Layer, x: Vector) -> Vector:
    return [sum((w * xi for w, xi in zip(row, x)), start=Fraction(0)) + b
            for row, b in zip(layer.weights, layer.bias)]


def eval_rational(net: Network, x: Vector) -> Vector:
    """Exact forward propagation."""
    if len(x) != net.input_dim:
        raise DimensionMismatch(f"input length {len(x)} != {net.input_dim}")
    v = [Fraction(xi) for xi in x]
    for i, layer in enumerate(net.layers):
        v = _affine(layer, v)
        if net.final_relu or i < net.depth - 1:
            v = [max(Fraction(0), z) for z in v]
    return v


def is_quantised(net: Network, fmt: ArithmeticFormat) -> bool:
    return all(
        is_representable(w, fmt)
        for layer in net.layers
        for row in layer.weights for w in row
    ) and all(is_representable(b, fmt) for layer in net.layers for b in layer.bias)


def quantise(net: Network, fmt: ArithmeticFormat) -> Network:
    """Round every weight and bias into the format.  Idempotent."""
    layers = tuple(
        Layer(tuple(tuple(to_format(w, fmt) for w in row) for row in layer.weights),
              tuple(to_format(b, fmt) for b in layer.bias))
        for layer in net.layers)
    return Network(layers, net.final_relu)


def eval_quantised(net: Network, x: Vector, fmt: ArithmeticFormat,
                   per_op: bool = False) -> Vector:
    """Forward propagation under the format.

    Default semantics: each neuron's affine sum is computed exactly and
    quantised once; ReLU needs no further rounding since max(0, .) is closed
    in every format.  With per_op=True every multiplication and addition is
    quantised individually instead (this variant is not recognised by the
    automata backends).
    """
    if len(x) != net.input_dim:
        raise DimensionMismatch(f"input length {len(x)} != {net.input_dim}")
    if not is_quantised(net, fmt):
        raise NotRepresentable("network parameters are not representable; quantise first")
    v = [Fraction(xi) for xi in x]
    for xi in v:
        if not is_representable(xi, fmt):
            raise NotRepresentable(f"input entry {xi} is not representable")
    for i, layer in enumerate(net.layers):
        if per_op:
            nxt = []
            for row, b in zip(layer.weights, layer.bias):
                acc = to_format(Fraction(0), fmt)
                for w, xi in zip(row, v):
                    prod = to_format(w * xi, fmt)
                    acc = to_format(acc + prod, fmt)
                nxt.append(to_format(acc + b, fmt))
        else:
            nxt = [to_format(z, fmt) for z in _affine(layer, v)]
        if net.final_relu or i < net.depth - 1:
            nxt = [max(Fraction(0), z) for z in nxt]
        v = nxt
    return v


def eval_quantised_batch(net: Network, fmt: FixedFormat, inputs):
    """Vectorised fixed-point evaluation over a batch of scaled-integer
    inputs (shape (n, input_dim) int64).  Returns scaled-integer outputs.

    Same semantics as eval_quantised; used by the brute-force backend where
    per-input Fraction evaluation would dominate the runtime.  Raises if the
    worst-case intermediate could not fit in int64.
    """
    import numpy as np

    if not isinstance(fmt, FixedFormat):
        raise ValueError("batch evaluation is fixed-point only")
    if fmt.rounding is Rounding.TOWARD_ZERO:
        raise NotImplementedError("toward-zero batch rounding is unused")
    if not is_quantised(net, fmt):
        raise NotRepresentable("network parameters are not representable; quantise first")
    scale = 1 << fmt.frac
    x = np.asarray(inputs, dtype=np.int64)
    in_bound = max(abs(fmt.min_scaled), fmt.max_scaled)  # layer inputs stay in range
    for layer in net.layers:
        worst = max(
            sum(abs(int(w * scale)) for w in row) * in_bound
            + abs(int(b * scale * scale))
            for row, b in zip(layer.weights, layer.bias))
        if worst + scale >= 2 ** 62:
            raise OverflowError("batch path would overflow int64; use eval_quantised")
    for i, layer in enumerate(net.layers):
        w = np.array([[int(v * scale) for v in row] for row in layer.weights],
                     dtype=np.int64)
        b = np.array([int(v * scale * scale) for v in layer.bias], dtype=np.int64)
        t = x @ w.T + b  # exact affine sum, scaled by 2^(2f)
        if fmt.rounding is Rounding.NEAREST_HALF_UP:
            r = (t + (scale >> 1)) >> fmt.frac if fmt.frac else t
        else:
            r = t >> fmt.frac if fmt.frac else t
        if fmt.overflow is Overflow.SATURATE:
            r = np.clip(r, fmt.min_scaled, fmt.max_scaled)
        else:
            span = 1 << fmt.bits
            r = (r - fmt.min_scaled) % span + fmt.min_scaled
        if net.final_relu or i < net.depth - 1:
            r = np.maximum(r, 0)
        x = r
    return x


# ---------------------------------------------------------------------------
# Activation patterns
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ActivationPattern:
    """One bit per ReLU node, layer-major: 1 keeps the node's identity,
    0 clamps it to zero."""

    bits: tuple[int, ...]

    def __post_init__(self):
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("pattern bits must be 0 or 1")


def eval_with_pattern(net: Network, x: Vector,
                      pattern: ActivationPattern) -> tuple[Vector, bool]:
    """Evaluate with every ReLU replaced per the pattern.

    `consistent` reports whether each node's pre-activation sign under this
    very evaluation agrees with its bit (>= 0 for 1, <= 0 for 0); exact zero
    is compatible with both.
    """
    if len(x) != net.input_dim:
        raise DimensionMismatch(f"input length {len(x)} != {net.input_dim}")
    expected = net.relu_node_count()
    if len(pattern.bits) != expected:
        raise DimensionMismatch(
            f"pattern length {len(pattern.bits)} != {expected} ReLU nodes")
    v = [Fraction(xi) for xi in x]
    consistent = True
    pos = 0
    relu_layers = set(net.relu_layer_indices())
    for i, layer in enumerate(net.layers):
        pre = _affine(layer, v)
        if i in relu_layers:
            out = []
            for z in pre:
                bit = pattern.bits[pos]
                pos += 1
                if bit:
                    if z < 0:
                        consistent = False
                    out.append(z)
                else:
                    if z > 0:
                        consistent = False
                    out.append(Fraction(0))
            v = out
        else:
            v = pre
    return v, consistent


def pattern_from_input(net: Network, x: Vector) -> ActivationPattern:
    """The pattern induced by the exact evaluation (>= 0 maps to 1)."""
    bits = []
    v = [Fraction(xi) for xi in x]
    relu_layers = set(net.relu_layer_indices())
    for i, layer in enumerate(net.layers):
        pre = _affine(layer, v)
        if i in relu_layers:
            bits.extend(1 if z >= 0 else 0 for z in pre)
            v = [max(Fraction(0), z) for z in pre]
        else:
            v = pre
    return ActivationPattern(tuple(bits))


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

def format_network(net: Network) -> str:
    dims = [net.input_dim] + [layer.out_dim for layer in net.layers]
    head = (f"fnn format=1 k={net.depth} dims={','.join(map(str, dims))}"
            f" final-relu={int(net.final_relu)}")
    lines = [head]
    for layer in net.layers:
        lines.append("layer")
        for row in layer.weights:
            lines.append(" ".join(format_rational(w) for w in row))
        lines.append("bias " + " ".join(format_rational(b) for b in layer.bias))
    return "\n".join(lines) + "\n"


def parse_network(text: str) -> Network:
    """Parse the textual network format emitted by `format_network`."""
    lines = [(i + 1, ln.split("#", 1)[0].strip()) for i, ln in enumerate(text.splitlines())]
    lines = [(n, ln) for n, ln in lines if ln]
    if not lines:
        raise ParseError("empty network file")
    n0, head = lines[0]
    parts = head.split()
    if not parts or parts[0] != "fnn":
        raise ParseError("expected 'fnn' header", n0)
    fields = {}
    for item in parts[1:]:
        key, sep, value = item.partition("=")
        if not sep:
            raise ParseError(f"bad header field {item!r}", n0)
        fields[key] = value
    if fields.get("format") != "1":
        raise ParseError("unsupported or missing format version", n0)
    try:
        depth = int(fields["k"])
        dims = [int(d) for d in fields["dims"].split(",")]
    except (KeyError, ValueError):
        raise ParseError("header needs k=<depth> dims=<n1,...>", n0) from None
    final_relu = fields.get("final-relu", "1") == "1"
    if len(dims) != depth + 1:
        raise ParseError(f"dims lists {len(dims)} sizes for k={depth}", n0)

    idx = 1
    layers = []
    for li in range(depth):
        if idx >= len(lines) or lines[idx][1] != "layer":
            raise ParseError(f"expected 'layer' block {li + 1}",
                             lines[idx][0] if idx < len(lines) else None)
        idx += 1
        rows = []
        for _ in range(dims[li + 1]):
            if idx >= len(lines):
                raise ParseError("unexpected end of file in weight rows")
            n, ln = lines[idx]
            entries = ln.split()
            if len(entries) != dims[li]:
                raise ParseError(f"expected {dims[li]} entries, got {len(entries)}", n)
            try:
                rows.append([parse_rational(e) for e in entries])
            except ParseError as exc:
                raise ParseError(str(exc), n) from None
            idx += 1
        if idx >= len(lines) or not lines[idx][1].startswith("bias"):
            raise ParseError("expected 'bias' row",
                             lines[idx][0] if idx < len(lines) else None)
        n, ln = lines[idx]
        entries = ln.split()[1:]
        if len(entries) != dims[li + 1]:
            raise ParseError(f"expected {dims[li + 1]} bias entries", n)
        bias = [parse_rational(e) for e in entries]
        idx += 1
        layers.append((rows, bias))
    if idx != len(lines):
        raise ParseError("trailing content after last layer", lines[idx][0])
    return make_network(layers, final_relu)

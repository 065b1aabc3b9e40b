"""
Dense reverse-mode differentiation for fully connected coordinate networks.
--------------------------------------------------------------------------

Matrices are float64 numpy arrays with the batch as the leading dimension.
A `Tape` records each primitive (affine map, activation, hash-grid gather)
together with the forward values its backward rule needs; `Tape.backward`
walks the records in exact reverse order and returns a gradient for every
named parameter that took part in the forward pass.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from texinr.errors import NumericError, ShapeError, TapeStateError


class ActivationKind(str, Enum):
    RELU = "relu"
    SINE = "sine"
    IDENTITY = "identity"


@dataclass(frozen=True)
class Activation:
    kind: ActivationKind = ActivationKind.RELU
    omega0: float = 30.0


# ============================================================
# Tape records
# ============================================================
class _AffineRecord:
    __slots__ = ("w_name", "b_name", "W", "a_prev")

    def __init__(self, w_name, b_name, W, a_prev):
        self.w_name = w_name
        self.b_name = b_name
        self.W = W
        self.a_prev = a_prev

    def backward(self, grad_out, grads):
        if self.w_name is not None:
            grads[self.w_name] += np.einsum("bi,bo->io", self.a_prev, grad_out)
        if self.b_name is not None:
            grads[self.b_name] += grad_out.sum(axis=0)
        return np.einsum("bo,io->bi", grad_out, self.W)


class _ActivationRecord:
    __slots__ = ("activation", "x")

    def __init__(self, activation, x):
        self.activation = activation
        self.x = x

    def backward(self, grad_out, grads):
        kind = self.activation.kind
        if kind is ActivationKind.RELU:
            # subgradient at exactly 0 is 0
            return grad_out * (self.x > 0.0)
        if kind is ActivationKind.SINE:
            w0 = self.activation.omega0
            return grad_out * (w0 * np.cos(w0 * self.x))
        return grad_out


class _GatherRecord:
    """Weighted gather from a parameter table, written into output columns."""

    __slots__ = ("name", "indices", "weights", "columns")

    def __init__(self, name, indices, weights, columns):
        # indices/weights: one (batch,) array per interpolation corner
        self.name = name
        self.indices = indices
        self.weights = weights
        self.columns = columns

    def backward(self, grad_out, grads):
        g = grad_out[:, self.columns]
        table_grad = grads[self.name]
        for idx, w in zip(self.indices, self.weights):
            np.add.at(table_grad, idx, w[:, None] * g)
        return grad_out


class Tape:
    """Ordered record of forward primitives for one forward pass."""

    def __init__(self):
        self._records = []
        self._shapes = {}

    def __len__(self):
        return len(self._records)

    def watch(self, name, value):
        """Register a parameter so backward allocates a zeroed gradient for it."""
        self._shapes[name] = np.shape(value)

    def record(self, rec):
        self._records.append(rec)

    def backward(self, loss_grad):
        """Return {parameter name: d loss / d parameter} for every watched parameter."""
        if not self._records:
            raise TapeStateError("backward called before any forward pass was recorded")

        grads = {name: np.zeros(shape) for name, shape in self._shapes.items()}
        g = np.asarray(loss_grad, dtype=np.float64)
        for rec in reversed(self._records):
            g = rec.backward(g, grads)
        return grads


# ============================================================
# Primitives
# ============================================================
def affine_forward(W, b, a_prev, tape=None, names=(None, None)):
    """out = a_prev W + b, recorded on `tape` when one is given.

    Each output row depends only on its input row and is bit-identical for any
    batch size.
    """
    a_prev = np.asarray(a_prev, dtype=np.float64)
    if a_prev.ndim != 2 or W.ndim != 2 or a_prev.shape[1] != W.shape[0]:
        raise ShapeError(
            f"affine_forward: input {a_prev.shape} does not chain with weight {W.shape}"
        )
    if b.shape != (W.shape[1],):
        raise ShapeError(f"affine_forward: bias {b.shape} does not match weight {W.shape}")

    out = np.einsum("bi,io->bo", a_prev, W) + b
    if tape is not None:
        w_name, b_name = names
        if w_name is not None:
            tape.watch(w_name, W)
        if b_name is not None:
            tape.watch(b_name, b)
        tape.record(_AffineRecord(w_name, b_name, W, a_prev))
    return out


def activation_forward(activation, x, tape=None):
    if not isinstance(activation, Activation):
        activation = Activation(ActivationKind(activation))

    kind = activation.kind
    if kind is ActivationKind.RELU:
        out = np.maximum(x, 0.0)
    elif kind is ActivationKind.SINE:
        out = np.sin(activation.omega0 * x)
    else:
        out = x

    if tape is not None:
        tape.record(_ActivationRecord(activation, x))
    return out


def gather_forward(table, indices, weights, name=None, tape=None, columns=None):
    """Interpolate rows of `table` as sum_k weights[k] * table[indices[k]].

    An index may be a tuple (e.g. `(level, rows)`) addressing a stacked table.
    """
    out = np.zeros((weights[0].shape[0], table.shape[-1]))
    for idx, w in zip(indices, weights):
        out += w[:, None] * table[idx]
    if tape is not None and name is not None:
        tape.watch(name, table)
        tape.record(_GatherRecord(name, indices, weights, columns))
    return out


def backward(tape, loss_grad):
    return tape.backward(loss_grad)


def ensure_finite(x, where):
    if not np.all(np.isfinite(x)):
        raise NumericError(f"non-finite values in {where}", where=where)
    return x

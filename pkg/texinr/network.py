"""
INR architectures: pure MLP, SIREN, Fourier-encoded MLP and the optional
hash-grid MLP, all mapping (u, v[, t]) to a linear RGB output.
"""

import math
from dataclasses import dataclass, field, replace

import numpy as np

from texinr.autodiff import (
    Activation,
    ActivationKind,
    Tape,
    activation_forward,
    affine_forward,
    ensure_finite,
)
from texinr.encoding import DEFAULT_N_FREQUENCIES, EncoderConfig, encode, init_hash_table
from texinr.errors import ConfigError, NumericError, ShapeError

DEFAULT_OMEGA0 = 30.0

GRID_WIDTHS = (128, 256, 512)
GRID_DEPTHS = (1, 2, 3)
GRID_EXCLUDED = {(512, 3)}

ARCHITECTURES = ("mlp", "fourier_mlp", "sine_mlp", "hash_mlp")


@dataclass(frozen=True)
class NetworkSpec:
    input_dim: int = 2
    hidden_width: int = 128
    hidden_count: int = 1
    output_dim: int = 3
    activation: ActivationKind = ActivationKind.RELU
    encoder: EncoderConfig = field(default_factory=EncoderConfig.identity)
    omega0: float = DEFAULT_OMEGA0

    def validate(self, on_grid=False):
        if self.input_dim not in (2, 3):
            raise ConfigError(f"input_dim must be 2 (u,v) or 3 (u,v,t), got {self.input_dim}")
        if self.output_dim != 3:
            raise ConfigError(f"output_dim must be 3, got {self.output_dim}")
        if self.hidden_count < 0 or (self.hidden_count and self.hidden_width < 1):
            raise ConfigError(f"bad hidden layout {self.hidden_width}x{self.hidden_count}")
        if self.omega0 <= 0:
            raise ConfigError(f"omega0 must be positive, got {self.omega0}")
        if on_grid and (self.hidden_width, self.hidden_count) not in grid_pairs():
            raise ConfigError(
                f"{self.hidden_width}x{self.hidden_count} is outside the evaluated architecture grid"
            )
        self.encoder.validate()
        return self

    @property
    def is_siren(self):
        return ActivationKind(self.activation) is ActivationKind.SINE

    @property
    def encoded_dim(self):
        return self.encoder.output_dim(self.input_dim)

    @property
    def layer_dims(self):
        """(d_in, d_out) of every affine layer, input to output."""
        widths = [self.encoded_dim] + [self.hidden_width] * self.hidden_count + [self.output_dim]
        return list(zip(widths[:-1], widths[1:]))

    @property
    def arch(self):
        if self.encoder.variant == "hash":
            return "hash_mlp"
        if self.encoder.variant == "fourier":
            return "fourier_mlp"
        if self.is_siren:
            return "sine_mlp"
        return "mlp"

    @property
    def tag(self):
        prefix = "uvt" if self.input_dim == 3 else "uv"
        return f"{prefix}_{self.arch}_{self.hidden_width}x{self.hidden_count}"


def grid_pairs():
    """The 8 evaluated (width, depth) pairs."""
    return [
        (w, d)
        for w in GRID_WIDTHS
        for d in GRID_DEPTHS
        if (w, d) not in GRID_EXCLUDED
    ]


def arch_spec(
    arch,
    width,
    depth,
    mipmap=False,
    n_frequencies=DEFAULT_N_FREQUENCIES,
    omega0=DEFAULT_OMEGA0,
    hash_config=None,
):
    input_dim = 3 if mipmap else 2
    if arch == "mlp":
        activation, encoder = ActivationKind.RELU, EncoderConfig.identity()
    elif arch == "fourier_mlp":
        activation, encoder = ActivationKind.RELU, EncoderConfig.fourier(n_frequencies)
    elif arch == "sine_mlp":
        activation, encoder = ActivationKind.SINE, EncoderConfig.identity()
    elif arch == "hash_mlp":
        activation = ActivationKind.RELU
        encoder = EncoderConfig("hash", hash=hash_config) if hash_config else EncoderConfig.hash_grid()
    else:
        raise ConfigError(f"unknown architecture {arch!r}; expected one of {ARCHITECTURES}")

    spec = NetworkSpec(
        input_dim=input_dim,
        hidden_width=width,
        hidden_count=depth,
        activation=activation,
        encoder=encoder,
        omega0=omega0,
    )
    return spec.validate()


# ============================================================
# Model
# ============================================================
@dataclass(frozen=True)
class InrModel:
    spec: NetworkSpec
    layers: tuple
    hash_table: np.ndarray = None
    lod_levels: int = 0
    # (width, height) of the level-0 texture; (0, 0) when unknown
    base_size: tuple = (0, 0)

    def params(self):
        """Named view of every trainable array, in serialization order."""
        out = {}
        for i, (W, b) in enumerate(self.layers):
            out[f"layers.{i}.W"] = W
            out[f"layers.{i}.b"] = b
        if self.hash_table is not None:
            out["hash_table"] = self.hash_table
        return out

    def with_params(self, params):
        layers = tuple(
            (params[f"layers.{i}.W"], params[f"layers.{i}.b"]) for i in range(len(self.layers))
        )
        return replace(self, layers=layers, hash_table=params.get("hash_table", self.hash_table))

    def copy(self):
        return self.with_params({k: v.copy() for k, v in self.params().items()})

    @property
    def param_count(self):
        return sum(int(v.size) for v in self.params().values())


def init(spec, seed=0, lod_levels=0, base_size=(0, 0)):
    """Seeded initialization.

    SIREN: first layer U(-1/d_in, 1/d_in), later layers
    U(-sqrt(6/d_in)/omega0, +sqrt(6/d_in)/omega0). Other activations use
    Glorot uniform U(-sqrt(6/(d_in+d_out)), +sqrt(6/(d_in+d_out))). Biases are 0.
    """
    spec.validate()
    rng = np.random.default_rng(seed)

    layers = []
    for i, (d_in, d_out) in enumerate(spec.layer_dims):
        if spec.is_siren:
            bound = 1.0 / d_in if i == 0 else math.sqrt(6.0 / d_in) / spec.omega0
        else:
            bound = math.sqrt(6.0 / (d_in + d_out))
        W = rng.uniform(-bound, bound, size=(d_in, d_out))
        layers.append((W, np.zeros(d_out)))

    hash_table = None
    if spec.encoder.variant == "hash":
        hash_table = init_hash_table(spec.encoder.hash, rng)
    return InrModel(spec, tuple(layers), hash_table, lod_levels, tuple(base_size))


def forward(model, coords, tape=None):
    """Batched inference: encode, hidden layers with the spec activation, linear output."""
    spec = model.spec
    coords = np.asarray(coords, dtype=np.float64)
    if coords.ndim != 2 or coords.shape[1] != spec.input_dim:
        raise ShapeError(
            f"model expects (batch, {spec.input_dim}) coordinates, got {coords.shape}"
        )

    a = encode(spec.encoder, coords, model.hash_table, tape=tape)
    activation = Activation(ActivationKind(spec.activation), spec.omega0)
    last = len(model.layers) - 1
    for i, (W, b) in enumerate(model.layers):
        a = affine_forward(W, b, a, tape=tape, names=(f"layers.{i}.W", f"layers.{i}.b"))
        if i < last:
            a = activation_forward(activation, a, tape=tape)
        try:
            ensure_finite(a, f"layer {i}")
        except NumericError as e:
            raise NumericError(f"forward produced non-finite output at layer {i}", where=i) from e
    return a


def forward_with_tape(model, coords):
    tape = Tape()
    return forward(model, coords, tape=tape), tape


def param_count(spec):
    """Exact scalar parameter count: sum of d_in*d_out + d_out, plus hash entries."""
    n = sum(d_in * d_out + d_out for d_in, d_out in spec.layer_dims)
    if spec.encoder.variant == "hash":
        n += spec.encoder.hash.entries
    return n


def quantize32(model):
    """Round every parameter through float32, the precision of stored assets."""
    return model.with_params(
        {k: v.astype(np.float32).astype(np.float64) for k, v in model.params().items()}
    )

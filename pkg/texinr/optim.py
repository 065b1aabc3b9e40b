"""Adam and iRprop- update rules over named parameter arrays."""

from dataclasses import dataclass, field

import numpy as np

from texinr.autodiff import ActivationKind
from texinr.errors import ConfigError, NumericError, ShapeError

ADAM = "adam"
RPROP = "rprop"


@dataclass(frozen=True)
class OptimizerConfig:
    kind: str = ADAM
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    eta_plus: float = 1.2
    eta_minus: float = 0.5
    delta0: float = 1e-3
    delta_min: float = 1e-8
    delta_max: float = 1.0

    def validate(self):
        if self.kind not in (ADAM, RPROP):
            raise ConfigError(f"unknown optimizer {self.kind!r}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning rate must be positive, got {self.learning_rate}")
        if not 0 < self.beta1 < self.beta2 < 1:
            raise ConfigError(f"need 0 < beta1 < beta2 < 1, got {self.beta1}, {self.beta2}")
        if not self.eta_minus < 1 < self.eta_plus:
            raise ConfigError(f"need eta_minus < 1 < eta_plus, got {self.eta_minus}, {self.eta_plus}")
        if not self.delta_min <= self.delta0 <= self.delta_max:
            raise ConfigError("need delta_min <= delta0 <= delta_max")
        return self

    @property
    def lr_tag(self):
        """1e-3 style learning-rate label used in output file names."""
        mantissa, exp = f"{self.learning_rate:.0e}".split("e")
        return f"{mantissa}e{int(exp)}"


def default_config(activation, kind=ADAM):
    """1e-3, or 1e-4 for SIREN.

    Rprop steps ignore the learning rate; it still names the run.
    """
    lr = 1e-4 if ActivationKind(activation) is ActivationKind.SINE else 1e-3
    return OptimizerConfig(kind=kind, learning_rate=lr).validate()


@dataclass
class OptimizerState:
    step_count: int = 0
    buffers: dict = field(default_factory=dict)


def _check(params, grads):
    for name, p in params.items():
        g = grads.get(name)
        if g is None or g.shape != p.shape:
            raise ShapeError(f"gradient for {name} has shape {None if g is None else g.shape}, expected {p.shape}")
        if not np.all(np.isfinite(g)):
            raise NumericError(f"non-finite gradient in parameter block {name}", where=name)


# ============================================================
# Optimizers
# ============================================================
class Optimizer:
    def __init__(self, config):
        self.config = config.validate()
        self.state = OptimizerState()

    def step(self, params, grads):
        """Update `params` in place and return them."""
        _check(params, grads)
        self.state.step_count += 1
        for name, p in params.items():
            self._update(name, p, grads[name])
        return params

    def _update(self, name, p, g):
        raise NotImplementedError


class Adam(Optimizer):
    def _update(self, name, p, g):
        c = self.config
        t = self.state.step_count
        if name not in self.state.buffers:
            self.state.buffers[name] = (np.zeros_like(p), np.zeros_like(p))
        m, v = self.state.buffers[name]

        m *= c.beta1
        m += (1.0 - c.beta1) * g
        v *= c.beta2
        v += (1.0 - c.beta2) * np.square(g)

        m_hat = m / (1.0 - c.beta1**t)
        v_hat = v / (1.0 - c.beta2**t)
        p -= c.learning_rate * m_hat / (np.sqrt(v_hat) + c.eps)


class Rprop(Optimizer):
    """iRprop-: on a gradient sign flip the step shrinks and that update is skipped."""

    def _update(self, name, p, g):
        c = self.config
        if name not in self.state.buffers:
            self.state.buffers[name] = (np.zeros_like(p), np.full_like(p, c.delta0))
        prev, delta = self.state.buffers[name]

        sign = np.sign(g)
        agree = prev * sign
        delta[:] = np.where(
            agree > 0,
            np.minimum(delta * c.eta_plus, c.delta_max),
            np.where(agree < 0, np.maximum(delta * c.eta_minus, c.delta_min), delta),
        )
        sign = np.where(agree < 0, 0.0, sign)
        p -= sign * delta
        prev[:] = sign


def make_optimizer(config):
    return Adam(config) if config.kind == ADAM else Rprop(config)

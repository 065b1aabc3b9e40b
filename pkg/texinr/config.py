"""
Run configuration: training jobs, sweep grids and the declarative run file.
"""

import json
import os
from dataclasses import dataclass, field, replace
from pathlib import Path

import jsonschema
from dotenv import load_dotenv

from texinr.errors import ConfigError
from texinr.imaging import DEFAULT_LEVELS
from texinr.network import ARCHITECTURES, DEFAULT_OMEGA0, NetworkSpec, arch_spec, grid_pairs
from texinr.encoding import DEFAULT_N_FREQUENCIES
from texinr.optim import ADAM, RPROP, OptimizerConfig, default_config

DEFAULT_EPOCHS = 50
DEFAULT_SNAPSHOTS = (1, 10, 20, 30, 40, 50)
DEFAULT_RESULTS_DIR = "results"


def load_env(path=None):
    """Load a .env file (if any) so TEXINR_* variables reach the defaults below."""
    load_dotenv(path, override=False)


def env_int(name, default):
    value = os.environ.get(name)
    return int(value) if value not in (None, "") else default


def results_dir():
    return Path(os.environ.get("TEXINR_RESULTS_DIR") or DEFAULT_RESULTS_DIR)


# ============================================================
# Training job
# ============================================================
@dataclass
class TrainJob:
    image_path: str
    spec: NetworkSpec
    optimizer: OptimizerConfig
    epochs: int = DEFAULT_EPOCHS
    seed: int = 0
    mipmap: bool = False
    levels: int = DEFAULT_LEVELS
    snapshot_epochs: tuple = None
    batch_size: int = None
    out_dir: str = None

    def __post_init__(self):
        if self.snapshot_epochs is None:
            self.snapshot_epochs = tuple(e for e in DEFAULT_SNAPSHOTS if e <= self.epochs)
        self.snapshot_epochs = tuple(sorted(set(int(e) for e in self.snapshot_epochs)))

    def validate(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        bad = [e for e in self.snapshot_epochs if not 1 <= e <= self.epochs]
        if bad:
            raise ConfigError(f"snapshot epochs {bad} fall outside [1, {self.epochs}]")
        if self.mipmap != (self.spec.input_dim == 3):
            raise ConfigError("mipmap training needs a (u, v, t) network and vice versa")
        if self.mipmap and self.levels < 1:
            raise ConfigError(f"mipmap level count must be >= 1, got {self.levels}")
        if self.batch_size is not None and self.batch_size < 1:
            raise ConfigError(f"batch_size must be positive, got {self.batch_size}")
        self.spec.validate()
        self.optimizer.validate()
        return self


# ============================================================
# Sweep grid
# ============================================================
@dataclass
class SweepGrid:
    architectures: tuple = ("mlp", "fourier_mlp", "sine_mlp")
    pairs: tuple = field(default_factory=lambda: tuple(grid_pairs()))
    optimizers: tuple = (ADAM, RPROP)
    epochs: int = DEFAULT_EPOCHS
    seed: int = 0
    mipmap: bool = False
    levels: int = DEFAULT_LEVELS
    n_frequencies: int = DEFAULT_N_FREQUENCIES
    omega0: float = DEFAULT_OMEGA0
    learning_rate: float = None
    batch_size: int = None
    workers: int = 1
    job_timeout: int = 0
    record_seconds: bool = True
    snapshots: bool = False

    def validate(self):
        unknown = [a for a in self.architectures if a not in ARCHITECTURES]
        if unknown:
            raise ConfigError(f"unknown architectures {unknown}")
        bad = [o for o in self.optimizers if o not in (ADAM, RPROP)]
        if bad:
            raise ConfigError(f"unknown optimizers {bad}")
        if not self.pairs:
            raise ConfigError("sweep grid has no (width, depth) pairs")
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        return self

    def spec_for(self, arch, width, depth):
        return arch_spec(
            arch,
            width,
            depth,
            mipmap=self.mipmap,
            n_frequencies=self.n_frequencies,
            omega0=self.omega0,
        )

    def optimizer_for(self, spec, kind):
        cfg = default_config(spec.activation, kind)
        if self.learning_rate is not None:
            cfg = replace(cfg, learning_rate=self.learning_rate)
        return cfg.validate()


# ============================================================
# Declarative run file
# ============================================================
_POS_INT = {"type": "integer", "minimum": 1}

RUN_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "images": {"type": "array", "items": {"type": "string"}, "minItems": 1},
        "manifest": {"type": "string"},
        "image": {"type": "string"},
        "architecture": {"enum": list(ARCHITECTURES)},
        "architectures": {"type": "array", "items": {"enum": list(ARCHITECTURES)}, "minItems": 1},
        "width": _POS_INT,
        "depth": {"type": "integer", "minimum": 1, "maximum": 3},
        "pairs": {
            "type": "array",
            "items": {"type": "array", "items": _POS_INT, "minItems": 2, "maxItems": 2},
            "minItems": 1,
        },
        "optimizer": {"enum": [ADAM, RPROP]},
        "optimizers": {"type": "array", "items": {"enum": [ADAM, RPROP]}, "minItems": 1},
        "learning_rate": {"type": "number", "exclusiveMinimum": 0},
        "epochs": _POS_INT,
        "seed": {"type": "integer"},
        "mipmap": {"type": "boolean"},
        "levels": _POS_INT,
        "n_frequencies": _POS_INT,
        "omega0": {"type": "number", "exclusiveMinimum": 0},
        "batch_size": _POS_INT,
        "snapshot_epochs": {"type": "array", "items": _POS_INT},
        "workers": _POS_INT,
        "job_timeout": {"type": "integer", "minimum": 0},
        "record_seconds": {"type": "boolean"},
        "snapshots": {"type": "boolean"},
        "out_dir": {"type": "string"},
    },
}


def validate_run(run):
    try:
        jsonschema.validate(run, RUN_SCHEMA)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"invalid run file at {where}: {e.message}") from e
    return run


def load_run_file(path):
    with open(path, "r", encoding="utf-8") as f:
        try:
            run = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"run file {path} is not valid JSON: {e}") from e
    return validate_run(run)


def merge_overrides(run, overrides):
    """CLI values win over run-file values; None means 'not given on the CLI'."""
    merged = dict(run or {})
    merged.update({k: v for k, v in overrides.items() if v is not None})
    return merged


def train_job_from_run(run):
    image = run.get("image") or (run.get("images") or [None])[0]
    if not image:
        raise ConfigError("a training run needs an image")
    mipmap = bool(run.get("mipmap", False))
    spec = arch_spec(
        run.get("architecture", "fourier_mlp"),
        run.get("width", 128),
        run.get("depth", 1),
        mipmap=mipmap,
        n_frequencies=run.get("n_frequencies", DEFAULT_N_FREQUENCIES),
        omega0=run.get("omega0", DEFAULT_OMEGA0),
    )
    opt = default_config(spec.activation, run.get("optimizer", ADAM))
    if run.get("learning_rate") is not None:
        opt = replace(opt, learning_rate=run["learning_rate"])
    job = TrainJob(
        image_path=image,
        spec=spec,
        optimizer=opt,
        epochs=run.get("epochs", DEFAULT_EPOCHS),
        seed=run.get("seed", 0),
        mipmap=mipmap,
        levels=run.get("levels", DEFAULT_LEVELS),
        snapshot_epochs=run.get("snapshot_epochs"),
        batch_size=run.get("batch_size"),
        out_dir=run.get("out_dir") or str(results_dir()),
    )
    return job.validate()


def grid_from_run(run):
    grid = SweepGrid()
    updates = {
        k: run[k]
        for k in (
            "epochs",
            "seed",
            "mipmap",
            "levels",
            "n_frequencies",
            "omega0",
            "learning_rate",
            "batch_size",
            "workers",
            "job_timeout",
            "record_seconds",
            "snapshots",
        )
        if run.get(k) is not None
    }
    if run.get("architectures"):
        updates["architectures"] = tuple(run["architectures"])
    if run.get("optimizers"):
        updates["optimizers"] = tuple(run["optimizers"])
    if run.get("pairs"):
        updates["pairs"] = tuple(tuple(p) for p in run["pairs"])
    if "workers" not in updates:
        updates["workers"] = env_int("TEXINR_WORKERS", 1)
    return replace(grid, **updates).validate()

import json
import os

import pytest

from texinr.autodiff import ActivationKind
from texinr.config import (
    SweepGrid,
    TrainJob,
    grid_from_run,
    load_env,
    load_run_file,
    merge_overrides,
    results_dir,
    train_job_from_run,
    validate_run,
)
from texinr.errors import ConfigError
from texinr.network import arch_spec
from texinr.optim import ADAM, RPROP, OptimizerConfig


def _job(**kwargs):
    defaults = dict(image_path="x.png", spec=arch_spec("mlp", 16, 1), optimizer=OptimizerConfig())
    defaults.update(kwargs)
    return TrainJob(**defaults)


class TestTrainJob:
    def test_default_snapshots(self):
        assert _job().snapshot_epochs == (1, 10, 20, 30, 40, 50)
        assert _job(epochs=25).snapshot_epochs == (1, 10, 20)

    def test_snapshots_outside_range(self):
        with pytest.raises(ConfigError):
            _job(epochs=5, snapshot_epochs=(1, 6)).validate()

    def test_epochs(self):
        with pytest.raises(ConfigError):
            _job(epochs=0, snapshot_epochs=()).validate()

    def test_mipmap_needs_t(self):
        with pytest.raises(ConfigError):
            _job(mipmap=True).validate()
        with pytest.raises(ConfigError):
            _job(spec=arch_spec("mlp", 16, 1, mipmap=True)).validate()
        _job(spec=arch_spec("mlp", 16, 1, mipmap=True), mipmap=True).validate()

    def test_batch_size(self):
        with pytest.raises(ConfigError):
            _job(batch_size=0).validate()


class TestSweepGrid:
    def test_defaults(self):
        grid = SweepGrid().validate()
        assert len(grid.pairs) == 8
        assert grid.optimizers == (ADAM, RPROP)

    def test_siren_learning_rate(self):
        grid = SweepGrid()
        spec = grid.spec_for("sine_mlp", 128, 1)
        assert spec.activation is ActivationKind.SINE
        assert grid.optimizer_for(spec, ADAM).learning_rate == 1e-4
        assert SweepGrid(learning_rate=5e-3).optimizer_for(spec, ADAM).learning_rate == 5e-3

    @pytest.mark.parametrize(
        "kwargs", [{"architectures": ("cnn",)}, {"optimizers": ("sgd",)}, {"pairs": ()}, {"epochs": 0}]
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            SweepGrid(**kwargs).validate()


class TestRunFile:
    def test_load_and_build(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(
            json.dumps(
                {
                    "image": "tex.png",
                    "architecture": "fourier_mlp",
                    "width": 128,
                    "depth": 2,
                    "epochs": 10,
                    "n_frequencies": 4,
                    "out_dir": str(tmp_path / "out"),
                }
            )
        )
        job = train_job_from_run(load_run_file(path))
        assert job.spec.tag == "uv_fourier_mlp_128x2"
        assert job.spec.encoder.n_frequencies == 4
        assert job.snapshot_epochs == (1, 10)
        assert job.optimizer.learning_rate == 1e-3

    def test_unknown_key(self):
        with pytest.raises(ConfigError) as err:
            validate_run({"epochz": 3})
        assert "epochz" in str(err.value)

    def test_bad_value(self):
        with pytest.raises(ConfigError):
            validate_run({"depth": 4})
        with pytest.raises(ConfigError):
            validate_run({"architectures": ["mlp", "transformer"]})

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ConfigError):
            load_run_file(path)

    def test_overrides_win(self):
        merged = merge_overrides({"epochs": 50, "seed": 1}, {"epochs": 5, "seed": None})
        assert merged == {"epochs": 5, "seed": 1}

    def test_grid_from_run(self, monkeypatch):
        monkeypatch.setenv("TEXINR_WORKERS", "3")
        grid = grid_from_run({"architectures": ["mlp"], "pairs": [[16, 1]], "record_seconds": False})
        assert grid.architectures == ("mlp",)
        assert grid.pairs == ((16, 1),)
        assert grid.record_seconds is False
        assert grid.workers == 3

    def test_needs_image(self):
        with pytest.raises(ConfigError):
            train_job_from_run({})


def test_env_file(tmp_path, monkeypatch):
    monkeypatch.delenv("TEXINR_RESULTS_DIR", raising=False)
    env = tmp_path / ".env"
    env.write_text(f"TEXINR_RESULTS_DIR={tmp_path / 'elsewhere'}\n")
    try:
        load_env(env)
        assert results_dir() == tmp_path / "elsewhere"
    finally:
        os.environ.pop("TEXINR_RESULTS_DIR", None)

import logging
import time

import pytest

from texinr.errors import (
    ConfigError,
    DivergenceError,
    ImageError,
    JobTimeout,
    NumericError,
    ShapeError,
    StoreError,
    TexInrError,
    time_limit,
)
from texinr.logs import setup_logging


def test_time_limit_raises():
    with pytest.raises(JobTimeout):
        with time_limit(1):
            time.sleep(2)


def test_time_limit_zero_disables():
    with time_limit(0):
        time.sleep(0.01)


@pytest.mark.parametrize(
    "kind, base",
    [
        (ShapeError, ValueError),
        (ConfigError, ValueError),
        (NumericError, ArithmeticError),
        (ImageError, OSError),
        (StoreError, TexInrError),
        (DivergenceError, TexInrError),
        (JobTimeout, TexInrError),
    ],
)
def test_hierarchy(kind, base):
    assert issubclass(kind, base)
    assert issubclass(kind, TexInrError)


def test_divergence_payload():
    err = DivergenceError("loss is nan", model="m", epoch=3, losses=[1.0, 0.5])
    assert (err.model, err.epoch, err.losses) == ("m", 3, [1.0, 0.5])
    assert DivergenceError("x").losses == []


def test_setup_logging_single_handler(monkeypatch):
    monkeypatch.setenv("TEXINR_LOG_LEVEL", "debug")
    setup_logging()
    root = setup_logging()
    assert len(root.handlers) == 1
    assert root.level == logging.DEBUG
    assert setup_logging("warning").level == logging.WARNING

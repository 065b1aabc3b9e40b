"""Exception hierarchy shared by every texinr module."""

import signal
from contextlib import contextmanager


class TexInrError(Exception):
    """Root of all errors raised by texinr."""


class ShapeError(TexInrError, ValueError):
    pass


class ConfigError(TexInrError, ValueError):
    pass


class NumericError(TexInrError, ArithmeticError):
    """A non-finite value showed up where only finite values are allowed."""

    def __init__(self, message, where=None):
        super().__init__(message)
        self.where = where


class TapeStateError(TexInrError, RuntimeError):
    pass


class ImageError(TexInrError, OSError):
    pass


class CorpusError(TexInrError):
    pass


class DivergenceError(TexInrError):
    """Training produced a non-finite loss.

    `model` holds the last parameters that produced a finite loss and `epoch`
    the epoch at which training stopped.
    """

    def __init__(self, message, model=None, epoch=None, losses=None):
        super().__init__(message)
        self.model = model
        self.epoch = epoch
        self.losses = losses or []


# ============================================================
# Model store errors
# ============================================================
class StoreError(TexInrError):
    pass


class BadMagicError(StoreError):
    pass


class VersionMismatchError(StoreError):
    pass


class ChecksumError(StoreError):
    pass


class TruncatedFileError(StoreError):
    pass


# ============================================================
# Timeout Handler
# ============================================================
class JobTimeout(TexInrError):
    pass


@contextmanager
def time_limit(seconds):
    """Raise JobTimeout if the body runs longer than `seconds` (0 disables)."""
    if not seconds:
        yield
        return

    def signal_handler(signum, frame):
        raise JobTimeout(f"Job exceeded {seconds} second timeout")

    previous = signal.signal(signal.SIGALRM, signal_handler)
    signal.alarm(int(seconds))
    try:
        yield
    finally:
        signal.alarm(0)
        signal.signal(signal.SIGALRM, previous)

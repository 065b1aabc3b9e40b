"""Implicit neural representations as compressed textures: train, store, score, sweep, render."""

from texinr.errors import TexInrError
from texinr.network import InrModel, NetworkSpec, arch_spec, forward, init

__version__ = "0.1.0"

__all__ = ["InrModel", "NetworkSpec", "TexInrError", "arch_spec", "forward", "init"]

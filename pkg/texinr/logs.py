import logging
import os

import colorlog

LOG_FORMAT = "%(log_color)s%(levelname)-7s%(reset)s %(name)s: %(message)s"


def setup_logging(level=None):
    """Install a single colour handler on the `texinr` logger tree."""
    level = (level or os.environ.get("TEXINR_LOG_LEVEL") or "INFO").upper()

    handler = colorlog.StreamHandler()
    handler.setFormatter(
        colorlog.ColoredFormatter(
            LOG_FORMAT,
            log_colors={
                "DEBUG": "cyan",
                "INFO": "green",
                "WARNING": "yellow",
                "ERROR": "red",
                "CRITICAL": "red,bg_white",
            },
        )
    )

    root = logging.getLogger("texinr")
    root.handlers[:] = [handler]
    root.setLevel(level)
    root.propagate = False
    return root

from __future__ import annotations

import logging

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: str | int = "INFO") -> None:
    """Install one stream handler on the qkdn_orr logger tree."""
    root = logging.getLogger("qkdn_orr")
    root.setLevel(level.upper() if isinstance(level, str) else level)
    if not any(getattr(h, "_qkdn_orr", False) for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._qkdn_orr = True
        root.addHandler(handler)

"""Numerical lab for Gibbons-Hawking spaces with infinitely many centers."""

__version__ = "0.1.0"

from .config import PunctureConfig, TailModel, chen_chen, generate_config, load_config  # noqa: E402
from .errors import GHError  # noqa: E402

__all__ = ["GHError", "PunctureConfig", "TailModel", "chen_chen", "generate_config", "load_config", "__version__"]

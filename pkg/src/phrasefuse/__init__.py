"""Dense phrase retrieval with temperature-calibrated confidence fusion."""

from .errors import InputError, InvariantError, PhraseFuseError

__version__ = "0.1.0"

__all__ = ["InputError", "InvariantError", "PhraseFuseError", "__version__"]

"""cellforge: parametric device-layout generation and verification."""

__version__ = "0.1.0"

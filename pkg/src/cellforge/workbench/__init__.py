"""CLI and HTTP workbench exposing generate/stretch/abut/verify."""

from .session import Session, load_design

__all__ = ["Session", "load_design"]

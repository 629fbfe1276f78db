"""Device generators: parameter evaluation and deterministic construction."""

from .base import contact_array, contact_ring, generate, guard_ring, registry, well_stack
from .cell import STRONG_METAL, WEAK_POLY, CellLayout, strap
from .params import DeviceParams, evaluate_params, guard_styles

# importing the generator modules populates the registry
from . import capacitor, mos, resistor  # noqa: E402,F401  isort: skip


def defaults(device: str, tech) -> DeviceParams:
    """Evaluated default parameters for a registered device."""
    from ..errors import UnknownDevice

    try:
        gen = registry[device]
    except KeyError:
        raise UnknownDevice(f"no generator for device {device!r}") from None
    return gen.defaults(tech)


__all__ = [
    "CellLayout", "DeviceParams", "STRONG_METAL", "WEAK_POLY",
    "contact_array", "contact_ring", "defaults", "evaluate_params", "generate",
    "guard_ring", "guard_styles", "registry", "strap", "well_stack",
]

"""Generated cell container."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..geometry import Rect, Shape, bbox
from .params import DeviceParams

WEAK_POLY = "weak_poly"
STRONG_METAL = "strong_metal"


@dataclass
class CellLayout:
    """A generated cell: shapes plus pins, handles and abutment metadata.

    Pin entries reference the same Shape objects stored in `shapes`.
    params is None for raw helper cells (wiring straps).
    """

    name: str
    params: DeviceParams | None
    shapes: list[Shape]
    pins: dict[str, list[Shape]]
    connection_kind: dict[str, str] = field(default_factory=dict)
    handles: list = field(default_factory=list)
    abut_specs: list = field(default_factory=list)

    def bounds(self) -> Rect:
        out = bbox(self.shapes[0])
        for s in self.shapes[1:]:
            out = out.union(bbox(s))
        return out

    def shape_index(self, shape: Shape) -> int:
        for i, s in enumerate(self.shapes):
            if s is shape:
                return i
        raise ValueError("shape not in cell")


def strap(layer: str, rect: Rect, net: str | None = None, name: str = "strap") -> CellLayout:
    """Single-rectangle wiring cell for design-level connections."""
    shape = Shape(layer, rect, net)
    return CellLayout(name=name, params=None, shapes=[shape], pins={})

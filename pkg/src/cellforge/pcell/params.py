"""Device parameters and their evaluation against technology limits."""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..errors import ContradictoryParams, ParamOutOfRange, UnknownDevice
from ..geometry import snap
from ..techdb import TechnologyData

# integer count parameters reject out-of-range values instead of clamping;
# continuous lengths clamp into their limit window
_COUNT_PARAMS = ("fingers", "multiplier", "bends")
_COUNT_DEFAULTS = {"fingers": 1, "multiplier": 1, "bends": 0}


@dataclass(frozen=True, slots=True)
class DeviceParams:
    device: str
    l: int
    w: int | None = None
    wtot: int | None = None
    fingers: int = 1
    multiplier: int = 1
    guard_ring: str = "none"
    bends: int = 0


def guard_styles(tech: TechnologyData) -> tuple[str, ...]:
    """Guard-ring styles the deck defines (one gr_gap_* constant per style)."""
    styles = [name[len("gr_gap_"):] for name in tech.constants if name.startswith("gr_gap_")]
    return tuple(sorted(s.upper() if s[0].isdigit() else s for s in styles))


def evaluate_params(raw: DeviceParams, tech: TechnologyData,
                    changed: str | None = None) -> DeviceParams:
    """Clamp lengths into device limits, snap to grid, recompute derived values.

    `changed` marks the driving parameter after an edit: "wtot" re-derives the
    finger width, anything else treats w as driving.  Count parameters
    (fingers, multiplier, bends) raise ParamOutOfRange instead of clamping.
    """
    try:
        limits = tech.device_limits[raw.device]
    except KeyError:
        raise UnknownDevice(f"device {raw.device!r} not in technology {tech.name!r}") from None

    for name in _COUNT_PARAMS:
        value = getattr(raw, name)
        if name in limits:
            lo, hi = limits[name]
            if not lo <= value <= hi:
                raise ParamOutOfRange(f"{raw.device} {name}={value} outside [{lo}, {hi}]")
        elif value != _COUNT_DEFAULTS[name]:
            raise ParamOutOfRange(f"{raw.device} does not take {name}")

    if raw.guard_ring != "none":
        known = guard_styles(tech)
        if raw.guard_ring not in known:
            raise ParamOutOfRange(
                f"guard_ring {raw.guard_ring!r} not one of none, {', '.join(known)}")

    def fit(name: str, value: int) -> int:
        if name in limits:
            lo, hi = limits[name]
            value = min(max(value, lo), hi)
        return snap(value, tech.grid)

    l = fit("l", raw.l)
    f = raw.fingers

    if raw.w is None and raw.wtot is None:
        raise ContradictoryParams(f"{raw.device}: neither w nor wtot given")
    wtot_drives = changed == "wtot" or raw.w is None
    if (raw.w is not None and raw.wtot is not None and changed is None
            and raw.wtot != raw.w * f):
        raise ContradictoryParams(
            f"wtot={raw.wtot} inconsistent with fingers*w={f * raw.w}")

    if wtot_drives:
        wtot = fit("wtot", raw.wtot)
        w = fit("w", snap(round(wtot / f), tech.grid))
        wtot = f * w
    else:
        w = fit("w", raw.w)
        wtot = f * w
        if "wtot" in limits:
            lo, hi = limits["wtot"]
            if not lo <= wtot <= hi:
                wtot = fit("wtot", wtot)
                w = fit("w", snap(round(wtot / f), tech.grid))
                wtot = f * w

    return replace(raw, l=l, w=w, wtot=wtot)

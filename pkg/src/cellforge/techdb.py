"""Technology database: layers, design rules, process constants, connectivity.

Source format is a line-oriented text deck (`techfmt 1` header), chosen so
foundry-style data stays human-auditable:

    techfmt 1
    name <identifier>
    grid <dbu>

    [layers]
    <name> <gds_layer> <gds_datatype> <drawing|pin>

    [rules]
    min_width <layer> <dbu>
    min_spacing <layer> [<layer>] <dbu>        # one layer = same-layer rule
    min_enclosure <outer> <inner> <dbu>
    min_extension <layer> <past-layer> <dbu>

    [constants]
    <name> <dbu>

    [connect]
    <layer> <layer>                            # conduct when overlapping

    [limits]
    <device> <param> <min> <max>

Comments start with '#'.  All lengths are integer dbu and every rule value
must be a multiple of the grid.  TechnologyData is immutable after load and
safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import (GridViolation, MissingConstant, MissingRule, ParseError,
                     UnknownLayerInRule)

RULE_KINDS = ("min_width", "min_spacing", "min_enclosure", "min_extension")


@dataclass(frozen=True, slots=True)
class Layer:
    name: str
    gds_layer: int
    gds_datatype: int
    purpose: str = "drawing"


@dataclass(frozen=True, slots=True)
class DesignRule:
    kind: str
    layers: tuple[str, ...]
    value: int

    def key(self) -> tuple:
        layers = self.layers
        if self.kind == "min_spacing":
            layers = tuple(sorted(layers))
        return (self.kind, layers)

    def __str__(self):
        return f"{self.kind} {' '.join(self.layers)} {self.value}"


@dataclass(frozen=True)
class TechnologyData:
    name: str
    grid: int
    layers: dict[str, Layer]
    rules: dict[tuple, DesignRule]
    constants: dict[str, int]
    connectivity: frozenset[frozenset[str]]
    device_limits: dict[str, dict[str, tuple[int, int]]]

    @property
    def conductors(self) -> frozenset[str]:
        out = set()
        for pair in self.connectivity:
            out |= pair
        return frozenset(out)

    def layer(self, name: str) -> Layer:
        try:
            return self.layers[name]
        except KeyError:
            raise UnknownLayerInRule(f"unknown layer {name!r}") from None

    def connected_layers(self, a: str, b: str) -> bool:
        return a == b and a in self.conductors or frozenset((a, b)) in self.connectivity


def rule(tech: TechnologyData, kind: str, layers) -> int:
    """Exact stored rule value; MissingRule when the deck does not define it."""
    if isinstance(layers, str):
        layers = (layers,)
    layers = tuple(layers)
    if kind == "min_spacing":
        if len(layers) == 1:
            layers = (layers[0], layers[0])
        layers = tuple(sorted(layers))
    try:
        return tech.rules[(kind, layers)].value
    except KeyError:
        raise MissingRule(f"{kind} {' '.join(layers)} not in technology {tech.name!r}") from None


def constant(tech: TechnologyData, name: str) -> int:
    try:
        return tech.constants[name]
    except KeyError:
        raise MissingConstant(f"constant {name!r} not in technology {tech.name!r}") from None


def load_technology(source: str) -> TechnologyData:
    """Parse and fully validate a technology deck."""
    name = None
    grid = None
    layers: dict[str, Layer] = {}
    rules: dict[tuple, DesignRule] = {}
    constants: dict[str, int] = {}
    connect: set[frozenset[str]] = set()
    limits: dict[str, dict[str, tuple[int, int]]] = {}

    section = None
    saw_magic = False
    for lineno, raw in enumerate(source.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if not saw_magic:
            if line.split() != ["techfmt", "1"]:
                raise ParseError("expected 'techfmt 1' header", lineno)
            saw_magic = True
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1]
            if section not in ("layers", "rules", "constants", "connect", "limits"):
                raise ParseError(f"unknown section [{section}]", lineno)
            continue
        fields = line.split()
        try:
            if section is None:
                if fields[0] == "name" and len(fields) == 2:
                    name = fields[1]
                elif fields[0] == "grid" and len(fields) == 2:
                    grid = int(fields[1])
                else:
                    raise ParseError(f"unexpected line {line!r}", lineno)
            elif section == "layers":
                if len(fields) != 4:
                    raise ParseError("layer needs: name gds_layer gds_datatype purpose", lineno)
                lay = Layer(fields[0], int(fields[1]), int(fields[2]), fields[3])
                if lay.purpose not in ("drawing", "pin"):
                    raise ParseError(f"bad purpose {lay.purpose!r}", lineno)
                if lay.name in layers:
                    raise ParseError(f"duplicate layer {lay.name!r}", lineno)
                layers[lay.name] = lay
            elif section == "rules":
                kind = fields[0]
                if kind not in RULE_KINDS:
                    raise ParseError(f"unknown rule kind {kind!r}", lineno)
                value = int(fields[-1])
                rule_layers = tuple(fields[1:-1])
                expected = {"min_width": (1,), "min_spacing": (1, 2),
                            "min_enclosure": (2,), "min_extension": (2,)}[kind]
                if len(rule_layers) not in expected:
                    raise ParseError(f"{kind} takes {expected} layer(s)", lineno)
                if kind == "min_spacing" and len(rule_layers) == 1:
                    rule_layers = (rule_layers[0], rule_layers[0])
                r = DesignRule(kind, rule_layers, value)
                if value <= 0:
                    raise ParseError(f"rule value must be positive: {r}", lineno)
                rules[r.key()] = r
            elif section == "constants":
                if len(fields) != 2:
                    raise ParseError("constant needs: name value", lineno)
                constants[fields[0]] = int(fields[1])
            elif section == "connect":
                if len(fields) != 2:
                    raise ParseError("connect needs: layer layer", lineno)
                connect.add(frozenset(fields))
            elif section == "limits":
                if len(fields) != 4:
                    raise ParseError("limit needs: device param min max", lineno)
                dev, param = fields[0], fields[1]
                limits.setdefault(dev, {})[param] = (int(fields[2]), int(fields[3]))
        except ParseError:
            raise
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None

    if not saw_magic:
        raise ParseError("empty technology source", 0)
    if name is None or grid is None or grid <= 0:
        raise ParseError("missing name or grid header", 0)

    seen_gds = {}
    for lay in layers.values():
        key = (lay.gds_layer, lay.gds_datatype)
        if key in seen_gds:
            raise ParseError(
                f"layers {seen_gds[key]!r} and {lay.name!r} share gds {key}", 0)
        seen_gds[key] = lay.name

    for r in rules.values():
        for lname in r.layers:
            if lname not in layers:
                raise UnknownLayerInRule(f"rule {r} references undeclared layer {lname!r}")
        if r.value % grid != 0:
            raise GridViolation(f"rule {r} not on grid {grid}")
    for pair in connect:
        for lname in pair:
            if lname not in layers:
                raise UnknownLayerInRule(f"connect references undeclared layer {lname!r}")

    return TechnologyData(
        name=name, grid=grid, layers=dict(layers), rules=dict(rules),
        constants=dict(constants), connectivity=frozenset(connect),
        device_limits={d: dict(p) for d, p in limits.items()},
    )


def load_technology_file(path) -> TechnologyData:
    return load_technology(Path(path).read_text())


def serialize(tech: TechnologyData) -> str:
    """Canonical text form; load(serialize(load(x))) is a fixed point."""
    out = ["techfmt 1", f"name {tech.name}", f"grid {tech.grid}", ""]
    out.append("[layers]")
    for lay in sorted(tech.layers.values(), key=lambda l: (l.gds_layer, l.gds_datatype)):
        out.append(f"{lay.name} {lay.gds_layer} {lay.gds_datatype} {lay.purpose}")
    out.append("")
    out.append("[rules]")
    for r in sorted(tech.rules.values(), key=lambda r: (r.kind, r.layers)):
        out.append(str(r))
    out.append("")
    out.append("[constants]")
    for cname in sorted(tech.constants):
        out.append(f"{cname} {tech.constants[cname]}")
    out.append("")
    out.append("[connect]")
    for pair in sorted(tuple(sorted(p)) for p in tech.connectivity):
        out.append(" ".join(pair))
    out.append("")
    out.append("[limits]")
    for dev in sorted(tech.device_limits):
        for param in sorted(tech.device_limits[dev]):
            lo, hi = tech.device_limits[dev][param]
            out.append(f"{dev} {param} {lo} {hi}")
    out.append("")
    return "\n".join(out)


def demo_technology_path() -> Path:
    return Path(__file__).parent / "data" / "generichv.tech"


def demo_technology() -> TechnologyData:
    """The genericHV deck shipped with the package."""
    return load_technology(demo_technology_path().read_text())

import pytest

from cellforge import pcell, techdb
from cellforge.geometry import Point, Transform
from cellforge.interact import PlacedInstance


@pytest.fixture(scope="session")
def tech():
    return techdb.demo_technology()


@pytest.fixture(scope="session")
def mos_cell(tech):
    return pcell.generate(pcell.defaults("pmos20t", tech), tech)


def place(cell, x=0, y=0, instance_id="i1", nets=None):
    return PlacedInstance(cell, Transform(translation=Point(x, y)), instance_id,
                          dict(nets or {}))

import math

import numpy as np
import pytest

from hmlab import Arc, Disk, Domain, Segment, WalkConfig, unit_disk


@pytest.fixture
def disk():
    return unit_disk()


@pytest.fixture
def holed():
    return Domain(Disk((0.0, 0.0), 1.0), (Disk((0.4, 0.0), 0.15),),
                  label="holed")


@pytest.fixture
def slit():
    return Domain(Disk((0.0, 0.0), 1.0), (Segment((0.2, 0.0), (0.7, 0.0)),),
                  label="slit")


@pytest.fixture
def fast_cfg():
    # small batch for structural checks, not for tight statistics
    return WalkConfig(n_walks=2000, seed=11)


def teeth_domain(n_spokes: int = 8, r_in: float = 0.55, r_out: float = 0.7):
    segs = tuple(
        Segment((r_in * math.cos(a), r_in * math.sin(a)),
                (r_out * math.cos(a), r_out * math.sin(a)))
        for a in np.linspace(0.0, 2 * math.pi, n_spokes, endpoint=False))
    return Domain(Disk((0.0, 0.0), 1.0), segs, label=f"spokes-{n_spokes}")

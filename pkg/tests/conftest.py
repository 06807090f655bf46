import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sezsim.core import (
    ControlSchedule,
    ControlVector,
    DisturbanceSchedule,
    DisturbanceVector,
    Enterprise,
    SystemMatrices,
    TimeGrid,
    Zone,
)

REPO_ROOT = Path(__file__).resolve().parent.parent
REFERENCE_SCENARIO = REPO_ROOT / "fixtures" / "reference" / "scenario.ini"


def make_enterprise(ent_id="mill", names=("sales", "materials"),
                    kinds=("revenue", "cost"), a=None, b=None, e=None, h=None,
                    x0=None, **kwargs) -> Enterprise:
    n = len(names)
    a = np.zeros((n, n)) if a is None else np.asarray(a, dtype=float)
    b = np.zeros((n, 9)) if b is None else np.asarray(b, dtype=float)
    e = np.zeros((n, 10)) if e is None else np.asarray(e, dtype=float)
    if h is None:
        h = np.zeros((1, n))
        for i, kind in enumerate(kinds):
            h[0, i] = 1.0 if kind == "revenue" else (-1.0 if kind == "cost" else 0.0)
    mats = SystemMatrices(a=a, b=b, e=e, h=h)
    x0 = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float)
    return Enterprise(id=ent_id, parameter_names=tuple(names),
                      parameter_kinds=tuple(kinds), x0=x0, matrices=mats, **kwargs)


def make_zone(*enterprises, zone_id="zone") -> Zone:
    return Zone(id=zone_id, enterprises=tuple(enterprises))


def quiet_disturbances(**kwargs) -> DisturbanceSchedule:
    """All-zero disturbance channels (dollar pinned at 70 to stay valid)."""
    default = DisturbanceVector(resource_prices=0.0, wage_growth=0.0,
                                owner_investment=0.0, innovation=0.0,
                                material_flow=0.0, logistics=0.0, labor=0.0,
                                technology_prices=0.0, inflation=0.0,
                                dollar_rate=70.0)
    return DisturbanceSchedule(default=default, **kwargs)


@pytest.fixture(scope="session")
def reference_scenario_path() -> Path:
    assert REFERENCE_SCENARIO.exists(), (
        "reference fixture missing; run scripts/calibrate_fixture.py")
    return REFERENCE_SCENARIO

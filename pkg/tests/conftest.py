import os
import pytest
import numpy as np
from dotenv import load_dotenv

from src.modules.config import GovernorSpec
from src.modules.mas import build_mas, build_lifted_mas, PreviewAMatrix
from src.modules.polytope import Polytope
from src.modules.scenario import ReferenceTrajectory, ScenarioDefinition, one_link_model
from src.modules.sysmod import StateSpaceModel, lift_input

@pytest.fixture(scope="session", autouse=True)
def load_env():
    """Load environment variables for testing."""
    load_dotenv()
    os.environ["ENV_MODE"] = "test"

@pytest.fixture(autouse=True)
def test_dirs(tmp_path):
    """Point the set cache, results and log file at a temporary directory."""
    names = ('PRG_CACHE_DIR', 'PRG_OUTPUT_DIR', 'LOG_FILE')
    old = {name: os.environ.get(name) for name in names}
    os.environ['PRG_CACHE_DIR'] = str(tmp_path / "cache")
    os.environ['PRG_OUTPUT_DIR'] = str(tmp_path / "results")
    os.environ['LOG_FILE'] = str(tmp_path / "logs" / "app.log")
    yield tmp_path
    for name, value in old.items():
        if value is None:
            os.environ.pop(name, None)
        else:
            os.environ[name] = value

@pytest.fixture(scope="session")
def first_order():
    """Stable scalar model x+ = 0.5x + 0.5u, y = x (unit DC gain)."""
    return StateSpaceModel([[0.5]], [[0.5]], [[1.0]], [[0.0]], sample_time=0.1)

@pytest.fixture(scope="session")
def first_order_y():
    return Polytope.symmetric_box([1.0])

@pytest.fixture(scope="session")
def one_link():
    return one_link_model()

@pytest.fixture(scope="session")
def one_link_y():
    return Polytope.symmetric_box([45.0])

@pytest.fixture(scope="session")
def one_link_srg_set(one_link, one_link_y):
    return build_mas(one_link, one_link_y)

@pytest.fixture(scope="session")
def one_link_prg_set(one_link, one_link_y):
    """Lifted set with a short horizon (N=5)."""
    return build_lifted_mas(lift_input(one_link, 5), PreviewAMatrix.delay(5), one_link_y)

@pytest.fixture(scope="session")
def one_link_lifted_25(one_link, one_link_y):
    """Lifted set with the one-link scenario horizon (N=25)."""
    return build_lifted_mas(lift_input(one_link, 25), PreviewAMatrix.delay(25), one_link_y)

@pytest.fixture
def small_scenario(first_order, first_order_y):
    """Short scenario on the scalar test model."""
    reference = ReferenceTrajectory([(0.0, [0.0]), (0.2, [2.0]), (0.6, [-0.5])], 0.1)
    return ScenarioDefinition(
        name='small', description='scalar test model', model=first_order,
        constraints=first_order_y, reference=reference, steps=10,
        governors=[GovernorSpec(variant='srg'), GovernorSpec(variant='prg', N=2)], default_N=2)

@pytest.fixture
def sample_command():
    return np.array([0.3, 0.4, 0.5])

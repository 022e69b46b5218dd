import pytest
import json
from argparse import Namespace
from unittest.mock import patch, MagicMock

from src.modules.config import GovernorSpec
from src.modules.database import SetCache
from src.modules.errors import ConfigurationError
from src.modules.run import ScenarioRunner, handle_list_scenarios, handle_run

def make_args(**overrides):
    fields = dict(config=None, scenario=None, governor=None, n=None, horizons=None, lambdas=None,
                  epsilon=None, seed=None, out=None, timing=False)
    fields.update(overrides)
    return Namespace(**fields)

def test_runner_uses_scenario_governors(small_scenario, tmp_path):
    with patch('src.modules.run.get_scenario', return_value=small_scenario):
        with SetCache(str(tmp_path / "cache")) as cache:
            results = ScenarioRunner(cache).run('small')
            assert cache.misses == 2
    assert [result.governor for result in results] == ['srg', 'prg(N=2)']
    assert all(result.violations == 0 for result in results)

def test_runner_with_explicit_specs(small_scenario, tmp_path):
    with patch('src.modules.run.get_scenario', return_value=small_scenario):
        with SetCache(str(tmp_path / "cache")) as cache:
            results = ScenarioRunner(cache).run('small', [GovernorSpec(variant='multi_prg', horizons=[0, 2])], seed=5)
    assert len(results) == 1
    assert results[0].seed == 5
    assert results[0].extras['kappas'].shape == (10, 2)

def test_runner_error_handling(small_scenario, tmp_path):
    with patch('src.modules.run.get_scenario', return_value=small_scenario):
        with SetCache(str(tmp_path / "cache")) as cache:
            with pytest.raises(ConfigurationError):
                ScenarioRunner(cache).run('small', [GovernorSpec(variant='robust_srg')])

def test_handle_run_writes_outputs(small_scenario, tmp_path):
    out = tmp_path / "run"
    with patch('src.modules.run.get_scenario', return_value=small_scenario):
        results = handle_run(make_args(scenario='small', out=str(out)))
    assert len(results) == 2
    summary = json.loads((out / "summary.json").read_text())
    assert [entry['governor'] for entry in summary['results']] == ['srg', 'prg(N=2)']
    assert summary['timing'] is False
    assert (out / "srg.csv").exists()
    assert (out / "prg_n_2.csv").exists()
    assert (out / "plots" / "plot.py").exists()

def test_handle_run_default_output_dir(small_scenario, tmp_path):
    with patch('src.modules.run.get_scenario', return_value=small_scenario):
        handle_run(make_args(scenario='small', governor='srg'))
    assert (tmp_path / "results" / "small" / "srg.csv").exists()

def test_handle_run_unknown_scenario():
    with pytest.raises(ConfigurationError):
        handle_run(make_args(scenario='three_link'))

def test_handle_list_scenarios():
    with patch('src.modules.run.logger') as mock_logger:
        handle_list_scenarios(Namespace())
        lines = [call[0][0] for call in mock_logger.info.call_args_list]
    assert len(lines) == 6
    assert lines[0].startswith('one_link:')

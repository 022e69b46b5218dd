import pytest
import json
from argparse import Namespace

import numpy as np

from src.modules.config import (GovernorSpec, RunConfig, load_model_document, load_run_config,
                                load_scenario_document, model_to_document, run_config_from_args,
                                spec_from_args)
from src.modules.errors import ConfigurationError
from src.modules.polytope import Polytope
from src.modules.sysmod import DisturbedModel, StateSpaceModel

def make_args(**overrides):
    """Namespace with every flag the subcommands define, unset."""
    fields = dict(config=None, scenario=None, seed=None, repeats=None, out=None, timing=False,
                  governor=None, governors=None, n=None, horizons=None, lambdas=None, epsilon=None)
    fields.update(overrides)
    return Namespace(**fields)

def test_governor_spec_defaults():
    spec = GovernorSpec(variant='prg', N=25)
    assert spec.epsilon == 0.01
    assert spec.exact_lp is False
    assert spec.label == 'prg(N=25)'

def test_governor_spec_rejects_unknown_fields():
    with pytest.raises(ValueError):
        GovernorSpec(variant='prg', N=3, horizon=4)

def test_governor_spec_validation():
    with pytest.raises(ValueError):
        GovernorSpec(variant='prg', N=-1)
    with pytest.raises(ValueError):
        GovernorSpec(variant='srg', epsilon=1.0)
    with pytest.raises(ValueError):
        GovernorSpec(variant='multi_prg', horizons=[0, 5, 2])
    with pytest.raises(ValueError):
        GovernorSpec(variant='lambda_prg', lambdas=[0.5, 1.5])
    with pytest.raises(ValueError):
        GovernorSpec(variant='unknown')

def test_governor_spec_missing():
    assert GovernorSpec(variant='prg').missing() == ['N']
    assert GovernorSpec(variant='multi_prg').missing() == ['horizons']
    assert GovernorSpec(variant='lambda_prg').missing() == ['lambdas']
    assert GovernorSpec(variant='srg').missing() == []
    assert GovernorSpec(variant='lambda_prg', mixing_matrix=[[1.0]]).missing() == []

def test_governor_spec_labels():
    assert GovernorSpec(variant='srg').label == 'srg'
    assert GovernorSpec(variant='multi_prg', horizons=[0, 100]).label == 'multi_prg(N=0,100)'
    assert GovernorSpec(variant='multi_prg', horizons=list(range(26))).label == 'multi_prg(N=0..25,q=26)'
    assert GovernorSpec(variant='lambda_prg', lambdas=[0.9, 0.1]).label == 'lambda_prg(λ=0.9,0.1)'

def test_with_defaults_keeps_explicit_values():
    spec = GovernorSpec(variant='prg', N=3).with_defaults(N=25, horizons=[25])
    assert spec.N == 3
    assert spec.horizons == [25]

def test_load_run_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({'scenario': 'one_link', 'governors': [{'variant': 'prg', 'N': 10}], 'seed': 7}))
    config = load_run_config(path)
    assert config.scenario == 'one_link'
    assert config.governors[0].N == 10
    assert config.repeats == 10

def test_load_run_config_errors(tmp_path):
    with pytest.raises(ConfigurationError):
        load_run_config(tmp_path / "missing.json")
    bad_json = tmp_path / "bad.json"
    bad_json.write_text("{not json")
    with pytest.raises(ConfigurationError):
        load_run_config(bad_json)
    bad_field = tmp_path / "field.json"
    bad_field.write_text(json.dumps({'scenario': 'one_link', 'colour': 'red'}))
    with pytest.raises(ConfigurationError):
        load_run_config(bad_field)

def test_run_config_from_flags():
    config = run_config_from_args(make_args(scenario='one_link', governor='prg', n=12, seed=3, timing=True))
    assert config.scenario == 'one_link'
    assert config.seed == 3
    assert config.timing is True
    assert len(config.governors) == 1
    assert config.governors[0].variant == 'prg'
    assert config.governors[0].N == 12

def test_run_config_flag_lists():
    config = run_config_from_args(make_args(governors='srg, prg,multi_prg', horizons='0,5,10', lambdas=None))
    assert [spec.variant for spec in config.governors] == ['srg', 'prg', 'multi_prg']
    assert config.governors[2].horizons == [0, 5, 10]

def test_run_config_unknown_variant():
    with pytest.raises(ConfigurationError) as exc_info:
        run_config_from_args(make_args(governors='srg,magic'))
    assert "magic" in str(exc_info.value)
    assert "multi_prg" in str(exc_info.value)

def test_flags_override_config_document(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({'scenario': 'one_link', 'output_dir': 'a',
                                'governors': [{'variant': 'prg', 'N': 10, 'epsilon': 0.05}]}))
    config = run_config_from_args(make_args(config=str(path), n=4, out='b'))
    assert config.output_dir == 'b'
    assert config.governors[0].N == 4
    assert config.governors[0].epsilon == 0.05

def test_spec_from_args_bad_value():
    with pytest.raises(ConfigurationError):
        spec_from_args('prg', make_args(n=-3))
    with pytest.raises(ConfigurationError):
        spec_from_args('prg', make_args(horizons='1,x'))

def test_model_document_roundtrip(tmp_path, first_order):
    """A disturbed model survives export and reload."""
    disturbed = DisturbedModel(first_order, [[1.0]], [[0.0]], Polytope.box([-0.1], [0.1]))
    path = tmp_path / "model.json"
    path.write_text(json.dumps(model_to_document(disturbed)))
    loaded = load_model_document(path)
    assert isinstance(loaded, DisturbedModel)
    assert np.array_equal(loaded.base.A, first_order.A)
    assert loaded.base.sample_time == first_order.sample_time
    assert np.allclose(loaded.disturbance_set.vertices.ravel(), [-0.1, 0.1])

def test_model_document_without_disturbance(tmp_path):
    path = tmp_path / "plain.json"
    path.write_text(json.dumps({'A': [[0.5]], 'B': [[1.0]], 'C': [[1.0]], 'D': [[0.0]], 'sample_time': 0.1}))
    model = load_model_document(path)
    assert isinstance(model, StateSpaceModel)
    assert model.is_discrete

def test_model_document_invalid(tmp_path):
    path = tmp_path / "bad_model.json"
    path.write_text(json.dumps({'A': [[0.5]], 'B': [[1.0]]}))
    with pytest.raises(ConfigurationError):
        load_model_document(path)

def test_scenario_document_validation(tmp_path):
    document = {
        'model': {'A': [[0.5]], 'B': [[0.5]], 'C': [[1.0]], 'D': [[0.0]], 'sample_time': 0.1},
        'y_min': [-1.0], 'y_max': [1.0], 'reference': [[0.0, [1.0]]], 'steps': 5,
    }
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(document))
    loaded = load_scenario_document(path)
    assert loaded.seed == 2024
    assert loaded.governors == []
    assert loaded.reference[0] == (0.0, [1.0])

    path.write_text(json.dumps(dict(document, y_min=[2.0])))
    with pytest.raises(ConfigurationError):
        load_scenario_document(path)
    path.write_text(json.dumps(dict(document, steps=0)))
    with pytest.raises(ConfigurationError):
        load_scenario_document(path)

def test_run_config_defaults():
    config = RunConfig()
    assert config.governors == []
    assert config.timing is False
    assert config.t_max == 500

import pytest
import json
from argparse import Namespace
from unittest.mock import patch, MagicMock

from src.modules.bench import check_ordering, handle_bench
from src.modules.errors import AssertionFailedError

def make_args(**overrides):
    fields = dict(config=None, scenario=None, governors=None, n=None, horizons=None, lambdas=None,
                  epsilon=None, repeats=None, out=None, assert_ordering=False)
    fields.update(overrides)
    return Namespace(**fields)

def timing_row(governor, mean_ns):
    return {'governor': governor, 'variant': governor, 'repeats': 1, 'mean_ns': mean_ns, 'max_ns': 2 * mean_ns}

def test_check_ordering():
    assert check_ordering([timing_row('srg', 1.0), timing_row('prg', 2.0), timing_row('multi_prg', 3.0)])
    assert not check_ordering([timing_row('srg', 2.0), timing_row('prg', 1.0)])
    assert not check_ordering([timing_row('srg', 1.0), timing_row('prg', 1.0)])
    assert check_ordering([timing_row('srg', 1.0)])

def test_handle_bench_writes_tables(small_scenario, tmp_path):
    out = tmp_path / "bench"
    with patch('src.modules.bench.get_scenario', return_value=small_scenario):
        table = handle_bench(make_args(scenario='small', repeats=2, out=str(out)))
    assert [row['governor'] for row in table] == ['srg', 'prg(N=2)']
    assert (out / "small_timing.csv").exists()
    document = json.loads((out / "small_timing.json").read_text())
    assert len(document['rows']) == 2
    assert document['rows'][0]['repeats'] == 2

def test_handle_bench_governor_list(small_scenario, tmp_path):
    with patch('src.modules.bench.get_scenario', return_value=small_scenario):
        table = handle_bench(make_args(scenario='small', governors='prg,srg', n=1, repeats=1, out=str(tmp_path)))
    assert [row['governor'] for row in table] == ['prg(N=1)', 'srg']

def test_handle_bench_assert_ordering(small_scenario, tmp_path):
    """A table whose latencies do not increase fails the ordering check."""
    table = [timing_row('srg', 5000.0), timing_row('prg(N=2)', 1000.0)]
    with patch('src.modules.bench.get_scenario', return_value=small_scenario):
        with patch('src.modules.bench.run_timing_comparison', return_value=table):
            with pytest.raises(AssertionFailedError) as exc_info:
                handle_bench(make_args(scenario='small', out=str(tmp_path), assert_ordering=True))
            assert "srg < prg(N=2)" in str(exc_info.value)
            # Without the flag the same table is accepted
            assert handle_bench(make_args(scenario='small', out=str(tmp_path))) == table

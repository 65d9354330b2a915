import numpy as np
import pytest

from src.diagnostics import IterationRecord
from src.utils import ListSink, NumericalFailure, StoppingRule, as_vector, make_directory, rng_from_seed

def test_make_directory(tmp_path):

    path = tmp_path / "out"
    make_directory(str(path))
    make_directory(str(path))

    (path / "file.txt").write_text("x")

    with pytest.raises(FileExistsError):
        make_directory(str(path))

    make_directory(str(path), force=True)

@pytest.mark.parametrize("kwargs", [{"max_iters": 0}, {"eps_stat": 0.}, {"eps_feas": -1.}, {"record_every": 0}])
def test_stopping_rule_validation(kwargs):

    with pytest.raises(ValueError):
        StoppingRule(**kwargs)

def test_stopping_rule_stride():

    stop = StoppingRule(record_every=4)

    assert [k for k in range(1, 10) if stop.should_record(k)] == [4, 8]
    assert stop.should_record(9, last=True)

def test_as_vector():

    np.testing.assert_array_equal(as_vector([1, 2], 2), [1., 2.])

    with pytest.raises(ValueError):
        as_vector([[1., 2.]], 2)

def test_list_sink_order():

    sink = ListSink()
    sink(IterationRecord(2, 0., 0., 0., 0., 0.))

    with pytest.raises(ValueError):
        sink(IterationRecord(1, 0., 0., 0., 0., 0.))

    assert len(sink) == 1

def test_numerical_failure_message():

    e = NumericalFailure("lambda", 7)

    assert isinstance(e, ArithmeticError)
    assert "lambda" in str(e) and "7" in str(e)

def test_seeded_generator():

    np.testing.assert_array_equal(rng_from_seed(4).standard_normal(3), np.random.Generator(np.random.PCG64(4)).standard_normal(3))

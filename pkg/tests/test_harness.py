import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from primeq.harness import fit_decay_rate


def test_exact_exponential():
    ts = np.linspace(0.0, 4.0, 200)
    ys = 3.0 * np.exp(-2.0 * ts)
    assert fit_decay_rate(ts, ys, (0.5, 3.5)) == pytest.approx(2.0, abs=1e-10)


def test_perturbed_exponential():
    ts = np.linspace(0.0, 6.0, 400)
    ys = np.exp(-ts) * (1 + 0.01 * np.sin(ts))
    assert fit_decay_rate(ts, ys, (1.0, 5.0)) == pytest.approx(1.0, abs=0.02)


def test_constant_series():
    ts = np.linspace(0.0, 1.0, 50)
    assert fit_decay_rate(ts, np.full(50, 7.0), (0.0, 1.0)) == pytest.approx(
        0.0, abs=1e-12)


def test_too_few_points():
    with pytest.raises(ValueError, match="at least 5"):
        fit_decay_rate([0, 1, 2, 3], [1, 1, 1, 1], (0, 3))


def test_nonpositive_rejected():
    ts = np.linspace(0.0, 1.0, 10)
    ys = np.linspace(1.0, -0.1, 10)
    with pytest.raises(ValueError, match="positive"):
        fit_decay_rate(ts, ys, (0.0, 1.0))


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 10.0), st.floats(0.1, 10.0))
def test_recovers_rate_property(rate, scale):
    ts = np.linspace(0.0, 2.0, 100)
    ys = scale * np.exp(-rate * ts)
    assert fit_decay_rate(ts, ys, (0.0, 2.0)) == pytest.approx(rate, rel=1e-8)

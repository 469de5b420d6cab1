import numpy as np
import pytest

from loopgamma import MeasureConfig, SmoothLoop, make_grid


@pytest.fixture(scope="session")
def grid():
    return make_grid(64)


@pytest.fixture(scope="session")
def cfg():
    return MeasureConfig(t=0.2)


def _trig_parts(grid, const, cos, sin, ramp):
    u = grid.nodes
    vals = np.full(grid.m + 1, float(const))
    d1 = np.zeros(grid.m + 1)
    d2 = np.zeros(grid.m + 1)
    for j, c in enumerate(cos, start=1):
        vals += c * np.cos(j * u)
        d1 += -c * j * np.sin(j * u)
        d2 += -c * j * j * np.cos(j * u)
    for j, c in enumerate(sin, start=1):
        vals += c * np.sin(j * u)
        d1 += c * j * np.cos(j * u)
        d2 += -c * j * j * np.sin(j * u)
    if ramp:
        vals += ramp * u / (2.0 * np.pi)
        d1 += ramp / (2.0 * np.pi)
    return vals, d1, d2


@pytest.fixture(scope="session")
def trig():
    """Loop factory with analytically exact derivative samples."""

    def make(grid, const=0.0, cos=(), sin=(), ramp=0.0):
        vals, d1, d2 = _trig_parts(grid, const, cos, sin, ramp)
        return SmoothLoop(grid=grid, values=vals, d1=d1, d2=d2)

    return make


@pytest.fixture(scope="session")
def cm_loop(trig):
    """Random Cameron-Martin loop: sine series plus ramp, vanishing at 0."""

    def make(grid, rng, n_modes=3, amp=1.0, ramp_amp=1.0):
        sin = amp * rng.uniform(-1.0, 1.0, n_modes)
        ramp = ramp_amp * rng.uniform(-1.0, 1.0)
        return trig(grid, sin=sin, ramp=ramp)

    return make

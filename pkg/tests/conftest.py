import numpy as np
import pytest

from optivote.channel import ChannelParams


class FixedUniform:
    """Stand-in generator returning a preset uniform value."""

    def __init__(self, u: float):
        self.u = u

    def random(self, size=None):
        if size is None:
            return self.u
        return np.full(size, self.u)


@pytest.fixture
def fixed_uniform():
    return FixedUniform


# Channel at unit geometric efficiency: c_fspl chosen so E[h_l] = 1, making
# received energies O(1) without changing the distributions' shapes.
UNIT_CFSPL = (2000e3**3 - 500e3**3) / (3.0 * (2000e3 - 500e3))


@pytest.fixture
def unit_params():
    return ChannelParams(d_min=500e3, d_max=2000e3, a0=0.9, xi_p=1.5,
                         sigma_n2=0.1, c_fspl=UNIT_CFSPL)

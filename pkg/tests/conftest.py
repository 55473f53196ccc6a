import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cvpol import SqueezedModeParams, apply_transform, make_independent_squeezed_pair, pm45  # noqa: E402
from cvpol.gaussian import from_covariance_matrix  # noqa: E402
from oracles import random_covariance  # noqa: E402

THETA_SQ = 0.4


def ref_pair(v_min=0.95, theta_sq=THETA_SQ, v_max=None):
    """x squeezed at theta_sq, y squeezed on the orthogonal quadrature."""
    v_max = 1 / v_min if v_max is None else v_max
    return make_independent_squeezed_pair(
        SqueezedModeParams(v_min, v_max, theta_sq),
        SqueezedModeParams(v_min, v_max, theta_sq + np.pi / 2),
    )


@pytest.fixture
def ref_xy():
    return ref_pair()


@pytest.fixture
def ref_pm45(ref_xy):
    return apply_transform(ref_xy, pm45(), basis_label="pm45")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_state(rng, **kw):
    return from_covariance_matrix(random_covariance(rng, **kw))

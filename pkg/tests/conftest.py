import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from screwkin import liegroup as lg
from screwkin.models import rcm_model

settings.register_profile("repo", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

finite = st.floats(-3.0, 3.0, allow_nan=False, allow_infinity=False)
vec3 = arrays(np.float64, 3, elements=finite)
vec6 = arrays(np.float64, 6, elements=finite)


@st.composite
def poses(draw):
    w = draw(vec3)
    return lg.Pose(lg.so3_exp(w), draw(vec3))


@st.composite
def unit_vectors(draw):
    v = draw(vec3)
    n = np.linalg.norm(v)
    if n < 1e-3:
        v, n = np.array([0.0, 0.0, 1.0]), 1.0
    return v / n


@pytest.fixture(scope="session")
def rcm():
    return rcm_model()


def random_q(rng, n):
    return rng.uniform(-np.pi, np.pi, n)

import math

import numpy as np
import pytest

from volsurf.fem.assembly import assemble
from volsurf.mesh.disk_mesh import build_disk_mesh, build_mesh_hierarchy, mark_gamma2
from volsurf.models.params import ModelParams2, ModelParams4

SMALL_RUN = {
    'mesh': {'rings': 2, 'refinements': 0},
    'time': {'tau': 0.1, 't_final': 1.0},
}


@pytest.fixture
def hexagon():
    return build_disk_mesh(1)


@pytest.fixture
def ring_mesh():
    return build_disk_mesh(2)


@pytest.fixture
def marked_mesh():
    return mark_gamma2(build_disk_mesh(2), 0.0, math.pi)


@pytest.fixture
def hexagon_forms(hexagon):
    return assemble(hexagon)[1]


@pytest.fixture
def forms(ring_mesh):
    return assemble(ring_mesh)[1]


@pytest.fixture
def marked_forms(marked_mesh):
    return assemble(marked_mesh)[1]


@pytest.fixture
def hierarchy():
    return build_mesh_hierarchy(2, 2)


@pytest.fixture
def params2():
    return ModelParams2()


@pytest.fixture
def params4():
    return ModelParams4()


@pytest.fixture
def unbalanced_params4():
    return ModelParams4(xi=2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_run():
    return dict(SMALL_RUN)

# This file is part of the affinform package.
#
# This program is free software: you can redistribute it and/or modify it under the
# terms of the Apache License (v2.0) as published by the Apache Software Foundation.
#
# This program is distributed in the hope that it will be useful, but WITHOUT ANY
# WARRANTY; without even the implied warranty of MERCHANTABILITY or FITNESS FOR A
# PARTICULAR PURPOSE. See the Apache License for more details.
#
# You should have received a copy of the Apache License along with this program.
# If not, see <https://www.apache.org/licenses/LICENSE-2.0>.

"""Shared fixtures for the affinform test-suite."""

# external libs
import numpy as np
import pytest

# internal libs
from affinform import datasets
from affinform.formation import (GainMatrix, FormationSystem, design_weights_complete,
                                 build_motion_basis)
from affinform.datasets.synthetic import SyntheticFormations


# L = I - proj_S for the bundled square
SQUARE_LAPLACIAN = 0.25 * np.array([[1, -1, 1, -1], [-1, 1, -1, 1], [1, -1, 1, -1], [-1, 1, -1, 1]])


@pytest.fixture
def square():
    return datasets.square()


@pytest.fixture
def square_weights(square):
    return design_weights_complete(square.shape, square.graph)


@pytest.fixture
def square_basis(square):
    return build_motion_basis(square)


@pytest.fixture
def square_system(square, square_weights, square_basis):
    return FormationSystem(square, square_weights, GainMatrix.identity(4), square_basis, h=1.0)


@pytest.fixture
def synthetic():
    return SyntheticFormations(seed=42)


@pytest.fixture
def square_laplacian():
    return SQUARE_LAPLACIAN.copy()

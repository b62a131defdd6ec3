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

"""Formation representation, stress weights and motion design."""

# make available strait from 'formation'
from .core import (Graph, ReferenceShape, Framework, AffineCoords, ShapeBasis,
                   incidence_matrix, affine_map, compose, decode_to_r2, encode_from_r2,
                   shape_basis, shape_distance, motion_projector, as_configuration)
from .weights import (StressWeights, GainMatrix, GainReport, design_weights_complete,
                      design_weights_general, validate_gain)
from .motion import (MotionParameters, MotionBasis, ModifiedLaplacian, FormationSystem,
                     solve_agent_mu, build_m_matrix, build_motion_basis, assemble_modified,
                     hardware_scaling)

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

"""Spectral analysis of the closed loop and the stability bound on h."""

# make available strait from 'analysis'
from .spectral import (ReducedOperator, Classification, JordanChain, SpectralReport,
                       AnalyticTrajectory, CASE_LABELS, classify, build_chains, analytic_solution)
from .stability import (LyapunovSolution, StabilityReport, complement_block, solve_lyapunov,
                        stability_analysis, stability_bound, spectral_projector, off_shape_growth)

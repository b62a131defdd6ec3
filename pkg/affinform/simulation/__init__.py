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

"""Schedules and numerical integration of the swarm dynamics."""

# make available strait from 'simulation'
from .schedule import Segment, Schedule
from .integrate import (Trajectory, ComparisonReport, AdaptedFrame, integrate, compare_with_analytic,
                        exponential_fit, step_matrix)

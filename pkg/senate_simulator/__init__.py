# Copyright (c) 2026 SENATE simulator developers
#
# All rights reserved. Use of this source code is governed by a
# BSD-style license that can be found in the LICENSE file.
"""
Constants that are defined for the SENATE simulator
---------------------------------------------------
"""
# DEPLOYMENT

#: Side of the square deployment area (m)
AREA_SIDE: float = 200.0

#: Interval of the good nodes' initial values
GOOD_VALUES = (-1.0, 1.0)

#: Interval of the faulty nodes' initial values
FAULTY_VALUES = (99.0, 101.0)

# NUMERICS

#: Relative cutoff (times the trace) under which an eigenvalue is zero
EIGEN_TOLERANCE: float = 1e-9

#: Smallest admissible symmetry tolerance (m²)
MIN_SYMMETRY_TOL: float = 1e-6

# PRODUCTS

#: Version of the CSV layout written by the simulator
CSV_SCHEMA: int = 1

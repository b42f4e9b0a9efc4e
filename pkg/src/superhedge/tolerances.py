"""Numeric tolerances used throughout the library.

Double precision on small dense problems: probability masses are held to a
much tighter tolerance than derived conditional-expectation identities, and
LP feasibility sits at the same level as the identity tolerance.
"""

MASS_TOL = 1e-12   # |sum(p) - 1| for probability vectors
EQ_TOL = 1e-9      # conditional-expectation equalities / inequalities
FEAS_TOL = 1e-9    # LP feasibility decisions

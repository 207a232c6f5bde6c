"""Frozen reference states and canonical experiment windows.

Every seed below is an exact decimal literal. Trajectories on the chaotic
attractor decorrelate from their seed within tens of years, so a seed that
is re-derived (or even truncated differently) produces a statistically
similar but numerically different run. The values here were settled onto
their attractor once, rounded to six decimals, re-verified, and are now
part of the toolkit's contract: regenerating them would silently change
every downstream regression number.

All states are (x, y, z) at the reference parameters unless noted.
"""

from __future__ import annotations

import numpy as np

# Equilibrium x at the reference parameters; the section plane x = x_eq.
X_EQ = -2.483936870689445

# On the chaotic attractor (max x over any long window stays below -1.5).
CHAOTIC_SEED = (-1.9689085, -0.65972732, 1.55865582)

# On the strong-event attractor (one event per ~12.06 years).
MMO_SEED = (-2.366665, -0.721839, 1.593885)

# Chaotic-attractor state whose 1e5-year forced realization contains a
# longest quiet epoch of ~618 years (the slow statistical tier).
SLOW_TIER_SEED = (-2.696271, -0.946715, 1.633505)

# The two coexisting attractors at a = 7.453.
PERIODIC_SEED_A7453 = (-2.915286, -0.790839, 1.581213)
CHAOTIC_SEED_A7453 = (-2.840022, -0.845721, 1.616437)
A_TWO_ATTRACTORS = 7.453

# Unstable fixed point (y, z) of the first-return map on x = -1.5,
# decreasing crossings; multipliers ~ -1.245 and ~1e-6.
RETURN_FP_POINT = (-0.0756617040, 0.8354214873)
RETURN_FP_SECTION_X = -1.5

# Saddle periodic orbit on the basin boundary: (y, z) on the x = X_EQ
# section, increasing crossings; period ~0.4977 years, both section
# multipliers real and negative.
BOUNDARY_ORBIT_POINT = (-0.92525971, 1.64843376)

# Chaotic attractor's footprint on the x = X_EQ section (increasing
# crossings); basin grids straddle this window with 20% margins per side.
BASIN_FOOTPRINT = {
    "y_lo": -0.9318,
    "y_hi": -0.5829,
    "z_lo": 1.4959,
    "z_hi": 1.6541,
}
BASIN_MARGIN = 0.2


def basin_window(margin: float = BASIN_MARGIN):
    """(y_lo, y_hi, z_lo, z_hi) of the canonical basin-grid window."""
    f = BASIN_FOOTPRINT
    my = margin * (f["y_hi"] - f["y_lo"])
    mz = margin * (f["z_hi"] - f["z_lo"])
    return (f["y_lo"] - my, f["y_hi"] + my, f["z_lo"] - mz, f["z_hi"] + mz)


# Stretching-field window on the x = X_EQ plane: a thin strip across the
# ridge structure, centered on the tongue at (y, z) = (-0.8345, 1.570).
FTLE_STRIP = {
    "y_lo": -0.8520,
    "y_hi": -0.8170,
    "z_lo": 1.5675,
    "z_hi": 1.5725,
}

# Short section curve for stretch measurements: center and (dy, dz)
# tangent on the x = X_EQ plane, crossing the ridge structure.
STRETCH_CURVE_CENTER = (-0.903, 1.65)
STRETCH_CURVE_TANGENT = (1.0, 0.0)
STRETCH_CURVE_LENGTH = 5e-4

# 1-D return-map sampling windows in z on the x = -1.5 fold curve.
# The narrow window covers the unimodal core and is safe for
# fixed-point-birth detection: a near-discontinuous secondary spike
# (slopes in the hundreds) drifts rightward through [0.8390, 0.8405]
# as a grows and must stay outside. The wide window is needed above
# a ~ 7.395 where the repelling fixed point moves past 0.8385.
MAP1D_Z_WINDOW = (0.8340, 0.8385)
MAP1D_Z_WINDOW_WIDE = (0.8340, 0.8400)

# Mode-switching thresholds on the observable g (downward crossings).
SWITCH_HI = 1.306
SWITCH_LO = 1.22
SWITCH_MIN_GAP = 15.0
SWITCH_AMPLITUDE = 0.002

# Strong-event threshold in x shared by classification and epochs.
EVENT_LEVEL = -1.5


def as_array(seed) -> np.ndarray:
    return np.asarray(seed, dtype=float)

"""Frozen reference values computed outside the package.

Each constant was evaluated once with mpmath at 30 digits (quadrature or
closed form) and pasted here; none of them calls fluidbody code.
"""

import math

# area of r(phi) = 1 + 0.2 cos(3 phi): quad of r^2/2 over [0, 2 pi]
AREA_TREFOIL = 3.2044245066615891

# bundled polar shape r = 1 + 0.1 cos 2p + 0.15 cos 3p + 0.05 sin p + 0.1 sin 3p
AREA_BUNDLED = 3.2122784882955636
CENTROID_BUNDLED = (0.014944987775061125, 0.054553789731051348)  # quad of r^3/3 (cos, sin) / A

# disc a = 0.25 at distance 0.3 from the centre of the unit disc: Moebius map
# z -> (z - lam)/(1 - lam z) onto a concentric annulus of inner radius rho,
# C = log(rho)/(2 pi)
MOEBIUS_LAMBDA = 0.32229992447130115
MOEBIUS_RHO = 0.27675990936556137
C_ECCENTRIC = -0.20445122004719249

# concentric annulus a = 0.25, R = 1: psi = log(r)/(2 pi), C = psi(a)
C_ANNULUS = -0.22063560015265159
PSI_ANNULUS_HALF = -0.11031780007632580

# unit disc Routh function and velocity at (0.5, 0), image formula
PSI_DISC_HALF = 0.022893011934810852
U_DISC_HALF = 0.10610329539459689

# classical ellipse added masses, semi-axes (2, 1): pi b^2, pi a^2, pi (a^2 - b^2)^2 / 8
ELLIPSE_MA = (math.pi, 4 * math.pi, 9 * math.pi / 8)

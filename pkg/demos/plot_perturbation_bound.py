"""
How far noise can tilt a single bin
===================================

For one bin with signal power P_S along u and noise CSD Sigma, the maximal
eigenvector of P_S u u^T + Sigma moves away from u by at most
2|u_perp^H Sigma u| / (P_S - 2||Sigma||_F).  Isotropic noise has no
cross term, so it never tilts the eigenvector at all.
"""

import numpy as np

from eigengap_doa import proposition_bound
from eigengap_doa.signal_model import oriented_noise_matrix

u = np.array([np.cos(np.deg2rad(30.0)), np.sin(np.deg2rad(30.0))])

print("isotropic noise:")
for level in (0.01, 0.1, 0.4):
    b = proposition_bound(1.0, level * np.eye(2), u)
    # both sides are zero in exact arithmetic; what prints is rounding
    print("  sigma^2=%.2f  deviation %.1e  applicable=%s" % (level, b.lhs, b.applicable))

# noise concentrated 45 deg off the source axis has the largest cross term
print("anisotropic noise, major axis at 75 deg:")
for major in (0.05, 0.15, 0.3):
    sigma = oriented_noise_matrix(major, major / 4, 75.0)
    b = proposition_bound(1.0, sigma, u)
    print("  major=%.2f  deviation %.4f  bound %.4f  applicable=%s"
          % (major, b.lhs, b.rhs, b.applicable))

# the condition-number form of the denominator is never larger than the exact one
sigma = oriented_noise_matrix(0.2, 0.05, 75.0)
b = proposition_bound(1.0, sigma, u)
print("exact denominator %.4f, relaxed %.4f (C=%.1f)"
      % (b.denominator, b.relaxed_denominator, b.condition_bound))

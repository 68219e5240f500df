"""
Finding templates across a gamma change
=======================================

Templates cut from the original image are searched for in its gamma
corrected copy, once on intensities and once on the invariant map.
"""

import numpy as np

from gaminv import correlation_accuracy, gamma_correct, invariant_m12g, prefilter
from gaminv.synth import synth_image

img = synth_image("gaussians", 0, 96, 96)
sgc = gamma_correct(img, 0.6, requantize=True)

# common 6 px border so every condition scores the same anchors
margin = 6
for sp in (0.0, 1.0):
    r_int = correlation_accuracy(prefilter(img, sp), prefilter(sgc, sp), 6, 8, margin)
    r_inv = correlation_accuracy(invariant_m12g(img, sigma_pre=sp).values,
                                 invariant_m12g(sgc, sigma_pre=sp).values, 6, 8, margin)
    print(f"sigma_pre={sp}: CA intensity {r_int.ca:5.1f}%   CA invariant {r_inv.ca:5.1f}%")

# one anchor where intensity matching goes wrong and the invariant does not
a = invariant_m12g(img).values
b = invariant_m12g(sgc).values
r_int = correlation_accuracy(img, sgc, 6, 8, margin)
r_inv = correlation_accuracy(a, b, 6, 8, margin)
ys, xs = np.nonzero(~r_int.cmcp_mask & r_inv.cmcp_mask & r_int.anchor_mask)
y, x = ys[len(ys) // 2], xs[len(xs) // 2]
print(f"\ntemplate at ({x}, {y}): intensity best ({r_int.best_x[y, x]}, {r_int.best_y[y, x]}),"
      f" invariant best ({r_inv.best_x[y, x]}, {r_inv.best_y[y, x]})")

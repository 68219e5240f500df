"""
The 7x7 Gaussian derivative bank
================================

Raw point samples against the corrected bank used everywhere else.
"""

import math

import numpy as np

from gaminv.kernels import DERIVATIVE_ORDERS, gaussian_kernel

np.set_printoptions(precision=4, suppress=True, linewidth=110)

print("smoothing kernel (unit sum):")
print(gaussian_kernel(1.0, 7).taps)

# truncation at 3 sigma leaves the even raw kernels with a DC response
print("\norder    raw sum      corrected sum   own moment")
for order in DERIVATIVE_ORDERS:
    raw = gaussian_kernel(1.0, 7, order, annihilate=False)
    k = gaussian_kernel(1.0, 7, order)
    x, y = k.offsets()
    dx, dy = order
    moment = (k.taps * x ** dx * y ** dy).sum() / (math.factorial(dx) * math.factorial(dy))
    print(f"{k.name:<6} {raw.taps.sum(): .3e}   {k.taps.sum(): .3e}      {moment: .4f}")

# the continuous value of the own moment is (-1)^n; 7 taps cost a few percent
print("\nGxx (corrected):")
print(gaussian_kernel(1.0, 7, (2, 0)).taps)

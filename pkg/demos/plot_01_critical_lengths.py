"""
Critical lengths and the characteristic function
================================================

The linear operator ``-d/dx - d^3/dx^3`` with ``y(0) = y(L) = y'(L) = 0``
has a zero eigenvalue exactly on a discrete set of interval lengths.
"""

import math

import numpy as np

from kdvlab import characteristic_function, critical_lengths, find_eigenvalues_determinant, is_critical

# The set is parametrised by pairs of positive integers (j, l).
table = critical_lengths(max_index=3)
for j, l, value in table.entries:
    print(f"j={j} l={l}  L = {value:.12f}")

# 2 pi is the smallest one.  pi is not critical.
print(is_critical(2 * math.pi), is_critical(math.pi))

# At lambda = 0 the scaled characteristic function reduces to 1 - cos L,
# so it vanishes at every multiple of 2 pi and nowhere else.
lengths = np.linspace(0.5, 13.0, 6)
for L in lengths:
    print(f"L = {L:6.3f}   F(0) = {characteristic_function(0.0, L).real:+.6f}   1 - cos L = {1 - math.cos(L):+.6f}")

# For j != l the eigenvalue on the imaginary axis is not zero, so F(0) stays
# away from zero and the root shows up at +- i omega instead.
L = 2 * math.pi * math.sqrt(7 / 3)
print(f"L = {L:.6f}  F(0) = {abs(characteristic_function(0.0, L)):.3f}")
roots = find_eigenvalues_determinant(L, re_range=(-0.05, 0.05), im_range=(-1.0, 1.0), grid_density=32)
print("roots near the imaginary axis:", np.round(roots.eigenvalues, 5))

"""
Spectrum of the discrete operator
=================================

Two independent routes to the eigenvalues: the dense matrix of the finite
difference operator, and Newton on the characteristic determinant of the
continuous problem.  They should agree up to the discretisation error.
"""

import math

import numpy as np

from kdvlab import assemble_operator, find_eigenvalues_determinant, make_grid, matrix_spectrum
from kdvlab.spectrum import kernel_similarity, nearest_to_zero, spectral_gap

L = 2 * math.pi
roots = find_eigenvalues_determinant(L, re_range=(-1.0, 0.1), im_range=(-5.0, 5.0))
print("determinant roots:", np.round(roots.eigenvalues, 6))

for n in (256, 512, 1024):
    grid = make_grid(L, n)
    result = matrix_spectrum(assemble_operator(grid))
    top = nearest_to_zero(result)
    # the default scheme is first order, so the kernel eigenvalue is O(h)
    print(f"n={n:5d}  lambda0 = {top.value.real:+.3e}  lambda0/h = {top.value.real / grid.h:+.4f}  "
          f"cos(v, 1 - cos x) = {kernel_similarity(top):.6f}  gap = {spectral_gap(result, 10 * grid.h):.4f}")

# Off criticality there is no kernel and the whole spectrum sits left of a line.
off = find_eigenvalues_determinant(math.pi)
print("roots at L = pi in the search box:", len(off.pairs))
wide = find_eigenvalues_determinant(math.pi, re_range=(-3.0, 0.1), im_range=(-5.0, 5.0))
print("first root further left:", np.round(wide.eigenvalues[:1], 5))

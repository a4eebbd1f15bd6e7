"""
Sparse delta-orthogonal convolution kernels
===========================================

A 3x3 kernel whose center tap is a sparse orthogonal matrix.  Under
circular padding the layer preserves the norm of every input.
"""

import numpy as np
from sparse_ortho import conv_forward_circular, sample_conv

kern = sample_conv(16, 8, 1, 0.1, center_mode="sqrt", rng=0)
print("mask density:", kern.mask_density)
print("center density:", kern.center_density)
print("unfrozen off-center taps:", kern.unfrozen)

x = np.random.default_rng(1).standard_normal((8, 12, 12))
y = conv_forward_circular(kern, x)
print("output/input norm:", np.linalg.norm(y) / np.linalg.norm(x))

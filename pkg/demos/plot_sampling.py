"""
Sparse orthogonal matrices from Givens rotations
================================================

Grow a 64x64 orthogonal matrix to about 10% density and check it.
"""

import numpy as np
from sparse_ortho import orthogonality_score, sample_rectangular, sample_square

a = sample_square(64, 0.1, rng=0)
print("rotations used:", a.rotations)
print("density:", a.density)
print("||A A^T - I||_F:", orthogonality_score(a))

# entries off the structural support are exact zeros
w = a.toarray()
print("zeros agree with support:", np.array_equal(w != 0, a.support))

# wide shapes have orthonormal rows, tall ones orthonormal columns
wide = sample_rectangular(16, 48, 0.3, rng=1)
tall = sample_rectangular(48, 16, 0.3, rng=1)
print("wide score:", orthogonality_score(wide), "tall score:", orthogonality_score(tall))

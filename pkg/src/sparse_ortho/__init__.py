"""Exactly orthogonal sparse initializations from random Givens rotations."""
from .ai import AIResult, ai_gradient, ai_loss, ai_optimize
from .allocators import (
    DensityProfile,
    LayerSpec,
    erk_profile,
    load_arch,
    load_profile,
    save_profile,
    uniform_profile,
    validate_profile,
)
from .bench import BenchRecord, bench_generation
from .conv import ConvKernel, conv_forward_circular, sample_conv
from .density_model import (
    RowNnzDistribution,
    expected_density,
    expected_density_curve,
    monte_carlo_density,
    monte_carlo_density_curve,
    rotations_for_density,
    row_nnz_distribution,
)
from .givens import (
    GivensRotation,
    SparseOrthoMatrix,
    apply_rotation_right,
    density,
    make_rng,
    orthogonality_score,
    sample_biases,
    sample_rectangular,
    sample_square,
    scale_weights,
)
from .isometry import (
    MLPSpec,
    SparseMLP,
    Spectrum,
    build_sparse_mlp,
    critical_constants,
    jacobian,
    singular_values,
    spectrum_sweep,
)

__version__ = "0.1.0"

"""
Input-output Jacobian spectra of sparse tanh networks
=====================================================

At 95% sparsity a randomly masked orthogonal initialization loses most of
its signal.  The Givens construction stays close to the dense network.
"""

from sparse_ortho import MLPSpec, spectrum_sweep

spec = MLPSpec(depth=7, width=100, activation="tanh")
rows = spectrum_sweep(spec, ["uniform", "erk"], ["base", "eoi"], [0.0, 0.95], seeds=[0, 1], inputs_per_seed=4)

for r in rows:
    print(f"{r['scheme']:5s} {r['allocator']:8s} sparsity={r['sparsity']:.2f} seed={r['seed']}  "
          f"mean={r['mean_sv']:.4f}  max={r['max_sv']:.4f}")

"""
Per-layer density profiles
==========================

Uniform and Erdos-Renyi-kernel allocation of a global density budget.
"""

from sparse_ortho.allocators import LayerSpec, erk_profile, uniform_profile, validate_profile

layers = [LayerSpec.conv(3, 64, 1), LayerSpec.conv(64, 128, 1), LayerSpec.fc(128 * 16, 256), LayerSpec.fc(256, 10)]

for prof in (uniform_profile(layers, 0.1), erk_profile(layers, 0.1)):
    print(prof.method, [round(x, 4) for x in prof])
    print("  realized global density:", prof.budget())
    print("  diagnostics ok:", validate_profile(prof, layers, 0.1).ok)

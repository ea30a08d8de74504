"""Probability retained near an interface between two bulk phases.

The split-step walk with alpha(x) = alpha1 tanh(x/3) joins two bulks.  When
their winding numbers differ, a bound state sits at x = 0 and the walker
stays close; otherwise it spreads like the homogeneous walk.
"""

from topowalk import InhomogeneousProfile, interface_localization, position_resolved_invariant

T, window, extent, steps = 2, 4, 256, 100
base = interface_localization(InhomogeneousProfile(0.0), T, window, extent, steps=steps)
print(f"no interface: retained {base:.3f}")
for alpha1 in (0.3, 0.6, 0.9, 1.2, 1.5):
    prof = InhomogeneousProfile(alpha1)
    left = position_resolved_invariant(prof, T, -60).quantized
    right = position_resolved_invariant(prof, T, 60).quantized
    kept = interface_localization(prof, T, window, extent, steps=steps)
    print(f"alpha1={alpha1:.1f}: windings ({left}, {right})  retained {kept:.3f}")

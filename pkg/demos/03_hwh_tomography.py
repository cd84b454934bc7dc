#!/usr/bin/env python3
"""Frequency-decay-frequency tomography of the polariton-vibron system.

Conventional 2D spectroscopy resolves (omega1, omega3) and treats the waiting
time t2 as a parameter. Here the t2 transient of every bright (omega1,
omega3) pixel is harmonically inverted instead, resolving a third DECAY axis
s2. The result is a (omega1, s2, omega3) tensor whose s2 = 0 marginal is
exactly the conventional 2D map -- nothing is lost -- while the decay axis
separates channels that share the same frequency pixel.

The preset is built to make the point sharply: the vibron sits AT the upper
polariton frequency (2040 meV), so no frequency axis can distinguish them;
only the decay axis does (12 vs 60 meV).

Writes hwh_montage.svg next to this script.
"""

from pathlib import Path

import numpy as np

from wfs_lab.models import (
    ModelSpec,
    assemble,
    hamiltonian_to_liouvillian,
    rotating_frame,
)
from wfs_lab.plotting import svg_montage
from wfs_lab.protocols import hwh_tomography
from wfs_lab.response import three_pulse_3d

OUT = Path(__file__).parent

model = assemble(ModelSpec("polariton_vibron"))
t13 = np.arange(64) * (2 * np.pi / 160)
t2 = np.arange(128) * 0.005

print("== Running the three-pulse scan and per-pixel inversion ==")
res = hwh_tomography(model, t13, t2, t13, pixel_threshold=1e-9, max_modes=8)
print(f"   carrier: {res.carrier:.1f} meV;"
      f" {res.analyzed_pixels} pixels analyzed, {res.flagged_pixels} flagged")

print("\n== Decay content of the upper-polariton pixel (w1 = -40, w3 = +40) ==")
i1 = int(np.argmin(np.abs(res.omega1 + 40.0)))
i3 = int(np.argmin(np.abs(res.omega3 - 40.0)))
col = np.abs(res.tensor[i1, :, i3])
for c in np.flatnonzero(col > 1e-9 * col.max()):
    print(f"   s2 = {res.s2_axis[c]:7.2f}   amplitude {col[c]:.3e}")
print("   -> the strong features are the ground-state bleach (s2 = 0) and")
print("      the polariton channel (s2 ~ 12); the weak s2 ~ 60 feature is")
print("      the vibron admixture, invisible to any frequency axis.")

print("\n== Consistency: s2 marginal vs conventional 2D map at t2 = 0 ==")
H_rot = rotating_frame(model.hamiltonian, model.excitations, res.carrier)
L, space = hamiltonian_to_liouvillian(H_rot, model.excitations)
sig = three_pulse_3d(L, model.dipole, model.ground_density(),
                     t13, np.array([0.0]), t13, space)
ref = np.fft.fftshift(np.fft.fft(sig.values[:, 0, :], axis=0), axes=0)
ref = np.fft.fftshift(np.fft.fft(ref, axis=1), axes=1)
rel = np.abs(res.s2_marginal() - ref).max() / np.abs(ref).max()
print(f"   max relative deviation: {rel:.2e}")

(OUT / "hwh_montage.svg").write_text(
    svg_montage(res.tensor, res.omega1, res.s2_axis, res.omega3,
                title="|S~(w1, s2, w3)| slices"))
print("\nWrote hwh_montage.svg (one tile per occupied s2 slice).")

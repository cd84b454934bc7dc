#!/usr/bin/env python3
"""Decay-decay correlation spectroscopy of a leaky polariton.

A cavity-exciton doublet (both polaritons decaying at 12 meV) is weakly
coupled, with strength J, to a fast vibron channel decaying at 60 meV. In
frequency-domain 2D spectroscopy the vibron hides under the polariton line;
in DECAY coordinates the two channels are far apart.

The pipeline: photon-echo signal S(tau1, tau2) -> 2D harmonic inversion ->
pole-model Laplace map |S~(s1, s2)|. A cross peak at (12, 60) appears if and
only if the channels exchange amplitude; its strength feeds the isolation
figure of merit F_iso = 1/(1 + cross). Sweeping J shows the cross peak grow
as J^2, the perturbative fingerprint of a genuine coupling.

Writes map_j0.svg, map_j5.svg and sweep_j.svg next to this script.
"""

from pathlib import Path

import numpy as np

from wfs_lab.models import ModelSpec, assemble
from wfs_lab.plotting import svg_heatmap, svg_line
from wfs_lab.protocols import insulation_certificate, sweep, wfs_map

OUT = Path(__file__).parent
TAU = np.arange(126) * 0.004
CHANNELS = (12.0, 60.0)  # amplitude decay rates: polaritons, vibron


def polariton(j_mev):
    return assemble(ModelSpec("polariton_vibron", {"j_mev": float(j_mev)}))


print("== Decoupled reference (J = 0) ==")
res0 = wfs_map(polariton(0.0), TAU, TAU, channels=CHANNELS)
print(f"   cross-peak amplitude: {res0.report.cross_amplitude:.3e}")
print(f"   F_iso = {res0.report.f_iso:.12f}   (exactly isolated)")
(OUT / "map_j0.svg").write_text(
    svg_heatmap(res0.map2d.values, res0.map2d.s1_axis, res0.map2d.s2_axis,
                title="|S~(s1,s2)|, J = 0"))

print("\n== Coupled system (J = 5 meV) ==")
res5 = wfs_map(polariton(5.0), TAU, TAU, channels=CHANNELS)
print(f"   cross-peak amplitude: {res5.report.cross_amplitude:.3e}")
print(f"   F_iso = {res5.report.f_iso:.6f}")
m = res5.map2d
i = int(np.argmin(np.abs(m.s1_axis - 12.0)))
j = int(np.argmin(np.abs(m.s2_axis - 60.0)))
print(f"   map value at the (12, 60) cross peak: {m.values[i, j]:.4f}")
(OUT / "map_j5.svg").write_text(
    svg_heatmap(m.values, m.s1_axis, m.s2_axis, title="|S~(s1,s2)|, J = 5 meV"))

print("\n== Scaling of the cross peak with J ==")
sw = sweep(polariton, "j_mev", [1, 2, 4, 8, 16], TAU, TAU,
           metric="cross_peak", fit="power", channels=CHANNELS)
for v, x in zip(sw.values, sw.metrics):
    print(f"   J = {v:5.1f} meV   cross amplitude {x:.4e}")
print(f"   power-law fit: exponent {sw.fit['exponent']:.3f}"
      f"  (r^2 = {sw.fit['r2']:.5f}) -- second-order perturbation theory")
ann = f"exponent {sw.fit['exponent']:.3f}"
(OUT / "sweep_j.svg").write_text(
    svg_line(sw.values, sw.metrics, title="cross peak vs J", loglog=True,
             annotation=ann))

print("\n== Verdict ==")
cert = insulation_certificate([res5.report], sweep_result=sw)
print(f"   {cert['verdict']}   ({'; '.join(cert['evidence'])})")
print("   (J = 5 sits between the insulated and weight-mixed thresholds,")
print("    and the growing sweep rules out an 'insulated' stamp.)")

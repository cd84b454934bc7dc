#!/usr/bin/env python3
"""Two global probes: eigenvalue braiding around an EP, and a negative
control on the Hatano-Nelson ring.

Part 1 transports the biorthogonal eigenframe of the lossy dimer around
closed loops in the (detuning, coupling) plane. A loop enclosing the
exceptional point swaps the two eigenvalue branches (the square root is a
double cover); traversing it twice, or not enclosing the EP at all, returns
the identity. This braiding is a topological witness of the EP that needs no
fine-tuned parameters.

Part 2 drives a non-reciprocal Hatano-Nelson ring through a weakly coupled
probe site and runs the same decay-correlation pipeline as demo 02. The
probe is lossless and disorder-free, so by construction there is no channel
for the lossy bulk to feed amplitude back coherently: the cross-peak metric
stays at numerical zero for ANY disorder strength. A flat response under a
sweep is the experimental signature of structural (not accidental)
decoupling.
"""

import numpy as np
import scipy.linalg as la

from wfs_lab.filtration import monodromy_loop
from wfs_lab.models import ModelSpec, assemble, build_nh_jc, winding_number
from wfs_lab.protocols import sweep

G_EP = (5.0 - 0.1) / 2


def family(point):
    delta, g = point
    return build_nh_jc({"omega_x_mev": 2000.0 + delta, "g_mev": g})


def circle(center, radius, n=33):
    th = np.linspace(0.0, 2 * np.pi, n)
    return np.column_stack([center[0] + radius * np.cos(th),
                            center[1] + radius * np.sin(th)])


print("== Part 1: monodromy in the (detuning, coupling) plane ==")
for label, loop in (
    ("loop enclosing the EP   ", circle((0.0, G_EP), 1.0)),
    ("same loop, twice around ", np.vstack([circle((0.0, G_EP), 1.0)[:-1]] * 2
                                           + [circle((0.0, G_EP), 1.0)[:1]])),
    ("loop away from the EP   ", circle((0.0, G_EP + 2.0), 0.5)),
):
    res = monodromy_loop(family, loop, steps=400)
    print(f"   {label}: permutation {res.eigenphase_permutation},"
          f" ||N_mono|| = {la.norm(res.n_mono.entries):.1e}")
print("   -> a single enclosing loop swaps the branches; everything else is trivial.")

print("\n== Part 2: Hatano-Nelson ring as a negative control ==")
w = winding_number({"disorder_w": 0.0, "gamma_bulk": 0.0, "t_probe": 1.0})
print(f"   clean-ring spectral winding number: {w} (non-reciprocal topology)")

tau = np.arange(256) * 0.25


def ring(disorder):
    return assemble(ModelSpec(
        "hatano_nelson_ring",
        {"disorder_w": float(disorder), "t_probe": 2e-7, "probe_mode": "site"},
        disorder_seed=1))


sw = sweep(ring, "disorder_w", [1, 2, 4, 8, 16], tau, tau,
           metric="cross_peak", channels=(0.0, 0.1),
           svd_tol=1e-10, max_modes=26)
for v, x in zip(sw.values, sw.metrics):
    print(f"   W = {v:5.1f}   cross amplitude {x:.3e}")
print("   -> flat at numerical zero: the probe is structurally insulated")
print("      from the lossy bulk, unlike the J-coupled vibron of demo 02.")

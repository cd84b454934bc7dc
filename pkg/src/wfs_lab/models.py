"""Model zoo: non-Hermitian Hamiltonians, Liouvillians and their gradings.

Units: hbar = 1, energies in meV, times in hbar/meV. Decay rates enter the
Hamiltonians as -i*gamma on the diagonal, so a state's amplitude decays as
e^{-gamma t} and its population as e^{-2 gamma t}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidInputError, SingularBaseError
from .operator import Operator, as_matrix

MODEL_KINDS = ("nh_jaynes_cummings", "polariton_vibron", "hatano_nelson_ring", "custom")

#: Preset parameters. The polariton_vibron gammas are chosen so that both
#: polariton branches have amplitude decay 12 meV at resonance
#: ((gamma_c + gamma_x)/2 = 12) and the vibron channel sits at 60 meV,
#: matching the decay-map coordinates the protocols target. The vibron is
#: placed at the upper-polariton frequency (omega_v = omega_c + g) on
#: purpose: the two channels overlap in frequency — they share the same
#: spectral pixel — and are separated only by their decay topology.
#: g = 40 keeps the vibron admixture perturbative over the whole J sweep
#: (the vibron-polariton complex distance stays >= 48 meV), so the
#: cross-peak metric scales cleanly as J^2 up to J = 16.
PRESETS = {
    "nh_jaynes_cummings": {
        "omega_c_mev": 2000.0,
        "omega_x_mev": 2000.0,
        "gamma_c_mev": 0.1,
        "gamma_x_mev": 5.0,
        "g_mev": 20.0,
    },
    "polariton_vibron": {
        "omega_c_mev": 2000.0,
        "omega_x_mev": 2000.0,
        "gamma_c_mev": 4.0,
        "gamma_x_mev": 20.0,
        "g_mev": 40.0,
        "omega_v_mev": 2040.0,
        "gamma_v_mev": 60.0,
        "j_mev": 5.0,
        "mu_c": 1.0,
        "mu_x": 0.0,
        "mu_v": 0.0,
    },
    "hatano_nelson_ring": {
        "n_sites": 20,
        "t_hop": 1.0,
        "h": 0.5,
        "flux": 0.0,
        "disorder_w": 0.0,
        "gamma_bulk": 0.1,
        "probe_site": 0,
        "t_probe": 1.0,
    },
}


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    params: dict = field(default_factory=dict)
    disorder_seed: int | None = None

    def __post_init__(self):
        if self.kind not in MODEL_KINDS:
            raise InvalidInputError(f"unknown model kind {self.kind!r}")
        merged = dict(PRESETS.get(self.kind, {}))
        merged.update(self.params)
        for k, v in merged.items():
            if isinstance(v, (int, float)) and not np.isfinite(v):
                raise InvalidInputError(f"parameter {k} is not finite")
        object.__setattr__(self, "params", merged)
        if self.kind == "hatano_nelson_ring" and merged["n_sites"] < 2:
            raise InvalidInputError("hatano_nelson_ring needs n_sites >= 2")
        for k in ("gamma_c_mev", "gamma_x_mev", "gamma_v_mev", "gamma_bulk"):
            if k in merged and merged[k] < 0:
                raise InvalidInputError(f"decay rate {k} must be >= 0")


@dataclass(frozen=True)
class LiouvilleSpace:
    """Coherence-order bookkeeping of a vectorized density matrix.

    Row-major vectorization: Liouville index l = i*hilbert_dim + j holds the
    density-matrix element rho_{ij}. Its coherence order is
    p = n_exc(i) - n_exc(j).
    """

    hilbert_dim: int
    excitation_number: tuple[int, ...]

    def __post_init__(self):
        if len(self.excitation_number) != self.hilbert_dim:
            raise InvalidInputError("excitation_number length must match hilbert_dim")

    @property
    def liouville_dim(self) -> int:
        return self.hilbert_dim**2

    def coherence_order(self) -> np.ndarray:
        n = np.asarray(self.excitation_number)
        return (n[:, None] - n[None, :]).ravel()

    def sector_indices(self, p: int) -> np.ndarray:
        return np.flatnonzero(self.coherence_order() == p)


def build_nh_jc(params: dict | None = None, variant: str = "single") -> Operator:
    """Non-Hermitian Jaynes-Cummings Hamiltonian.

    ``variant='single'`` returns the single-excitation 2x2 block
    [[w_C - i g_C, g], [g, w_X - i g_X]]; ``variant='full'`` truncates the
    photon ladder at two total excitations (dim 5, including the ground
    state).
    """
    p = dict(PRESETS["nh_jaynes_cummings"])
    p.update(params or {})
    wc = p["omega_c_mev"] - 1j * p["gamma_c_mev"]
    wx = p["omega_x_mev"] - 1j * p["gamma_x_mev"]
    g = p["g_mev"]
    if p["gamma_c_mev"] < 0 or p["gamma_x_mev"] < 0:
        raise InvalidInputError("decay rates must be >= 0")
    if variant == "single":
        H = np.array([[wc, g], [g, wx]])
        return Operator(H, ("cavity", "exciton"))
    if variant != "full":
        raise InvalidInputError(f"unknown variant {variant!r}")
    # basis |n photons, atom>: (0,g), (0,e), (1,g), (1,e), (2,g)
    labels = ("0g", "0e", "1g", "1e", "2g")
    nph = [0, 0, 1, 1, 2]
    atom = [0, 1, 0, 1, 0]
    H = np.zeros((5, 5), dtype=complex)
    for i in range(5):
        H[i, i] = wc * nph[i] + wx * atom[i]
    # g (a^dag sigma_- + a sigma_+): |n+1,g> <-> |n,e| with sqrt(n+1)
    pairs = [((2, 1), 1.0), ((4, 3), np.sqrt(2.0))]  # (|1g>,|0e>), (|2g>,|1e>)
    for (i, j), amp in pairs:
        H[i, j] += g * amp
        H[j, i] += g * amp
    return Operator(H, labels)


def nh_jc_excitations(variant: str = "single") -> tuple[int, ...]:
    return (1, 1) if variant == "single" else (0, 1, 1, 2, 2)


def build_polariton_vibron(params: dict | None = None) -> Operator:
    """Polariton doublet plus a vibron leakage channel (single excitation).

    The vibron level (w_V - i g_V) couples to the exciton with strength J;
    J = 0 leaves the vibron exactly block-decoupled.
    """
    p = dict(PRESETS["polariton_vibron"])
    p.update(params or {})
    if p["j_mev"] < 0:
        raise InvalidInputError("J must be >= 0")
    wc = p["omega_c_mev"] - 1j * p["gamma_c_mev"]
    wx = p["omega_x_mev"] - 1j * p["gamma_x_mev"]
    wv = p["omega_v_mev"] - 1j * p["gamma_v_mev"]
    g, J = p["g_mev"], p["j_mev"]
    H = np.array(
        [
            [wc, g, 0.0],
            [g, wx, J],
            [0.0, J, wv],
        ]
    )
    return Operator(H, ("cavity", "exciton", "vibron"))


def build_hatano_nelson(params: dict | None = None, seed: int | None = None) -> Operator:
    """Hatano-Nelson ring: non-reciprocal hopping t e^{+-h} with periodic
    boundary, on-site disorder V_j ~ U[-W/2, W/2] and loss -i Gamma_j.

    ``h`` defaults to flux/N when a flux is given. The two links touching
    ``probe_site`` carry ``t_probe`` instead of ``t_hop``, so the probe can
    be weakly coupled to (or fully decoupled from) the lossy bulk; the probe
    site itself is lossless and disorder-free. Disorder uses a counter-based
    Philox generator keyed by the seed, so identical seeds give bit-identical
    draws.
    """
    p = dict(PRESETS["hatano_nelson_ring"])
    p.update(params or {})
    n = int(p["n_sites"])
    if n < 2:
        raise InvalidInputError("n_sites must be >= 2")
    t = p["t_hop"]
    h = p.get("h")
    if p.get("flux"):
        h = p["flux"] / n
    W = p.get("disorder_w", 0.0)
    probe = int(p.get("probe_site", 0)) % n
    t_probe = p.get("t_probe", t)
    H = np.zeros((n, n), dtype=complex)
    for j in range(n):
        amp = t_probe if probe in (j, (j + 1) % n) else t
        H[(j + 1) % n, j] += amp * np.exp(h)
        H[j, (j + 1) % n] += amp * np.exp(-h)
    if W:
        rng = np.random.Generator(np.random.Philox(seed if seed is not None else 0))
        V = rng.uniform(-W / 2, W / 2, size=n)
        V[probe] = 0.0
        H[np.diag_indices(n)] += V
    gb = p.get("gamma_bulk", 0.0)
    if gb:
        gam = np.full(n, gb, dtype=float)
        gam[probe] = 0.0
        H[np.diag_indices(n)] += -1j * gam
    return Operator(H, tuple(f"site{j}" for j in range(n)))


def rotating_frame(H, excitations, carrier_mev: float) -> Operator:
    """Shift each basis state down by carrier * excitation number.

    Exact for excitation-conserving Hamiltonians; detection picks up the
    carrier phase, so only reported frequencies shift, not decay rates.
    """
    M = as_matrix(H).copy()
    exc = np.asarray(excitations, dtype=float)
    M[np.diag_indices_from(M)] -= carrier_mev * exc
    labels = H.basis_labels if isinstance(H, Operator) else None
    return Operator(M, labels)


def hamiltonian_to_liouvillian(
    H, excitations, extra_dephasing=None
) -> tuple[Operator, LiouvilleSpace]:
    """Liouvillian L = -i (H (x) I - I (x) H*) on row-major vec(rho).

    ``excitations`` gives the excitation number of each Hilbert basis state,
    which fixes the coherence-order grading. ``extra_dephasing`` adds pure
    dephasing: rho_ij picks up -(d_i + d_j)/2 for i != j.
    """
    M = as_matrix(H)
    n = M.shape[0]
    if len(excitations) != n:
        raise InvalidInputError("excitations length must match Hamiltonian dim")
    eye = np.eye(n)
    L = -1j * (np.kron(M, eye) - np.kron(eye, M.conj()))
    if extra_dephasing is not None:
        d = np.asarray(extra_dephasing, dtype=float)
        if d.shape != (n,):
            raise InvalidInputError("extra_dephasing must have one rate per state")
        rates = (d[:, None] + d[None, :]) / 2.0
        np.fill_diagonal(rates, 0.0)
        L -= np.diag(rates.ravel())
    labels = H.basis_labels if isinstance(H, Operator) else tuple(map(str, range(n)))
    lio_labels = tuple(f"{a}><{b}" for a in labels for b in labels)
    space = LiouvilleSpace(hilbert_dim=n, excitation_number=tuple(int(e) for e in excitations))
    return Operator(L, lio_labels), space


def winding_number(params: dict | None = None, base_energy: complex = 0.0,
                   seed: int | None = None, points_per_site: int = 10) -> int:
    """Spectral winding of det(H(k) - E) as the boundary twist k runs over
    [0, 2pi). Disorder and losses are included via the full ring matrix with
    a twisted boundary link.
    """
    p = dict(PRESETS["hatano_nelson_ring"])
    p.update(params or {})
    n = int(p["n_sites"])
    H0 = build_hatano_nelson(p, seed=seed).entries.copy()
    t = p["t_hop"]
    h = p["h"] if not p.get("flux") else p["flux"] / n
    npts = max(points_per_site * n, 50)
    ks = np.linspace(0.0, 2 * np.pi, npts + 1)
    phases = np.empty(npts + 1)
    min_abs = np.inf
    for idx, k in enumerate(ks):
        Hk = H0.copy()
        # twist the single boundary link (whatever amplitude it carries)
        Hk[0, n - 1] = H0[0, n - 1] * np.exp(1j * k)
        Hk[n - 1, 0] = H0[n - 1, 0] * np.exp(-1j * k)
        ev = np.linalg.eigvals(Hk)
        min_abs = min(min_abs, float(np.min(np.abs(ev - base_energy))))
        sign, logdet = np.linalg.slogdet(Hk - base_energy * np.eye(n))
        phases[idx] = np.angle(sign)
    if min_abs < 1e-9:
        raise SingularBaseError(
            f"base energy within {min_abs:.3e} of the spectral curve"
        )
    unwrapped = np.unwrap(phases)
    w = (unwrapped[-1] - unwrapped[0]) / (2 * np.pi)
    return int(np.rint(w))


@dataclass(frozen=True)
class AssembledModel:
    """Ground state + excitation manifold + dipole, ready for response runs."""

    hamiltonian: Operator  # includes the ground state at index 0
    dipole: Operator
    excitations: tuple[int, ...]
    spec: ModelSpec

    def liouvillian(self, extra_dephasing=None):
        return hamiltonian_to_liouvillian(
            self.hamiltonian, self.excitations, extra_dephasing
        )

    def ground_density(self) -> np.ndarray:
        n = self.hamiltonian.dim
        rho = np.zeros((n, n), dtype=complex)
        rho[0, 0] = 1.0
        return rho


def _embed_with_ground(block: Operator, dipole_weights):
    n = block.dim
    H = np.zeros((n + 1, n + 1), dtype=complex)
    H[1:, 1:] = block.entries
    d = np.asarray(dipole_weights, dtype=complex)
    mu = np.zeros((n + 1, n + 1), dtype=complex)
    mu[0, 1:] = d
    mu[1:, 0] = d.conj()
    labels = ("ground",) + block.basis_labels
    return H, mu, labels


def assemble(spec: ModelSpec) -> AssembledModel:
    """Build the full Hamiltonian (with ground state), dipole and grading."""
    p = spec.params
    if spec.kind == "polariton_vibron":
        block = build_polariton_vibron(p)
        d = [p["mu_c"], p["mu_x"], p["mu_v"]]
        H, mu, labels = _embed_with_ground(block, d)
        exc = (0, 1, 1, 1)
    elif spec.kind == "nh_jaynes_cummings":
        block = build_nh_jc(p, variant="single")
        d = [p.get("mu_c", 1.0), p.get("mu_x", 0.0)]
        H, mu, labels = _embed_with_ground(block, d)
        exc = (0, 1, 1)
    elif spec.kind == "hatano_nelson_ring":
        block = build_hatano_nelson(p, seed=spec.disorder_seed)
        n = block.dim
        probe = int(p.get("probe_site", 0)) % n
        mode = p.get("probe_mode", "bloch")
        if mode == "site":
            d = np.zeros(n, dtype=complex)
            d[probe] = 1.0
        elif mode == "none":
            d = np.zeros(n, dtype=complex)
        else:  # bloch: phase-matched uniform probe selecting the k=0 channel
            d = np.ones(n, dtype=complex) / np.sqrt(n)
        H, mu, labels = _embed_with_ground(block, d)
        exc = (0,) + (1,) * n
    elif spec.kind == "custom":
        raise InvalidInputError("custom models must be assembled by the caller")
    else:  # pragma: no cover
        raise InvalidInputError(f"unknown model kind {spec.kind}")
    return AssembledModel(
        hamiltonian=Operator(H, labels),
        dipole=Operator(mu, labels),
        excitations=exc,
        spec=spec,
    )

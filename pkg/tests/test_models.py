import numpy as np
import pytest
import scipy.linalg as la

from wfs_lab.errors import InvalidInputError, SingularBaseError
from wfs_lab.models import (
    PRESETS,
    LiouvilleSpace,
    ModelSpec,
    assemble,
    build_hatano_nelson,
    build_nh_jc,
    build_polariton_vibron,
    hamiltonian_to_liouvillian,
    rotating_frame,
    winding_number,
)
from wfs_lab.spectral import matrix_exp


# ---------------------------------------------------------------------------
# ModelSpec / presets


def test_preset_merge_and_override():
    spec = ModelSpec("polariton_vibron", {"j_mev": 9.0})
    assert spec.params["j_mev"] == 9.0
    assert spec.params["g_mev"] == PRESETS["polariton_vibron"]["g_mev"]


def test_unknown_kind_rejected():
    with pytest.raises(InvalidInputError):
        ModelSpec("nonsense")


def test_negative_decay_rejected():
    with pytest.raises(InvalidInputError):
        ModelSpec("nh_jaynes_cummings", {"gamma_x_mev": -1.0})


def test_non_finite_parameter_rejected():
    with pytest.raises(InvalidInputError):
        ModelSpec("polariton_vibron", {"j_mev": np.nan})


# ---------------------------------------------------------------------------
# builders


def test_nh_jc_single_block_values():
    H = build_nh_jc({"g_mev": 3.0}).entries
    p = PRESETS["nh_jaynes_cummings"]
    assert H[0, 0] == p["omega_c_mev"] - 1j * p["gamma_c_mev"]
    assert H[1, 1] == p["omega_x_mev"] - 1j * p["gamma_x_mev"]
    assert H[0, 1] == H[1, 0] == 3.0


def test_nh_jc_full_ladder_couplings():
    H = build_nh_jc(variant="full").entries
    g = PRESETS["nh_jaynes_cummings"]["g_mev"]
    assert H[2, 1] == pytest.approx(g)
    assert H[4, 3] == pytest.approx(g * np.sqrt(2.0))


def test_polariton_vibron_decouples_at_j_zero():
    H = build_polariton_vibron({"j_mev": 0.0}).entries
    assert H[1, 2] == 0.0 and H[2, 1] == 0.0


def test_polariton_branch_rates_at_resonance():
    # both polariton amplitudes decay at (gamma_c + gamma_x)/2 = 12 when
    # the vibron is decoupled
    H = build_polariton_vibron({"j_mev": 0.0}).entries
    w = la.eigvals(H[:2, :2])
    assert np.allclose(-w.imag, [12.0, 12.0], atol=1e-10)


def test_hatano_nelson_structure():
    H = build_hatano_nelson().entries
    p = PRESETS["hatano_nelson_ring"]
    n, t, h = p["n_sites"], p["t_hop"], p["h"]
    # non-reciprocal bulk link away from the probe
    assert H[6, 5] == pytest.approx(t * np.exp(h))
    assert H[5, 6] == pytest.approx(t * np.exp(-h))
    # bulk loss present, probe site lossless
    assert H[5, 5] == pytest.approx(-1j * p["gamma_bulk"])
    assert H[0, 0] == 0.0


def test_hatano_nelson_probe_links_and_disorder_free_probe():
    H = build_hatano_nelson({"t_probe": 1e-3, "disorder_w": 2.0}, seed=7).entries
    # the two links touching site 0 carry t_probe
    assert abs(H[1, 0]) == pytest.approx(1e-3 * np.exp(0.5))
    assert abs(H[0, 19]) == pytest.approx(1e-3 * np.exp(0.5))
    assert H[0, 0] == 0.0  # no disorder, no loss on the probe site
    # disorder is deterministic in the seed
    H2 = build_hatano_nelson({"t_probe": 1e-3, "disorder_w": 2.0}, seed=7).entries
    assert np.array_equal(H, H2)
    H3 = build_hatano_nelson({"t_probe": 1e-3, "disorder_w": 2.0}, seed=8).entries
    assert not np.array_equal(H, H3)


# ---------------------------------------------------------------------------
# rotating frame


def test_rotating_frame_is_exact_for_conserving_h():
    # e^{-iHt} and the frame-shifted propagator differ only by carrier
    # phases per excitation sector
    H = build_nh_jc()
    exc = (1, 1)
    carrier = 2000.0
    t = 0.37
    Hr = rotating_frame(H, exc, carrier)
    U = matrix_exp(-1j * H.entries, t).entries
    Ur = matrix_exp(-1j * Hr.entries, t).entries
    phases = np.exp(1j * carrier * np.asarray(exc) * t)
    assert np.allclose(U, Ur / phases[:, None] * np.ones((1, 2)), atol=1e-10) or \
        np.allclose(U, np.diag(1 / phases) @ Ur, atol=1e-10)


def test_rotating_frame_preserves_decay_rates():
    H = build_polariton_vibron()
    Hr = rotating_frame(H, (1, 1, 1), 2000.0)
    assert np.allclose(
        sorted(la.eigvals(H.entries).imag), sorted(la.eigvals(Hr.entries).imag)
    )


# ---------------------------------------------------------------------------
# Liouvillian


def test_liouvillian_dimension_and_grading():
    spec = ModelSpec("polariton_vibron")
    model = assemble(spec)
    L, space = model.liouvillian()
    assert L.dim == 16
    assert space.hilbert_dim == 4
    p = space.coherence_order()
    assert sorted(set(p)) == [-1, 0, 1]
    assert np.sum(p == 1) == 3  # three single-excitation kets against ground


def test_liouvillian_matches_schroedinger_evolution():
    spec = ModelSpec("nh_jaynes_cummings")
    model = assemble(spec)
    H = model.hamiltonian.entries
    L, _ = model.liouvillian()
    rho0 = model.dipole.entries @ model.ground_density()
    t = 0.002
    vec_t = matrix_exp(L.entries, t).entries @ rho0.ravel()
    U = matrix_exp(-1j * H, t).entries
    want = (U @ rho0 @ U.conj().T).ravel()
    assert np.allclose(vec_t, want, atol=1e-10)


def test_extra_dephasing_only_hits_coherences():
    H = np.diag([0.0, 1.0])
    L, _ = hamiltonian_to_liouvillian(H, (0, 1), extra_dephasing=[0.0, 2.0])
    Ld = L.entries
    # populations untouched, coherences pick up -(0+2)/2 = -1
    assert Ld[0, 0] == 0.0
    assert Ld[3, 3] == 0.0
    assert Ld[1, 1].real == pytest.approx(-1.0)
    assert Ld[2, 2].real == pytest.approx(-1.0)


def test_liouville_space_validation():
    with pytest.raises(InvalidInputError):
        LiouvilleSpace(hilbert_dim=3, excitation_number=(0, 1))


# ---------------------------------------------------------------------------
# winding number


def test_winding_sign_follows_h():
    assert winding_number({"disorder_w": 0.0, "h": 0.5, "gamma_bulk": 0.0,
                           "t_probe": 1.0}) == 1
    assert winding_number({"disorder_w": 0.0, "h": -0.5, "gamma_bulk": 0.0,
                           "t_probe": 1.0}) == -1


def test_winding_outside_spectral_loop_is_zero():
    w = winding_number({"disorder_w": 0.0, "gamma_bulk": 0.0, "t_probe": 1.0},
                       base_energy=10.0)
    assert w == 0


def test_winding_on_spectral_curve_rejected():
    # E = 2 t cosh(h) is on the k = 0 branch of the clean dispersion
    p = {"disorder_w": 0.0, "gamma_bulk": 0.0, "t_probe": 1.0}
    E = 2.0 * np.cosh(0.5)
    with pytest.raises(SingularBaseError):
        winding_number(p, base_energy=E)


# ---------------------------------------------------------------------------
# assemble


def test_assemble_embeds_ground_state():
    model = assemble(ModelSpec("nh_jaynes_cummings"))
    H = model.hamiltonian.entries
    assert H.shape == (3, 3)
    assert H[0, 0] == 0.0
    assert model.excitations == (0, 1, 1)
    assert model.hamiltonian.basis_labels[0] == "ground"
    mu = model.dipole.entries
    assert mu[0, 1] == 1.0 and mu[0, 2] == 0.0


def test_assemble_hn_probe_modes():
    site = assemble(ModelSpec("hatano_nelson_ring", {"probe_mode": "site"}))
    assert np.flatnonzero(site.dipole.entries[0, 1:]).tolist() == [0]
    dark = assemble(ModelSpec("hatano_nelson_ring", {"probe_mode": "none"}))
    assert np.all(dark.dipole.entries == 0)
    bloch = assemble(ModelSpec("hatano_nelson_ring", {"probe_mode": "bloch"}))
    assert np.allclose(np.abs(bloch.dipole.entries[0, 1:]), 1 / np.sqrt(20))


def test_assemble_custom_rejected():
    with pytest.raises(InvalidInputError):
        assemble(ModelSpec("custom"))


def test_ground_density():
    model = assemble(ModelSpec("polariton_vibron"))
    rho = model.ground_density()
    assert rho[0, 0] == 1.0 and np.sum(np.abs(rho)) == 1.0

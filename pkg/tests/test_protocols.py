import numpy as np
import pytest

from wfs_lab.errors import (
    AliasingError,
    ChannelAmbiguityError,
    InvalidInputError,
    ProtocolError,
)
from wfs_lab.models import ModelSpec, assemble
from wfs_lab.protocols import (
    IsolationReport,
    f_iso,
    hfs_project,
    hwh_tomography,
    insulation_certificate,
    sweep,
    wfs_map,
)
from wfs_lab.response import Axis, ResponseGrid


TAU = np.arange(126) * 0.004


def _polariton(j):
    return assemble(ModelSpec("polariton_vibron", {"j_mev": float(j)}))


# ---------------------------------------------------------------------------
# coherence-order projection


def _phase_grid(orders_amps, M=9, extra_len=5):
    phi = np.linspace(0.0, 2 * np.pi, M, endpoint=False)
    t = np.arange(extra_len) * 0.1
    vals = np.zeros((extra_len, M), dtype=complex)
    for p, a in orders_amps:
        vals += a * np.outer(np.arange(1, extra_len + 1), np.exp(1j * p * phi))
    return ResponseGrid(
        axes=(Axis("t", "time", t), Axis("phi", "phase", phi)), values=vals
    )


def test_hfs_projection_is_orthogonal():
    g = _phase_grid([(-1, 2.0), (0, 0.5), (3, 0.25)])
    s1 = hfs_project(g, -1)
    assert np.allclose(s1.values, 2.0 * np.arange(1, 6), atol=1e-14)
    s2 = hfs_project(g, 2)
    assert np.max(np.abs(s2.values)) < 1e-14


def test_hfs_components_resum_to_signal():
    g = _phase_grid([(-1, 1.0), (1, 0.7), (2, 0.1)])
    phi = g.axes[1].samples
    total = np.zeros_like(g.values)
    for p in range(-4, 5):
        comp = hfs_project(g, p).values
        total += comp[:, None] * np.exp(1j * p * phi)[None, :]
    assert np.max(np.abs(total - g.values)) < 1e-12


def test_hfs_aliasing_guard():
    g = _phase_grid([(0, 1.0)], M=5)
    with pytest.raises(AliasingError):
        hfs_project(g, 3)


def test_hfs_records_order_in_metadata():
    g = _phase_grid([(1, 1.0)])
    assert hfs_project(g, 1).metadata["hodge_order"] == 1


# ---------------------------------------------------------------------------
# isolation metric


def test_f_iso_values():
    assert f_iso(0.0) == 1.0
    assert f_iso(1.0) == 0.5
    assert f_iso(3.0) == 0.25
    with pytest.raises(InvalidInputError):
        f_iso(-0.1)


def test_isolation_report_consistency_enforced():
    with pytest.raises(InvalidInputError):
        IsolationReport(f_iso=0.9, cross_integral=0.0, channel_poles=None,
                        window=None, method="amplitude")


# ---------------------------------------------------------------------------
# wfs_map


def test_wfs_decoupled_model_is_perfectly_isolated():
    res = wfs_map(_polariton(0.0), TAU, TAU, channels=(12.0, 60.0))
    assert res.report.f_iso == 1.0
    assert res.report.cross_amplitude == 0.0


def test_wfs_coupled_model_shows_cross_peak():
    res = wfs_map(_polariton(5.0), TAU, TAU, channels=(12.0, 60.0))
    assert 0.0 < res.report.cross_amplitude < 0.1
    assert res.report.f_iso < 1.0
    # the map exposes both channel rates on its diagonal
    rates = np.abs(res.poles1.poles.real)
    assert np.any(np.abs(rates - 12.0) < 1.0)
    assert np.any(np.abs(rates - 60.0) < 2.0)


def test_wfs_ambiguous_channels_demand_explicit_assignment():
    with pytest.raises(ChannelAmbiguityError):
        wfs_map(_polariton(0.0), TAU, TAU)


def test_wfs_rejects_unknown_metric():
    with pytest.raises(InvalidInputError):
        wfs_map(_polariton(0.0), TAU, TAU, channels=(12.0, 60.0), metric="bogus")


# ---------------------------------------------------------------------------
# sweep


def test_sweep_power_fit_and_determinism():
    vals = [2.0, 4.0, 8.0, 16.0]
    kw = dict(tau1_grid=TAU, tau2_grid=TAU, metric="cross_peak", fit="power",
              channels=(12.0, 60.0))
    r1 = sweep(_polariton, "j_mev", vals, **kw)
    r2 = sweep(_polariton, "j_mev", vals, n_jobs=2, **kw)
    assert np.array_equal(r1.metrics, r2.metrics)  # scheduling-independent
    assert r1.fit["model"] == "power"
    assert r1.fit["exponent"] == pytest.approx(2.0, abs=0.15)
    assert r1.fit["r2"] > 0.99


def test_sweep_fit_skipped_on_floored_metric():
    r = sweep(_polariton, "j_mev", [0.0, 0.0, 0.0, 0.0], TAU, TAU,
              fit="power", channels=(12.0, 60.0))
    assert r.fit is None
    assert any("skipped" in n for n in r.notes)


def test_sweep_validation():
    with pytest.raises(InvalidInputError):
        sweep(_polariton, "j_mev", [1.0, 2.0], TAU, TAU, metric="bogus")
    with pytest.raises(InvalidInputError):
        sweep(_polariton, "j_mev", [1.0, 2.0], TAU, TAU, fit="power")


# ---------------------------------------------------------------------------
# certificate


def _report(f):
    c = 1.0 / f - 1.0
    return IsolationReport(f_iso=1.0 / (1.0 + c), cross_integral=c,
                           channel_poles=None, window=None, method="amplitude")


def test_certificate_insulated():
    out = insulation_certificate([_report(0.99999)])
    assert out["verdict"] == "insulated"


def test_certificate_weight_mixed():
    out = insulation_certificate([_report(0.5)])
    assert out["verdict"] == "weight-mixed"


def test_certificate_indeterminate_between_thresholds():
    out = insulation_certificate([_report(0.95)])
    assert out["verdict"] == "indeterminate"


def test_certificate_requires_reports():
    with pytest.raises(InvalidInputError):
        insulation_certificate([])


# ---------------------------------------------------------------------------
# hwh tomography


def test_hwh_two_level_single_decay_feature():
    model = assemble(ModelSpec("nh_jaynes_cummings",
                               {"g_mev": 0.0, "gamma_c_mev": 3.0,
                                "gamma_x_mev": 5.0, "mu_c": 1.0, "mu_x": 0.0}))
    dt = 2 * np.pi / 80.0
    t13 = np.arange(32) * dt
    t2 = np.arange(96) * 0.01
    res = hwh_tomography(model, t13, t2, t13, pixel_threshold=1e-6)
    assert res.flagged_pixels == 0
    # two features: the stationary ground-state bleach at s2 = 0, and the
    # cavity population (decay 2*gamma_c = 6 during t2, reading gamma_c = 3
    # after the bra-channel reference subtraction)
    s2_values = {round(p[1], 6) for p in res.peaks}
    assert 0.0 in s2_values
    cell = float(res.s2_axis[np.argmin(np.abs(res.s2_axis - 3.0))])
    assert abs(cell - 3.0) < 0.4
    assert round(cell, 6) in s2_values
    assert all(p[3] == 1 for p in res.peaks)  # all first-order poles
    # the marginal reproduces the zero-waiting-time 2D map
    assert res.s2_marginal().shape == (32, 32)


def test_hwh_raises_when_nothing_clears_threshold():
    model = assemble(ModelSpec("nh_jaynes_cummings", {"mu_c": 0.0, "mu_x": 0.0}))
    dt = 2 * np.pi / 80.0
    t13 = np.arange(16) * dt
    with pytest.raises(ProtocolError):
        hwh_tomography(model, t13, np.arange(48) * 0.01, t13)

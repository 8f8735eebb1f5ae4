"""Second-order coefficients, echoed gate fidelity, and phase matching."""
from __future__ import annotations

import numpy as np
import pytest

from plaqgate.pertgate import (
    COEFF_POLES,
    PertParams,
    WeakCouplingWarning,
    allowed_ratios,
    echo_gate,
    echo_pulse,
    effective_coeffs,
    gate_fidelity,
    gate_time,
    sweep,
    validate_effective,
)

# Root of lambda_z(r) = 1/8, recomputed from the closed form (bisection on
# the pole-free interval); frozen to full precision.
LAMBDA_EIGHTH_ROOT = 0.603501914027303


# ---------------------------------------------------------------------------
# Closed-form coefficients
# ---------------------------------------------------------------------------

def _lambda_z_oracle(r: float) -> float:
    # independent transcription of the closed form
    return (9.0 / r - 8.0 / (r - 3.0) + 2.0 - 24.0 / (r + 1.0) + 1.0 / (2.0 - r)) / 48.0


def _gamma_z_oracle(r: float) -> float:
    return (9.0 / r + 8.0 / (r - 3.0) - 8.0 - 1.0 / (2.0 - r)) / 48.0


def test_coeffs_at_equal_couplings():
    c = effective_coeffs(1.0, 1.0)
    assert abs(c.lambda_z - 1.0 / 12.0) < 1e-12
    assert abs(c.gamma_z - (-1.0 / 12.0)) < 1e-12


@pytest.mark.parametrize("r", [0.07, 0.3, 0.45, 0.61, 0.9])
def test_coeffs_match_oracle(r):
    c = effective_coeffs(1.0, r)
    assert abs(c.lambda_z - _lambda_z_oracle(r)) < 1e-14
    assert abs(c.gamma_z - _gamma_z_oracle(r)) < 1e-14
    assert abs(c.delta_e - 8.0 * (1.0 - r)) < 1e-14


def test_coeffs_scale_with_j():
    # lambda_z and gamma_z depend only on the ratio d/J
    a = effective_coeffs(1.0, 0.3)
    b = effective_coeffs(2.5, 0.75)
    assert abs(a.lambda_z - b.lambda_z) < 1e-13
    assert abs(a.gamma_z - b.gamma_z) < 1e-13


def test_coeff_poles_rejected():
    assert set(COEFF_POLES) == {0.0, 3.0, -1.0, 2.0}
    with pytest.raises(ValueError):
        effective_coeffs(1.0, 2.0)


def test_lambda_eighth_root_location():
    assert abs(_lambda_z_oracle(LAMBDA_EIGHTH_ROOT) - 0.125) < 1e-12
    c = effective_coeffs(1.0, LAMBDA_EIGHTH_ROOT)
    assert abs(c.lambda_z - 0.125) < 1e-12
    # the root is simple: the function crosses the level
    lo = effective_coeffs(1.0, LAMBDA_EIGHTH_ROOT - 1e-4).lambda_z - 0.125
    hi = effective_coeffs(1.0, LAMBDA_EIGHTH_ROOT + 1e-4).lambda_z - 0.125
    assert lo * hi < 0


# ---------------------------------------------------------------------------
# Gate time and parameter validation
# ---------------------------------------------------------------------------

def test_gate_time_reference_point():
    # at the (1,1) allowed ratio lambda_z = 3/16, so t_c = pi/(4 Jp^2 / 16)
    p = PertParams(j=1.0, d=0.45751286149024967, jp=0.1)
    assert abs(gate_time(p) - 400.0 * np.pi) < 1e-6


def test_gate_time_diverges_at_root():
    with pytest.raises(ValueError):
        gate_time(PertParams(j=1.0, d=LAMBDA_EIGHTH_ROOT, jp=0.05))


def test_params_validate_ranges():
    with pytest.raises(ValueError):
        PertParams(j=1.0, d=1.5, jp=0.1)
    with pytest.raises(ValueError):
        PertParams(j=-1.0, d=0.3, jp=0.1)
    with pytest.raises(ValueError):
        PertParams(j=1.0, d=0.3, jp=0.1, n=0)


def test_weak_coupling_warning():
    with pytest.warns(WeakCouplingWarning):
        PertParams(j=1.0, d=0.3, jp=0.9)


# ---------------------------------------------------------------------------
# Echo pulse and echoed gate
# ---------------------------------------------------------------------------

def test_echo_pulse_is_unitary_involution_on_logical_space():
    x = echo_pulse()
    assert np.linalg.norm(x @ x.conj().T - np.eye(256)) < 1e-10
    assert np.linalg.norm(x @ x - np.eye(256)) < 1e-10


def test_physical_echo_matches_ideal_on_logical_subspace():
    from plaqgate.pertgate import _logical_isometry

    iso = _logical_isometry()
    ideal = iso.conj().T @ echo_pulse(physical=False) @ iso
    phys = iso.conj().T @ echo_pulse(physical=True) @ iso
    # equal up to a global phase
    overlap = np.trace(ideal.conj().T @ phys) / 4.0
    assert abs(abs(overlap) - 1.0) < 1e-10


def test_echo_gate_is_unitary():
    p = PertParams(j=1.0, d=0.3, jp=0.05)
    u = echo_gate(p)
    assert np.linalg.norm(u @ u.conj().T - np.eye(256)) < 1e-9


# ---------------------------------------------------------------------------
# Fidelity against the second-order prediction (figure-style sweep values)
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "jp,expected",
    [(0.05, 0.9892), (0.1, 0.9734), (0.2, 0.9106)],
)
def test_effective_fidelity_frozen_values(jp, expected):
    rep = gate_fidelity(PertParams(j=1.0, d=0.3, jp=jp), target="effective")
    assert abs(rep.fidelity - expected) < 5e-4


def test_sweep_rows_and_order():
    rows = sweep([0.29, 0.3], [0.05, 0.1])
    assert [(r["Jp_over_J"], r["d_over_J"]) for r in rows] == [
        (0.05, 0.29),
        (0.05, 0.3),
        (0.1, 0.29),
        (0.1, 0.3),
    ]
    assert all(0.0 <= r["F"] <= 1.0 for r in rows)
    assert all(r["leakage"] >= 0.0 for r in rows)


def test_sweep_skips_poles():
    rows = sweep([0.05, 2.0], [0.05])
    assert len(rows) == 1


# ---------------------------------------------------------------------------
# Allowed ratios and phase-matching back-substitution
# ---------------------------------------------------------------------------

def test_allowed_ratio_1_1():
    ratios = allowed_ratios(1, 1)
    assert any(abs(r - 0.45751286149024967) < 1e-10 for r in ratios)


def test_allowed_ratio_3_4():
    ratios = allowed_ratios(3, 4)
    assert any(abs(r - 0.43420855078697207) < 1e-10 for r in ratios)


@pytest.mark.parametrize("n,m", [(1, 1), (3, 4)])
def test_allowed_ratios_back_substitution(n, m):
    for r in allowed_ratios(n, m):
        assert 0.0 < r < 1.0
        p = PertParams(j=1.0, d=r, jp=0.1, n=n, m=m)
        t_c = gate_time(p)
        c = effective_coeffs(1.0, r)
        phi_zz = p.jp**2 * (c.lambda_z - 0.125) * t_c
        phi_heis = p.jp**2 / 8.0 * t_c
        assert abs(phi_zz - (2 * n - 1) * np.pi / 4.0) < 1e-8
        assert abs(phi_heis - m * np.pi / 2.0) < 1e-8


def test_corrected_cphase_fidelity_at_allowed_point():
    # frozen trace values at the (1,1) allowed ratio
    r = 0.45751286149024967
    for jp, expected in [(0.01, 0.998849), (0.05, 0.971794), (0.1, 0.896316)]:
        rep = gate_fidelity(PertParams(j=1.0, d=r, jp=jp))
        assert abs(rep.fidelity - expected) < 5e-4


def test_corrected_cphase_with_physical_echo():
    r = 0.45751286149024967
    rep = gate_fidelity(PertParams(j=1.0, d=r, jp=0.05), physical_x=True)
    assert abs(rep.fidelity - 0.971719) < 5e-4


def test_fidelity_targets_disagree_off_matching():
    # away from an allowed ratio the literal controlled-phase target is low
    # while the effective-evolution target stays high
    p = PertParams(j=1.0, d=0.3, jp=0.05)
    eff = gate_fidelity(p, target="effective").fidelity
    corr = gate_fidelity(p, target="corrected_cphase").fidelity
    assert eff > 0.98
    assert corr < 0.9


def test_validate_effective_deviation_is_second_order():
    # the neglected terms scale as (J'/J)^2: halving J' quarters the deviation
    devs = [
        validate_effective(PertParams(j=1.0, d=0.3, jp=jp), horizon=5.0)
        for jp in (0.1, 0.05, 0.025)
    ]
    assert devs[0] < 0.1
    for coarse, fine in zip(devs, devs[1:]):
        assert fine < coarse / 3.0

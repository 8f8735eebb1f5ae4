"""Two-band ladder: energy ledgers, Fock-space algebra, and return phases."""
from __future__ import annotations

import warnings
from fractions import Fraction as Fr

import numpy as np
import pytest

from plaqgate import geophase as gp

U0, T = 50.0, 1.0
OMEGA = 600.0

# all interactions equal: fine for dynamics of individual links
PB = gp.OnsiteParams(mu_l=OMEGA, mu_r=0.0, omega=OMEGA, u_l_aa=U0, u_r_aa=U0,
                     u_r_bb=U0, u_r_ab=U0, t=T)
PF = gp.OnsiteParams(mu_l=OMEGA + U0, mu_r=0.0, omega=OMEGA, u_l_aa=U0,
                     u_r_aa=U0, u_r_bb=U0, u_r_ab=U0, t=T)
# generic left repulsion: equal couplings make the (2, n_a) rows accidentally
# resonant (2 U_L^aa = 2 U_R^ab), which would mask the universal resonant set
PB_TAB = gp.OnsiteParams(mu_l=OMEGA, mu_r=0.0, omega=OMEGA, u_l_aa=77.3,
                         u_r_aa=U0, u_r_bb=U0, u_r_ab=U0, t=T)
PF_TAB = gp.OnsiteParams(mu_l=OMEGA + U0, mu_r=0.0, omega=OMEGA, u_l_aa=77.3,
                         u_r_aa=U0, u_r_bb=U0, u_r_ab=U0, t=T)

# frozen first-order energy-cost rows (c0, c1, c2) keyed by (n_L, n_R_a, j_R):
# delta_E1 = c0 (Delta - omega) + c1 U_L^aa + c2 U_R^ab, initial minus final
GOLD_BOSON = {
    (1, 0, Fr(1, 2)): (1, 0, 0),
    (1, 1, Fr(0)): (1, 0, 0),
    (1, 1, Fr(1)): (1, 0, -2),
    (1, 2, Fr(1, 2)): (1, 0, -1),
    (1, 2, Fr(3, 2)): (1, 0, -4),
    (2, 1, Fr(0)): (1, 2, 0),
    (2, 1, Fr(1)): (1, 2, -2),
    (2, 2, Fr(1, 2)): (1, 2, -1),
    (2, 2, Fr(3, 2)): (1, 2, -4),
}
GOLD_FERMION = {
    (1, 0, Fr(1, 2)): (1, 0, 0),
    (1, 1, Fr(0)): (1, 0, -2),
    (1, 1, Fr(1)): (1, 0, 0),
    (1, 2, Fr(1, 2)): (1, 0, -1),
    (2, 1, Fr(0)): (1, 1, -2),
    (2, 1, Fr(1)): (1, 1, 0),
    (2, 2, Fr(1, 2)): (1, 1, -1),
}


# ---------------------------------------------------------------------------
# Number configurations
# ---------------------------------------------------------------------------

def test_number_config_triangle_rule():
    gp.NumberConfig(1, 2, 1, Fr(1, 2))
    with pytest.raises(ValueError):
        gp.NumberConfig(1, 2, 1, Fr(5, 2))  # violates |j| <= (n_a + n_b)/2
    with pytest.raises(ValueError):
        gp.NumberConfig(1, 1, 1, Fr(1, 2))  # wrong parity for two particles


def test_number_config_accepts_float_spin():
    cfg = gp.NumberConfig(1, 2, 1, 0.5)
    assert cfg.j_r == Fr(1, 2)


# ---------------------------------------------------------------------------
# Ledger coefficients and resonant sets
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "statistics,gold,params,expected_resonant",
    [
        ("boson", GOLD_BOSON, PB_TAB, {(1, 0, Fr(1, 2)), (1, 1, Fr(0))}),
        ("fermion", GOLD_FERMION, PF_TAB, {(1, 2, Fr(1, 2))}),
    ],
)
def test_golden_ledger_rows(statistics, gold, params, expected_resonant):
    entries = gp.resonance_table(params, statistics)
    assert len(entries) == len(gold)
    resonant = set()
    for e in entries:
        key = (e.config.n_l, e.config.n_r_a, e.config.j_r)
        assert (int(e.c0), int(e.c1), int(e.c2)) == gold[key]
        val, _ = gp.delta_e1(e.config, params, statistics)
        assert abs(val - e.evaluate(params)) < 1e-12
        if e.resonant_at_bias:
            resonant.add(key)
    assert resonant == expected_resonant


def test_detuned_bias_gives_empty_resonant_set():
    detuned = gp.OnsiteParams(mu_l=OMEGA + 10 * U0, mu_r=0.0, omega=OMEGA,
                              u_l_aa=U0, u_r_aa=U0, u_r_bb=U0, u_r_ab=U0, t=T)
    assert not any(e.resonant_at_bias for e in gp.resonance_table(detuned, "boson"))


def test_coefficients_are_exact_rationals():
    for stat in ("boson", "fermion"):
        for e in gp.resonance_table(PB_TAB if stat == "boson" else PF_TAB, stat):
            for c in (e.c0, e.c1, e.c2):
                assert isinstance(c, Fr)


@pytest.mark.parametrize("statistics,params", [("boson", PB), ("fermion", PF)])
def test_ledger_matches_exact_eigenvalue_differences(statistics, params):
    """First-order formula vs exact block eigenvalues of the onsite model."""
    space = gp.TwoBandFockSpace(statistics)
    h = gp.onsite_hamiltonian(params, statistics, space)

    for cfg in gp.table_configs(statistics):
        # initial block: (n_L, n_R_a, 0), spin-independent energy
        before = [
            i for i, occ in enumerate(space.occupations)
            if occ[0] + occ[1] == cfg.n_l
            and occ[2] + occ[3] == cfg.n_r_a
            and occ[4] + occ[5] == 0
        ]
        eb = np.linalg.eigvalsh(h[np.ix_(before, before)])
        assert np.ptp(eb) < 1e-9

        # final block: one particle moved into the upper right orbital,
        # classified by the right-site channel spin
        after = [
            i for i, occ in enumerate(space.occupations)
            if occ[0] + occ[1] == cfg.n_l - 1
            and occ[2] + occ[3] == cfg.n_r_a
            and occ[4] + occ[5] == 1
        ]
        ha = h[np.ix_(after, after)]
        j2r = space.total_spin_squared(gp.RIGHT_ORBITAL_PAIRS)[np.ix_(after, after)]
        w, v = np.linalg.eigh(ha)
        target = float(cfg.j_r * (cfg.j_r + 1))
        hits = [
            k for k in range(len(w))
            if abs(np.real(np.vdot(v[:, k], j2r @ v[:, k])) - target) < 1e-8
        ]
        assert hits
        energies = {round(w[k], 9) for k in hits}
        assert len(energies) == 1

        val, _ = gp.delta_e1(cfg, params, statistics)
        assert abs(val - (eb[0] - w[hits[0]])) < 1e-10


def test_ledger_csv_is_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    gp.export_ledger_csv(gp.resonance_table(PB_TAB, "boson"), a)
    gp.export_ledger_csv(gp.resonance_table(PB_TAB, "boson"), b)
    assert a.read_bytes() == b.read_bytes()


# ---------------------------------------------------------------------------
# Fock space algebra
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("statistics", ["boson", "fermion"])
def test_commutation_relations(statistics):
    space = gp.TwoBandFockSpace(statistics)
    assert space.commutation_residual() <= 1e-12


def test_dims():
    assert gp.TwoBandFockSpace("boson").dim == 3**6
    assert gp.TwoBandFockSpace("fermion").dim == 2**6


def test_schwinger_identity():
    assert gp.schwinger_identity_check(gp.TwoBandFockSpace("boson")) <= 1e-12


def test_schwinger_check_is_boson_only():
    with pytest.raises(ValueError):
        gp.schwinger_identity_check(gp.TwoBandFockSpace("fermion"))


@pytest.mark.parametrize("statistics,params", [("boson", PB), ("fermion", PF)])
def test_onsite_hamiltonian_conservation_laws(statistics, params):
    space = gp.TwoBandFockSpace(statistics)
    h = gp.onsite_hamiltonian(params, statistics, space)
    n_total = sum(space.number_op(m) for m in range(6))
    assert np.abs(h @ n_total - n_total @ h).max() < 1e-9
    # spin conservation holds on the truncation-free block
    phys = space.physical_indices()
    hp = h[np.ix_(phys, phys)]
    s2 = space.total_spin_squared()[np.ix_(phys, phys)]
    assert np.abs(hp @ s2 - s2 @ hp).max() < 1e-8


@pytest.mark.parametrize("statistics,params", [("boson", PB), ("fermion", PF)])
def test_single_particle_ground_state(statistics, params):
    space = gp.TwoBandFockSpace(statistics)
    h = gp.onsite_hamiltonian(params, statistics, space)
    one = space.sector_indices(1)
    evals = np.linalg.eigvalsh(h[np.ix_(one, one)])
    assert abs(evals.min() - min(params.mu_l, params.mu_r)) < 1e-10


# ---------------------------------------------------------------------------
# Link dynamics: resonant pi phases, off-resonant suppression
# ---------------------------------------------------------------------------

def test_resonant_boson_link_phase():
    t_ret, phase, leak = gp.link_tunneling_phase(1, 0, Fr(1, 2), PB, "boson")
    assert abs(t_ret - np.pi / T) < 1e-3
    assert abs(abs(phase) - np.pi) < 1e-2
    assert leak < 1e-6


def test_resonant_fermion_link_phase():
    _, phase, _ = gp.link_tunneling_phase(1, 2, Fr(1, 2), PF, "fermion")
    assert abs(abs(phase) - np.pi) < 1e-2


def test_resonant_phase_independent_of_tunneling_rate():
    for tt in (0.5, 2.0):
        p = gp.OnsiteParams(mu_l=OMEGA, mu_r=0.0, omega=OMEGA, u_l_aa=U0,
                            u_r_aa=U0, u_r_bb=U0, u_r_ab=U0, t=tt)
        t_ret, phase, _ = gp.link_tunneling_phase(1, 0, Fr(1, 2), p, "boson")
        assert abs(t_ret - np.pi / tt) < 1e-2
        assert abs(abs(phase) - np.pi) < 1e-2


def test_off_resonant_links_suppressed():
    _, phase, leak = gp.link_tunneling_phase(1, 1, Fr(1), PB, "boson")
    assert abs(phase) <= 0.1
    assert leak <= 4.0 * (T / (2.0 * U0)) ** 2 * 1.05
    for j in (Fr(0), Fr(1)):
        _, phase, _ = gp.link_tunneling_phase(1, 1, j, PF, "fermion")
        assert abs(phase) <= 0.1


@pytest.mark.parametrize("u", [25.0, 50.0, 100.0])
def test_peak_leakage_bound(u):
    # transient depletion of an off-resonant link obeys leak <= 4 n_L (t/dE)^2
    p = gp.OnsiteParams(mu_l=OMEGA, mu_r=0.0, omega=OMEGA, u_l_aa=u, u_r_aa=u,
                        u_r_bb=u, u_r_ab=u, t=T)
    peak = gp.link_peak_leakage(1, 1, Fr(1), p, "boson")
    assert peak <= 4.0 * (T / (2.0 * u)) ** 2 * 1.02


# ---------------------------------------------------------------------------
# Sector phases
# ---------------------------------------------------------------------------

def test_boson_sector_phase_pattern():
    _, ph_ss, _ = gp.tunneling_phase("SS", PB_TAB, "boson")
    assert abs(abs(ph_ss) - 2.0 * np.pi) < 2e-2
    _, ph_st, _ = gp.tunneling_phase("ST", PB_TAB, "boson")
    assert abs(abs(ph_st) - np.pi) < 0.15
    for sector in ("TS", "TT"):
        _, ph, _ = gp.tunneling_phase(sector, PB_TAB, "boson")
        assert abs(ph) < 0.15


def test_fermion_sector_phase_pattern():
    _, ph_ts, _ = gp.tunneling_phase("TS", PF_TAB, "fermion")
    assert abs(abs(ph_ts) - np.pi) < 0.15
    for sector in ("SS", "ST", "TT"):
        _, ph, _ = gp.tunneling_phase(sector, PF_TAB, "fermion")
        assert abs(ph) < 0.15


def test_unknown_sector_rejected():
    with pytest.raises(ValueError):
        gp.tunneling_phase("XX", PB_TAB, "boson")


# ---------------------------------------------------------------------------
# Parameter validation
# ---------------------------------------------------------------------------

def test_rwa_validity_warning():
    with pytest.warns(gp.RWAValidityWarning):
        gp.OnsiteParams(mu_l=0.0, mu_r=0.0, omega=100.0, u_l_aa=1.0, u_r_aa=1.0,
                        u_r_bb=1.0, u_r_ab=50.0, t=1.0)


def test_delta_property():
    assert PB.delta == PB.mu_l - PB.mu_r == OMEGA

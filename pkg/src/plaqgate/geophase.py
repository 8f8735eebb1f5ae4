"""Geometric-phase tunneling analysis for a two-band double well.

One link of the array is modeled as a left site with its ground band only
(modes L_a up/down) and a right site with ground and excited bands (R_a,
R_b). Tunneling transfers a left ground-band particle into the *excited*
right band, -t sum_sigma (a^dag_L,sigma b_R,sigma + h.c.); the energy
mismatch of the first such event (initial minus final, so the bias surplus
enters positively) is

    dE1 = c0 (Delta - omega) + c1 U_L^aa + c2 U_R^ab

with exact rational coefficients tabulated per number/spin configuration
(the ledger). A configuration is resonant when dE1 vanishes at the chosen
bias: for bosons at Delta = omega the resonant rows are (n_L, n_R^a, j_R) =
(1, 0, 1/2) and (1, 1, 0); for fermions at Delta = omega + U_R^ab the single
resonant row is (1, 2, 1/2). Resonant tunneling is a two-level Rabi cycle
whose return amplitude carries the geometric phase pi; off-resonant links
pick up only O((t/dE1)^2) corrections.

Conventions adopted here (fixed by the ledger rows):
  * left-site repulsion enters as U_L^aa n(n-1) (a doublon costs 2 U_L^aa),
    right-site intra-band repulsion as (1/2) U n(n-1);
  * the right-site inter-band coupling is U_R^ab (n^a n^b + spin exchange)
    for bosons and U_R^ab (n^a n^b - spin exchange) for fermions, where the
    exchange sum is sum_{s,s'} a^dag_s b^dag_s' b_s a_s';
  * the band-changing pair transfer sum b^dag b^dag a a is dropped by
    default (energy non-conserving at omega >> U; a flag restores it).

Sector dynamics: after the adiabatic tilt that begins the gate, singlet
pairs of one plaquette edge distribute one boson per site while triplet
pairs collapse onto the lower site (the roles swap for fermions, where the
doubly-occupied orbital is the singlet). The resulting occupation of the
two inter-plaquette links per logical sector is encoded in
SECTOR_LINKS; tunneling_phase evolves each link exactly and combines the
return phases.
"""
from __future__ import annotations

import csv
import itertools
import warnings
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.optimize import minimize_scalar

MODE_LABELS = ("L_a_up", "L_a_dn", "R_a_up", "R_a_dn", "R_b_up", "R_b_dn")
L_UP, L_DN, RA_UP, RA_DN, RB_UP, RB_DN = range(6)
ORBITAL_PAIRS = ((L_UP, L_DN), (RA_UP, RA_DN), (RB_UP, RB_DN))
RIGHT_ORBITAL_PAIRS = ((RA_UP, RA_DN), (RB_UP, RB_DN))


class RWAValidityWarning(UserWarning):
    """omega is not large against U_R^ab; dropping band-changing terms is unsafe."""


@dataclass(frozen=True)
class OnsiteParams:
    """Single-link energies; the bias Delta = mu_L - mu_R is derived."""

    mu_l: float
    mu_r: float
    omega: float
    u_l_aa: float
    u_r_aa: float
    u_r_bb: float
    u_r_ab: float
    t: float

    def __post_init__(self) -> None:
        if self.omega < 10.0 * self.u_r_ab:
            warnings.warn(
                f"omega={self.omega} is not >> U_R_ab={self.u_r_ab}; the "
                "rotating-wave neglect of band-changing terms is unreliable",
                RWAValidityWarning,
                stacklevel=2,
            )

    @property
    def delta(self) -> float:
        return self.mu_l - self.mu_r


def _as_half_integer(value) -> Fraction:
    frac = Fraction(value).limit_denominator(10**9)
    if frac.denominator not in (1, 2):
        raise ValueError(f"spin must be a half-integer, got {value}")
    return frac


@dataclass(frozen=True)
class NumberConfig:
    """Occupation/spin labels of one link after a single tunneling event.

    n_L counts left-site particles before the event; (n_R_a, n_R_b) the
    right-site bands after it (n_R_b = 1 for every ledger row); j_R the
    total right-site spin of the final state.
    """

    n_l: int
    n_r_a: int
    n_r_b: int
    j_r: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "j_r", _as_half_integer(self.j_r))
        for name, val in (("n_L", self.n_l), ("n_R_a", self.n_r_a), ("n_R_b", self.n_r_b)):
            if not 0 <= val <= 2:
                raise ValueError(f"{name} must be in 0..2, got {val}")
        low = Fraction(abs(self.n_r_a - self.n_r_b), 2)
        high = Fraction(self.n_r_a + self.n_r_b, 2)
        if not low <= self.j_r <= high or (high - self.j_r).denominator != 1:
            raise ValueError(
                f"j_R={self.j_r} incompatible with (n_R_a, n_R_b)=({self.n_r_a}, {self.n_r_b})"
            )


@dataclass(frozen=True)
class EnergyLedgerEntry:
    config: NumberConfig
    statistics: str
    c0: Fraction
    c1: Fraction
    c2: Fraction
    resonant_at_bias: bool

    def evaluate(self, params: OnsiteParams) -> float:
        return (
            float(self.c0) * (params.delta - params.omega)
            + float(self.c1) * params.u_l_aa
            + float(self.c2) * params.u_r_ab
        )


# ---------------------------------------------------------------------------
# Rational energy ledger
# ---------------------------------------------------------------------------

def boson_f(n_a: int, n_b: int, j) -> Fraction:
    """f = 2 n_a n_b - s(s+1) + j(j+1) with s = (n_a + n_b)/2.

    The inter-band interaction energy of a bosonic right site is
    U_R^ab f[n_a, n_b, j]; f vanishes whenever one band is empty.
    """
    jf = _as_half_integer(j)
    low, high = Fraction(abs(n_a - n_b), 2), Fraction(n_a + n_b, 2)
    if not low <= jf <= high or (high - jf).denominator != 1:
        raise ValueError(f"j={jf} out of range for (n_a, n_b)=({n_a}, {n_b})")
    s = Fraction(n_a + n_b, 2)
    return 2 * n_a * n_b - s * (s + 1) + jf * (jf + 1)


def fermion_eta(n_a: int, n_b: int, j) -> Fraction:
    """eta = 3 - 4j on the (1,1) band configuration (singlet 3, triplet -1), else 0."""
    jf = _as_half_integer(j)
    if n_a == 1 and n_b == 1:
        return Fraction(3) - 4 * jf
    return Fraction(0)


def _validate_for_statistics(config: NumberConfig, statistics: str) -> None:
    if statistics not in ("boson", "fermion"):
        raise ValueError(f"statistics must be 'boson' or 'fermion', got {statistics!r}")
    if config.n_l < 1:
        raise ValueError("the ledger describes a tunneling event; need n_L >= 1")
    if config.n_r_b != 1:
        raise ValueError("ledger rows have exactly one excited-band particle (n_R_b = 1)")
    if statistics == "fermion" and config.n_r_a == 2 and config.j_r != Fraction(1, 2):
        raise ValueError("a filled fermion band is a spin singlet; (2, 1) forces j_R = 1/2")


def delta_e1(
    config: NumberConfig,
    params: OnsiteParams,
    statistics: str,
    threshold: float = 0.1,
) -> tuple[float, EnergyLedgerEntry]:
    """Energy mismatch of one L-ground -> R-excited tunneling event, plus its ledger row.

    The sign convention is initial minus final: the event is resonant when
    the bias surplus Delta - omega cancels the interaction shift.
    Coefficients are exact rationals: c0 = 1;
    bosons   c1 = 2(n_L - 1),        c2 = -f[n_R_a, 1, j_R];
    fermions c1 = [n_L = 2],         c2 = -(n_R_a + eta)/2.
    The entry is marked resonant when |dE1| <= threshold * t at `params`.
    """
    _validate_for_statistics(config, statistics)
    c0 = Fraction(1)
    if statistics == "boson":
        c1 = Fraction(2 * (config.n_l - 1))
        c2 = -boson_f(config.n_r_a, 1, config.j_r)
    else:
        c1 = Fraction(1 if config.n_l == 2 else 0)
        c2 = -Fraction(config.n_r_a + fermion_eta(config.n_r_a, 1, config.j_r), 2)
    value = (
        float(c0) * (params.delta - params.omega)
        + float(c1) * params.u_l_aa
        + float(c2) * params.u_r_ab
    )
    entry = EnergyLedgerEntry(
        config=config,
        statistics=statistics,
        c0=c0,
        c1=c1,
        c2=c2,
        resonant_at_bias=abs(value) <= threshold * abs(params.t),
    )
    return value, entry


def table_configs(statistics: str) -> list[NumberConfig]:
    """The ledger row set: every (n_L, n_R_a, j_R) reachable by the protocol."""
    if statistics == "boson":
        triples = [
            (1, 0, Fraction(1, 2)),
            (1, 1, Fraction(0)),
            (1, 1, Fraction(1)),
            (1, 2, Fraction(1, 2)),
            (1, 2, Fraction(3, 2)),
            (2, 1, Fraction(0)),
            (2, 1, Fraction(1)),
            (2, 2, Fraction(1, 2)),
            (2, 2, Fraction(3, 2)),
        ]
    elif statistics == "fermion":
        triples = [
            (1, 0, Fraction(1, 2)),
            (1, 1, Fraction(0)),
            (1, 1, Fraction(1)),
            (1, 2, Fraction(1, 2)),
            (2, 1, Fraction(0)),
            (2, 1, Fraction(1)),
            (2, 2, Fraction(1, 2)),
        ]
    else:
        raise ValueError(f"statistics must be 'boson' or 'fermion', got {statistics!r}")
    return [NumberConfig(n_l, n_a, 1, j) for n_l, n_a, j in triples]


def resonance_table(
    params: OnsiteParams, statistics: str, threshold: float = 0.1
) -> list[EnergyLedgerEntry]:
    """All ledger rows with resonance flags at the given bias, in table order."""
    entries = []
    for config in table_configs(statistics):
        _, entry = delta_e1(config, params, statistics, threshold=threshold)
        entries.append(entry)
    return entries


def export_ledger_csv(entries, path) -> None:
    """CSV columns: statistics, n_L, n_R_a, j_R, c0, c1, c2, resonant."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["statistics", "n_L", "n_R_a", "j_R", "c0", "c1", "c2", "resonant"])
        for e in entries:
            writer.writerow(
                [
                    e.statistics,
                    e.config.n_l,
                    e.config.n_r_a,
                    str(e.config.j_r),
                    str(e.c0),
                    str(e.c1),
                    str(e.c2),
                    "true" if e.resonant_at_bias else "false",
                ]
            )


# ---------------------------------------------------------------------------
# Truncated Fock space
# ---------------------------------------------------------------------------

@dataclass
class TwoBandFockSpace:
    """Occupation basis for the six link modes, capped at 2 (bosons) or 1 (fermions).

    The basis spans every occupation pattern up to the cap; fixed-number
    sectors are index views. Operator matrices are built state-by-state, so
    bosonic ladder algebra is exact except where a matrix element would
    leave the truncated space (occupation at the cap).
    """

    statistics: str
    total_number: "int | None" = None
    occupations: list = field(init=False)
    index: dict = field(init=False)

    def __post_init__(self) -> None:
        if self.statistics not in ("boson", "fermion"):
            raise ValueError(f"statistics must be 'boson' or 'fermion', got {self.statistics!r}")
        self.occupations = [
            occ for occ in itertools.product(range(self.cap + 1), repeat=len(MODE_LABELS))
        ]
        self.index = {occ: i for i, occ in enumerate(self.occupations)}

    @property
    def cap(self) -> int:
        return 1 if self.statistics == "fermion" else 2

    @property
    def dim(self) -> int:
        return len(self.occupations)

    def sector_indices(self, total: "int | None" = None) -> np.ndarray:
        n = self.total_number if total is None else total
        if n is None:
            raise ValueError("no total particle number fixed")
        return np.array([i for i, occ in enumerate(self.occupations) if sum(occ) == n])

    def physical_indices(self) -> np.ndarray:
        """States whose per-orbital occupancy stays within the cap.

        Spin raising/lowering and the band-exchange interaction never leave
        this subspace, so symmetry checks are truncation-free on it; it also
        contains every state the tunneling dynamics visits.
        """
        return np.array(
            [
                i
                for i, occ in enumerate(self.occupations)
                if all(occ[up] + occ[dn] <= self.cap for up, dn in ORBITAL_PAIRS)
            ]
        )

    # -- operator construction ------------------------------------------------

    def apply_string(self, occ: tuple, ops) -> "tuple[tuple, float] | None":
        """Apply a normal-ordered operator string (given left-to-right) to a ket.

        ops is a sequence of (mode, kind) with kind +1 for creation, -1 for
        annihilation; returns (new_occupation, amplitude) or None.
        """
        state = list(occ)
        amp = 1.0
        for mode, kind in reversed(ops):
            n = state[mode]
            if self.statistics == "fermion":
                sign = -1.0 if sum(state[:mode]) % 2 else 1.0
                if kind == -1:
                    if n == 0:
                        return None
                    state[mode] = 0
                else:
                    if n == 1:
                        return None
                    state[mode] = 1
                amp *= sign
            else:
                if kind == -1:
                    if n == 0:
                        return None
                    amp *= np.sqrt(n)
                    state[mode] = n - 1
                else:
                    if n == self.cap:
                        return None
                    amp *= np.sqrt(n + 1)
                    state[mode] = n + 1
        return tuple(state), amp

    def operator(self, strings) -> np.ndarray:
        """Dense matrix of sum_i coef_i * string_i on the full basis."""
        mat = np.zeros((self.dim, self.dim), dtype=complex)
        for coef, ops in strings:
            for occ in self.occupations:
                out = self.apply_string(occ, ops)
                if out is not None:
                    mat[self.index[out[0]], self.index[occ]] += coef * out[1]
        return mat

    def number_op(self, mode: int) -> np.ndarray:
        return np.diag([float(occ[mode]) for occ in self.occupations]).astype(complex)

    def spin_operators(self, orbital_pairs=ORBITAL_PAIRS):
        """(Sx, Sy, Sz) summed over the given orbitals, spin-1/2 per particle."""
        s_plus = self.operator([(1.0, [(up, +1), (dn, -1)]) for up, dn in orbital_pairs])
        s_z = np.diag(
            [
                0.5 * sum(occ[up] - occ[dn] for up, dn in orbital_pairs)
                for occ in self.occupations
            ]
        ).astype(complex)
        s_x = (s_plus + s_plus.conj().T) / 2.0
        s_y = (s_plus - s_plus.conj().T) / 2.0j
        return s_x, s_y, s_z

    def total_spin_squared(self, orbital_pairs=ORBITAL_PAIRS) -> np.ndarray:
        s_x, s_y, s_z = self.spin_operators(orbital_pairs)
        return s_x @ s_x + s_y @ s_y + s_z @ s_z

    def commutation_residual(self) -> float:
        """Worst (anti)commutator defect among all mode pairs.

        Fermionic relations hold exactly. Bosonic [a_i, a_j^dag] = delta_ij
        is checked on states that keep both modes strictly below the cap,
        where truncation is immaterial. Works state-by-state, no matmuls.
        """
        worst = 0.0
        swap_sign = 1.0 if self.statistics == "fermion" else -1.0

        def accumulate(occ, chains):
            acc: dict = {}
            for coef, ops in chains:
                out = self.apply_string(occ, ops)
                if out is not None:
                    acc[out[0]] = acc.get(out[0], 0.0) + coef * out[1]
            return max((abs(v) for v in acc.values()), default=0.0)

        for i in range(len(MODE_LABELS)):
            for j in range(len(MODE_LABELS)):
                for occ in self.occupations:
                    # a_i a_j -/+ a_j a_i = 0 never touches the cap
                    worst = max(
                        worst,
                        accumulate(
                            occ,
                            [
                                (1.0, [(i, -1), (j, -1)]),
                                (swap_sign, [(j, -1), (i, -1)]),
                            ],
                        ),
                    )
                    if self.statistics == "boson" and (
                        occ[i] >= self.cap or occ[j] >= self.cap
                    ):
                        continue
                    acc: dict = {occ: -1.0 if i == j else 0.0}
                    for coef, ops in (
                        (1.0, [(i, -1), (j, +1)]),
                        (swap_sign, [(j, +1), (i, -1)]),
                    ):
                        out = self.apply_string(occ, ops)
                        if out is not None:
                            acc[out[0]] = acc.get(out[0], 0.0) + coef * out[1]
                    worst = max(worst, max(abs(v) for v in acc.values()))
        return worst


# ---------------------------------------------------------------------------
# Hamiltonians
# ---------------------------------------------------------------------------

def _exchange_strings(sign: float):
    """sum_{s,s'} a^dag_s b^dag_s' b_s a_s' on the right site."""
    spins = ((RA_UP, RB_UP), (RA_DN, RB_DN))
    strings = []
    for a_s, b_s in spins:  # sigma
        for a_sp, b_sp in spins:  # sigma'
            strings.append((sign, [(a_s, +1), (b_sp, +1), (b_s, -1), (a_sp, -1)]))
    return strings


def _pair_transfer_strings():
    """Band-changing sum_{s,s'} b^dag_s b^dag_s' a_s a_s' (plus h.c. added later)."""
    spins = ((RA_UP, RB_UP), (RA_DN, RB_DN))
    strings = []
    for a_s, b_s in spins:
        for a_sp, b_sp in spins:
            strings.append((1.0, [(b_s, +1), (b_sp, +1), (a_s, -1), (a_sp, -1)]))
    return strings


def onsite_hamiltonian(
    params: OnsiteParams,
    statistics: str,
    space: TwoBandFockSpace,
    include_band_changing: bool = False,
) -> np.ndarray:
    """Second-quantized on-site energy of the link (no tunneling term).

    Conserves the total particle number and the total spin; the
    energy-non-conserving pair transfer between bands is excluded unless
    `include_band_changing` (bosons only).
    """
    if statistics != space.statistics:
        raise ValueError("statistics of params call and Fock space disagree")
    n_l = space.number_op(L_UP) + space.number_op(L_DN)
    n_ra = space.number_op(RA_UP) + space.number_op(RA_DN)
    n_rb = space.number_op(RB_UP) + space.number_op(RB_DN)
    eye = np.eye(space.dim)
    h = params.mu_l * n_l + params.mu_r * n_ra + (params.mu_r + params.omega) * n_rb
    if statistics == "boson":
        h += params.u_l_aa * (n_l @ (n_l - eye))
        h += 0.5 * params.u_r_aa * (n_ra @ (n_ra - eye))
        h += 0.5 * params.u_r_bb * (n_rb @ (n_rb - eye))
        h += params.u_r_ab * (n_ra @ n_rb + space.operator(_exchange_strings(+1.0)))
        if include_band_changing:
            pair = space.operator(_pair_transfer_strings())
            h += params.u_r_ab * (pair + pair.conj().T)
    else:
        h += params.u_l_aa * (space.number_op(L_UP) @ space.number_op(L_DN))
        h += params.u_r_aa * (space.number_op(RA_UP) @ space.number_op(RA_DN))
        h += params.u_r_bb * (space.number_op(RB_UP) @ space.number_op(RB_DN))
        h += params.u_r_ab * (n_ra @ n_rb - space.operator(_exchange_strings(+1.0)))
    return h


def tunneling_hamiltonian(params: OnsiteParams, space: TwoBandFockSpace) -> np.ndarray:
    """-t sum_sigma (a^dag_L,sigma b_R,sigma + h.c.): left ground <-> right excited."""
    hop = space.operator(
        [(-params.t, [(L_UP, +1), (RB_UP, -1)]), (-params.t, [(L_DN, +1), (RB_DN, -1)])]
    )
    return hop + hop.conj().T


def schwinger_identity_check(space: TwoBandFockSpace) -> float:
    """Max residual of the two-band spin identity on the truncated space.

    sum_{s,s'} a^dag_s b^dag_s' b_s a_s'
        = n^a n^b + J^2 - ((n^a+n^b)/2)((n^a+n^b)/2 + 1),
    with J the total spin of the two right-site bands. Both sides are
    compared on the states whose right-site occupancy does not exceed the
    mode cap, where no intermediate state of either side is truncated.
    """
    if space.statistics != "boson":
        raise ValueError("the spin-ladder identity applies to the bosonic space")
    lhs = space.operator(_exchange_strings(+1.0))
    n_ra = space.number_op(RA_UP) + space.number_op(RA_DN)
    n_rb = space.number_op(RB_UP) + space.number_op(RB_DN)
    j2 = space.total_spin_squared(RIGHT_ORBITAL_PAIRS)
    half = (n_ra + n_rb) / 2.0
    rhs = n_ra @ n_rb + j2 - half @ (half + np.eye(space.dim))
    safe = [
        i
        for i, occ in enumerate(space.occupations)
        if occ[RA_UP] + occ[RA_DN] + occ[RB_UP] + occ[RB_DN] <= space.cap
    ]
    diff = (lhs - rhs)[np.ix_(safe, safe)]
    return float(np.abs(diff).max())


# ---------------------------------------------------------------------------
# Link and sector dynamics
# ---------------------------------------------------------------------------

#: Per logical sector: the (n_L, n_R_a) of each inter-plaquette link after
#: the tilt, with the available total-spin channels of the link subsystem.
#: Links with n_L = 0 are inert and omitted. Order: upper link, lower link.
SECTOR_LINKS = {
    "boson": {
        "SS": [(1, 1, (Fraction(0),)), (1, 1, (Fraction(0),))],
        "ST": [(1, 0, (Fraction(1, 2),)), (1, 2, (Fraction(1, 2), Fraction(3, 2)))],
        "TS": [(2, 1, (Fraction(1, 2), Fraction(3, 2)))],
        "TT": [(2, 2, (Fraction(0), Fraction(1), Fraction(2)))],
    },
    "fermion": {
        "SS": [(2, 2, (Fraction(0),))],
        "ST": [(2, 1, (Fraction(1, 2),))],
        "TS": [(1, 0, (Fraction(1, 2),)), (1, 2, (Fraction(1, 2),))],
        "TT": [(1, 1, (Fraction(0), Fraction(1))), (1, 1, (Fraction(0), Fraction(1)))],
    },
}

SECTORS = ("SS", "ST", "TS", "TT")


def _initial_channel_state(
    space: TwoBandFockSpace, n_l: int, n_r_a: int, channel_spin: Fraction
) -> np.ndarray:
    """Highest-weight state with the given occupations and total link spin."""
    pattern = [
        i
        for i, occ in enumerate(space.occupations)
        if occ[L_UP] + occ[L_DN] == n_l
        and occ[RA_UP] + occ[RA_DN] == n_r_a
        and occ[RB_UP] + occ[RB_DN] == 0
    ]
    if not pattern:
        raise ValueError(f"occupations ({n_l}, {n_r_a}) not representable")
    j2 = space.total_spin_squared()
    _, _, s_z = space.spin_operators()
    m_target = float(channel_spin)
    sub = [i for i in pattern if abs(s_z[i, i].real - m_target) < 1e-9]
    if not sub:
        raise ValueError(f"no m = {channel_spin} state for occupations ({n_l}, {n_r_a})")
    block = j2[np.ix_(sub, sub)]
    evals, evecs = np.linalg.eigh(block)
    target = float(channel_spin * (channel_spin + 1))
    hits = np.flatnonzero(np.abs(evals - target) < 1e-8)
    if len(hits) == 0:
        raise ValueError(
            f"total spin {channel_spin} unavailable for occupations ({n_l}, {n_r_a})"
        )
    psi = np.zeros(space.dim, dtype=complex)
    psi[sub] = evecs[:, hits[0]]
    return psi


def link_tunneling_phase(
    n_l: int,
    n_r_a: int,
    channel_spin,
    params: OnsiteParams,
    statistics: str,
    scan_points: int = 8000,
) -> tuple[float, float, float]:
    """Exact return dynamics of one link: (return_time, phase, leakage).

    The initial state has n_l particles on the left, n_r_a in the right
    ground band, total spin `channel_spin`. The return amplitude
    a(t) = <psi0|exp(-iHt)|psi0> is gauged by exp(+i E0 t), E0 = <psi0|H|psi0>,
    so a resonant two-level cycle returns with phase exactly pi while
    off-resonant links acquire only O((t/dE1)^2) phase. return_time is the
    first local maximum of |a| after its first local minimum, refined by a
    bounded scalar search; leakage is 1 - |a(return_time)|^2 and is bounded
    by C (t/dE1)^2 with C = 4 n_L (bosonic enhancement included).
    """
    if n_l < 1:
        return 0.0, 0.0, 0.0
    space = TwoBandFockSpace(statistics, total_number=n_l + n_r_a)
    psi0 = _initial_channel_state(space, n_l, n_r_a, _as_half_integer(channel_spin))
    h = onsite_hamiltonian(params, statistics, space) + tunneling_hamiltonian(params, space)
    sector = space.sector_indices()
    h_s = h[np.ix_(sector, sector)]
    psi_s = psi0[sector]
    evals, evecs = np.linalg.eigh(h_s)
    coeffs = evecs.conj().T @ psi_s
    weights = np.abs(coeffs) ** 2
    e0 = float(weights @ evals)

    def amplitude(t: float) -> complex:
        return np.exp(1j * e0 * t) * np.sum(weights * np.exp(-1j * evals * t))

    t_max = 1.25 * np.pi / abs(params.t)
    ts = np.linspace(t_max / scan_points, t_max, scan_points)
    mags = np.abs(np.exp(-1j * np.outer(ts, evals)) @ weights)
    # first local minimum, then the next local maximum
    minima = np.flatnonzero((mags[1:-1] <= mags[:-2]) & (mags[1:-1] <= mags[2:])) + 1
    if len(minima) == 0:
        return 0.0, 0.0, 0.0
    after = minima[0] + 1
    maxima = (
        np.flatnonzero(
            (mags[after + 1 : -1] >= mags[after:-2]) & (mags[after + 1 : -1] >= mags[after + 2 :])
        )
        + after
        + 1
    )
    if len(maxima) == 0:
        k = len(ts) - 1
        lo, hi = ts[max(k - 1, 0)], ts[k]
    else:
        k = maxima[0]
        lo, hi = ts[k - 1], ts[k + 1]
    res = minimize_scalar(
        lambda t: -abs(amplitude(t)),
        bounds=(lo, hi),
        method="bounded",
        options={"xatol": t_max * 1e-12},
    )
    t_ret = float(res.x)
    a_ret = amplitude(t_ret)
    phase = float(np.angle(a_ret))
    leakage = float(max(0.0, 1.0 - abs(a_ret) ** 2))
    return t_ret, phase, leakage


def link_peak_leakage(
    n_l: int,
    n_r_a: int,
    channel_spin,
    params: OnsiteParams,
    statistics: str,
    scan_points: int = 8000,
) -> float:
    """Worst transient depletion 1 - |a(t)|^2 of one link over a return cycle.

    For an off-resonant link this is bounded by C (t/dE1)^2 with C = 4 n_L:
    a detuned two-level system transfers at most 4 g^2/dE^2 of population,
    and the bosonic matrix element is enhanced to g = sqrt(n_L) t.
    """
    if n_l < 1:
        return 0.0
    space = TwoBandFockSpace(statistics, total_number=n_l + n_r_a)
    psi0 = _initial_channel_state(space, n_l, n_r_a, _as_half_integer(channel_spin))
    h = onsite_hamiltonian(params, statistics, space) + tunneling_hamiltonian(params, space)
    sector = space.sector_indices()
    h_s = h[np.ix_(sector, sector)]
    evals, evecs = np.linalg.eigh(h_s)
    weights = np.abs(evecs.conj().T @ psi0[sector]) ** 2
    t_max = 1.25 * np.pi / abs(params.t)
    ts = np.linspace(t_max / scan_points, t_max, scan_points)
    mags = np.abs(np.exp(-1j * np.outer(ts, evals)) @ weights)
    return float(max(0.0, 1.0 - mags.min() ** 2))


def tunneling_phase(
    sector: str, params: OnsiteParams, statistics: str
) -> tuple[float, float, float]:
    """Combined return figures of both links of a logical sector.

    Each active link is evolved exactly, taking the worst case over its
    spin channels; phases add, return_time is the slowest link, and the
    combined leakage treats the links as independent amplitudes.
    """
    if sector not in SECTORS:
        raise ValueError(f"sector must be one of {SECTORS}, got {sector!r}")
    if statistics not in SECTOR_LINKS:
        raise ValueError(f"statistics must be 'boson' or 'fermion', got {statistics!r}")
    links = SECTOR_LINKS[statistics][sector]
    total_phase = 0.0
    t_ret = 0.0
    survival = 1.0
    for n_l, n_r_a, channels in links:
        worst = (0.0, 0.0, 0.0)
        for j in channels:
            out = link_tunneling_phase(n_l, n_r_a, j, params, statistics)
            if abs(out[1]) >= abs(worst[1]):
                worst = out
        t_ret = max(t_ret, worst[0])
        total_phase += worst[1]
        survival *= 1.0 - worst[2]
    return t_ret, total_phase, 1.0 - survival

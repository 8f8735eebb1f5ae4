"""The 2x2-plaquette logical qubit.

Four spin-1/2 sites at the corners of a square, labeled clockwise
"1","2","3","4" with ("1","2") and ("3","4") the horizontal edges. The
two-dimensional total-spin-zero subspace encodes one logical qubit:

    |psi_H> = |S>_{1,2} |S>_{3,4}        |psi_V> = |S>_{2,3} |S>_{4,1}
    |0> = |psi_V>                        |1> = (2/sqrt3)(|psi_H> - |psi_V>/2)

The sign of |1> is fixed so that the horizontal-exchange generator restricts
to a Bloch rotation about AXIS_H = (sqrt3/2, 0, -1/2); with the opposite sign
every axis below would pick up a mirrored x-component. Restrictions of the
exchange couplings to the logical basis carry an identity offset alongside
the rotation generator:

    (1/2) - (1/4)(s1.s2 + s3.s4)  ->  1 + AXIS_H . sigma
    -J_H (s1.s2 + s3.s4) - J_V (s2.s3 + s4.s1)
                                  ->  2(J_H+J_V) 1 + 4(J_H AXIS_H + J_V AXIS_V) . sigma

so a pulse of duration theta/(4 J) rotates the Bloch vector by 2*theta about
the corresponding axis (the offsets only contribute global phase).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .spincore import (
    SpinRegister,
    eig_hermitian,
    pauli_dot,
    plaquette_register,
    total_spin_squared,
    unitary_evolve,
)


@dataclass(frozen=True)
class BlochAxis:
    """A unit 3-vector on the logical Bloch sphere."""

    x: float
    y: float
    z: float

    def __post_init__(self) -> None:
        if abs(np.linalg.norm(self.as_array()) - 1.0) > 1e-12:
            raise ValueError(f"axis must be a unit vector, got {(self.x, self.y, self.z)}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    def dot(self, other: "BlochAxis") -> float:
        return float(self.as_array() @ other.as_array())


#: Rotation axis driven by the horizontal exchange couplings (1,2)+(3,4).
AXIS_H = BlochAxis(np.sqrt(3.0) / 2.0, 0.0, -0.5)
#: Rotation axis driven by the vertical exchange couplings (2,3)+(4,1).
AXIS_V = BlochAxis(0.0, 0.0, 1.0)
#: Combined axis used by the one-step |+> preparation.
AXIS_C = BlochAxis(1.0 / np.sqrt(2.0), 0.0, 1.0 / np.sqrt(2.0))

#: Mixing weights a*AXIS_H + b*AXIS_V = AXIS_C (exact).
AXIS_C_WEIGHT_H = np.sqrt(2.0) / np.sqrt(3.0)
AXIS_C_WEIGHT_V = 1.0 / np.sqrt(2.0) + 1.0 / np.sqrt(6.0)

#: Pulse angles for the two-step |+> preparation (full closed forms).
THETA_H = np.arcsin(np.sqrt(2.0) / np.sqrt(3.0))
THETA_V = (np.pi - np.arcsin(np.sqrt(2.0) / np.sqrt(3.0))) / 2.0


@dataclass(frozen=True)
class PlaquetteCouplings:
    """Signed exchange couplings on the six site pairs of one plaquette."""

    j12: float = 0.0
    j23: float = 0.0
    j34: float = 0.0
    j41: float = 0.0
    j13: float = 0.0
    j24: float = 0.0

    def __post_init__(self) -> None:
        for name in ("j12", "j23", "j34", "j41", "j13", "j24"):
            if not np.isfinite(getattr(self, name)):
                raise ValueError(f"coupling {name} must be finite")

    @classmethod
    def rect(cls, j_h: float, j_v: float) -> "PlaquetteCouplings":
        """Rectangular-lattice convention: H = -J_H (edges 12,34) - J_V (edges 23,41)."""
        return cls(j12=-j_h, j34=-j_h, j23=-j_v, j41=-j_v)

    @classmethod
    def diag(cls, j: float, d: float) -> "PlaquetteCouplings":
        """Edge-plus-diagonal convention: H = J*(all four edges) + d*(both diagonals)."""
        return cls(j12=j, j23=j, j34=j, j41=j, j13=d, j24=d)

    def pairs(self) -> list[tuple[str, str, float]]:
        return [
            ("1", "2", self.j12),
            ("2", "3", self.j23),
            ("3", "4", self.j34),
            ("4", "1", self.j41),
            ("1", "3", self.j13),
            ("2", "4", self.j24),
        ]


@dataclass
class PlaquetteBasis:
    """The six named singlet-subspace vectors and the logical projector."""

    psi_H: np.ndarray
    psi_V: np.ndarray
    ket0: np.ndarray
    ket1: np.ndarray
    ket_box: np.ndarray
    ket_cross: np.ndarray
    logical_projector: np.ndarray

    def logical_columns(self) -> np.ndarray:
        """16x2 isometry whose columns are (|0>, |1>)."""
        return np.stack([self.ket0, self.ket1], axis=1)


def singlet_pair(
    reg: SpinRegister,
    i: str,
    j: str,
    rest_pair: tuple[str, str] | None = None,
) -> np.ndarray:
    """Product of a singlet on (i, j) with a singlet on the remaining two sites.

    The remaining pair is taken in register order unless `rest_pair` fixes its
    orientation (the singlet sign is antisymmetric under swapping the pair).
    """
    if i == j:
        raise ValueError("singlet_pair needs two distinct sites")
    if reg.site_count != 4:
        raise ValueError("singlet_pair expects a 4-site register")
    if rest_pair is None:
        rest = tuple(s for s in reg.site_labels if s not in (i, j))
        if len(rest) != 2:
            raise ValueError(f"sites {i!r}, {j!r} overlap")
        rest_pair = (rest[0], rest[1])
    k, l = rest_pair
    if {i, j} & {k, l} or {i, j, k, l} != set(reg.site_labels):
        raise ValueError(f"pairs ({i},{j}) and ({k},{l}) must partition the register")

    up, dn = np.array([1.0, 0.0], dtype=complex), np.array([0.0, 1.0], dtype=complex)
    state = np.zeros(reg.dim, dtype=complex)
    for (si, sj), sgn1 in (((up, dn), 1.0), ((dn, up), -1.0)):
        for (sk, sl), sgn2 in (((up, dn), 1.0), ((dn, up), -1.0)):
            by_site = {i: si, j: sj, k: sk, l: sl}
            vec = np.array([1.0 + 0.0j])
            for label in reversed(reg.site_labels):
                vec = np.kron(vec, by_site[label])
            state += 0.5 * sgn1 * sgn2 * vec
    return state


def logical_basis() -> PlaquetteBasis:
    """Construct the singlet-subspace basis on the standard plaquette register."""
    reg = plaquette_register()
    psi_h = singlet_pair(reg, "1", "2", rest_pair=("3", "4"))
    psi_v = singlet_pair(reg, "2", "3", rest_pair=("4", "1"))
    ket0 = psi_v.copy()
    ket1 = (2.0 / np.sqrt(3.0)) * (psi_h - 0.5 * psi_v)
    ket_box = (psi_h + psi_v) / np.sqrt(3.0)
    ket_cross = psi_h - psi_v
    proj = np.outer(ket0, ket0.conj()) + np.outer(ket1, ket1.conj())
    return PlaquetteBasis(
        psi_H=psi_h,
        psi_V=psi_v,
        ket0=ket0,
        ket1=ket1,
        ket_box=ket_box,
        ket_cross=ket_cross,
        logical_projector=proj,
    )


def heisenberg_plaquette(couplings: PlaquetteCouplings) -> np.ndarray:
    """H = sum_{pairs} c_ij s_i . s_j on the 16-dim plaquette space."""
    reg = plaquette_register()
    h = np.zeros((reg.dim, reg.dim), dtype=complex)
    for i, j, c in couplings.pairs():
        if c != 0.0:
            h += c * pauli_dot(reg, i, j)
    return h


@dataclass
class PlaquetteSpectrum:
    """Total-spin-resolved spectrum of the edge-plus-diagonal plaquette.

    `singlets`, `triplets`, `quintet` are quoted relative to the mean exchange
    energy (a constant offset of 4J + 2d above the bare eigenvalues of
    heisenberg_plaquette, matching the closed forms -/+4(J-d); 4J, 4J, 4d;
    4(2J+d)). Degeneracies: each singlet once, each triplet level three-fold,
    the quintet five-fold (16 states total).
    """

    singlets: np.ndarray  # 2 values, ascending
    triplets: np.ndarray  # 3 multiplet values, ascending
    quintet: float
    offset: float  # quoted = bare + offset

    @property
    def bare_singlets(self) -> np.ndarray:
        return self.singlets - self.offset

    @property
    def bare_triplets(self) -> np.ndarray:
        return self.triplets - self.offset

    @property
    def bare_quintet(self) -> float:
        return self.quintet - self.offset

    def level_count(self) -> int:
        return len(self.singlets) + 3 * len(self.triplets) + 5


def plaquette_spectrum(j: float, d: float) -> PlaquetteSpectrum:
    """Diagonalize heisenberg_plaquette(diag(j, d)) and group by total spin."""
    h = heisenberg_plaquette(PlaquetteCouplings.diag(j, d))
    s2 = total_spin_squared(plaquette_register())
    spec = eig_hermitian(h)
    labels = []
    for col in range(16):
        v = spec.eigenvectors[:, col]
        s2val = float(np.real(np.vdot(v, s2 @ v)))  # 4S(S+1)
        s = round((-1.0 + np.sqrt(1.0 + s2val)) / 2.0)
        labels.append(s)
    offset = 4.0 * j + 2.0 * d
    by_spin: dict[int, list[float]] = {0: [], 1: [], 2: []}
    for e, s in zip(spec.eigenvalues, labels):
        by_spin[s].append(float(e) + offset)
    singlets = np.sort(by_spin[0])
    # each S=1 multiplet appears three times in the raw list
    triplet_levels = np.sort(by_spin[1])[::3]
    quintets = by_spin[2]
    if len(singlets) != 2 or len(by_spin[1]) != 9 or len(quintets) != 5:
        raise RuntimeError(
            f"unexpected multiplet structure: {len(singlets)} singlets, "
            f"{len(by_spin[1])} triplet states, {len(quintets)} quintet states"
        )
    return PlaquetteSpectrum(
        singlets=singlets,
        triplets=np.asarray(triplet_levels),
        quintet=float(np.mean(quintets)),
        offset=offset,
    )


def logical_restriction(op: np.ndarray) -> np.ndarray:
    """Restrict a 16-dim operator to the logical basis: P^dag op P in (|0>,|1>)."""
    cols = logical_basis().logical_columns()
    return cols.conj().T @ op @ cols


def _rotation_pulse(j_h: float, j_v: float, theta: float) -> np.ndarray:
    """Unitary of the physical exchange pulse rotating by 2*theta.

    The generator -j_h(s1.s2+s3.s4) - j_v(s2.s3+s4.s1) restricts to
    2(j_h+j_v) + 4(j_h AXIS_H + j_v AXIS_V).sigma, so duration theta/4 at
    unit total coupling gives the rotation angle parameter theta.
    """
    h = heisenberg_plaquette(PlaquetteCouplings.rect(j_h, j_v))
    return unitary_evolve(h, theta / 4.0)


def prepare_plus(mode: str = "two_step", angle_scale: float = 1.0) -> np.ndarray:
    """Prepare |+> = (|0> + |1>)/sqrt2 from |0> with physical exchange pulses.

    Args:
        mode: "two_step" (rotation about AXIS_H then AXIS_V) or "one_step"
            (single rotation about the combined axis AXIS_C by pi/2).
        angle_scale: multiplies all pulse angles; 0 returns |0> unchanged.

    Returns:
        The final 16-dim state. Leakage out of the singlet subspace is zero
        because exchange pulses commute with the total spin.
    """
    basis = logical_basis()
    psi = basis.ket0.copy()
    if mode == "two_step":
        psi = _rotation_pulse(1.0, 0.0, angle_scale * THETA_H) @ psi
        psi = _rotation_pulse(0.0, 1.0, angle_scale * THETA_V) @ psi
    elif mode == "one_step":
        psi = _rotation_pulse(AXIS_C_WEIGHT_H, AXIS_C_WEIGHT_V, angle_scale * np.pi / 2.0) @ psi
    else:
        raise ValueError(f"mode must be 'two_step' or 'one_step', got {mode!r}")
    return psi


def rotation_step_bound(axis1: BlochAxis, axis2: BlochAxis) -> int:
    """Worst-case pulse count for arbitrary Bloch rotations from two fixed axes.

    With eta the angle between the axes and m = min(eta, pi - eta), the bound
    is k + 2 where k is the unique integer with pi/k > m >= pi/(k+1).
    """
    cos_eta = np.clip(axis1.dot(axis2), -1.0, 1.0)
    eta = float(np.arccos(cos_eta))
    m = min(eta, np.pi - eta)
    # arccos near +-1 resolves no better than ~1e-8, so treat anything below
    # a microradian as collinear rather than returning a huge pulse count
    if m < 1e-6:
        raise ValueError("axes are collinear; two distinct axes are required")
    # k = ceil(pi/m) - 1, with care at exact divisors (m = pi/q belongs to k = q-1)
    ratio = np.pi / m
    k = int(np.ceil(ratio - 1e-12)) - 1
    return k + 2


# ---------------------------------------------------------------------------
# Two-site Hubbard oracle for the superexchange scale J = t^2/U
# ---------------------------------------------------------------------------

def _two_site_hubbard(t: float, u: float, statistics: str) -> tuple[float, float]:
    """Ground singlet and triplet energies of the two-site, two-particle model."""
    cap = 1 if statistics == "fermion" else 2
    # modes: (site0,up),(site0,dn),(site1,up),(site1,dn)
    states = [s for s in itertools.product(range(cap + 1), repeat=4) if sum(s) == 2]
    index = {s: i for i, s in enumerate(states)}
    dim = len(states)

    def hop_sign(state: tuple, mode: int) -> float:
        if statistics == "boson":
            return 1.0
        return -1.0 if sum(state[:mode]) % 2 else 1.0

    def transfer(matrix: np.ndarray, src_mode: int, dst_mode: int, amp: float) -> None:
        for s in states:
            if s[src_mode] > 0 and s[dst_mode] < cap:
                mid = list(s)
                mid[src_mode] -= 1
                sgn = hop_sign(s, src_mode)
                sgn *= hop_sign(tuple(mid), dst_mode)
                mid[dst_mode] += 1
                scale = np.sqrt(s[src_mode] * (s[dst_mode] + 1)) if statistics == "boson" else 1.0
                matrix[index[tuple(mid)], index[s]] += amp * scale * sgn

    h = np.zeros((dim, dim))
    for s in states:
        n0, n1 = s[0] + s[1], s[2] + s[3]
        if statistics == "boson":
            h[index[s], index[s]] = 0.5 * u * (n0 * (n0 - 1) + n1 * (n1 - 1))
        else:
            h[index[s], index[s]] = u * (s[0] * s[1] + s[2] * s[3])
    for spin in (0, 1):
        transfer(h, 2 + spin, 0 + spin, -t)
        transfer(h, 0 + spin, 2 + spin, -t)

    # classify eigenstates by total spin via S- S+ + Sz^2 + Sz
    splus = np.zeros((dim, dim))
    for s in states:
        for site in (0, 1):
            upm, dnm = 2 * site, 2 * site + 1
            if s[dnm] > 0 and s[upm] < cap:
                mid = list(s)
                mid[dnm] -= 1
                sgn = hop_sign(s, dnm)
                sgn *= hop_sign(tuple(mid), upm)
                mid[upm] += 1
                scale = np.sqrt(s[dnm] * (s[upm] + 1)) if statistics == "boson" else 1.0
                splus[index[tuple(mid)], index[s]] += scale * sgn
    sz = np.diag([(s[0] - s[1] + s[2] - s[3]) / 2.0 for s in states])
    s2 = splus.T @ splus + sz @ sz + sz

    w, v = np.linalg.eigh(h)
    singlet_energies, triplet_energies = [], []
    for kcol in range(dim):
        s2val = float(v[:, kcol] @ s2 @ v[:, kcol])
        (singlet_energies if s2val < 1.0 else triplet_energies).append(w[kcol])
    return min(singlet_energies), min(triplet_energies)


def superexchange_hubbard_check(t: float, u: float, statistics: str) -> tuple[float, float]:
    """Exact two-site singlet-triplet gap against the superexchange value 4t^2/U.

    For fermions the singlet lies below the triplet; for bosons the ordering
    flips. The returned gap is positive in both cases and approaches 4t^2/U
    with a relative error of order (t/U)^2.

    Returns:
        (exact_gap, 4t^2/U)
    """
    if statistics not in ("boson", "fermion"):
        raise ValueError(f"statistics must be 'boson' or 'fermion', got {statistics!r}")
    if u <= 0:
        raise ValueError("U must be positive")
    if t != 0 and t / u > 0.1:
        raise ValueError(f"t/U = {t / u:.3f} is too large for the superexchange regime (need <= 0.1)")
    e_singlet, e_triplet = _two_site_hubbard(t, u, statistics)
    gap = (e_triplet - e_singlet) if statistics == "fermion" else (e_singlet - e_triplet)
    return float(gap), 4.0 * t * t / u

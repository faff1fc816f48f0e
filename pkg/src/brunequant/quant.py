"""Hamiltonian data for a junction-shunted synthesized cascade: capacitance
and stiffness matrices, bath coupling vectors, spectral densities, harmonic
normal modes, and golden-rule relaxation rates.

Coordinates and conventions
---------------------------
The chain coordinates Phi_1..Phi_N relate to the ladder node fluxes
phi_0..phi_{N-1} (node 0 = junction terminal) through alternating signs,
Phi_j = (-1)**(j+1) * phi_{j-1}; this dictionary is stored as
``junction_row_signs``.  The junction flux is therefore exactly the first
coordinate, and the linearized junction adds (1/L_J) e1 e1^T to the
stiffness.  With stage values t_j = sqrt(L_j1/L_j2), C'_j = C_j/(1-t_j)**2
and L'_j = L_j2 (1-t_j)**2, both matrices are tridiagonal; one capacitive
degenerate stage merges two node coordinates and shrinks the dimension from
M+1 to M.

Relaxation rates use the harmonic matrix element <0|Phi|1> = sqrt(1/(2 w))
in capacitance-orthonormalized coordinates (hbar = 1 internally, so rates
are in 1/ns); the thermal factor coth(hbar w / 2 kB T) uses SI constants.
The measured ratio of the total rate to the classical pole decay
|Re s_qb| is 4 for weakly dissipative, well-separated modes: one factor 2
from energy-vs-amplitude decay and one from the symmetrized-bath prefactor
of the rate formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

import numpy as np
import scipy.linalg as sla
from mpmath import mp, mpf
from scipy.constants import hbar as HBAR_SI
from scipy.constants import k as KB_SI
from scipy.constants import physical_constants

from .brune import BruneCircuit

PHI0_SI = physical_constants["mag. flux quantum"][0]

__all__ = [
    "JunctionParams",
    "QuantizedSystem",
    "SpectralDensityKind",
    "SpectralDensity",
    "Mode",
    "RelaxationReport",
    "UnsupportedCircuitError",
    "SingularCapacitanceError",
    "build_system",
    "build_system_via_transformations",
    "coupling_vector",
    "spectral_density",
    "harmonic_modes",
    "identify_qubit_mode",
    "relaxation_rates",
]


class UnsupportedCircuitError(ValueError):
    """Circuit shape outside the quantization recipe."""


class SingularCapacitanceError(ValueError):
    """Capacitance matrix not positive definite."""


@dataclass(frozen=True)
class JunctionParams:
    """Linear junction parameters plus the physical constants used by the
    thermal factor.  lj in nH, cj in nF, temperature in K."""

    lj: float
    cj: float = 0.0
    temperature: float = 0.0
    flux_quantum: float = PHI0_SI
    hbar: float = HBAR_SI
    k_b: float = KB_SI

    def __post_init__(self):
        if self.lj <= 0:
            raise ValueError("junction inductance must be positive")
        if self.cj < 0:
            raise ValueError("junction capacitance must be non-negative")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")


@dataclass(frozen=True)
class Mode:
    omega: float  # rad/ns
    vector: np.ndarray  # capacitance-orthonormal: v^T C v = 1

    @property
    def f_ghz(self) -> float:
        return self.omega / (2.0 * math.pi)


class SpectralDensityKind(Enum):
    MID_LADDER = "MID_LADDER"
    TERMINAL = "TERMINAL"


@dataclass(frozen=True)
class SpectralDensity:
    kind: SpectralDensityKind
    R: float
    C_tail: float = 0.0

    def __post_init__(self):
        if self.kind is SpectralDensityKind.TERMINAL and self.R <= 0:
            raise ValueError("terminal resistance must be positive")


def spectral_density(sd: SpectralDensity, omega: float) -> float:
    """Bath spectral density: mid-ladder w^3 R / (1 + w^2 R^2 C_tail^2),
    terminal w/R.  Odd in w, positive for w > 0 when R > 0."""
    if sd.kind is SpectralDensityKind.TERMINAL:
        return omega / sd.R
    if sd.R == 0:
        raise ValueError("mid-ladder resistance must be nonzero")
    return omega ** 3 * sd.R / (1.0 + omega ** 2 * sd.R ** 2 * sd.C_tail ** 2)


@dataclass(frozen=True)
class QuantizedSystem:
    """Matrices, couplings, and bath data of the linearized chain."""

    cap_matrix: np.ndarray  # nF, N x N, SPD tridiagonal
    stiffness: np.ndarray  # 1/nH, N x N, PSD tridiagonal
    coupling_vectors: tuple  # m_bar_j for resistors j = 1..M+1
    resistor_params: tuple  # (R_j, C_tail_j) for j = 1..M, then (R_{M+1}, 0)
    junction_row_signs: np.ndarray  # (-1)**(j+1): coordinate <-> node-flux signs
    junction: JunctionParams
    degenerate_index: Optional[int] = None  # 0-based stage index, if any
    num_stages: int = 0

    @property
    def dim(self) -> int:
        return self.cap_matrix.shape[0]

    def junction_vector(self) -> np.ndarray:
        """Unit vector of the junction flux coordinate (the first one)."""
        e1 = np.zeros(self.dim)
        e1[0] = 1.0
        return e1

    def spectral_densities(self) -> tuple:
        out = []
        m = self.num_stages
        for j, (r, c_tail) in enumerate(self.resistor_params, start=1):
            kind = (
                SpectralDensityKind.TERMINAL
                if j == m + 1
                else SpectralDensityKind.MID_LADDER
            )
            out.append(SpectralDensity(kind=kind, R=r, C_tail=c_tail))
        return tuple(out)


def _stage_params(circuit: BruneCircuit):
    ts, cps, lps = [], [], []
    for st in circuit.stages:
        if st.degenerate:
            ts.append(0.0)
            cps.append(st.C)
            lps.append(None)
        else:
            t = st.t if st.t else math.sqrt(st.L11 / st.L22)
            ts.append(t)
            cps.append(st.C / (1.0 - t) ** 2)
            lps.append(st.L22 * (1.0 - t) ** 2)
    return ts, cps, lps


def _check_supported(circuit: BruneCircuit):
    if circuit.preamble:
        raise UnsupportedCircuitError(
            "circuits with preamble reactances have no quantization recipe here"
        )
    if any(st.degenerate and st.inductive for st in circuit.stages):
        raise UnsupportedCircuitError(
            "inductive-degenerate stages (w1 = 0) cannot be quantized"
        )
    degen = [i for i, st in enumerate(circuit.stages) if st.degenerate]
    if len(degen) > 1:
        raise UnsupportedCircuitError(
            "only a single degenerate stage is supported, found %d" % len(degen)
        )
    return degen[0] if degen else None


def _full_matrices(circuit: BruneCircuit, jp: JunctionParams, terminal_capacitance):
    """(M+1)-dimensional chain matrices before any degenerate reduction."""
    m = len(circuit.stages)
    ts, cps, lps = _stage_params(circuit)
    n = m + 1
    cap = np.zeros((n, n))
    cap[0, 0] = jp.cj
    stiff = np.zeros((n, n))
    for j in range(m):
        cap[j, j] += cps[j]
        cap[j, j + 1] += ts[j] * cps[j]
        cap[j + 1, j] += ts[j] * cps[j]
        cap[j + 1, j + 1] += ts[j] ** 2 * cps[j]
        if lps[j] is not None:
            stiff[j, j] += 1.0 / lps[j]
            stiff[j, j + 1] += 1.0 / lps[j]
            stiff[j + 1, j] += 1.0 / lps[j]
            stiff[j + 1, j + 1] += 1.0 / lps[j]
    cap[n - 1, n - 1] += terminal_capacitance
    return cap, stiff


def _reduction_map(n: int, k: int) -> np.ndarray:
    """Constraint map for a degenerate stage k (0-based): node k+1 merges
    onto node k, i.e. Phi_{k+2} = -Phi_{k+1} in chain coordinates, and the
    coordinates beyond flip sign."""
    s = np.zeros((n, n - 1))
    for i in range(n):
        if i <= k:
            s[i, i] = 1.0
        elif i == k + 1:
            s[i, k] = -1.0
        else:
            s[i, i - 1] = -1.0
    return s


def _coupling_nondegenerate(circuit: BruneCircuit, j: int) -> np.ndarray:
    """m_bar_j for resistor j (1-based, j <= M) in the (M+1)-dim chain."""
    m = len(circuit.stages)
    ts, _, _ = _stage_params(circuit)
    cs = [st.C for st in circuit.stages]
    vec = np.zeros(m + 1)
    jj = j - 1
    vec[jj] = (-1) ** jj * cs[jj] / (1.0 - ts[jj])
    for i in range(jj + 1, m):
        vec[i] = (-1) ** i * cs[i] / (1.0 - ts[i]) + (
            (-1) ** (i - 1) * ts[i - 1] * cs[i - 1] / (1.0 - ts[i - 1])
        )
    vec[m] = (-1) ** (m - 1) * ts[m - 1] * cs[m - 1] / (1.0 - ts[m - 1])
    return vec


def build_system(
    circuit: BruneCircuit,
    jp: JunctionParams,
    terminal_capacitance: float = 0.0,
) -> QuantizedSystem:
    """Assemble the quantized-system matrices and couplings.

    ``terminal_capacitance`` is the formal placeholder standing in for the
    terminal resistor; it is zero for physics and nonzero only in structure
    tests.  With cj = 0 the capacitance matrix is singular unless a
    degenerate stage supplies the missing node capacitor, in which case the
    dimension is M instead of M+1.
    """
    k = _check_supported(circuit)
    m = len(circuit.stages)
    cap, stiff = _full_matrices(circuit, jp, terminal_capacitance)
    cs = [st.C for st in circuit.stages]
    if k is not None:
        s = _reduction_map(m + 1, k)
        cap = s.T @ cap @ s
        stiff = s.T @ stiff @ s
        couplings = []
        for j in range(1, m + 1):
            couplings.append(s.T @ _coupling_nondegenerate(circuit, j))
        term = np.zeros(m)
        term[m - 1] = 1.0
        couplings.append(term)
    else:
        couplings = [_coupling_nondegenerate(circuit, j) for j in range(1, m + 1)]
        term = np.zeros(m + 1)
        term[m] = 1.0
        couplings.append(term)
    try:
        sla.cholesky(cap, lower=True)
    except sla.LinAlgError as exc:
        raise SingularCapacitanceError(
            "capacitance matrix is not positive definite; with cj = 0 and no "
            "degenerate stage a nonzero junction capacitance is required "
            "(e.g. cj = 1e-6 nF)"
        ) from exc
    resistor_params = tuple(
        (circuit.stages[j - 1].R, float(sum(cs[j - 1 :]))) for j in range(1, m + 1)
    ) + ((circuit.r_terminal, 0.0),)
    n = cap.shape[0]
    signs = np.array([(-1.0) ** j for j in range(n)])
    return QuantizedSystem(
        cap_matrix=cap,
        stiffness=stiff,
        coupling_vectors=tuple(couplings),
        resistor_params=resistor_params,
        junction_row_signs=signs,
        junction=jp,
        degenerate_index=k,
        num_stages=m,
    )


def coupling_vector(system: QuantizedSystem, j: int) -> np.ndarray:
    """Bath coupling vector for resistor j (1-based, 1 <= j <= M+1)."""
    if not 1 <= j <= system.num_stages + 1:
        raise IndexError(
            f"resistor index {j} outside 1..{system.num_stages + 1}"
        )
    return system.coupling_vectors[j - 1].copy()


# ---------------------------------------------------------------------------
# transformation-chain oracle
# ---------------------------------------------------------------------------


def build_system_via_transformations(
    circuit: BruneCircuit,
    jp: JunctionParams,
    l0: float,
    terminal_capacitance: float = 0.0,
    precision_bits: int = 256,
) -> QuantizedSystem:
    """Independent construction of the chain matrices through the full
    branch-space transformation sequence at finite coupling deviation l0.

    The loop matrix maps chord capacitor branches onto the tree inductors,
    giving the branch-space kinetic matrix; the inductance matrix of each
    coupled pair is inverted exactly with mutual sqrt(L_j1 L_j2 - l0^2); a
    pairwise rotation splits finite from divergent stiffness directions,
    the divergent sector is truncated, and the banding transformation
    produces the tridiagonal chain matrices.  Entries converge to
    build_system's quadratically in l0.  Requires a non-degenerate circuit;
    runs in extended precision because the finite stiffness entries emerge
    from cancellation of order (l0 / M_j)**2.
    """
    if any(st.degenerate for st in circuit.stages):
        raise UnsupportedCircuitError(
            "the transformation-chain construction requires a non-degenerate circuit"
        )
    if circuit.preamble:
        raise UnsupportedCircuitError("preamble elements are not supported here")
    if l0 <= 0:
        raise ValueError("coupling deviation l0 must be positive")
    m = len(circuit.stages)
    min_mutual = min(math.sqrt(st.L11 * st.L22) for st in circuit.stages)
    if l0 > 0.25 * min_mutual:
        raise ArithmeticError(
            "l0 = %g is too large to separate the finite and divergent "
            "stiffness sectors (min mutual %g)" % (l0, min_mutual)
        )
    with mp.workprec(precision_bits):
        zero = mpf(0)
        caps = [mpf(jp.cj)] + [mpf(st.C) for st in circuit.stages] + [
            mpf(terminal_capacitance)
        ]
        nb = 2 * m + 1  # tree inductor branches: L_J, L_12..L_M2, L_11..L_M1
        nc = m + 2
        f_c = [[zero] * nc for _ in range(nb)]
        for col in range(nc):
            f_c[0][col] = mpf(1)
        for j in range(1, m + 1):  # L_j2 rows: chords C_{j+1}..C_{M+1}
            for col in range(j + 1, nc):
                f_c[j][col] = mpf(1)
        for j in range(1, m + 1):  # L_j1 rows: chords C_j..C_{M+1}
            for col in range(j, nc):
                f_c[m + j][col] = mpf(1)
        c0 = [
            [
                sum(f_c[i][k] * caps[k] * f_c[jx][k] for k in range(nc))
                for jx in range(nb)
            ]
            for i in range(nb)
        ]
        l0_mp = mpf(l0)
        lt_inv = [[zero] * (2 * m) for _ in range(2 * m)]
        for j in range(m):
            l1 = mpf(circuit.stages[j].L11)
            l2 = mpf(circuit.stages[j].L22)
            mj = mp.sqrt(l1 * l2 - l0_mp ** 2)
            det = l0_mp ** 2
            lt_inv[j][j] = l1 / det
            lt_inv[j][m + j] = mj / det
            lt_inv[m + j][j] = mj / det
            lt_inv[m + j][m + j] = l2 / det
        m0_full = [[zero] * nb for _ in range(nb)]
        for i in range(2 * m):
            for jx in range(2 * m):
                m0_full[1 + i][1 + jx] = lt_inv[i][jx]
        u = [[zero] * nb for _ in range(nb)]
        u[0][0] = mpf(1)
        for j in range(m):
            t = mp.sqrt(mpf(circuit.stages[j].L11) / mpf(circuit.stages[j].L22))
            den = mp.sqrt(1 + t * t)
            u[1 + j][1 + j] = 1 / den
            u[1 + j][1 + m + j] = t / den
            u[1 + m + j][1 + j] = -t / den
            u[1 + m + j][1 + m + j] = 1 / den

        def mat_mul(a, b):
            return [
                [sum(a[i][k] * b[k][jx] for k in range(len(b))) for jx in range(len(b[0]))]
                for i in range(len(a))
            ]

        def mat_t(a):
            return [list(row) for row in zip(*a)]

        m0_rot = mat_mul(mat_t(u), mat_mul(m0_full, u))
        c0_rot = mat_mul(mat_t(u), mat_mul(c0, u))
        nt = m + 1
        m0_trunc = [row[:nt] for row in m0_rot[:nt]]
        c0_trunc = [row[:nt] for row in c0_rot[:nt]]
        t_mat = [[zero] * nt for _ in range(nt)]
        t_mat[0][0] = mpf(1)
        for j in range(1, m + 1):
            t = mp.sqrt(mpf(circuit.stages[j - 1].L11) / mpf(circuit.stages[j - 1].L22))
            val = (-1) ** j * mp.sqrt(1 + t * t) / (1 - t)
            t_mat[j][j - 1] = val
            t_mat[j][j] = val
        cap = mat_mul(mat_t(t_mat), mat_mul(c0_trunc, t_mat))
        stiff = mat_mul(mat_t(t_mat), mat_mul(m0_trunc, t_mat))
        cap_f = np.array([[float(x) for x in row] for row in cap])
        stiff_f = np.array([[float(x) for x in row] for row in stiff])
    reference = build_system(circuit, jp, terminal_capacitance)
    return QuantizedSystem(
        cap_matrix=cap_f,
        stiffness=stiff_f,
        coupling_vectors=reference.coupling_vectors,
        resistor_params=reference.resistor_params,
        junction_row_signs=reference.junction_row_signs,
        junction=jp,
        degenerate_index=None,
        num_stages=m,
    )


# ---------------------------------------------------------------------------
# modes and rates
# ---------------------------------------------------------------------------


def harmonic_modes(system: QuantizedSystem) -> list:
    """Solve (M0 + (1/L_J) e1 e1^T) v = w^2 C v; modes sorted ascending with
    capacitance-orthonormal eigenvectors."""
    e1 = system.junction_vector()
    k_mat = system.stiffness + np.outer(e1, e1) / system.junction.lj
    try:
        evals, vecs = sla.eigh(k_mat, system.cap_matrix)
    except sla.LinAlgError as exc:
        raise SingularCapacitanceError(str(exc)) from exc
    modes = []
    for i in range(len(evals)):
        w = math.sqrt(max(evals[i], 0.0))
        modes.append(Mode(omega=w, vector=vecs[:, i]))
    return modes


def identify_qubit_mode(system: QuantizedSystem, modes: Sequence[Mode]) -> int:
    """Index of the junction-dominated mode: argmax of the junction-charge
    overlap |(C v_p)[0]|."""
    charges = [abs(float(system.cap_matrix[0, :] @ m.vector)) for m in modes]
    return int(np.argmax(charges))


@dataclass(frozen=True)
class RelaxationReport:
    per_resistor: tuple  # 1/ns, resistor j = 1..M+1
    total: float
    qubit_index: int
    omega_qb: float

    @property
    def t1_ns(self) -> float:
        return 1.0 / self.total if self.total > 0 else math.inf


def relaxation_rates(
    system: QuantizedSystem,
    modes: Sequence[Mode] | None = None,
    qubit_index: Optional[int] = None,
    temperature: Optional[float] = None,
) -> RelaxationReport:
    """Golden-rule relaxation rate of the qubit mode, per resistor.

    rate_j = 4 |m_bar_j . v|^2 (1/(2 w)) J_j(w) coth(hbar w / 2 kB T),
    with hbar = 1 in the matrix element (rates in 1/ns) and the physical
    coth factor; T = 0 gives coth = 1.
    """
    if modes is None:
        modes = harmonic_modes(system)
    if qubit_index is None:
        qubit_index = identify_qubit_mode(system, modes)
    mode = modes[qubit_index]
    w = mode.omega
    if w <= 0:
        raise ValueError("qubit mode frequency must be positive")
    temp = system.junction.temperature if temperature is None else temperature
    if temp > 0:
        arg = system.junction.hbar * w * 1e9 / (2.0 * system.junction.k_b * temp)
        thermal = 1.0 / math.tanh(arg)
    else:
        thermal = 1.0
    densities = system.spectral_densities()
    rates = []
    for j in range(1, system.num_stages + 2):
        mvec = system.coupling_vectors[j - 1]
        overlap = float(mvec @ mode.vector)
        rates.append(
            4.0 * overlap ** 2 * (1.0 / (2.0 * w)) * spectral_density(densities[j - 1], w) * thermal
        )
    return RelaxationReport(
        per_resistor=tuple(rates),
        total=float(sum(rates)),
        qubit_index=qubit_index,
        omega_qb=w,
    )

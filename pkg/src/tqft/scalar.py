"""Digitized scalar field theory on a chain of qubit registers.

Each lattice site carries n_Q qubits, i.e. an N_phi = 2^{n_Q} dimensional
site space.  The field operator is diagonal on a symmetric grid of
eigenvalues; the conjugate operator is obtained by conjugating it with a
centered discrete Fourier transform and scaling by the dimensionless mass,
which places its spectrum on the conjugate grid exactly.  Site states are
encoded by the plain binary representation of the grid label, most
significant bit first, so site tensor factors compose like qubit factors.

The dimensionless Hamiltonian per site is kinetic (conjugate squared) plus
mass and quartic potentials, with a nearest-neighbour gradient coupling.
All scalar operators are dense matrices on the site-space tensor product;
there is no useful Pauli decomposition at this granularity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import CapacityError, DivergenceError, ValidationError
from .operators import DENSE_QUBIT_CAP

BOUNDARIES = ("periodic", "open")


@dataclass(frozen=True)
class ScalarParams:
    """Digitized scalar-chain parameters.

    Attributes
    ----------
    n_sites : int
        Lattice sites N (>= 1).
    qubits_per_site : int
        Qubits per site register n_Q; the site space has N_phi = 2^{n_Q}
        grid points.
    dimless_mass : float
        Mass in lattice units, m * a > 0.
    coupling_lambda : float
        Bare quartic coupling, >= 0.
    boson_cutoff : int, optional
        Number of tracked low-lying site states N_b < N_phi; defaults to
        N_phi / 2 so truncation artifacts stay away from tracked states.
    boundary : str
        "periodic" (default) or "open".
    """

    n_sites: int
    qubits_per_site: int
    dimless_mass: float
    coupling_lambda: float = 0.0
    boson_cutoff: Optional[int] = None
    boundary: str = "periodic"

    def __post_init__(self):
        if self.n_sites < 1:
            raise ValidationError("n_sites must be at least 1")
        if self.qubits_per_site < 1:
            raise ValidationError("qubits_per_site must be at least 1")
        if not self.dimless_mass > 0:
            raise ValidationError("dimless_mass must be positive")
        if self.coupling_lambda < 0:
            raise ValidationError("coupling_lambda must be nonnegative")
        if self.boson_cutoff is None:
            object.__setattr__(self, "boson_cutoff", self.site_dim // 2)
        if not 0 < self.boson_cutoff < self.site_dim:
            raise ValidationError(
                "boson_cutoff must satisfy 0 < N_b < N_phi = 2^{qubits_per_site}"
            )
        if self.boundary not in BOUNDARIES:
            raise ValidationError(f"boundary must be one of {BOUNDARIES}")

    @property
    def site_dim(self) -> int:
        return 1 << self.qubits_per_site

    @property
    def n_qubits(self) -> int:
        return self.n_sites * self.qubits_per_site


@dataclass(frozen=True)
class SiteDigitization:
    """Grids and Fourier matrix of one site space.

    ``field_grid[a] = delta_phi (a - (N_phi-1)/2)`` and likewise for the
    conjugate grid; the spacings obey delta_phi * delta_kappa = 2 pi / N_phi.
    ``dft`` is the centered Fourier matrix with entries
    exp(i 2 pi (a - c)(b - c) / N_phi) / sqrt(N_phi), c = (N_phi-1)/2.
    """

    field_grid: np.ndarray
    conj_grid: np.ndarray
    delta_phi: float
    delta_kappa: float
    dft: np.ndarray


def make_site_digitization(params: ScalarParams) -> SiteDigitization:
    """Symmetric field/conjugate grids and the centered DFT of one site."""
    n_phi = params.site_dim
    mbar = params.dimless_mass
    delta_phi = math.sqrt(2.0 * math.pi / (n_phi * mbar))
    delta_kappa = math.sqrt(2.0 * math.pi * mbar / n_phi)
    center = 0.5 * (n_phi - 1)
    labels = np.arange(n_phi)
    field_grid = delta_phi * (labels - center)
    conj_grid = delta_kappa * (labels - center)
    shifted = labels - center
    dft = np.exp(2j * math.pi * np.outer(shifted, shifted) / n_phi) / math.sqrt(
        n_phi
    )
    return SiteDigitization(
        field_grid=field_grid,
        conj_grid=conj_grid,
        delta_phi=delta_phi,
        delta_kappa=delta_kappa,
        dft=dft,
    )


def build_site_operators(
    dig: SiteDigitization, mbar: float
) -> tuple[np.ndarray, np.ndarray]:
    """Field operator (diagonal) and conjugate operator of one site.

    The conjugate operator is mbar * F diag(field) F^{-1}; its eigenvalues
    land on the conjugate grid because mbar * delta_phi = delta_kappa.
    """
    phi = np.diag(dig.field_grid.astype(complex))
    pi = mbar * (dig.dft @ phi @ dig.dft.conj().T)
    pi = 0.5 * (pi + pi.conj().T)
    return phi, pi


def commutator_residual(
    dig: SiteDigitization, mbar: float, basis: str = "site"
) -> np.ndarray:
    """Per-state norm of ([field, conjugate] - i) on one site.

    ``basis="site"`` measures on the field-grid basis states; ``"harmonic"``
    on the eigenstates (ascending) of the free site Hamiltonian
    (conjugate^2 + mbar^2 field^2)/2.  The canonical commutator only holds
    approximately after digitization, and only the low-lying harmonic states
    see it accurately; both views are exposed because they differ noticeably
    at small N_phi.
    """
    phi, pi = build_site_operators(dig, mbar)
    comm = phi @ pi - pi @ phi - 1j * np.eye(phi.shape[0])
    if basis == "site":
        vectors = np.eye(phi.shape[0], dtype=complex)
    elif basis == "harmonic":
        h_site = 0.5 * (pi @ pi) + 0.5 * mbar**2 * (phi @ phi)
        _, vectors = np.linalg.eigh(h_site)
    else:
        raise ValidationError("basis must be 'site' or 'harmonic'")
    return np.linalg.norm(comm @ vectors, axis=0)


def _site_embed(op: np.ndarray, site: int, n_sites: int, site_dim: int) -> np.ndarray:
    left = np.eye(site_dim**site)
    right = np.eye(site_dim ** (n_sites - site - 1))
    return np.kron(np.kron(left, op), right)


def _bonds(params: ScalarParams) -> list[tuple[int, int]]:
    n = params.n_sites
    out = []
    for site in range(n):
        nxt = (site + 1) % n if params.boundary == "periodic" else site + 1
        if nxt == site or nxt >= n:
            continue
        out.append((site, nxt))
    return out


def _site_values(params: ScalarParams, grid: np.ndarray) -> np.ndarray:
    """grid value of each site as a (n_sites, total_dim) array."""
    d = params.site_dim
    dim = d**params.n_sites
    idx = np.arange(dim)
    rows = []
    for site in range(params.n_sites):
        labels = (idx // d ** (params.n_sites - 1 - site)) % d
        rows.append(grid[labels])
    return np.asarray(rows)


def build_scalar_hamiltonian(params: ScalarParams) -> np.ndarray:
    """Dense dimensionless Hamiltonian of the digitized chain.

    Site potentials (mass, quartic, gradient coupling) are diagonal in the
    field basis and assembled directly on the diagonal; the kinetic term
    embeds the squared conjugate operator site by site.
    """
    if params.n_qubits > DENSE_QUBIT_CAP:
        raise CapacityError(
            f"{params.n_sites} sites x {params.qubits_per_site} qubits exceed "
            f"the dense cap of {DENSE_QUBIT_CAP} qubits"
        )
    dig = make_site_digitization(params)
    phi, pi = build_site_operators(dig, params.dimless_mass)
    pi2 = pi @ pi

    values = _site_values(params, dig.field_grid)
    diag = 0.5 * params.dimless_mass**2 * np.sum(values**2, axis=0)
    diag = diag + params.coupling_lambda / 24.0 * np.sum(values**4, axis=0)
    for site, nxt in _bonds(params):
        diag = diag + 0.5 * (values[nxt] - values[site]) ** 2

    h = np.diag(diag.astype(complex))
    for site in range(params.n_sites):
        h += 0.5 * _site_embed(pi2, site, params.n_sites, params.site_dim)
    return 0.5 * (h + h.conj().T)


def scalar_mode_frequencies(params: ScalarParams) -> tuple[np.ndarray, np.ndarray]:
    """Normal-mode frequencies and mode vectors of the quadratic part.

    Diagonalizes the coupling matrix of the lambda = 0 theory; frequencies
    are the square roots of its eigenvalues (ascending).  The quartic term
    plays no role here, so for lambda > 0 these are the frequencies of the
    free part only.
    """
    n = params.n_sites
    k_mat = params.dimless_mass**2 * np.eye(n)
    for site, nxt in _bonds(params):
        k_mat[site, site] += 1.0
        k_mat[nxt, nxt] += 1.0
        k_mat[site, nxt] -= 1.0
        k_mat[nxt, site] -= 1.0
    w2, vecs = np.linalg.eigh(k_mat)
    return np.sqrt(w2), vecs


def scalar_mode_number_operator(params: ScalarParams, k: int) -> np.ndarray:
    """Dense number operator of free-field mode k.

    Built from the digitized field and conjugate operators through the
    normal-mode decomposition: (P_k^2 + omega_k^2 Q_k^2) / (2 omega_k) - 1/2.
    Hermitian by construction; positive semidefinite up to digitization
    error.  Frequencies always come from the quadratic part, so occupations
    remain measurable for lambda > 0 even though no closed-form reference
    exists there.
    """
    if not 0 <= k < params.n_sites:
        raise IndexError(f"mode {k} outside 0..{params.n_sites - 1}")
    omega, vecs = scalar_mode_frequencies(params)
    dig = make_site_digitization(params)
    phi, pi = build_site_operators(dig, params.dimless_mass)
    dim = params.site_dim**params.n_sites
    q_k = np.zeros((dim, dim), dtype=complex)
    p_k = np.zeros((dim, dim), dtype=complex)
    for site in range(params.n_sites):
        q_k += vecs[site, k] * _site_embed(phi, site, params.n_sites, params.site_dim)
        p_k += vecs[site, k] * _site_embed(pi, site, params.n_sites, params.site_dim)
    n_op = (p_k @ p_k + omega[k] ** 2 * (q_k @ q_k)) / (2.0 * omega[k])
    n_op -= 0.5 * np.eye(dim)
    return 0.5 * (n_op + n_op.conj().T)


def scalar_mode_momenta(params: ScalarParams) -> Optional[np.ndarray]:
    """Momentum label per normal mode on a periodic chain (else None)."""
    if params.boundary != "periodic":
        return None
    n = params.n_sites
    _, vecs = scalar_mode_frequencies(params)
    weight = np.abs(np.fft.fft(vecs, axis=0)) ** 2
    taken: set[int] = set()
    momenta = np.zeros(n)
    for k in range(n):
        ranked = np.argsort(weight[:, k], kind="stable")[::-1]
        q = next(int(i) for i in ranked if int(i) not in taken)
        taken.add(q)
        folded = q - n if q > n // 2 else q
        momenta[k] = 2.0 * math.pi * folded / n
    return momenta


def bose_einstein_reference(energy: float, beta: float) -> float:
    """Equilibrium occupation 1 / (e^{beta E} - 1) of a bosonic mode.

    Raises DivergenceError at beta * E <= 0; underflows gracefully to the
    Boltzmann tail for large arguments.
    """
    be = beta * energy
    if be <= 0:
        raise DivergenceError("bose_einstein_reference diverges at beta * E <= 0")
    if be > 700.0:
        return math.exp(-be)
    return 1.0 / math.expm1(be)

"""Free Majorana fermion chain with a Wilson term, mapped to qubits.

The lattice Hamiltonian combines nearest-neighbour pair hopping, a mass
term, and a Wilson correction that gaps out the doubler modes.  One qubit
represents one lattice site through the Jordan-Wigner transformation.

Single-particle energies are never taken from a dispersion formula: the
quadratic form (hopping matrix, pairing matrix, constant) is read back off
the dense Hamiltonian through vacuum matrix elements and then diagonalized
in the Bogoliubov-de Gennes form.  The same machinery serves the
background-coupled model, which reuses it per background sector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    NumericalFailureError,
    UnsupportedModelError,
    ValidationError,
)
from .operators import (
    QubitOperator,
    canonicalize,
    jordan_wigner_ladder,
    to_dense,
)

BOUNDARIES = ("periodic", "open")


@dataclass(frozen=True)
class FermionLatticeParams:
    """Free-chain parameters.

    Attributes
    ----------
    n_sites : int
        Number of lattice sites N (= number of qubits), at least 2.
    spacing : float
        Lattice spacing a > 0.
    mass : float
        Bare mass m >= 0 in inverse-length units.
    wilson_r : float
        Wilson coefficient, constrained to (0, 1].
    boundary : str
        "periodic" (default) or "open".
    """

    n_sites: int
    spacing: float = 1.0
    mass: float = 0.0
    wilson_r: float = 1.0
    boundary: str = "periodic"

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValidationError("n_sites must be at least 2")
        if not self.spacing > 0:
            raise ValidationError("spacing must be positive")
        if self.mass < 0:
            raise ValidationError("mass must be nonnegative")
        if not 0 < self.wilson_r <= 1:
            raise ValidationError("wilson_r must lie in (0, 1]")
        if self.boundary not in BOUNDARIES:
            raise ValidationError(f"boundary must be one of {BOUNDARIES}")


def _neighbor(n: int, step: int, n_sites: int, boundary: str) -> Optional[int]:
    m = n + step
    if boundary == "periodic":
        return m % n_sites
    return m if 0 <= m < n_sites else None


def build_free_hamiltonian(params: FermionLatticeParams) -> QubitOperator:
    """Assemble the free-chain Hamiltonian as a canonical Pauli sum.

    Per site the ladder-operator form carries
    ``-i (a_n a_{n+1} + a_n^+ a_{n+1}^+) / 2a``, a mass term
    ``m (a_n^+ a_n - 1/2)`` and the Wilson piece
    ``-(r/2a) [a_n^+ (a_{n+1} - 2 a_n + a_{n-1}) + 1]``.  Neighbour indices
    wrap on a periodic chain and drop at an open edge.  The transcription is
    symmetrized, (H + H^+)/2, so hermiticity cannot depend on the bookkeeping
    of the one-sided sums.
    """
    n_sites = params.n_sites
    a = params.spacing
    m = params.mass
    r = params.wilson_r

    ann = [jordan_wigner_ladder(n, n_sites, dagger=False) for n in range(n_sites)]
    cre = [jordan_wigner_ladder(n, n_sites, dagger=True) for n in range(n_sites)]
    ident = QubitOperator.identity(n_sites)

    h = QubitOperator.zero(n_sites)
    for n in range(n_sites):
        nxt = _neighbor(n, +1, n_sites, params.boundary)
        prv = _neighbor(n, -1, n_sites, params.boundary)
        if nxt is not None:
            h = h + (-0.5j / a) * (ann[n] * ann[nxt] + cre[n] * cre[nxt])
            h = h + (-0.5 * r / a) * (cre[n] * ann[nxt])
        if prv is not None:
            h = h + (-0.5 * r / a) * (cre[n] * ann[prv])
        h = h + m * (cre[n] * ann[n] - 0.5 * ident)
        h = h + (r / a) * (cre[n] * ann[n]) + (-0.5 * r / a) * ident

    h = 0.5 * (h + h.dagger())
    return canonicalize(h)


# -- quadratic-form extraction and Bogoliubov diagonalization ---------------


@dataclass(frozen=True)
class QuadraticModes:
    """Mode data of a fermionic Hamiltonian that is quadratic in ladders.

    ``energies`` are the nonnegative single-particle energies (ascending);
    columns of ``particle`` / ``hole`` hold the Bogoliubov amplitudes of the
    corresponding quasiparticle, and ``vacuum_energy`` is the many-body
    ground energy implied by them.
    """

    energies: np.ndarray
    particle: np.ndarray  # U, shape (N, N)
    hole: np.ndarray  # V, shape (N, N)
    vacuum_energy: float
    constant: float
    hopping: np.ndarray  # A, hermitian
    pairing: np.ndarray  # B, antisymmetric


def _single_index(n_sites: int, site: int) -> int:
    return 1 << (n_sites - 1 - site)


def extract_quadratic_form(
    h_dense: np.ndarray, n_sites: int, check_tol: float = 1e-9
) -> tuple[float, np.ndarray, np.ndarray]:
    """Read (constant, hopping A, pairing B) off a dense Hamiltonian.

    Uses vacuum matrix elements: ``A_nm = <n|H|m> - delta_nm <0|H|0>`` with
    single-particle states ``|n> = a_n^+|0>``, and the pairing amplitudes
    from ``<nm|H|0>``.  A dense rebuild of the extracted form must match the
    input, otherwise the Hamiltonian is not quadratic and an
    UnsupportedModelError is raised.
    """
    dim = 1 << n_sites
    if h_dense.shape != (dim, dim):
        raise DimensionMismatchError("dense Hamiltonian size does not match n_sites")
    c0 = h_dense[0, 0].real
    singles = [_single_index(n_sites, q) for q in range(n_sites)]
    A = np.zeros((n_sites, n_sites), dtype=complex)
    for p in range(n_sites):
        for q in range(n_sites):
            A[p, q] = h_dense[singles[p], singles[q]] - (c0 if p == q else 0.0)
    B = np.zeros((n_sites, n_sites), dtype=complex)
    for p in range(n_sites):
        for q in range(p + 1, n_sites):
            amp = h_dense[singles[p] | singles[q], 0]
            B[p, q] = amp
            B[q, p] = -amp

    # rebuild and verify quadraticity
    ann = [jordan_wigner_ladder(n, n_sites, dagger=False) for n in range(n_sites)]
    cre = [jordan_wigner_ladder(n, n_sites, dagger=True) for n in range(n_sites)]
    rebuilt = QubitOperator.identity(n_sites, c0)
    for p in range(n_sites):
        for q in range(n_sites):
            if abs(A[p, q]) > 1e-14:
                rebuilt = rebuilt + A[p, q] * (cre[p] * ann[q])
            if q > p and abs(B[p, q]) > 1e-14:
                rebuilt = rebuilt + B[p, q] * (cre[p] * cre[q])
                rebuilt = rebuilt + np.conj(B[p, q]) * (ann[q] * ann[p])
    scale = max(1.0, float(np.abs(h_dense).max()))
    if np.abs(to_dense(rebuilt) - h_dense).max() > check_tol * scale:
        raise UnsupportedModelError(
            "Hamiltonian is not quadratic in ladder operators"
        )
    return c0, A, B


def _ph_conjugate(v: np.ndarray) -> np.ndarray:
    """Antiunitary particle-hole map: swap halves and conjugate."""
    half = v.shape[0] // 2
    return np.concatenate([np.conj(v[half:]), np.conj(v[:half])])


def _ph_real_zero_basis(kernel: np.ndarray) -> list[np.ndarray]:
    """Orthonormal basis of the zero-energy space fixed by the PH map."""
    dim_k = kernel.shape[1]
    reals: list[np.ndarray] = []
    candidates = [kernel[:, j] for j in range(dim_k)]
    candidates += [1j * kernel[:, j] for j in range(dim_k)]
    for v in candidates:
        if len(reals) == dim_k:
            break
        w = v.astype(complex)
        for m in reals:
            w = w - np.vdot(m, w) * m
        nrm = np.linalg.norm(w)
        if nrm < 1e-8:
            continue
        w /= nrm
        m = w + _ph_conjugate(w)
        if np.linalg.norm(m) < 1e-6:
            m = 1j * (w - _ph_conjugate(w))
        if np.linalg.norm(m) < 1e-8:
            continue
        for r in reals:
            m = m - np.vdot(r, m).real * r
        nrm = np.linalg.norm(m)
        if nrm < 1e-8:
            continue
        reals.append(m / nrm)
    if len(reals) != dim_k:
        raise NumericalFailureError(
            "failed to build a particle-hole-real basis of the zero modes"
        )
    return reals


def quadratic_mode_analysis(
    h_dense: np.ndarray, n_sites: int, check_tol: float = 1e-9
) -> QuadraticModes:
    """Bogoliubov analysis of a quadratic fermionic Hamiltonian.

    Builds the 2N x 2N Bogoliubov-de Gennes matrix from the extracted
    quadratic form and selects one quasiparticle per particle-hole pair.
    Exact zero modes (massless chains) are paired explicitly so the
    transformation stays unitary.
    """
    c0, A, B = extract_quadratic_form(h_dense, n_sites, check_tol)
    n = n_sites
    bdg = np.zeros((2 * n, 2 * n), dtype=complex)
    bdg[:n, :n] = A
    bdg[:n, n:] = B
    bdg[n:, :n] = -np.conj(B)
    bdg[n:, n:] = -np.conj(A)
    bdg = 0.5 * (bdg + bdg.conj().T)

    evals, evecs = np.linalg.eigh(bdg)
    scale = max(1.0, float(np.abs(evals).max()))
    ztol = 1e-10 * scale

    cols: list[np.ndarray] = []
    energies: list[float] = []
    for i in np.nonzero(evals > ztol)[0]:
        cols.append(evecs[:, i])
        energies.append(float(evals[i]))
    zero_idx = np.nonzero(np.abs(evals) <= ztol)[0]
    if len(zero_idx):
        reals = _ph_real_zero_basis(evecs[:, zero_idx])
        for j in range(len(reals) // 2):
            cols.append((reals[2 * j] + 1j * reals[2 * j + 1]) / math.sqrt(2.0))
            energies.append(0.0)
    if len(cols) != n:
        raise NumericalFailureError(
            "particle-hole selection produced the wrong mode count"
        )

    order = np.argsort(energies, kind="stable")
    W = np.column_stack([cols[i] for i in order])
    e_sorted = np.asarray([energies[i] for i in order])

    full = np.column_stack(
        [W] + [_ph_conjugate(W[:, k]) for k in range(n)]
    )
    if np.abs(full.conj().T @ full - np.eye(2 * n)).max() > 1e-8:
        raise NumericalFailureError("Bogoliubov transformation is not unitary")

    vacuum = float(c0 + 0.5 * np.trace(A).real - 0.5 * e_sorted.sum())
    return QuadraticModes(
        energies=e_sorted,
        particle=W[:n, :],
        hole=W[n:, :],
        vacuum_energy=vacuum,
        constant=c0,
        hopping=A,
        pairing=B,
    )


def mode_number_operators(
    modes: QuadraticModes, n_qubits: Optional[int] = None
) -> list[QubitOperator]:
    """Jordan-Wigner images of the quasiparticle number operators b_k^+ b_k."""
    n = modes.particle.shape[0]
    reg = n if n_qubits is None else n_qubits
    ann = [jordan_wigner_ladder(q, reg, dagger=False) for q in range(n)]
    cre = [jordan_wigner_ladder(q, reg, dagger=True) for q in range(n)]
    ops = []
    for k in range(n):
        b = QubitOperator.zero(reg)
        for q in range(n):
            b = b + np.conj(modes.particle[q, k]) * ann[q]
            b = b + np.conj(modes.hole[q, k]) * cre[q]
        ops.append(canonicalize(b.dagger() * b))
    return ops


def assign_momenta(modes: QuadraticModes, spacing: float) -> np.ndarray:
    """Momentum label per mode from its dominant plane-wave component.

    Each Bogoliubov column is Fourier-analysed over the sites; modes claim
    distinct Fourier indices greedily in energy order, which splits
    degenerate +p/-p pairs instead of labelling both with the same index.
    Only meaningful on a periodic chain.
    """
    n = modes.particle.shape[0]
    fu = np.fft.fft(modes.particle, axis=0)
    fv = np.fft.fft(modes.hole, axis=0)
    weight = np.abs(fu) ** 2 + np.abs(fv) ** 2  # [q, k]
    taken: set[int] = set()
    momenta = np.zeros(n)
    for k in range(n):
        ranked = np.argsort(weight[:, k], kind="stable")[::-1]
        q = next(int(i) for i in ranked if int(i) not in taken)
        taken.add(q)
        folded = q - n if q > n // 2 else q
        momenta[k] = 2.0 * math.pi * folded / (n * spacing)
    return momenta


@dataclass(frozen=True)
class ModeBasis:
    """Single-particle content of a free-chain Hamiltonian.

    Attributes
    ----------
    energies : np.ndarray
        Nonnegative mode energies, ascending.
    mode_number_ops : tuple of QubitOperator
        Quasiparticle number operators aligned with ``energies``.
    vacuum_energy : float
        Ground-state energy of the chain.
    momenta : np.ndarray or None
        Momentum labels (periodic chains); None for open boundaries where
        modes are identified by index only.
    """

    energies: np.ndarray
    mode_number_ops: tuple[QubitOperator, ...]
    vacuum_energy: float
    momenta: Optional[np.ndarray]


def diagonalize_modes(
    h: QubitOperator, params: FermionLatticeParams
) -> ModeBasis:
    """Extract the mode basis of a free-chain Hamiltonian.

    Raises UnsupportedModelError when `h` is not quadratic in ladder
    operators.
    """
    if h.n_qubits != params.n_sites:
        raise DimensionMismatchError("Hamiltonian register does not match params")
    modes = quadratic_mode_analysis(to_dense(h), params.n_sites)
    ops = tuple(mode_number_operators(modes))
    momenta = (
        assign_momenta(modes, params.spacing)
        if params.boundary == "periodic"
        else None
    )
    return ModeBasis(
        energies=modes.energies,
        mode_number_ops=ops,
        vacuum_energy=modes.vacuum_energy,
        momenta=momenta,
    )


def fermi_dirac_reference(energy: float, beta: float) -> float:
    """Equilibrium occupation 1 / (1 + e^{beta E}) of a fermionic mode.

    Guarded against overflow: for beta*E > 700 the occupation underflows
    double precision and 0.0 is returned exactly.
    """
    be = beta * energy
    if be > 700.0:
        return 0.0
    return 1.0 / (1.0 + math.exp(be))


def mode_occupation(
    h: QubitOperator,
    basis: ModeBasis,
    beta: float,
    method: str = "exact",
    cfg=None,
) -> np.ndarray:
    """Thermal occupation <n_k> of every mode at inverse temperature beta."""
    from .thermal import evaluate  # local import; thermal depends on operators only

    for op in basis.mode_number_ops:
        if op.n_qubits != h.n_qubits:
            raise DimensionMismatchError(
                "mode operators and Hamiltonian live on different registers"
            )
    result = evaluate(h, list(basis.mode_number_ops), beta, method=method, cfg=cfg)
    return np.asarray(result.values)

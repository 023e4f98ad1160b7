"""Four-fermion model: a Majorana chain coupled to a homogeneous background.

One extra qubit carries the background Majorana mode.  Its bilinear
``psi_bar_B psi_B`` equals ``2 b^+ b - 1`` in the same convention that maps
the chain's mass bilinear to ``2 a_n^+ a_n - 1``, so the background
occupation is conserved and the Hamiltonian splits into two blocks.  Each
block is a free chain whose bare mass is shifted by -g/2 (background empty,
"sector 0") or +g/2 (background occupied, "sector 1"), which is what doubles
every energy level into two quasiparticle families.

All sector quantities come from restricting the dense Hamiltonian to a
background sector and rerunning the free-chain mode analysis there; nothing
is taken from a dispersion formula.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import UnsupportedModelError, ValidationError
from .free_fermion import (
    FermionLatticeParams,
    assign_momenta,
    build_free_hamiltonian,
    fermi_dirac_reference,
    mode_number_operators,
    quadratic_mode_analysis,
)
from .operators import QubitOperator, canonicalize, jordan_wigner_ladder, to_dense


@dataclass(frozen=True)
class InteractingParams:
    """Background-coupled chain parameters.

    ``lattice.mass`` holds the bare chain mass m_0; ``coupling_g`` the
    four-fermion coupling g; ``background_mass`` the bare background mass M.
    The register has one qubit per site plus one background qubit (index
    n_sites).
    """

    lattice: FermionLatticeParams
    coupling_g: float = 0.0
    background_mass: float = 0.0

    @property
    def n_qubits(self) -> int:
        return self.lattice.n_sites + 1


def background_bilinear(n_qubits: int) -> QubitOperator:
    """psi_bar_B psi_B = 2 b^+ b - 1 on the last qubit of the register."""
    site = n_qubits - 1
    b_cre = jordan_wigner_ladder(site, n_qubits, dagger=True)
    b_ann = jordan_wigner_ladder(site, n_qubits, dagger=False)
    return canonicalize(
        2.0 * (b_cre * b_ann) - QubitOperator.identity(n_qubits)
    )


def build_interacting_hamiltonian(params: InteractingParams) -> QubitOperator:
    """Free chain plus background mass term plus density-density coupling.

    The site bilinear ``2 a_n^+ a_n - 1`` is assembled from ladder operators
    with the same convention as the chain's mass term, so each background
    sector is exactly a free chain with mass m_0 -/+ g/2 and a constant
    offset -/+ M/2.
    """
    n_sites = params.lattice.n_sites
    n = params.n_qubits
    m_bg = params.background_mass
    g = params.coupling_g

    h = build_free_hamiltonian(params.lattice).extended(1)
    bg = background_bilinear(n)
    h = h + (0.5 * m_bg) * bg

    ident = QubitOperator.identity(n)
    for site in range(n_sites):
        cre = jordan_wigner_ladder(site, n, dagger=True)
        ann = jordan_wigner_ladder(site, n, dagger=False)
        site_bilinear = 2.0 * (cre * ann) - ident
        h = h + (0.25 * g) * (site_bilinear * bg)

    h = 0.5 * (h + h.dagger())
    return canonicalize(h)


@dataclass(frozen=True)
class SectorSpectrum:
    """Spectral summary of the two background sectors.

    ``vacuum_energy`` is the global ground energy; ``first_mass_eigenstate``
    the lowest one-quasiparticle level of sector 0, so ``effective_mass`` is
    their difference.  ``sector_vacuum_energies`` keeps each sector's own
    ground energy: the sectors are vacuum-degenerate only when the
    background excitation happens to cost nothing, and the partition
    products need the true per-sector offsets to reproduce the exact trace.
    """

    vacuum_energy: float
    first_mass_eigenstate: float
    effective_mass: float
    sector0_energies: np.ndarray
    sector1_energies: np.ndarray
    sector_vacuum_energies: tuple[float, float]


@dataclass(frozen=True)
class SectorAnalysis:
    """Everything the runner needs about a background-coupled chain."""

    hamiltonian: QubitOperator
    spectrum: SectorSpectrum
    number_ops: tuple[tuple[QubitOperator, ...], tuple[QubitOperator, ...]]
    momenta: tuple[Optional[np.ndarray], Optional[np.ndarray]]


@dataclass(frozen=True)
class QuasiDistributions:
    """Closed-form thermal occupations of both quasiparticle families."""

    f0: np.ndarray
    f1: np.ndarray
    z0: float
    z1: float
    z: float


def _sector_projector(n_qubits: int, sector: int) -> QubitOperator:
    """(I +/- Z)/2 on the background qubit; sector 0 = unoccupied."""
    sign = 1.0 if sector == 0 else -1.0
    z_string = "I" * (n_qubits - 1) + "Z"
    return QubitOperator.from_letter_terms(
        n_qubits, [(0.5, "I" * n_qubits), (0.5 * sign, z_string)]
    )


def analyze_sectors(params: InteractingParams) -> SectorAnalysis:
    """Restrict to each background sector and diagonalize its modes.

    The background occupation must commute with the Hamiltonian; if the
    dense off-sector block is nonzero the model assumption is broken and an
    UnsupportedModelError is raised.
    """
    n_sites = params.lattice.n_sites
    n = params.n_qubits
    h = build_interacting_hamiltonian(params)
    hd = to_dense(h)

    # background qubit is the least significant index bit
    off = hd[0::2, 1::2]
    if np.abs(off).max() > 1e-12 * max(1.0, np.abs(hd).max()):
        raise UnsupportedModelError("background occupation is not conserved")

    blocks = (hd[0::2, 0::2], hd[1::2, 1::2])
    sector_modes = [quadratic_mode_analysis(b, n_sites) for b in blocks]

    ops: list[tuple[QubitOperator, ...]] = []
    momenta: list[Optional[np.ndarray]] = []
    for sector, modes in enumerate(sector_modes):
        proj = _sector_projector(n, sector)
        sector_ops = tuple(
            canonicalize(op.extended(1) * proj)
            for op in mode_number_operators(modes)
        )
        ops.append(sector_ops)
        momenta.append(
            assign_momenta(modes, params.lattice.spacing)
            if params.lattice.boundary == "periodic"
            else None
        )

    w0 = sector_modes[0].vacuum_energy
    w1 = sector_modes[1].vacuum_energy
    vacuum = min(w0, w1)
    first_mass = w0 + float(sector_modes[0].energies[0])
    spectrum = SectorSpectrum(
        vacuum_energy=vacuum,
        first_mass_eigenstate=first_mass,
        effective_mass=first_mass - vacuum,
        sector0_energies=sector_modes[0].energies,
        sector1_energies=sector_modes[1].energies,
        sector_vacuum_energies=(w0, w1),
    )
    return SectorAnalysis(
        hamiltonian=h,
        spectrum=spectrum,
        number_ops=(ops[0], ops[1]),
        momenta=(momenta[0], momenta[1]),
    )


def quasiparticle_number_operators(
    params: InteractingParams,
) -> tuple[tuple[QubitOperator, ...], tuple[QubitOperator, ...]]:
    """Sector-projected quasiparticle number operators (n_p^0, n_p^1)."""
    return analyze_sectors(params).number_ops


def _log_sector_partitions(spec: SectorSpectrum, beta: float) -> tuple[float, float]:
    logs = []
    for vac, energies in zip(
        spec.sector_vacuum_energies, (spec.sector0_energies, spec.sector1_energies)
    ):
        acc = -beta * vac
        for e in energies:
            # log(1 + e^{-beta E}) without overflow for any sign of the exponent
            acc += float(np.logaddexp(0.0, -beta * e))
        logs.append(acc)
    return logs[0], logs[1]


def sector_partition_functions(
    spec: SectorSpectrum, beta: float
) -> tuple[float, float, float]:
    """Per-sector partition functions and their sum, computed in log space.

    Each sector is a free chain, so its trace factorizes into the vacuum
    Boltzmann weight times one (1 + e^{-beta E}) factor per mode.
    """
    if beta < 0:
        raise ValidationError("beta must be nonnegative")
    log_z0, log_z1 = _log_sector_partitions(spec, beta)
    z0 = math.exp(log_z0)
    z1 = math.exp(log_z1)
    return z0, z1, z0 + z1


def quasiparticle_reference(
    spec: SectorSpectrum, beta: float
) -> QuasiDistributions:
    """Closed-form f_p for both families: sector weight times Fermi-Dirac."""
    if beta < 0:
        raise ValidationError("beta must be nonnegative")
    log_z0, log_z1 = _log_sector_partitions(spec, beta)
    # sector weights z_s / (z_0 + z_1), stable for strongly split sectors
    w0 = 1.0 / (1.0 + math.exp(log_z1 - log_z0))
    w1 = 1.0 / (1.0 + math.exp(log_z0 - log_z1))
    f0 = np.array(
        [w0 * fermi_dirac_reference(e, beta) for e in spec.sector0_energies]
    )
    f1 = np.array(
        [w1 * fermi_dirac_reference(e, beta) for e in spec.sector1_energies]
    )
    z0, z1, z = sector_partition_functions(spec, beta)
    return QuasiDistributions(f0=f0, f1=f1, z0=z0, z1=z1, z=z)

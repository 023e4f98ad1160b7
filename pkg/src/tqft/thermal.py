"""Thermal expectation values on qubit registers.

Three routes to <O>_beta = Tr[e^{-beta H} O] / Z:

``exact``
    Eigendecompose the dense Hamiltonian and sum Boltzmann-weighted
    eigenvector expectations.  Eigenvalues are shifted by their minimum
    before exponentiation, so no overflow occurs up to beta ~ 1e4.
``trace_sweep``
    Evolve every computational basis state through e^{-beta H / 2} with
    Trotterized imaginary-time steps and accumulate squared-norm weights.
    The symmetric split makes each contribution a true expectation on a
    normalized state, which also handles observables that do not commute
    with H.
``qite``
    Same sweep, but each non-unitary Trotter factor is replaced by a fitted
    unitary acting on a configurable qubit domain, solved from a
    ridge-regularized least-squares system.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatchError,
    StepFailureError,
    NumericalFailureError,
    UnsupportedModelError,
    ValidationError,
)
from .operators import (
    PauliTerm,
    QubitOperator,
    StateVector,
    _term_phases,
    apply_operator,
    eigendecompose,
    to_dense,
)

Operator = Union[QubitOperator, np.ndarray]

IMAG_TOL = 1e-10  # reported values must be this close to real


@dataclass(frozen=True)
class ImagTimeConfig:
    """Knobs of the imaginary-time paths.

    ``dtau`` is an upper bound on the realized step: the step count is
    rounded up so the steps divide the requested evolution time exactly.
    ``qite_domain`` is the number of qubits the fitted unitaries act on
    (grown to cover a term's support when necessary).
    """

    dtau: float = 1e-3
    order: str = "second"
    qite_domain: int = 2
    regularization: float = 1e-8

    def __post_init__(self):
        if not self.dtau > 0:
            raise ValidationError("dtau must be positive")
        if self.order not in ("first", "second"):
            raise ValidationError("order must be 'first' or 'second'")
        if self.qite_domain < 1:
            raise ValidationError("qite_domain must be at least 1")
        if self.regularization < 0:
            raise ValidationError("regularization must be nonnegative")


@dataclass(frozen=True)
class ThermalQuery:
    """A thermal measurement request: observables at one inverse temperature."""

    beta: float
    observables: Sequence[Operator]
    method: str = "exact"

    def __post_init__(self):
        if not (math.isfinite(self.beta) and self.beta >= 0):
            raise ValidationError("beta must be finite and nonnegative")
        if self.method not in ("exact", "trace_sweep", "qite"):
            raise ValidationError("method must be exact, trace_sweep or qite")


@dataclass(frozen=True)
class ThermalResult:
    """Thermal expectations of one evaluation.

    ``partition_value`` is exp(log_partition) and may overflow to inf for
    very negative ground energies times beta; ``log_partition`` is always
    finite and is the value to trust programmatically.
    """

    beta: float
    values: np.ndarray
    partition_value: float
    log_partition: float
    method: str
    diagnostics: dict = field(default_factory=dict)


def _logsumexp(a: np.ndarray) -> float:
    m = float(np.max(a))
    return m + math.log(float(np.sum(np.exp(a - m))))


def _as_dense(op: Operator) -> np.ndarray:
    if isinstance(op, QubitOperator):
        return to_dense(op)
    return np.asarray(op, dtype=complex)


def _column_expectations(obs: Operator, columns: np.ndarray) -> np.ndarray:
    """<col_i | O | col_i> for every column of a matrix of states."""
    if isinstance(obs, QubitOperator):
        if columns.shape[0] != 1 << obs.n_qubits:
            raise DimensionMismatchError("observable register differs from state")
        applied = apply_operator(obs, columns)
    else:
        obs = np.asarray(obs)
        if obs.shape[0] != columns.shape[0]:
            raise DimensionMismatchError("observable dimension differs from state")
        applied = obs @ columns
    return np.einsum("ij,ij->j", columns.conj(), applied)


def _realize(values: np.ndarray) -> np.ndarray:
    worst = float(np.abs(values.imag).max()) if values.size else 0.0
    if worst > IMAG_TOL:
        raise NumericalFailureError(
            f"thermal value has imaginary part {worst:.3e} beyond {IMAG_TOL}"
        )
    return values.real.copy()


# -- exact path --------------------------------------------------------------


def gibbs_expectation_exact(
    h: Operator, obs: Sequence[Operator], beta: float
) -> ThermalResult:
    """Gibbs expectations through full eigendecomposition."""
    if beta < 0 or not math.isfinite(beta):
        raise ValidationError("beta must be finite and nonnegative")
    h_dense = _as_dense(h)
    evals, evecs = eigendecompose(h_dense)
    shifted = -beta * (evals - evals[0])
    weights = np.exp(shifted)
    total = float(weights.sum())
    values = np.array(
        [complex(np.dot(weights, _column_expectations(o, evecs)) / total) for o in obs]
    )
    log_z = -beta * evals[0] + math.log(total)
    with np.errstate(over="ignore"):
        z = float(np.exp(log_z))
    return ThermalResult(
        beta=beta,
        values=_realize(values),
        partition_value=z,
        log_partition=log_z,
        method="exact",
        diagnostics={"dim": h_dense.shape[0]},
    )


# -- Trotterized imaginary time ----------------------------------------------


class _TrotterTerms:
    """Precomputed gather arrays for e^{-theta c P} factors of a Pauli sum."""

    def __init__(self, h: QubitOperator):
        self.n_qubits = h.n_qubits
        dim = 1 << h.n_qubits
        idx = np.arange(dim, dtype=np.int64)
        self.identity_coeff = 0.0
        self.entries = []  # (coeff, gather_index, gather_phase, term)
        for term in sorted(h.terms(), key=lambda t: t.letters):
            if abs(term.coefficient.imag) > 1e-12:
                raise ValidationError(
                    "imaginary-time evolution requires a hermitian Hamiltonian"
                )
            c = term.coefficient.real
            if term.x == 0 and term.z == 0:
                self.identity_coeff += c
                continue
            rows, phases = _term_phases(term, dim)
            gather = idx ^ np.int64(term.x)
            self.entries.append((c, gather, phases[gather], term))

    def apply_factor(self, state: np.ndarray, coeff: float, theta: float,
                     gather: np.ndarray, phase: np.ndarray) -> np.ndarray:
        ch = math.cosh(theta * coeff)
        sh = math.sinh(theta * coeff)
        if state.ndim == 1:
            return ch * state - sh * (phase * state[gather])
        return ch * state - sh * (phase[:, None] * state[gather, :])

    def step(self, state: np.ndarray, dtau: float, order: str) -> np.ndarray:
        if order == "first":
            for c, g, p, _ in self.entries:
                state = self.apply_factor(state, c, dtau, g, p)
        else:
            for c, g, p, _ in self.entries:
                state = self.apply_factor(state, c, 0.5 * dtau, g, p)
            for c, g, p, _ in reversed(self.entries):
                state = self.apply_factor(state, c, 0.5 * dtau, g, p)
        return state


def _step_plan(total_time: float, dtau: float) -> tuple[int, float]:
    """Realized (steps, step size): step size <= dtau, dividing total_time."""
    if total_time <= 0:
        return 0, 0.0
    steps = max(1, math.ceil(total_time / dtau - 1e-12))
    return steps, total_time / steps


def imaginary_time_evolve(
    state: StateVector,
    h: Operator,
    dtau: float,
    steps: int,
    order: str = "second",
) -> tuple[StateVector, float]:
    """Apply `steps` factors of e^{-dtau H}, renormalizing after each.

    Returns the final normalized state and the product of pre-normalization
    norms, so that `accumulated_norm * |out>` approximates the un-normalized
    evolved vector.
    """
    if not state.normalized:
        raise ValidationError("imaginary_time_evolve needs a normalized state")
    amps = state.amplitudes.astype(complex)
    if isinstance(h, QubitOperator):
        if h.n_qubits != state.n_qubits:
            raise DimensionMismatchError("state and Hamiltonian registers differ")
        terms = _TrotterTerms(h)
        scalar = math.exp(-dtau * terms.identity_coeff)
        acc = 1.0
        for _ in range(steps):
            amps = terms.step(amps, dtau, order)
            nrm = float(np.linalg.norm(amps))
            acc *= nrm * scalar
            amps = amps / nrm
        return StateVector(amps), acc
    h_dense = _as_dense(h)
    if h_dense.shape[0] != amps.shape[0]:
        raise DimensionMismatchError("state and Hamiltonian dimensions differ")
    evals, evecs = eigendecompose(h_dense)
    prop = (evecs * np.exp(-dtau * evals)) @ evecs.conj().T
    acc = 1.0
    for _ in range(steps):
        amps = prop @ amps
        nrm = float(np.linalg.norm(amps))
        acc *= nrm
        amps = amps / nrm
    return StateVector(amps), acc


def thermal_trace_sweep(
    h: Operator,
    obs: Sequence[Operator],
    beta: float,
    cfg: Optional[ImagTimeConfig] = None,
) -> ThermalResult:
    """Trace as a basis sweep: every |i> evolved by e^{-beta H / 2}.

    Contribution weights are the squared accumulated norms, which makes the
    weighted sum reproduce Tr[e^{-beta H} O] exactly in the zero-Trotter-error
    limit.  All basis states are evolved together as the columns of one
    matrix; the reduction order is fixed, so results do not depend on any
    internal parallelism.
    """
    cfg = cfg or ImagTimeConfig()
    if beta < 0 or not math.isfinite(beta):
        raise ValidationError("beta must be finite and nonnegative")

    if isinstance(h, QubitOperator):
        dim = 1 << h.n_qubits
        terms: Optional[_TrotterTerms] = _TrotterTerms(h)
        prop = None
    else:
        h_dense = _as_dense(h)
        dim = h_dense.shape[0]
        terms = None

    steps, dtau = _step_plan(0.5 * beta, cfg.dtau)
    columns = np.eye(dim, dtype=complex)
    log_weights = np.zeros(dim)

    if steps:
        if terms is not None:
            log_scalar = -dtau * terms.identity_coeff
            for _ in range(steps):
                columns = terms.step(columns, dtau, cfg.order)
                norms = np.linalg.norm(columns, axis=0)
                log_weights += np.log(norms) + log_scalar
                columns = columns / norms
        else:
            evals, evecs = eigendecompose(h_dense)
            prop = (evecs * np.exp(-dtau * (evals - evals[0]))) @ evecs.conj().T
            log_shift = -dtau * evals[0]
            for _ in range(steps):
                columns = prop @ columns
                norms = np.linalg.norm(columns, axis=0)
                log_weights += np.log(norms) + log_shift
                columns = columns / norms

    # squared-norm weights, normalized in log space for large beta
    log_w2 = 2.0 * log_weights
    log_z = _logsumexp(log_w2)
    weights = np.exp(log_w2 - log_z)

    values = np.array(
        [complex(np.dot(weights, _column_expectations(o, columns))) for o in obs]
    )
    with np.errstate(over="ignore"):
        z = float(np.exp(log_z))
    return ThermalResult(
        beta=beta,
        values=_realize(values),
        partition_value=z,
        log_partition=log_z,
        method="trace_sweep",
        diagnostics={"steps": steps, "dtau": dtau},
    )


# -- QITE: fitted-unitary imaginary time --------------------------------------


def _support_qubits(op: QubitOperator) -> list[int]:
    mask = 0
    for term in op.terms():
        mask |= term.x | term.z
    n = op.n_qubits
    return [q for q in range(n) if (mask >> (n - 1 - q)) & 1]


def _fit_domain(support: Sequence[int], n_qubits: int, size: int) -> list[int]:
    """Contiguous qubit window covering `support`, grown to `size` qubits."""
    if not support:
        support = [0]
    lo, hi = min(support), max(support)
    dom = set(range(lo, hi + 1))
    target = min(max(size, len(dom)), n_qubits)
    while len(dom) < target:
        if lo > 0:
            lo -= 1
            dom.add(lo)
        if len(dom) < target and hi < n_qubits - 1:
            hi += 1
            dom.add(hi)
    return sorted(dom)


def _domain_paulis(domain: Sequence[int], n_qubits: int) -> list[PauliTerm]:
    """All non-identity Pauli strings supported on `domain` (full register)."""
    ops = []
    for letters in itertools.product("IXYZ", repeat=len(domain)):
        if all(l == "I" for l in letters):
            continue
        full = ["I"] * n_qubits
        for q, letter in zip(domain, letters):
            full[q] = letter
        ops.append(PauliTerm.from_letters(1.0, "".join(full)))
    return ops


def _apply_on_qubits(
    amps: np.ndarray, u: np.ndarray, qubits: Sequence[int], n_qubits: int
) -> np.ndarray:
    """Apply a 2^D x 2^D matrix to the listed qubits of a state vector."""
    d = len(qubits)
    t = amps.reshape((2,) * n_qubits)
    t = np.moveaxis(t, qubits, range(d))
    lead = t.shape[:d]
    t = t.reshape(1 << d, -1)
    t = u @ t
    t = t.reshape(lead + (2,) * (n_qubits - d))
    t = np.moveaxis(t, range(d), qubits)
    return np.ascontiguousarray(t).reshape(-1)


def _exact_nonunitary(
    term: QubitOperator, amps: np.ndarray, dtau: float
) -> np.ndarray:
    """e^{-dtau * term} |psi>, exact, un-normalized."""
    entries = _TrotterTerms(term)
    out = amps
    if len(entries.entries) == 1 and entries.identity_coeff == 0.0:
        c, g, p, _ = entries.entries[0]
        return entries.apply_factor(out, c, dtau, g, p)
    # general hermitian block: exponentiate on the support
    support = _support_qubits(term)
    if not support:
        return math.exp(-dtau * entries.identity_coeff) * out
    sub = _project_to_domain(term, support)
    w, q = np.linalg.eigh(to_dense(sub))
    u = (q * np.exp(-dtau * w)) @ q.conj().T
    out = _apply_on_qubits(out, u, support, term.n_qubits)
    return math.exp(-dtau * entries.identity_coeff) * out


def _project_to_domain(op: QubitOperator, domain: Sequence[int]) -> QubitOperator:
    """Rewrite an operator supported on `domain` onto a |domain|-qubit register."""
    pos = {q: i for i, q in enumerate(domain)}
    d = len(domain)
    out_terms = []
    for term in op.terms():
        letters = term.letters
        small = ["I"] * d
        for q, letter in enumerate(letters):
            if letter != "I":
                if q not in pos:
                    raise ValidationError("operator leaks outside its domain")
                small[pos[q]] = letter
        out_terms.append((term.coefficient, "".join(small)))
    return QubitOperator.from_letter_terms(d, out_terms)


def qite_step(
    state: StateVector,
    term: QubitOperator,
    dtau: float,
    cfg: Optional[ImagTimeConfig] = None,
) -> StateVector:
    """One fitted-unitary imaginary-time step for a hermitian term."""
    new_state, _, _ = _qite_step_full(state.amplitudes, term, dtau,
                                      cfg or ImagTimeConfig())
    return StateVector(new_state)


def _qite_step_full(
    amps: np.ndarray,
    term: QubitOperator,
    dtau: float,
    cfg: ImagTimeConfig,
) -> tuple[np.ndarray, float, float]:
    """Returns (normalized evolved amplitudes, norm factor, fit residual)."""
    if not term.is_hermitian:
        raise ValidationError("qite_step requires a hermitian term")
    n = term.n_qubits

    target = _exact_nonunitary(term, amps, dtau)
    c = float(np.linalg.norm(target))
    if c == 0.0:
        raise NumericalFailureError("imaginary-time step annihilated the state")
    phi = target / c

    support = _support_qubits(term)
    domain = _fit_domain(support, n, max(cfg.qite_domain, len(support)))
    basis = _domain_paulis(domain, n)

    dim = amps.shape[0]
    applied = np.empty((len(basis), dim), dtype=complex)
    for i, p in enumerate(basis):
        rows, phases = _term_phases(p, dim)
        gather = np.arange(dim, dtype=np.int64) ^ np.int64(p.x)
        applied[i] = phases[gather] * amps[gather]

    gram = applied.conj() @ applied.T
    s_mat = gram.real
    b_vec = (applied.conj() @ (phi - amps)).imag / dtau
    try:
        x = np.linalg.solve(
            s_mat + cfg.regularization * np.eye(len(basis)), b_vec
        )
    except np.linalg.LinAlgError as exc:
        raise StepFailureError(
            "singular fitting system in qite_step",
            diagnostics={"domain": domain, "basis_size": len(basis)},
        ) from exc

    residual = float(
        np.linalg.norm(phi - (amps - 1j * dtau * (x @ applied)))
    )

    # assemble A = sum_P x_P P on the domain and apply e^{-i dtau A}
    letters_by_basis = [p.letters for p in basis]
    dom_op = QubitOperator.from_letter_terms(
        len(domain),
        [
            (x[i], "".join(letters_by_basis[i][q] for q in domain))
            for i in range(len(basis))
            if abs(x[i]) > 0.0
        ],
    )
    if len(dom_op):
        w, q = np.linalg.eigh(to_dense(dom_op))
        u = (q * np.exp(-1j * dtau * w)) @ q.conj().T
        out = _apply_on_qubits(amps, u, domain, n)
    else:
        out = amps.copy()
    out = out / np.linalg.norm(out)
    return out, c, residual


def thermal_qite_sweep(
    h: QubitOperator,
    obs: Sequence[Operator],
    beta: float,
    cfg: Optional[ImagTimeConfig] = None,
) -> ThermalResult:
    """Basis-sweep thermal trace with fitted-unitary evolution steps."""
    cfg = cfg or ImagTimeConfig()
    if not isinstance(h, QubitOperator):
        raise UnsupportedModelError(
            "qite needs a Pauli-decomposed Hamiltonian (QubitOperator)"
        )
    if beta < 0 or not math.isfinite(beta):
        raise ValidationError("beta must be finite and nonnegative")
    n = h.n_qubits
    dim = 1 << n
    steps, dtau = _step_plan(0.5 * beta, cfg.dtau)

    plain = sorted(
        (t for t in h.terms() if t.x or t.z), key=lambda t: t.letters
    )
    ident = sum(
        t.coefficient.real for t in h.terms() if not (t.x or t.z)
    )
    term_ops = [QubitOperator(n, [t]) for t in plain]
    if cfg.order == "second":
        sequence = [(t, 0.5 * dtau) for t in term_ops]
        sequence += [(t, 0.5 * dtau) for t in reversed(term_ops)]
    else:
        sequence = [(t, dtau) for t in term_ops]

    log_weights = np.zeros(dim)
    columns = np.eye(dim, dtype=complex)
    max_residual = 0.0
    for i in range(dim):
        amps = columns[:, i].copy()
        log_nu = 0.0
        for _ in range(steps):
            for t_op, theta in sequence:
                amps, c, res = _qite_step_full(amps, t_op, theta, cfg)
                log_nu += math.log(c)
                max_residual = max(max_residual, res)
            log_nu += -dtau * ident
        columns[:, i] = amps
        log_weights[i] = log_nu

    log_w2 = 2.0 * log_weights
    log_z = _logsumexp(log_w2)
    weights = np.exp(log_w2 - log_z)
    values = np.array(
        [complex(np.dot(weights, _column_expectations(o, columns))) for o in obs]
    )
    with np.errstate(over="ignore"):
        z = float(np.exp(log_z))
    return ThermalResult(
        beta=beta,
        values=_realize(values),
        partition_value=z,
        log_partition=log_z,
        method="qite",
        diagnostics={"steps": steps, "dtau": dtau, "max_fit_residual": max_residual},
    )


# -- dispatch ----------------------------------------------------------------


def evaluate(
    h: Operator,
    obs: Sequence[Operator],
    beta: float,
    method: str = "exact",
    cfg: Optional[ImagTimeConfig] = None,
) -> ThermalResult:
    """Evaluate thermal expectations with the requested method."""
    if method == "exact":
        return gibbs_expectation_exact(h, obs, beta)
    if method == "trace_sweep":
        return thermal_trace_sweep(h, obs, beta, cfg)
    if method == "qite":
        if not isinstance(h, QubitOperator):
            raise UnsupportedModelError(
                "qite needs a Pauli-decomposed Hamiltonian"
            )
        return thermal_qite_sweep(h, obs, beta, cfg)
    raise ValidationError(f"unknown thermal method {method!r}")


def evaluate_query(
    h: Operator, query: ThermalQuery, cfg: Optional[ImagTimeConfig] = None
) -> ThermalResult:
    return evaluate(h, list(query.observables), query.beta, query.method, cfg)


def beta_sweep(
    h: Operator,
    obs: Sequence[Operator],
    betas: Sequence[float],
    method: str = "exact",
    cfg: Optional[ImagTimeConfig] = None,
) -> list[ThermalResult]:
    """Independent thermal evaluations over an ascending beta grid."""
    betas = list(betas)
    if any(b < 0 for b in betas):
        raise ValidationError("betas must be nonnegative")
    if any(b2 < b1 for b1, b2 in zip(betas, betas[1:])):
        raise ValidationError("betas must be ascending")
    return [evaluate(h, obs, b, method=method, cfg=cfg) for b in betas]

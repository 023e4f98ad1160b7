"""Pauli-string operator algebra and state-vector primitives.

Every model in this package expresses its Hamiltonian as a weighted sum of
Pauli strings (a :class:`QubitOperator`).  Strings are stored symplectically
as a pair of bitmasks (X-part, Z-part), which makes term multiplication O(n)
instead of O(4^n) and lets the dense realization fill one matrix entry per
basis state instead of chaining Kronecker products.

Conventions, fixed once and shared by all modules:

* qubit 0 is the *leftmost* tensor factor, i.e. the most significant bit of
  a basis-state index;
* a term with masks (x, z) represents ``coefficient × ⊗_q L_q`` where the
  letter on qubit q is I/X/Z/Y for (x_q, z_q) = (0,0)/(1,0)/(0,1)/(1,1);
* all types are immutable after construction and safe to share.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import CapacityError, DimensionMismatchError, ValidationError

#: terms whose coefficient magnitude falls at or below this are dropped
DEFAULT_CANON_TOL = 1e-14

#: dense realizations above this register size are refused (2^14 ~ 4 GB)
DENSE_QUBIT_CAP = 14

_LETTER_TO_BITS = {"I": (0, 0), "X": (1, 0), "Z": (0, 1), "Y": (1, 1)}
_BITS_TO_LETTER = {v: k for k, v in _LETTER_TO_BITS.items()}

_I4 = np.array([1.0, 1.0j, -1.0, -1.0j])  # powers of i


def _index_bit(n_qubits: int, qubit: int) -> int:
    """Mask bit for `qubit` in index space (qubit 0 = most significant)."""
    return 1 << (n_qubits - 1 - qubit)


@dataclass(frozen=True)
class PauliTerm:
    """A single weighted Pauli string.

    Parameters
    ----------
    n_qubits : int
        Register size; the string has exactly one letter per qubit.
    x, z : int
        Symplectic bitmasks in index space (bit ``n_qubits-1-q`` carries
        qubit q, matching the qubit-0-leftmost dense convention).
    coefficient : complex
    """

    n_qubits: int
    x: int
    z: int
    coefficient: complex

    @classmethod
    def from_letters(cls, coefficient: complex, letters: str) -> "PauliTerm":
        n = len(letters)
        if n == 0:
            raise ValidationError("a Pauli term needs at least one letter")
        x = z = 0
        for q, letter in enumerate(letters):
            try:
                xb, zb = _LETTER_TO_BITS[letter]
            except KeyError:
                raise ValidationError(f"unknown Pauli letter {letter!r}") from None
            bit = _index_bit(n, q)
            x |= xb * bit
            z |= zb * bit
        return cls(n, x, z, complex(coefficient))

    @property
    def letters(self) -> str:
        return "".join(
            _BITS_TO_LETTER[
                (self.x >> (self.n_qubits - 1 - q)) & 1,
                (self.z >> (self.n_qubits - 1 - q)) & 1,
            ]
            for q in range(self.n_qubits)
        )

    @property
    def weight(self) -> int:
        """Number of non-identity letters."""
        return (self.x | self.z).bit_count()

    def __repr__(self):
        return f"PauliTerm({self.coefficient!r}, {self.letters!r})"


def pauli_multiply(a: PauliTerm, b: PauliTerm) -> PauliTerm:
    """Multiply two Pauli strings, tracking the accumulated {±1, ±i} phase."""
    if a.n_qubits != b.n_qubits:
        raise DimensionMismatchError(
            f"cannot multiply terms on {a.n_qubits} and {b.n_qubits} qubits"
        )
    x3 = a.x ^ b.x
    z3 = a.z ^ b.z
    # i-power from recanonicalising Y letters plus Z-past-X anticommutation
    g = (
        (a.x & a.z).bit_count()
        + (b.x & b.z).bit_count()
        - (x3 & z3).bit_count()
        + 2 * (a.z & b.x).bit_count()
    ) % 4
    return PauliTerm(a.n_qubits, x3, z3, a.coefficient * b.coefficient * _I4[g])


class QubitOperator:
    """Canonical weighted sum of Pauli strings on a fixed register.

    Terms are keyed by their (x, z) masks; construction merges duplicates and
    drops terms at or below the canonicalization tolerance, so two operators
    built from differently ordered term lists compare equal.  Instances are
    immutable; all arithmetic returns new operators.
    """

    __slots__ = ("n_qubits", "_terms", "_tol")

    def __init__(
        self,
        n_qubits: int,
        terms: Iterable[PauliTerm] = (),
        tol: float = DEFAULT_CANON_TOL,
    ):
        if n_qubits < 1:
            raise ValidationError("register needs at least one qubit")
        merged: dict[tuple[int, int], complex] = {}
        for term in terms:
            if term.n_qubits != n_qubits:
                raise DimensionMismatchError(
                    f"term on {term.n_qubits} qubits added to a "
                    f"{n_qubits}-qubit operator"
                )
            key = (term.x, term.z)
            merged[key] = merged.get(key, 0.0) + term.coefficient
        object.__setattr__(self, "n_qubits", n_qubits)
        object.__setattr__(
            self,
            "_terms",
            {k: c for k, c in merged.items() if abs(c) > tol},
        )
        object.__setattr__(self, "_tol", tol)

    def __setattr__(self, name, value):  # pragma: no cover - guard rail
        raise AttributeError("QubitOperator is immutable")

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_letter_terms(
        cls, n_qubits: int, pairs: Iterable[tuple[complex, str]], tol=DEFAULT_CANON_TOL
    ) -> "QubitOperator":
        return cls(
            n_qubits,
            (PauliTerm.from_letters(c, s) for c, s in pairs),
            tol=tol,
        )

    @classmethod
    def identity(cls, n_qubits: int, coefficient: complex = 1.0) -> "QubitOperator":
        return cls(n_qubits, [PauliTerm(n_qubits, 0, 0, coefficient)])

    @classmethod
    def zero(cls, n_qubits: int) -> "QubitOperator":
        return cls(n_qubits)

    # -- inspection ---------------------------------------------------------

    def terms(self) -> Iterator[PauliTerm]:
        for (x, z), c in self._terms.items():
            yield PauliTerm(self.n_qubits, x, z, c)

    def __len__(self) -> int:
        return len(self._terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, QubitOperator):
            return NotImplemented
        return self.n_qubits == other.n_qubits and self._terms == other._terms

    def __hash__(self):
        return hash((self.n_qubits, frozenset(self._terms.items())))

    def coefficient(self, letters: str) -> complex:
        """Coefficient of a letter string (0 if absent)."""
        probe = PauliTerm.from_letters(1.0, letters)
        if probe.n_qubits != self.n_qubits:
            raise DimensionMismatchError("letter string has the wrong length")
        return self._terms.get((probe.x, probe.z), 0.0)

    @property
    def is_hermitian(self) -> bool:
        """Pauli strings are hermitian, so hermiticity == real coefficients."""
        return all(abs(c.imag) <= 1e-12 for c in self._terms.values())

    @property
    def identity_coefficient(self) -> complex:
        return self._terms.get((0, 0), 0.0)

    # -- algebra ------------------------------------------------------------

    def __add__(self, other: "QubitOperator") -> "QubitOperator":
        if not isinstance(other, QubitOperator):
            return NotImplemented
        if other.n_qubits != self.n_qubits:
            raise DimensionMismatchError("adding operators on different registers")
        out = dict(self._terms)
        for key, c in other._terms.items():
            out[key] = out.get(key, 0.0) + c
        return self._from_dict(out)

    def __sub__(self, other: "QubitOperator") -> "QubitOperator":
        return self + (-1.0) * other

    def __neg__(self) -> "QubitOperator":
        return (-1.0) * self

    def __mul__(self, other):
        if isinstance(other, QubitOperator):
            if other.n_qubits != self.n_qubits:
                raise DimensionMismatchError(
                    "multiplying operators on different registers"
                )
            out: dict[tuple[int, int], complex] = {}
            for (xa, za), ca in self._terms.items():
                for (xb, zb), cb in other._terms.items():
                    x3 = xa ^ xb
                    z3 = za ^ zb
                    g = (
                        (xa & za).bit_count()
                        + (xb & zb).bit_count()
                        - (x3 & z3).bit_count()
                        + 2 * (za & xb).bit_count()
                    ) % 4
                    key = (x3, z3)
                    out[key] = out.get(key, 0.0) + ca * cb * _I4[g]
            return self._from_dict(out)
        if isinstance(other, (int, float, complex)):
            return self._from_dict(
                {k: c * other for k, c in self._terms.items()}
            )
        return NotImplemented

    __rmul__ = __mul__

    def dagger(self) -> "QubitOperator":
        return self._from_dict({k: c.conjugate() for k, c in self._terms.items()})

    def extended(self, extra: int) -> "QubitOperator":
        """Same operator on a register grown by `extra` qubits appended at
        the end (identity on the new qubits)."""
        if extra < 0:
            raise ValidationError("cannot shrink a register")
        return QubitOperator(
            self.n_qubits + extra,
            (
                PauliTerm(self.n_qubits + extra, x << extra, z << extra, c)
                for (x, z), c in self._terms.items()
            ),
            tol=self._tol,
        )

    def _from_dict(self, d: dict) -> "QubitOperator":
        op = QubitOperator.__new__(QubitOperator)
        object.__setattr__(op, "n_qubits", self.n_qubits)
        object.__setattr__(
            op, "_terms", {k: c for k, c in d.items() if abs(c) > self._tol}
        )
        object.__setattr__(op, "_tol", self._tol)
        return op

    def __repr__(self):
        return (
            f"QubitOperator(n_qubits={self.n_qubits}, "
            f"terms={len(self._terms)})"
        )


def canonicalize(op: QubitOperator, tol: float = DEFAULT_CANON_TOL) -> QubitOperator:
    """Re-merge duplicate strings and drop sub-tolerance terms.

    Operators canonicalize themselves on construction; this is the explicit
    form, useful after bulk term assembly or to tighten the tolerance.
    """
    return QubitOperator(op.n_qubits, op.terms(), tol=tol)


def jordan_wigner_ladder(n: int, n_qubits: int, dagger: bool) -> QubitOperator:
    """Fermionic ladder operator on site `n` as a two-term Pauli sum.

    The creation operator is (X - iY)/2 on qubit n with a Z string on qubits
    0..n-1; the annihilation operator flips the sign of the Y part.  The
    string and the on-site factor act on disjoint qubits, so their relative
    order is immaterial.
    """
    if not 0 <= n < n_qubits:
        raise IndexError(f"site {n} outside register of {n_qubits} qubits")
    prefix = "Z" * n
    suffix = "I" * (n_qubits - n - 1)
    y_coeff = -0.5j if dagger else 0.5j
    return QubitOperator.from_letter_terms(
        n_qubits,
        [(0.5, prefix + "X" + suffix), (y_coeff, prefix + "Y" + suffix)],
    )


# -- dense realization and state-vector kernels ----------------------------


def _term_phases(term: PauliTerm, dim: int) -> tuple[np.ndarray, np.ndarray]:
    """Row permutation and per-column phase of a Pauli string.

    The string has one nonzero per column: ``P[j ^ x, j] = ph(j)`` with
    ``ph(j) = i^{|x∧z|} (-1)^{popcount(j∧z)}``.
    """
    idx = np.arange(dim, dtype=np.int64)
    parity = (np.bitwise_count(idx & np.int64(term.z)) & 1).astype(np.int64)
    phases = _I4[(term.x & term.z).bit_count() % 4] * (1.0 - 2.0 * parity)
    return idx ^ np.int64(term.x), phases


def to_dense(op: QubitOperator, max_qubits: int = DENSE_QUBIT_CAP) -> np.ndarray:
    """Dense matrix of an operator, qubit 0 as the leftmost tensor factor."""
    if op.n_qubits > max_qubits:
        raise CapacityError(
            f"dense realization of {op.n_qubits} qubits exceeds the cap "
            f"of {max_qubits}"
        )
    dim = 1 << op.n_qubits
    mat = np.zeros((dim, dim), dtype=complex)
    cols = np.arange(dim, dtype=np.int64)
    for term in op.terms():
        rows, phases = _term_phases(term, dim)
        mat[rows, cols] += term.coefficient * phases
    return mat


def apply_term(term: PauliTerm, amplitudes: np.ndarray) -> np.ndarray:
    """Apply one weighted Pauli string to an amplitude vector."""
    dim = amplitudes.shape[0]
    if dim != 1 << term.n_qubits:
        raise DimensionMismatchError("state and term dimensions differ")
    src, phases = _term_phases(term, dim)
    # out[j ^ x] = ph(j) v[j]  <=>  out[k] = ph(k ^ x) v[k ^ x]
    out = np.empty_like(amplitudes)
    out[src] = term.coefficient * phases * amplitudes
    return out


def apply_operator(op: QubitOperator, amplitudes: np.ndarray) -> np.ndarray:
    """Apply a QubitOperator to an amplitude vector (or matrix of columns)."""
    if amplitudes.shape[0] != 1 << op.n_qubits:
        raise DimensionMismatchError("state and operator dimensions differ")
    out = np.zeros_like(amplitudes)
    for term in op.terms():
        src, phases = _term_phases(term, amplitudes.shape[0])
        if amplitudes.ndim == 1:
            out[src] += term.coefficient * phases * amplitudes
        else:
            out[src] += term.coefficient * phases[:, None] * amplitudes
    return out


@dataclass(frozen=True)
class StateVector:
    """Complex amplitude vector on a qubit register.

    Amplitudes are copied and frozen at construction; index bit order matches
    the dense convention (qubit 0 = most significant bit).
    """

    amplitudes: np.ndarray
    n_qubits: int = field(init=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        n = int(amps.shape[0]).bit_length() - 1
        if amps.ndim != 1 or amps.shape[0] != 1 << n:
            raise ValidationError("amplitude vector length must be a power of two")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        object.__setattr__(self, "n_qubits", n)

    @classmethod
    def basis_state(cls, n_qubits: int, index: int) -> "StateVector":
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    @property
    def normalized(self) -> bool:
        return abs(self.norm**2 - 1.0) <= 1e-12


def expectation(state: StateVector, op: QubitOperator) -> complex:
    """⟨ψ|O|ψ⟩ for a normalized state.

    The result is returned as a complex number; for hermitian operators the
    imaginary part is numerical noise below ~1e-12.
    """
    if state.n_qubits != op.n_qubits:
        raise DimensionMismatchError("state and operator registers differ")
    if not state.normalized:
        raise ValidationError("expectation requires a normalized state")
    return complex(np.vdot(state.amplitudes, apply_operator(op, state.amplitudes)))


def eigendecompose(
    h: np.ndarray, hermiticity_tol: float = 1e-10
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and eigenvector matrix of a hermitian matrix.

    Raises
    ------
    ValidationError
        If the matrix deviates from hermiticity by more than the tolerance
        in max-entry norm.
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValidationError("eigendecompose needs a square matrix")
    scale = max(1.0, float(np.abs(h).max()))
    if np.abs(h - h.conj().T).max() > hermiticity_tol * scale:
        raise ValidationError("matrix is not hermitian within tolerance")
    return np.linalg.eigh(h)


def dumps(op: QubitOperator) -> str:
    """Debug dump: one term per line, sorted lexicographically by letters."""
    lines = []
    for term in sorted(op.terms(), key=lambda t: t.letters):
        c = term.coefficient
        lines.append(f"{c.real + 0.0:+.9f}{c.imag + 0.0:+.9f}j {term.letters}")
    return "\n".join(lines)

"""Truncated multimode Fock-space numerics.

Every mode is capped at the same occupation ``N`` (per-mode cutoff), so a
state on ``n`` modes is a complex tensor of shape ``(N+1,)*n``. Operators
are stored as sparse matrices acting on the C-ordered flattening of that
tensor; mode 0 is the slowest-varying axis.

Ladder operators are exact below the boundary: ``a_dag |n> = sqrt(n+1) |n+1>``
holds for ``n < N`` and maps ``|N>`` to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from tricoherent.config import DEFAULT_TOLERANCES, Tolerances
from tricoherent.exceptions import ConvergenceError

#: dense operator exponentials are refused above this dimension
DENSE_EXPM_MAX_DIM = 4096


def _check_mode(mode: int, n_modes: int) -> None:
    if not (0 <= mode < n_modes):
        raise ValueError(f"mode index {mode} out of range for {n_modes} modes")


def flat_index(occupation: Sequence[int], cutoff: int) -> int:
    """Flat basis index of an occupation tuple."""
    occ = tuple(int(n) for n in occupation)
    if any(n < 0 or n > cutoff for n in occ):
        raise ValueError(f"occupation {occ} outside 0..{cutoff}")
    return int(np.ravel_multi_index(occ, (cutoff + 1,) * len(occ)))


def occupation(index: int, n_modes: int, cutoff: int) -> tuple[int, ...]:
    """Inverse of :func:`flat_index`."""
    return tuple(int(n) for n in np.unravel_index(index, (cutoff + 1,) * n_modes))


def occupation_table(n_modes: int, cutoff: int) -> np.ndarray:
    """All occupation tuples as a ``(dim, n_modes)`` integer array in flat order."""
    grids = np.indices((cutoff + 1,) * n_modes)
    return grids.reshape(n_modes, -1).T.copy()


def interior_mask(n_modes: int, cutoff: int, headroom: int = 1) -> np.ndarray:
    """Flat mask of basis states with every mode at most ``cutoff - headroom``."""
    occ = occupation_table(n_modes, cutoff)
    return np.all(occ <= cutoff - headroom, axis=1)


def total_photon_mask(n_modes: int, cutoff: int, max_total: int) -> np.ndarray:
    """Flat mask of basis states whose total photon number is at most ``max_total``."""
    return occupation_table(n_modes, cutoff).sum(axis=1) <= max_total


@dataclass(frozen=True)
class LeakageReport:
    """Probability at the truncation boundary and the norm change of a pipeline."""

    boundary_mass: float
    norm_defect: float = 0.0

    def __post_init__(self):
        if self.boundary_mass < 0:
            raise ValueError("boundary_mass must be non-negative")

    def combine(self, other: "LeakageReport") -> "LeakageReport":
        return LeakageReport(
            max(self.boundary_mass, other.boundary_mass),
            self.norm_defect + other.norm_defect,
        )


@dataclass(frozen=True, eq=False)
class FockState:
    amps: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.ndim == 0 or len(set(amps.shape)) != 1:
            raise ValueError(f"amplitude tensor must be hypercubic, got {amps.shape}")
        if not np.all(np.isfinite(amps)):
            raise ValueError("amplitudes must be finite")
        amps.setflags(write=False)
        object.__setattr__(self, "amps", amps)

    @property
    def n_modes(self) -> int:
        return self.amps.ndim

    @property
    def cutoff(self) -> int:
        return self.amps.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.amps.size

    @property
    def vector(self) -> np.ndarray:
        return self.amps.reshape(-1)

    @classmethod
    def from_vector(cls, vector: np.ndarray, n_modes: int, cutoff: int) -> "FockState":
        return cls(np.asarray(vector).reshape((cutoff + 1,) * n_modes))

    @classmethod
    def basis(cls, occ: Sequence[int], cutoff: int) -> "FockState":
        amps = np.zeros((cutoff + 1,) * len(occ), dtype=complex)
        amps[tuple(occ)] = 1.0
        return cls(amps)

    @classmethod
    def vacuum(cls, n_modes: int, cutoff: int) -> "FockState":
        return cls.basis((0,) * n_modes, cutoff)

    def norm2(self) -> float:
        return float(np.vdot(self.vector, self.vector).real)

    def normalized(self) -> "FockState":
        n2 = self.norm2()
        if n2 <= 0:
            raise ValueError("cannot normalize a zero-norm state")
        return FockState(self.amps / math.sqrt(n2))

    def boundary_mass(self) -> float:
        on_edge = ~interior_mask(self.n_modes, self.cutoff, 1)
        return float(np.sum(np.abs(self.vector[on_edge]) ** 2))

    def leakage(self, reference_norm2: float | None = None) -> LeakageReport:
        n2 = self.norm2()
        defect = 0.0 if reference_norm2 is None else n2 - reference_norm2
        return LeakageReport(min(self.boundary_mass(), n2), defect)

    def restrict_total(self, max_total: int) -> "FockState":
        """Projection onto occupation tuples with at most ``max_total`` photons in total.

        Passive mode mixers conserve total photon number, and every tuple in
        this sector has each mode at most ``max_total``, so for
        ``max_total <= cutoff`` the truncated mixer generators act exactly here.
        """
        keep = total_photon_mask(self.n_modes, self.cutoff, max_total)
        return FockState.from_vector(np.where(keep, self.vector, 0.0), self.n_modes, self.cutoff)

    def __add__(self, other: "FockState") -> "FockState":
        _check_same_space(self, other)
        return FockState(self.amps + other.amps)

    def __sub__(self, other: "FockState") -> "FockState":
        _check_same_space(self, other)
        return FockState(self.amps - other.amps)

    def __mul__(self, scalar) -> "FockState":
        return FockState(self.amps * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class FockOperator:
    n_modes: int
    cutoff: int
    matrix: sp.csr_matrix

    def __post_init__(self):
        dim = (self.cutoff + 1) ** self.n_modes
        mat = sp.csr_matrix(self.matrix, dtype=complex)
        if mat.shape != (dim, dim):
            raise ValueError(f"matrix shape {mat.shape} does not match dimension {dim}")
        object.__setattr__(self, "matrix", mat)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def dag(self) -> "FockOperator":
        return FockOperator(self.n_modes, self.cutoff, self.matrix.conj().T)

    def _wrap(self, mat) -> "FockOperator":
        return FockOperator(self.n_modes, self.cutoff, mat)

    def __matmul__(self, other):
        if isinstance(other, FockOperator):
            _check_same_space(self, other)
            return self._wrap(self.matrix @ other.matrix)
        if isinstance(other, FockState):
            _check_same_space(self, other)
            return FockState.from_vector(self.matrix @ other.vector, self.n_modes, self.cutoff)
        return NotImplemented

    def __add__(self, other: "FockOperator") -> "FockOperator":
        _check_same_space(self, other)
        return self._wrap(self.matrix + other.matrix)

    def __sub__(self, other: "FockOperator") -> "FockOperator":
        _check_same_space(self, other)
        return self._wrap(self.matrix - other.matrix)

    def __mul__(self, scalar) -> "FockOperator":
        return self._wrap(self.matrix * scalar)

    __rmul__ = __mul__

    def __neg__(self) -> "FockOperator":
        return self._wrap(-self.matrix)

    def __truediv__(self, scalar) -> "FockOperator":
        return self._wrap(self.matrix / scalar)

    def power(self, k: int) -> "FockOperator":
        out = identity(self.n_modes, self.cutoff)
        for _ in range(k):
            out = out @ self
        return out


Space = Union[FockState, FockOperator]


def _check_same_space(a: Space, b: Space) -> None:
    if (a.n_modes, a.cutoff) != (b.n_modes, b.cutoff):
        raise ValueError(
            f"space mismatch: ({a.n_modes} modes, N={a.cutoff}) vs "
            f"({b.n_modes} modes, N={b.cutoff})"
        )


def _embed(single: sp.spmatrix, mode: int, n_modes: int, cutoff: int) -> sp.csr_matrix:
    eye = sp.identity(cutoff + 1, dtype=complex, format="csr")
    out = sp.identity(1, dtype=complex, format="csr")
    for m in range(n_modes):
        out = sp.kron(out, single if m == mode else eye, format="csr")
    return out


def identity(n_modes: int, cutoff: int) -> FockOperator:
    dim = (cutoff + 1) ** n_modes
    return FockOperator(n_modes, cutoff, sp.identity(dim, dtype=complex, format="csr"))


def ladder(mode: int, kind: str, cutoff: int, n_modes: int = 3) -> FockOperator:
    """Annihilation (``kind="lower"``) or creation (``kind="raise"``) operator."""
    _check_mode(mode, n_modes)
    low = sp.diags(np.sqrt(np.arange(1, cutoff + 1, dtype=float)), 1, dtype=complex)
    if kind == "lower":
        single = low
    elif kind == "raise":
        single = low.T
    else:
        raise ValueError(f"kind must be 'lower' or 'raise', got {kind!r}")
    return FockOperator(n_modes, cutoff, _embed(single, mode, n_modes, cutoff))


def number(mode: int, cutoff: int, n_modes: int = 3) -> FockOperator:
    _check_mode(mode, n_modes)
    single = sp.diags(np.arange(cutoff + 1, dtype=float), 0, dtype=complex)
    return FockOperator(n_modes, cutoff, _embed(single, mode, n_modes, cutoff))


def quadrature(mode: int, kind: str, cutoff: int, n_modes: int = 3) -> FockOperator:
    """``X = (a + a_dag)/sqrt(2)`` or ``P = (a - a_dag)/(sqrt(2) i)``."""
    a = ladder(mode, "lower", cutoff, n_modes)
    ad = ladder(mode, "raise", cutoff, n_modes)
    if kind == "X":
        return (a + ad) / math.sqrt(2)
    if kind == "P":
        return (a - ad) / (math.sqrt(2) * 1j)
    raise ValueError(f"kind must be 'X' or 'P', got {kind!r}")


def collective_lower(coeffs: Sequence[complex], cutoff: int) -> FockOperator:
    """``sum_i c_i a_i`` on ``len(coeffs)`` modes."""
    n = len(coeffs)
    out = FockOperator(n, cutoff, sp.csr_matrix(((cutoff + 1) ** n,) * 2, dtype=complex))
    for i, c in enumerate(coeffs):
        if c != 0:
            out = out + complex(c) * ladder(i, "lower", cutoff, n)
    return out


def commutator(a: FockOperator, b: FockOperator) -> FockOperator:
    return a @ b - b @ a


def inner(lhs: FockState, rhs: FockState) -> complex:
    """``<lhs|rhs>``, conjugate-linear in ``lhs``."""
    _check_same_space(lhs, rhs)
    return complex(np.vdot(lhs.vector, rhs.vector))


def expectation(op: FockOperator, state: FockState) -> complex:
    n2 = state.norm2()
    if n2 <= 0:
        raise ValueError("expectation value of a zero-norm state")
    return inner(state, op @ state) / n2


def variance(op: FockOperator, state: FockState) -> float:
    """``<Op^2> - <Op>^2`` for a Hermitian operator (real part returned)."""
    n2 = state.norm2()
    if n2 <= 0:
        raise ValueError("variance of a zero-norm state")
    applied = op @ state
    mean = inner(state, applied) / n2
    second = inner(applied, applied) / n2
    return float((second - mean * mean).real)


def _onenorm(mat: sp.spmatrix) -> float:
    if mat.nnz == 0:
        return 0.0
    return float(abs(mat).sum(axis=0).max())


def propagate(
    generator: sp.spmatrix,
    vectors: np.ndarray,
    tol: float = DEFAULT_TOLERANCES.expm_rel,
    max_terms: int = DEFAULT_TOLERANCES.expm_max_terms,
) -> np.ndarray:
    """Apply ``exp(generator)`` to one vector or to the columns of a block.

    The generator is split into ``s`` equal sub-steps with ``||G/s||_1 <= 1``
    and each sub-step is a Taylor series summed until the newest term is below
    ``tol`` relative to the running sum. This is the scaling half of
    scaling-and-squaring, with repeated application in place of squaring.
    """
    gen = sp.csr_matrix(generator)
    block = np.array(vectors, dtype=complex, copy=True)
    norm = _onenorm(gen)
    if norm == 0.0:
        return block
    steps = max(1, math.ceil(norm))
    step_gen = gen / steps
    for _ in range(steps):
        acc = block.copy()
        term = block
        for k in range(1, max_terms + 1):
            term = (step_gen @ term) / k
            acc += term
            if np.linalg.norm(term) <= tol * max(np.linalg.norm(acc), np.finfo(float).tiny):
                break
        else:
            raise ConvergenceError(
                f"Taylor series did not reach rel. tolerance {tol} in {max_terms} terms"
            )
        block = acc
    return block


def evolve(
    generator: FockOperator,
    target: Space,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> tuple[Space, LeakageReport]:
    """Apply ``exp(generator)`` to a state or left-multiply an operator by it.

    States go through :func:`propagate`. Operators go through a dense
    scaling-and-squaring exponential and are limited to
    ``DENSE_EXPM_MAX_DIM``; for operators the leakage entry is the largest
    boundary mass over columns that start off the boundary.
    """
    _check_same_space(generator, target)
    if isinstance(target, FockState):
        out = propagate(generator.matrix, target.vector, tolerances.expm_rel, tolerances.expm_max_terms)
        result = FockState.from_vector(out, target.n_modes, target.cutoff)
        return result, result.leakage(reference_norm2=target.norm2())
    if generator.dim > DENSE_EXPM_MAX_DIM:
        raise ValueError(
            f"dense exponential of a {generator.dim}-dim operator refused; "
            "evolve states instead"
        )
    u = scipy.linalg.expm(generator.dense())
    if not np.all(np.isfinite(u)):
        raise ConvergenceError("matrix exponential produced non-finite entries")
    mat = u @ target.dense()
    inside = interior_mask(generator.n_modes, generator.cutoff, 1)
    edge_mass = np.sum(np.abs(mat[~inside][:, inside]) ** 2, axis=0)
    report = LeakageReport(float(edge_mass.max()) if edge_mass.size else 0.0)
    return FockOperator(generator.n_modes, generator.cutoff, sp.csr_matrix(mat)), report

"""Truncated Fock-space linear algebra.

Dense states and operators on one or more bosonic modes, each truncated to
the number states |0> .. |cutoff-1>.  Operators are the exact
infinite-dimensional matrices restricted to the cutoff block, so the number
operator stays exactly diagonal and the truncation defect of the ladder
algebra is confined to the last row/column.

Mode ordering is fixed globally: the first mode of a composite space is the
slowest-varying index of the flattened amplitude vector (i.e. ``tensor``
is a plain Kronecker product in declared order).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_ATOL = 1e-12
UNITARY_ATOL = 1e-10
REAL_EXPECTATION_ATOL = 1e-10
DEFAULT_DEFICIT_TOL = 1e-6


class TruncationError(ValueError):
    """A state does not fit in the requested cutoff within tolerance."""

    def __init__(self, message: str, deficit: float):
        super().__init__(message)
        self.deficit = deficit


@dataclass(frozen=True)
class ModeSpace:
    """A single bosonic mode with Fock basis |0> .. |cutoff-1>."""

    cutoff: int

    def __post_init__(self):
        if not isinstance(self.cutoff, (int, np.integer)) or self.cutoff < 2:
            raise ValueError(f"cutoff must be an integer >= 2, got {self.cutoff!r}")

    @property
    def dim(self) -> int:
        return self.cutoff


@dataclass(frozen=True)
class CompositeSpace:
    """Ordered tensor product of modes (first mode = slowest index)."""

    modes: tuple[ModeSpace, ...]

    def __post_init__(self):
        modes = tuple(self.modes)
        if not modes:
            raise ValueError("composite space needs at least one mode")
        object.__setattr__(self, "modes", modes)

    @classmethod
    def single(cls, cutoff: int) -> "CompositeSpace":
        return cls((ModeSpace(cutoff),))

    @property
    def num_modes(self) -> int:
        return len(self.modes)

    @property
    def dim(self) -> int:
        return math.prod(m.cutoff for m in self.modes)

    @property
    def cutoffs(self) -> tuple[int, ...]:
        return tuple(m.cutoff for m in self.modes)


def as_composite(space: ModeSpace | CompositeSpace) -> CompositeSpace:
    if isinstance(space, ModeSpace):
        return CompositeSpace((space,))
    return space


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr, order="C", copy=True)  # never freeze a caller's array
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class StateVector:
    """Complex amplitudes over the flattened composite Fock basis.

    ``norm_deficit`` carries the pre-renormalization truncation loss when
    the state was prepared by cutting an infinite expansion (coherent
    states); it is None for states that are exact in the truncated basis.
    """

    space: CompositeSpace
    amplitudes: np.ndarray
    norm_deficit: float | None = None

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.space.dim,):
            raise ValueError(
                f"amplitude vector has shape {amps.shape}, expected ({self.space.dim},)"
            )
        object.__setattr__(self, "amplitudes", _readonly(amps))

    @property
    def dim(self) -> int:
        return self.space.dim

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense complex square matrix acting on a composite Fock space.

    The ``hermitian`` / ``unitary`` flags are validated at construction
    (max-norm tolerances 1e-12 / 1e-10) so downstream code can rely on them.
    """

    space: CompositeSpace
    entries: np.ndarray
    hermitian: bool = False
    unitary: bool = False

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=complex)
        d = self.space.dim
        if m.shape != (d, d):
            raise ValueError(f"operator has shape {m.shape}, expected ({d}, {d})")
        if self.hermitian:
            defect = np.max(np.abs(m - m.conj().T))
            if defect > HERMITIAN_ATOL:
                raise ValueError(f"matrix flagged Hermitian but |A - A^dag|_max = {defect:.3e}")
        if self.unitary:
            defect = np.max(np.abs(m.conj().T @ m - np.eye(d)))
            if defect > UNITARY_ATOL:
                raise ValueError(f"matrix flagged unitary but |A^dag A - I|_max = {defect:.3e}")
        object.__setattr__(self, "entries", _readonly(m))

    @property
    def dim(self) -> int:
        return self.space.dim

    def adjoint(self) -> "OperatorMatrix":
        return OperatorMatrix(
            self.space, self.entries.conj().T, hermitian=self.hermitian, unitary=self.unitary
        )

    def apply(self, state: StateVector) -> StateVector:
        if state.space != self.space:
            raise ValueError("operator and state live on different spaces")
        return StateVector(self.space, self.entries @ state.amplitudes)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        if other.space != self.space:
            raise ValueError("operators live on different spaces")
        return OperatorMatrix(
            self.space,
            self.entries @ other.entries,
            unitary=self.unitary and other.unitary,
        )


def annihilation_op(space: ModeSpace) -> OperatorMatrix:
    """Ladder operator with <k-1| a |k> = sqrt(k)."""
    m = np.diag(np.sqrt(np.arange(1, space.cutoff, dtype=float)), 1)
    return OperatorMatrix(as_composite(space), m)


def creation_op(space: ModeSpace) -> OperatorMatrix:
    return annihilation_op(space).adjoint()


def number_op(space: ModeSpace | CompositeSpace) -> OperatorMatrix:
    """diag(0, 1, ..., cutoff-1) for a single mode."""
    space = as_composite(space)
    if space.num_modes != 1:
        raise ValueError("number_op is single-mode; embed it for composite spaces")
    m = np.diag(np.arange(space.dim, dtype=complex))
    return OperatorMatrix(space, m, hermitian=True)


def identity_op(space: ModeSpace | CompositeSpace) -> OperatorMatrix:
    space = as_composite(space)
    return OperatorMatrix(space, np.eye(space.dim, dtype=complex), hermitian=True, unitary=True)


def coherent_amplitudes(alpha: complex, cutoff: int) -> np.ndarray:
    """Exact coefficients e^{-|a|^2/2} a^k / sqrt(k!) for k < cutoff."""
    k = np.arange(cutoff)
    if alpha == 0:
        amps = np.zeros(cutoff, dtype=complex)
        amps[0] = 1.0
        return amps
    mag = np.abs(alpha)
    log_mag = -mag**2 / 2 + k * math.log(mag) - 0.5 * np.array(
        [math.lgamma(kk + 1) for kk in k]
    )
    phase = np.exp(1j * k * np.angle(alpha))
    return np.exp(log_mag) * phase


def coherent_state(
    alpha: complex,
    space: ModeSpace,
    deficit_tol: float = DEFAULT_DEFICIT_TOL,
) -> StateVector:
    """Truncated coherent state |alpha>, renormalized to unit norm.

    The pre-renormalization deficit 1 - sum_k |c_k|^2 is attached as
    ``norm_deficit``.  Raises TruncationError when it exceeds
    ``deficit_tol`` (default 1e-6); callers that knowingly accept more
    truncation loss pass a larger tolerance.
    """
    amps = coherent_amplitudes(alpha, space.cutoff)
    deficit = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    if deficit > deficit_tol:
        raise TruncationError(
            f"coherent state alpha={alpha} needs a larger cutoff than {space.cutoff}: "
            f"norm deficit {deficit:.3e} > {deficit_tol:.1e}",
            deficit,
        )
    amps = amps / np.linalg.norm(amps)
    return StateVector(as_composite(space), amps, norm_deficit=deficit)


def fock_state(occupations: int | Sequence[int], space: ModeSpace | CompositeSpace) -> StateVector:
    """Basis state |n_1, ..., n_K>."""
    space = as_composite(space)
    if isinstance(occupations, (int, np.integer)):
        occupations = (int(occupations),)
    occupations = tuple(int(n) for n in occupations)
    if len(occupations) != space.num_modes:
        raise ValueError(f"need {space.num_modes} occupation numbers, got {len(occupations)}")
    idx = 0
    for n, mode in zip(occupations, space.modes):
        if not 0 <= n < mode.cutoff:
            raise ValueError(f"occupation {n} outside [0, {mode.cutoff - 1}]")
        idx = idx * mode.cutoff + n
    amps = np.zeros(space.dim, dtype=complex)
    amps[idx] = 1.0
    return StateVector(space, amps)


def _joined_space(operands: Sequence[StateVector | OperatorMatrix]) -> CompositeSpace:
    modes: list[ModeSpace] = []
    for op in operands:
        modes.extend(op.space.modes)
    return CompositeSpace(tuple(modes))


def tensor(
    operands: Iterable[StateVector] | Iterable[OperatorMatrix],
) -> StateVector | OperatorMatrix:
    """Kronecker product of states or of operators, in declared mode order."""
    ops = list(operands)
    if not ops:
        raise ValueError("tensor of zero operands")
    if len(ops) == 1:
        return ops[0]
    if all(isinstance(o, StateVector) for o in ops):
        amps = ops[0].amplitudes
        for o in ops[1:]:
            amps = np.kron(amps, o.amplitudes)
        return StateVector(_joined_space(ops), amps)
    if all(isinstance(o, OperatorMatrix) for o in ops):
        m = ops[0].entries
        for o in ops[1:]:
            m = np.kron(m, o.entries)
        return OperatorMatrix(
            _joined_space(ops),
            m,
            hermitian=all(o.hermitian for o in ops),
            unitary=all(o.unitary for o in ops),
        )
    raise TypeError("tensor operands must be all states or all operators")


def embed(op: OperatorMatrix, space: CompositeSpace, mode: int) -> OperatorMatrix:
    """Single-mode operator acting on ``mode`` of a composite space."""
    if op.space.num_modes != 1:
        raise ValueError("embed expects a single-mode operator")
    if not 0 <= mode < space.num_modes:
        raise ValueError(f"mode index {mode} outside 0..{space.num_modes - 1}")
    if op.space.modes[0] != space.modes[mode]:
        raise ValueError("operator cutoff does not match the target mode")
    factors = [
        op if j == mode else identity_op(space.modes[j]) for j in range(space.num_modes)
    ]
    out = tensor(factors)
    return OperatorMatrix(space, out.entries, hermitian=op.hermitian, unitary=op.unitary)


def expectation(state: StateVector, op: OperatorMatrix) -> complex:
    """<psi| M |psi>."""
    if state.space != op.space:
        raise ValueError("state and operator live on different spaces")
    psi = state.amplitudes
    return complex(np.vdot(psi, op.entries @ psi))


def real_expectation(state: StateVector, op: OperatorMatrix) -> float:
    """Expectation of a Hermitian observable, with the imaginary part checked
    against 1e-10 and dropped."""
    val = expectation(state, op)
    if abs(val.imag) > REAL_EXPECTATION_ATOL:
        raise ValueError(f"expectation has imaginary part {val.imag:.3e}; operator not Hermitian?")
    return val.real


def overlap(a: StateVector, b: StateVector) -> complex:
    """<a|b>."""
    if a.space != b.space:
        raise ValueError("states live on different spaces")
    return complex(np.vdot(a.amplitudes, b.amplitudes))

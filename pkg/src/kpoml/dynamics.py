"""KPO Hamiltonians, evolution unitaries, data encoders, and the layered
variational circuit.

A single Kerr-nonlinear parametric oscillator is governed by

    H = chi a^dag2 a^2 + delta a^dag a - p (a^2 + a^dag2) + r (a + a^dag),

and a network of K of them adds beam-splitter hopping
J_jj' a^dag_j a_j' + h.c. over pairs j > j'.  The Kerr constants chi_j and
the couplings J are fixed per experiment; (delta, p, r) per mode per layer
are the trainable knobs.

All evolution unitaries are computed by Hermitian eigendecomposition, which
is exact on the truncated space and keeps them unitary to machine precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .fock import (
    CompositeSpace,
    ModeSpace,
    OperatorMatrix,
    StateVector,
    annihilation_op,
    as_composite,
    coherent_state,
    fock_state,
)

THETA_ROLES = ("delta", "pump", "drive")


@dataclass(frozen=True)
class SingleKpoParams:
    """Knobs of one KPO: Kerr chi, detuning delta, pump p, drive r."""

    chi: float
    delta: float = 0.0
    p: float = 0.0
    r: float = 0.0


@dataclass(frozen=True)
class NetworkParams:
    """Per-mode KPO parameters plus the hopping matrix.

    Only the strictly-lower-triangular entries coupling[j, j'] with j > j'
    are read; each contributes J a^dag_j a_j' + conj(J) a^dag_j' a_j.
    """

    per_mode: tuple[SingleKpoParams, ...]
    coupling: np.ndarray | None = None

    def __post_init__(self):
        per_mode = tuple(self.per_mode)
        if not per_mode:
            raise ValueError("network needs at least one mode")
        object.__setattr__(self, "per_mode", per_mode)
        if self.coupling is not None:
            J = np.asarray(self.coupling, dtype=complex)
            K = len(per_mode)
            if J.shape != (K, K):
                raise ValueError(f"coupling must be {K}x{K}, got {J.shape}")
            object.__setattr__(self, "coupling", J)

    @property
    def num_modes(self) -> int:
        return len(self.per_mode)


@dataclass(frozen=True)
class EncodingParams:
    """Data-encoding constants: dimensionless Kerr phase chi_tilde = t_d * chi
    and the encoding duration t_d.  chi_tilde is fixed for a whole experiment."""

    chi_tilde: float
    t_d: float

    @classmethod
    def from_physical(cls, chi: float, t_d: float) -> "EncodingParams":
        return cls(chi_tilde=t_d * chi, t_d=t_d)


@dataclass(frozen=True)
class ThetaLayout:
    """Fixed map between the flat parameter vector and (delta, p, r) knobs.

    Layer i occupies the slice [3*K*i, 3*K*(i+1)), ordered as the K
    detunings, then the K pumps, then the K drives.  For K = 1 this reduces
    to theta[3i] = delta_i, theta[3i+1] = p_i, theta[3i+2] = r_i.
    """

    num_layers: int
    num_modes: int = 1

    def __post_init__(self):
        if self.num_layers < 1 or self.num_modes < 1:
            raise ValueError("num_layers and num_modes must be positive")

    @property
    def length(self) -> int:
        return 3 * self.num_modes * self.num_layers

    def unpack(self, theta: np.ndarray) -> np.ndarray:
        """Return an array of shape (layers, 3, modes) indexed by role."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.length,):
            raise ValueError(
                f"theta has shape {theta.shape}, layout needs ({self.length},)"
            )
        return theta.reshape(self.num_layers, 3, self.num_modes)

    def describe(self, index: int) -> tuple[int, str, int]:
        """Map a flat index to (layer, role, mode), all zero-based."""
        if not 0 <= index < self.length:
            raise ValueError(f"index {index} outside layout of length {self.length}")
        layer, rest = divmod(index, 3 * self.num_modes)
        role, mode = divmod(rest, self.num_modes)
        return layer, THETA_ROLES[role], mode


class KpoNetworkComponents:
    """Cached Hamiltonian building blocks for one (space, chi, coupling).

    The Hamiltonian is assembled as a linear combination

        H = static + sum_j delta_j N_j + p_j P_j + r_j R_j

    with static = sum_j chi_j a^dag2_j a^2_j + hopping, so evaluating many
    (delta, p, r) settings reuses the embedded matrices.
    """

    def __init__(
        self,
        space: ModeSpace | CompositeSpace,
        chi: float | Sequence[float],
        coupling: np.ndarray | None = None,
    ):
        space = as_composite(space)
        K = space.num_modes
        chis = np.broadcast_to(np.asarray(chi, dtype=float), (K,)).copy()
        self.space = space
        self.chi = chis
        self.coupling = None if coupling is None else np.asarray(coupling, dtype=complex)

        dim = space.dim
        number, pump, drive = [], [], []
        lowering = []
        static = np.zeros((dim, dim), dtype=complex)
        for j, mode in enumerate(space.modes):
            a = annihilation_op(mode).entries
            ad = a.conj().T
            a_j = self._embed(a, j)
            lowering.append(a_j)
            adj = a_j.conj().T
            number.append(adj @ a_j)
            pump.append(-(a_j @ a_j + adj @ adj))
            drive.append(a_j + adj)
            static += chis[j] * (adj @ adj @ a_j @ a_j)
        if self.coupling is not None:
            for j in range(K):
                for jp in range(j):
                    J = self.coupling[j, jp]
                    if J != 0:
                        hop = J * (lowering[j].conj().T @ lowering[jp])
                        static += hop + hop.conj().T
        # all terms are real symmetric unless the hopping is complex; the
        # real LAPACK eigensolver is ~2.5x faster than the complex one
        if np.max(np.abs(static.imag)) == 0.0:
            static = static.real.copy()
            number = [m.real.copy() for m in number]
            pump = [m.real.copy() for m in pump]
            drive = [m.real.copy() for m in drive]
        self.number = number
        self.pump = pump
        self.drive = drive
        self.static = static
        self.lowering = lowering

    def _embed(self, m: np.ndarray, mode: int) -> np.ndarray:
        out = np.array([[1.0 + 0j]])
        for j, ms in enumerate(self.space.modes):
            out = np.kron(out, m if j == mode else np.eye(ms.cutoff))
        return out

    def hamiltonian(
        self, deltas: Sequence[float], pumps: Sequence[float], drives: Sequence[float]
    ) -> np.ndarray:
        H = self.static.copy()
        for j in range(self.space.num_modes):
            H += deltas[j] * self.number[j] + pumps[j] * self.pump[j] + drives[j] * self.drive[j]
        return H

    def layer_unitary(
        self,
        deltas: Sequence[float],
        pumps: Sequence[float],
        drives: Sequence[float],
        tau: float,
    ) -> np.ndarray:
        return _expi_hermitian(self.hamiltonian(deltas, pumps, drives), tau)

    def circuit(self, theta: np.ndarray, layout: ThetaLayout, tau: float) -> np.ndarray:
        """V(theta) = V_D ... V_1 with V_1 acting first."""
        if layout.num_modes != self.space.num_modes:
            raise ValueError("layout mode count does not match the space")
        knobs = layout.unpack(theta)
        V: np.ndarray | None = None
        for i in range(layout.num_layers):
            Vi = self.layer_unitary(knobs[i, 0], knobs[i, 1], knobs[i, 2], tau)
            V = Vi if V is None else Vi @ V
        return V


def _expi_hermitian(h: np.ndarray, tau: float) -> np.ndarray:
    """e^{-i tau H} by eigendecomposition of Hermitian H."""
    w, v = np.linalg.eigh(h)
    if np.isrealobj(v):
        # two real matmuls instead of one complex one
        angles = tau * w
        real = (v * np.cos(angles)) @ v.T
        imag = (v * np.sin(angles)) @ v.T
        return real - 1j * imag
    return (v * np.exp(-1j * tau * w)) @ v.conj().T


def build_single_hamiltonian(params: SingleKpoParams, space: ModeSpace) -> OperatorMatrix:
    """H = chi a^dag2 a^2 + delta n - p (a^2 + a^dag2) + r (a + a^dag)."""
    a = annihilation_op(space).entries
    ad = a.conj().T
    H = (
        params.chi * (ad @ ad @ a @ a)
        + params.delta * (ad @ a)
        - params.p * (a @ a + ad @ ad)
        + params.r * (a + ad)
    )
    return OperatorMatrix(as_composite(space), H, hermitian=True)


def build_network_hamiltonian(params: NetworkParams, space: CompositeSpace) -> OperatorMatrix:
    """Sum of per-mode single-KPO terms plus hopping J a^dag_j a_j' + h.c."""
    space = as_composite(space)
    if params.num_modes != space.num_modes:
        raise ValueError(
            f"params describe {params.num_modes} modes but space has {space.num_modes}"
        )
    comp = KpoNetworkComponents(space, [p.chi for p in params.per_mode], params.coupling)
    H = comp.hamiltonian(
        [p.delta for p in params.per_mode],
        [p.p for p in params.per_mode],
        [p.r for p in params.per_mode],
    )
    return OperatorMatrix(space, H, hermitian=True)


def evolve_unitary(h: OperatorMatrix, tau: float) -> OperatorMatrix:
    """U = e^{-i tau H} for Hermitian H, exact on the truncated space."""
    if not h.hermitian:
        raise ValueError("evolve_unitary requires an operator flagged Hermitian")
    return OperatorMatrix(h.space, _expi_hermitian(h.entries, tau), unitary=True)


def encoding_phases(x: float, enc: EncodingParams, cutoff: int) -> np.ndarray:
    """Diagonal of the encoder: phase angle chi_tilde k^2 + pi x k on |k>."""
    k = np.arange(cutoff)
    return enc.chi_tilde * k.astype(float) ** 2 + np.pi * x * k


def encode_input_single(x: float, enc: EncodingParams, space: ModeSpace) -> OperatorMatrix:
    """U(x) = e^{-i chi_tilde n^2 - i pi x n}, built directly as a phase table."""
    diag = np.exp(-1j * encoding_phases(x, enc, space.cutoff))
    return OperatorMatrix(as_composite(space), np.diag(diag), unitary=True)


def encode_input_network(
    x: Sequence[float],
    enc: EncodingParams,
    space: CompositeSpace,
    target_modes: Sequence[int],
) -> OperatorMatrix:
    """Product of per-mode encoders U_j(x_j) on the listed modes, identity elsewhere."""
    space = as_composite(space)
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    targets = list(target_modes)
    if len(xs) != len(targets):
        raise ValueError(f"{len(xs)} inputs for {len(targets)} target modes")
    for m in targets:
        if not 0 <= m < space.num_modes:
            raise ValueError(f"target mode {m} outside 0..{space.num_modes - 1}")
    if len(set(targets)) != len(targets):
        raise ValueError("target modes must be distinct")
    phase = np.zeros(space.cutoffs)
    for x_j, mode in zip(xs, targets):
        shape = [1] * space.num_modes
        shape[mode] = -1
        phase = phase + encoding_phases(float(x_j), enc, space.cutoffs[mode]).reshape(shape)
    return OperatorMatrix(space, np.diag(np.exp(-1j * phase.ravel())), unitary=True)


def layered_circuit(
    theta: np.ndarray,
    layout: ThetaLayout,
    chi: float | Sequence[float],
    tau: float,
    space: ModeSpace | CompositeSpace,
    coupling: np.ndarray | None = None,
) -> OperatorMatrix:
    """V(theta) = V_D ... V_1, each V_i = e^{-i tau H(delta_i, p_i, r_i)}."""
    space = as_composite(space)
    comp = KpoNetworkComponents(space, chi, coupling)
    return OperatorMatrix(space, comp.circuit(np.asarray(theta, dtype=float), layout, tau),
                          unitary=True)


@dataclass(frozen=True)
class AdiabaticResult:
    """Final state of a preparation sweep plus the fidelity trace."""

    state: StateVector
    fidelity: float
    times: np.ndarray
    fidelities: np.ndarray


def adiabatic_prepare(
    chi: float,
    p_final: float,
    r_perturbation: float,
    delta_initial: float,
    total_time: float,
    num_steps: int,
    space: ModeSpace,
) -> AdiabaticResult:
    """Sweep from the vacuum regime (delta > chi, p = 0) to the pump regime
    (delta = 0, p = p_final) under a linear, piecewise-constant schedule.

    A small negative coherent drive r lifts the two-fold degeneracy of the
    final Hamiltonian so the sweep lands on |+sqrt(p/chi)> rather than the
    cat-state manifold.  Fidelity is |<sqrt(p/chi)|psi>|^2.
    """
    if delta_initial <= chi:
        raise ValueError("delta_initial must exceed chi for a vacuum initial ground state")
    if r_perturbation >= 0:
        raise ValueError("r_perturbation must be negative to select +sqrt(p/chi)")
    if num_steps < 1:
        raise ValueError("num_steps must be >= 1")
    if total_time <= 0:
        raise ValueError("total_time must be positive")

    space_c = as_composite(space)
    target = coherent_state(np.sqrt(p_final / chi), space_c.modes[0])
    comp = KpoNetworkComponents(space_c, chi)
    psi = fock_state(0, space_c).amplitudes
    dt = total_time / num_steps

    times = [0.0]
    fids = [abs(np.vdot(target.amplitudes, psi)) ** 2]
    for step in range(num_steps):
        s = (step + 0.5) / num_steps  # parameters at the step midpoint
        H = comp.hamiltonian(
            [delta_initial * (1.0 - s)], [p_final * s], [r_perturbation]
        )
        psi = _expi_hermitian(H, dt) @ psi
        times.append((step + 1) * dt)
        fids.append(abs(np.vdot(target.amplitudes, psi)) ** 2)

    state = StateVector(space_c, psi)
    return AdiabaticResult(
        state=state,
        fidelity=float(fids[-1]),
        times=np.asarray(times),
        fidelities=np.asarray(fids),
    )

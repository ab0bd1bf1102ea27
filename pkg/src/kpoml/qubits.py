"""Conventional qubit circuit-learning baseline.

Six qubits by default: the input is uploaded by per-qubit
R^Z(arccos x^2) R^Y(arcsin x) rotations, each variational layer applies
R^X R^Z R^X per qubit (three parameters each) followed by evolution under a
random transverse-field Ising Hamiltonian

    H = sum_j a_j X_j + sum_{j>k} J_jk Z_j Z_k,   a_j, J_jk ~ U[-1, 1],

and the readout is M = 2 Z on qubit 1.  Rotation convention is
R^P(angle) = e^{-i angle P / 2}; the initial state is |0...0>.

Qubits reuse the Fock machinery as cutoff-2 modes, with qubit 1 the
slowest-varying index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fock import CompositeSpace, ModeSpace, OperatorMatrix, embed

MAX_DENSE_QUBITS = 12  # 2^K dense matrices only

PAULI = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def qubit_space(num_qubits: int) -> CompositeSpace:
    if not 1 <= num_qubits <= MAX_DENSE_QUBITS:
        raise ValueError(
            f"num_qubits must be in 1..{MAX_DENSE_QUBITS} (dense-matrix guard), got {num_qubits}"
        )
    return CompositeSpace(tuple(ModeSpace(2) for _ in range(num_qubits)))


@dataclass(frozen=True)
class BaselineConfig:
    """Settings of the comparison scheme: K qubits, D layers, Ising time tau,
    and the seed that freezes the random Ising coefficients."""

    num_qubits: int = 6
    depth: int = 2
    tau: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.num_qubits <= MAX_DENSE_QUBITS:
            raise ValueError(
                f"num_qubits must be in 1..{MAX_DENSE_QUBITS} (dense-matrix guard), "
                f"got {self.num_qubits}"
            )
        if self.depth < 1:
            raise ValueError("depth must be >= 1")

    @property
    def n_parameters(self) -> int:
        return 3 * self.num_qubits * self.depth


@dataclass(frozen=True)
class IsingCoefficients:
    """Transverse fields a_j and strictly-lower-triangular couplings J_jk."""

    a: np.ndarray
    coupling: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        J = np.asarray(self.coupling, dtype=float)
        K = a.size
        if J.shape != (K, K):
            raise ValueError(f"coupling must be {K}x{K}, got {J.shape}")
        if np.any(J != np.tril(J, -1)):
            raise ValueError("coupling must be strictly lower triangular")
        if np.any(np.abs(a) > 1) or np.any(np.abs(J) > 1):
            raise ValueError("Ising coefficients must lie in [-1, 1]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "coupling", J)

    @classmethod
    def draw(cls, num_qubits: int, seed: int) -> "IsingCoefficients":
        """Uniform [-1, 1] coefficients from a Philox stream; the fields are
        drawn first, then a K x K block whose strict lower triangle is kept."""
        rng = np.random.Generator(np.random.Philox(seed))
        a = rng.uniform(-1.0, 1.0, num_qubits)
        block = rng.uniform(-1.0, 1.0, (num_qubits, num_qubits))
        return cls(a=a, coupling=np.tril(block, -1))


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    """2x2 rotation e^{-i angle P / 2} about a Pauli axis."""
    P = PAULI[axis.upper()]
    return np.cos(angle / 2) * np.eye(2, dtype=complex) - 1j * np.sin(angle / 2) * P


def rotation_gate(axis: str, angle: float, qubit: int, num_qubits: int) -> OperatorMatrix:
    """Single-qubit rotation embedded in the 2^K space (qubit index 0-based)."""
    space = qubit_space(num_qubits)
    gate = OperatorMatrix(CompositeSpace((ModeSpace(2),)), rotation_matrix(axis, angle),
                          unitary=True)
    return embed(gate, space, qubit)


def _kron_chain(mats: list[np.ndarray]) -> np.ndarray:
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def encode_qubit_vector(x: float) -> np.ndarray:
    """Per-qubit encoded state R^Z(arccos x^2) R^Y(arcsin x) |0>."""
    if abs(x) > 1:
        raise ValueError(f"input {x} outside [-1, 1]")
    u = rotation_matrix("Z", np.arccos(x * x)) @ rotation_matrix("Y", np.arcsin(x))
    return u[:, 0].copy()


def encode_input_qubits(x: float, num_qubits: int) -> OperatorMatrix:
    """U(x) = prod_j R^Z_j(arccos x^2) R^Y_j(arcsin x), R^Y acting first."""
    if abs(x) > 1:
        raise ValueError(f"input {x} outside [-1, 1]")
    u = rotation_matrix("Z", np.arccos(x * x)) @ rotation_matrix("Y", np.arcsin(x))
    return OperatorMatrix(qubit_space(num_qubits), _kron_chain([u] * num_qubits), unitary=True)


def parameterized_layer(theta_layer: np.ndarray, num_qubits: int) -> OperatorMatrix:
    """Per-qubit R^X(t1) R^Z(t2) R^X(t3) with R^X(t3) acting first; the flat
    layer vector holds the three angles of qubit 1, then qubit 2, ..."""
    theta_layer = np.asarray(theta_layer, dtype=float)
    if theta_layer.shape != (3 * num_qubits,):
        raise ValueError(
            f"layer needs {3 * num_qubits} parameters, got shape {theta_layer.shape}"
        )
    locals_ = [
        rotation_matrix("X", theta_layer[3 * j])
        @ rotation_matrix("Z", theta_layer[3 * j + 1])
        @ rotation_matrix("X", theta_layer[3 * j + 2])
        for j in range(num_qubits)
    ]
    return OperatorMatrix(qubit_space(num_qubits), _kron_chain(locals_), unitary=True)


def ising_hamiltonian(coeffs: IsingCoefficients, num_qubits: int | None = None) -> OperatorMatrix:
    K = coeffs.a.size if num_qubits is None else num_qubits
    if coeffs.a.size != K:
        raise ValueError("coefficient size does not match num_qubits")
    space = qubit_space(K)
    I2 = np.eye(2, dtype=complex)
    H = np.zeros((space.dim, space.dim), dtype=complex)
    for j in range(K):
        H += coeffs.a[j] * _kron_chain([PAULI["X"] if q == j else I2 for q in range(K)])
        for k in range(j):
            if coeffs.coupling[j, k] != 0:
                H += coeffs.coupling[j, k] * _kron_chain(
                    [PAULI["Z"] if q in (j, k) else I2 for q in range(K)]
                )
    return OperatorMatrix(space, H, hermitian=True)


def ising_evolution(coeffs: IsingCoefficients, tau: float, num_qubits: int | None = None) -> OperatorMatrix:
    """e^{-i tau H} via eigendecomposition of the dense 2^K Hamiltonian."""
    H = ising_hamiltonian(coeffs, num_qubits)
    w, v = np.linalg.eigh(H.entries)
    return OperatorMatrix(H.space, (v * np.exp(-1j * tau * w)) @ v.conj().T, unitary=True)


def readout_observable(num_qubits: int) -> OperatorMatrix:
    """M = 2 Z on qubit 1."""
    space = qubit_space(num_qubits)
    I2 = np.eye(2, dtype=complex)
    m = 2 * _kron_chain([PAULI["Z"]] + [I2] * (num_qubits - 1))
    return OperatorMatrix(space, m, hermitian=True)


def baseline_circuit(
    theta: np.ndarray, config: BaselineConfig, coeffs: IsingCoefficients | None = None
) -> OperatorMatrix:
    """V(theta) = prod_i e^{-i tau H} prod_j U(theta^i_j), layer 1 acting first."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (config.n_parameters,):
        raise ValueError(
            f"theta has shape {theta.shape}, baseline needs ({config.n_parameters},)"
        )
    if coeffs is None:
        coeffs = IsingCoefficients.draw(config.num_qubits, config.seed)
    E = ising_evolution(coeffs, config.tau, config.num_qubits)
    K = config.num_qubits
    V: OperatorMatrix | None = None
    for i in range(config.depth):
        layer = parameterized_layer(theta[3 * K * i : 3 * K * (i + 1)], K)
        factor = E @ layer
        V = factor if V is None else factor @ V
    return V


def baseline_model(
    x: float,
    theta: np.ndarray,
    config: BaselineConfig,
    coeffs: IsingCoefficients | None = None,
) -> float:
    """f(x) = <0..0| U^dag(x) V^dag(theta) (2 Z_1) V(theta) U(x) |0..0>, in [-2, 2]."""
    if abs(x) > 1:
        raise ValueError(f"input {x} outside [-1, 1]")
    if coeffs is None:
        coeffs = IsingCoefficients.draw(config.num_qubits, config.seed)
    V = baseline_circuit(theta, config, coeffs)
    v = encode_qubit_vector(x)
    psi = _kron_chain([v] * config.num_qubits)
    psi = V.entries @ psi
    M = readout_observable(config.num_qubits)
    val = np.vdot(psi, M.entries @ psi)
    if abs(val.imag) > 1e-10:
        raise AssertionError(f"readout not real: imag {val.imag:.3e}")
    return float(val.real)

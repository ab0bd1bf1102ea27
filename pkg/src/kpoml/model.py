"""Model functions f(x; theta) for every circuit variant.

A ModelSpec pins one quantum model: the variant, its physical constants,
cutoffs, initial coherent amplitude(s), encoding constants, circuit depth
and evolution time, and the observables with the rule that combines their
expectations into the output.  ModelFunction compiles a spec into an
efficient evaluator that builds V(theta) once per parameter vector and
reuses it across a whole batch of inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import qubits
from .dynamics import (
    EncodingParams,
    KpoNetworkComponents,
    ThetaLayout,
    encoding_phases,
)
from .fock import (
    CompositeSpace,
    ModeSpace,
    StateVector,
    coherent_state,
    tensor,
)

VARIANTS = ("single-kpo", "kpo-network", "multi-input-single-kpo", "qubit-baseline")
OUTPUT_RULES = ("single", "product", "vector")
BOSONIC_VARIANTS = ("single-kpo", "kpo-network", "multi-input-single-kpo")

# The truncation budget the experiment layer accepts for initial states.
# The headline settings (alpha = 3 at cutoff 25) lose ~8.7e-6 of norm,
# above the 1e-6 default gate of fock.coherent_state, so model construction
# uses this laxer explicit tolerance.
MODEL_DEFICIT_TOL = 1e-4

IMAG_ATOL = 1e-10


def _scalar_tuple(value, n=None) -> tuple:
    if np.isscalar(value):
        t = (value,) if n is None else (value,) * n
    else:
        t = tuple(value)
    return t


@dataclass(frozen=True)
class ModelSpec:
    """Full description of one quantum model.  Use the ``single_kpo_spec`` /
    ``kpo_network_spec`` / ``qubit_baseline_spec`` helpers for the standard
    configurations."""

    variant: str
    depth: int
    tau: float
    observables: tuple[str, ...]
    output_rule: str = "single"
    # bosonic settings (per mode where tuple-valued)
    chi: tuple[float, ...] = (0.1,)
    cutoff: tuple[int, ...] = (25,)
    alpha: tuple[complex, ...] = (3.0,)
    t_d: float = 0.7
    chi_tilde: float | None = None  # None -> t_d * chi
    coupling: tuple[tuple[complex, ...], ...] | None = None
    num_inputs: int = 1
    deficit_tol: float = MODEL_DEFICIT_TOL
    # qubit-baseline settings
    num_qubits: int = 6
    ising_seed: int = 0

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}, expected one of {VARIANTS}")
        if self.output_rule not in OUTPUT_RULES:
            raise ValueError(f"unknown output_rule {self.output_rule!r}")
        if self.depth < 1:
            raise ValueError("depth must be >= 1")
        object.__setattr__(self, "observables", tuple(self.observables))
        if not self.observables:
            raise ValueError("at least one observable is required")
        if self.output_rule == "single" and len(self.observables) != 1:
            raise ValueError("output_rule 'single' takes exactly one observable")
        if self.variant in BOSONIC_VARIANTS:
            chi = _scalar_tuple(self.chi)
            cutoff = tuple(int(c) for c in _scalar_tuple(self.cutoff, len(chi)))
            alpha = _scalar_tuple(self.alpha, len(chi))
            if not len(chi) == len(cutoff) == len(alpha):
                raise ValueError("chi, cutoff, and alpha must describe the same mode count")
            object.__setattr__(self, "chi", tuple(float(c) for c in chi))
            object.__setattr__(self, "cutoff", cutoff)
            object.__setattr__(self, "alpha", tuple(complex(a) for a in alpha))
            if self.variant in ("single-kpo", "multi-input-single-kpo") and len(chi) != 1:
                raise ValueError(f"{self.variant} is a one-mode model")
            if self.coupling is not None:
                J = tuple(tuple(complex(v) for v in row) for row in self.coupling)
                if len(J) != len(chi) or any(len(row) != len(chi) for row in J):
                    raise ValueError("coupling must be a KxK matrix")
                object.__setattr__(self, "coupling", J)
            if self.chi_tilde is None and len(set(chi)) > 1:
                raise ValueError("per-mode chi values differ; give chi_tilde explicitly")
            if self.variant == "multi-input-single-kpo":
                if self.num_inputs != 2:
                    raise ValueError("multi-input-single-kpo takes exactly two inputs")
            elif self.variant == "single-kpo":
                if self.num_inputs != 1:
                    raise ValueError("single-kpo takes one input")
            elif not 1 <= self.num_inputs <= len(chi):
                raise ValueError("kpo-network needs 1 <= num_inputs <= number of modes")

    @property
    def num_modes(self) -> int:
        if self.variant == "qubit-baseline":
            return self.num_qubits
        return len(self.cutoff)

    @property
    def n_parameters(self) -> int:
        return 3 * self.num_modes * self.depth

    @property
    def encoding(self) -> EncodingParams:
        chi_tilde = self.chi_tilde
        if chi_tilde is None:
            chi_tilde = self.t_d * self.chi[0]
        return EncodingParams(chi_tilde=chi_tilde, t_d=self.t_d)

    @property
    def output_dim(self) -> int:
        return len(self.observables) if self.output_rule == "vector" else 1

    def coupling_matrix(self) -> np.ndarray | None:
        if self.coupling is None:
            return None
        return np.asarray(self.coupling, dtype=complex)


def single_kpo_spec(
    chi: float = 0.1,
    cutoff: int = 25,
    alpha: complex = 3.0,
    t_d: float = 0.7,
    tau: float = 0.7,
    depth: int = 12,
    chi_tilde: float | None = None,
) -> ModelSpec:
    """The standard single-KPO configuration: M = a + a^dag."""
    return ModelSpec(
        variant="single-kpo",
        depth=depth,
        tau=tau,
        observables=("x@1",),
        chi=(chi,),
        cutoff=(cutoff,),
        alpha=(alpha,),
        t_d=t_d,
        chi_tilde=chi_tilde,
    )


def kpo_network_spec(
    chi: Sequence[float] = (1.0, 1.0),
    cutoff: Sequence[int] = (10, 10),
    alpha: Sequence[complex] = (1.0, 1.0),
    coupling: Sequence[Sequence[complex]] | None = None,
    t_d: float = 1.0,
    tau: float = 1.0,
    depth: int = 6,
) -> ModelSpec:
    """The two-KPO configuration with the product-of-expectations output."""
    K = len(tuple(chi))
    if coupling is None:
        J = np.zeros((K, K), dtype=complex)
        J[1, 0] = -0.1
        coupling = J
    return ModelSpec(
        variant="kpo-network",
        depth=depth,
        tau=tau,
        observables=tuple(f"x@{j + 1}" for j in range(K)),
        output_rule="product",
        chi=tuple(chi),
        cutoff=tuple(cutoff),
        alpha=tuple(alpha),
        t_d=t_d,
        coupling=tuple(tuple(complex(v) for v in row) for row in np.asarray(coupling)),
    )


def qubit_baseline_spec(
    num_qubits: int = 6,
    depth: int = 2,
    tau: float = 10.0,
    ising_seed: int = 0,
) -> ModelSpec:
    """The conventional six-qubit comparison scheme, M = 2 Z_1."""
    return ModelSpec(
        variant="qubit-baseline",
        depth=depth,
        tau=tau,
        observables=("2z@1",),
        num_qubits=num_qubits,
        ising_seed=ising_seed,
    )


def two_input_kpo_spec(
    chi_tilde: float = 0.07,
    t_d: float = 0.7,
    tau: float = 0.7,
    depth: int = 12,
    cutoff: int = 25,
    chi: float = 0.1,
) -> ModelSpec:
    """Two inputs on one KPO via the amplitude/phase encoding; outputs
    (<a + a^dag>, <n>)."""
    return ModelSpec(
        variant="multi-input-single-kpo",
        depth=depth,
        tau=tau,
        observables=("x@1", "n@1"),
        output_rule="vector",
        chi=(chi,),
        cutoff=(cutoff,),
        alpha=(0.0,),  # the encoder prepares the initial state
        t_d=t_d,
        chi_tilde=chi_tilde,
        num_inputs=2,
    )


def parse_observable(desc: str, space: CompositeSpace) -> np.ndarray:
    """Observable descriptors: 'x@j' = a_j + a_j^dag, 'n@j' = a_j^dag a_j,
    '2z@j' / 'z@j' = (2x) Pauli Z on qubit j.  Mode numbers are 1-based."""
    name, _, mode_txt = desc.partition("@")
    name = name.strip().lower()
    mode = int(mode_txt) - 1 if mode_txt else 0
    if not 0 <= mode < space.num_modes:
        raise ValueError(f"observable {desc!r}: mode outside 1..{space.num_modes}")
    cutoffs = space.cutoffs
    c = cutoffs[mode]
    if name == "x":
        a = np.diag(np.sqrt(np.arange(1, c, dtype=float)), 1)
        local = a + a.conj().T
    elif name == "n":
        local = np.diag(np.arange(c, dtype=complex))
    elif name in ("z", "2z"):
        if c != 2:
            raise ValueError(f"observable {desc!r} needs a qubit mode")
        local = qubits.PAULI["Z"] * (2.0 if name == "2z" else 1.0)
    else:
        raise ValueError(f"unknown observable {desc!r}")
    before = int(np.prod(cutoffs[:mode], dtype=np.int64)) if mode else 1
    after = int(np.prod(cutoffs[mode + 1 :], dtype=np.int64)) if mode + 1 < len(cutoffs) else 1
    return np.kron(np.kron(np.eye(before), local), np.eye(after)).astype(complex)


def two_input_phase(x1: float, x2: float) -> tuple[float, float]:
    """Amplitude r and rotation phi of the two-input encoding: r = |(x1, x2)|
    and phi = +/- arccos(x1 / r), the sign following x2 (phi = 0 when r = 0)."""
    r = math.hypot(x1, x2)
    if r == 0.0:
        return 0.0, 0.0
    phi = math.acos(max(-1.0, min(1.0, x1 / r)))
    if x2 <= 0:
        phi = -phi
    return r, phi


def encode_two_inputs_single_kpo(
    x1: float,
    x2: float,
    enc: EncodingParams,
    space: ModeSpace,
    deficit_tol: float = MODEL_DEFICIT_TOL,
) -> StateVector:
    """|psi(x1, x2)> = e^{-i chi_tilde n^2 - i phi n} |r>."""
    r, phi = two_input_phase(x1, x2)
    base = coherent_state(r, space, deficit_tol=deficit_tol)
    k = np.arange(space.cutoff)
    amps = np.exp(-1j * (enc.chi_tilde * k.astype(float) ** 2 + phi * k)) * base.amplitudes
    return StateVector(base.space, amps, norm_deficit=base.norm_deficit)


def overlap_closed_form(
    x1: float, x2: float, x1p: float, x2p: float
) -> complex:
    """<psi(x1', x2') | psi(x1, x2)> in closed form,
    exp(-(r'^2 + r^2 - 2 r' r e^{i (phi' - phi)}) / 2)."""
    r, phi = two_input_phase(x1, x2)
    rp, phip = two_input_phase(x1p, x2p)
    return complex(np.exp(-0.5 * (rp**2 + r**2 - 2 * rp * r * np.exp(1j * (phip - phi)))))


class ModelFunction:
    """Compiled evaluator for one ModelSpec.

    V(theta) is built once per parameter vector and reused across every
    input of a batch; encoded initial states depend only on x and are
    cached per batch by the cost-function factory.
    """

    def __init__(self, spec: ModelSpec):
        self.spec = spec
        if spec.variant in BOSONIC_VARIANTS:
            self.space = CompositeSpace(tuple(ModeSpace(c) for c in spec.cutoff))
            self.components = KpoNetworkComponents(self.space, spec.chi, spec.coupling_matrix())
            self.layout = ThetaLayout(spec.depth, spec.num_modes)
            self.encoding = spec.encoding
            if spec.variant == "multi-input-single-kpo":
                self._psi0 = None  # prepared by the encoder
            else:
                states = [
                    coherent_state(a, m, deficit_tol=spec.deficit_tol)
                    for a, m in zip(spec.alpha, self.space.modes)
                ]
                self._psi0 = tensor(states).amplitudes if len(states) > 1 else states[0].amplitudes
        else:
            self.space = qubits.qubit_space(spec.num_qubits)
            self._baseline = qubits.BaselineConfig(
                num_qubits=spec.num_qubits, depth=spec.depth, tau=spec.tau, seed=spec.ising_seed
            )
            self._coeffs = qubits.IsingCoefficients.draw(spec.num_qubits, spec.ising_seed)
            self._evolution = qubits.ising_evolution(
                self._coeffs, spec.tau, spec.num_qubits
            ).entries
        self.observable_matrices = [parse_observable(d, self.space) for d in spec.observables]

    @property
    def n_parameters(self) -> int:
        return self.spec.n_parameters

    @property
    def initial_state(self) -> np.ndarray | None:
        return self._psi0 if self.spec.variant in BOSONIC_VARIANTS else None

    # -- encoding ---------------------------------------------------------

    def encoded_state(self, x) -> np.ndarray:
        """Initial state with the input uploaded, as a flat amplitude vector."""
        spec = self.spec
        if spec.variant == "single-kpo":
            phases = encoding_phases(float(x), self.encoding, spec.cutoff[0])
            return np.exp(-1j * phases) * self._psi0
        if spec.variant == "kpo-network":
            xs = np.atleast_1d(np.asarray(x, dtype=float))
            if spec.num_inputs == 1 and xs.size == 1:
                targets = range(spec.num_modes)  # scalar input uploaded on every mode
                xs = np.repeat(xs, spec.num_modes)
            else:
                if xs.size != spec.num_inputs:
                    raise ValueError(f"expected {spec.num_inputs} inputs, got {xs.size}")
                targets = range(spec.num_inputs)
            phase = np.zeros(self.space.cutoffs)
            for x_j, mode in zip(xs, targets):
                shape = [1] * spec.num_modes
                shape[mode] = -1
                phase = phase + encoding_phases(
                    float(x_j), self.encoding, spec.cutoff[mode]
                ).reshape(shape)
            return np.exp(-1j * phase.ravel()) * self._psi0
        if spec.variant == "multi-input-single-kpo":
            x1, x2 = np.asarray(x, dtype=float)
            state = encode_two_inputs_single_kpo(
                x1, x2, self.encoding, self.space.modes[0], deficit_tol=spec.deficit_tol
            )
            return state.amplitudes
        # qubit baseline
        v = qubits.encode_qubit_vector(float(x))
        out = v
        for _ in range(spec.num_qubits - 1):
            out = np.kron(out, v)
        return out

    def encoded_batch(self, xs: np.ndarray) -> np.ndarray:
        spec = self.spec
        if spec.variant == "single-kpo":
            # vectorized: one phase table per input row
            k = np.arange(spec.cutoff[0])
            xs = np.asarray(xs, dtype=float)
            phases = self.encoding.chi_tilde * k.astype(float) ** 2 + np.pi * np.outer(xs, k)
            return np.exp(-1j * phases) * self._psi0
        return np.array([self.encoded_state(x) for x in np.asarray(xs)])

    # -- circuit ----------------------------------------------------------

    def circuit_matrix(self, theta: np.ndarray) -> np.ndarray:
        """V(theta), layer 1 acting first."""
        theta = np.asarray(theta, dtype=float)
        spec = self.spec
        if spec.variant in BOSONIC_VARIANTS:
            return self.components.circuit(theta, self.layout, spec.tau)
        if theta.shape != (spec.n_parameters,):
            raise ValueError(
                f"theta has shape {theta.shape}, model needs ({spec.n_parameters},)"
            )
        K = spec.num_qubits
        V: np.ndarray | None = None
        for i in range(spec.depth):
            layer = qubits.parameterized_layer(theta[3 * K * i : 3 * K * (i + 1)], K).entries
            factor = self._evolution @ layer
            V = factor if V is None else factor @ V
        return V

    # -- evaluation -------------------------------------------------------

    def _expectations_from_states(self, states: np.ndarray, theta: np.ndarray) -> np.ndarray:
        V = self.circuit_matrix(theta)
        S = states @ V.T  # row m = V @ states[m]
        outs = []
        for M in self.observable_matrices:
            vals = np.sum(S.conj() * (S @ M.T), axis=1)
            worst = np.max(np.abs(vals.imag)) if vals.size else 0.0
            if worst > IMAG_ATOL:
                raise AssertionError(f"expectation not real: max imag {worst:.3e}")
            outs.append(vals.real)
        return np.stack(outs, axis=1)  # (batch, n_observables)

    def _combine(self, expectations: np.ndarray) -> np.ndarray:
        rule = self.spec.output_rule
        if rule == "single":
            return expectations[:, 0]
        if rule == "product":
            return np.prod(expectations, axis=1)
        return expectations  # vector

    def outputs(self, xs, theta: np.ndarray) -> np.ndarray:
        """Model outputs over a batch of inputs (rows for d_x > 1)."""
        states = self.encoded_batch(xs)
        return self._combine(self._expectations_from_states(states, theta))

    def evaluate(self, x, theta: np.ndarray):
        """f(x; theta) for one input; scalar unless output_rule is 'vector'."""
        states = self.encoded_state(x)[None, :]
        out = self._combine(self._expectations_from_states(states, theta))[0]
        return out if self.spec.output_rule == "vector" else float(out)

    def curve(self, xs: np.ndarray, theta: np.ndarray) -> np.ndarray:
        """f over a grid of scalar inputs (d_x = 1 variants)."""
        if self.spec.variant == "multi-input-single-kpo":
            raise ValueError("curve() needs a scalar-input variant")
        return self.outputs(np.asarray(xs, dtype=float), theta)

    def mse(self, theta: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> float:
        f = self.outputs(xs, theta)
        resid = np.asarray(f) - np.asarray(ys)
        if resid.ndim == 1:
            return float(np.mean(resid**2))
        return float(np.mean(np.sum(np.abs(resid) ** 2, axis=1)))

    def cost_function(self, xs: np.ndarray, ys: np.ndarray):
        """MSE closure with the encoded dataset cached (V(theta) is the only
        per-call work)."""
        xs = np.asarray(xs)
        ys = np.asarray(ys)
        if xs.shape[0] == 0:
            raise ValueError("empty dataset")
        states = self.encoded_batch(xs)

        def cost(theta: np.ndarray) -> float:
            f = self._combine(self._expectations_from_states(states, theta))
            resid = f - ys
            if resid.ndim == 1:
                return float(np.mean(resid**2))
            return float(np.mean(np.sum(np.abs(resid) ** 2, axis=1)))

        return cost

    def photon_numbers(self, xs, theta: np.ndarray) -> np.ndarray:
        """<n> summed over modes, per input."""
        if self.spec.variant not in BOSONIC_VARIANTS:
            raise ValueError("photon numbers are defined for bosonic variants")
        states = self.encoded_batch(xs)
        V = self.circuit_matrix(theta)
        S = states @ V.T
        total = np.zeros(S.shape[0])
        for Nj in self.components.number:
            total += np.sum(S.conj() * (S @ Nj.T), axis=1).real
        return total


def evaluate(x, theta: np.ndarray, spec: ModelSpec):
    """f(x; theta) per Eq-style pipeline: encode, apply V(theta), measure."""
    return ModelFunction(spec).evaluate(x, theta)


def mse_cost(theta: np.ndarray, dataset, spec: ModelSpec) -> float:
    """Mean squared error (1/N) sum |f(x_m; theta) - y_m|^2."""
    xs = np.asarray(dataset.xs)
    ys = np.asarray(dataset.ys)
    if xs.shape[0] == 0:
        raise ValueError("empty dataset")
    return ModelFunction(spec).mse(theta, xs, ys)


def photon_number_profile(theta: np.ndarray, spec: ModelSpec, x_grid: np.ndarray) -> np.ndarray:
    """Average photon number of V(theta) U(x) |init> over the grid."""
    return ModelFunction(spec).photon_numbers(np.asarray(x_grid, dtype=float), theta)


@dataclass(frozen=True)
class FourierCoefficients:
    """Fourier series of the model: coefficient c_m of e^{i pi m x} keyed by
    the integer frequency offset m = k - l."""

    coefficients: dict[int, complex]

    def __getitem__(self, m: int) -> complex:
        return self.coefficients.get(m, 0.0 + 0.0j)

    @property
    def offsets(self) -> list[int]:
        return sorted(self.coefficients)

    def reconstruct(self, xs: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        out = np.zeros(xs.shape, dtype=complex)
        for m, c in self.coefficients.items():
            out += c * np.exp(1j * np.pi * m * xs)
        return out


def fourier_series_coefficients(theta: np.ndarray, spec: ModelSpec) -> FourierCoefficients:
    """Exact coefficient table c_m = sum_{k-l=m} <k|V^dag M V|l> psi_l psi_k^*
    built from the truncated initial state; valid for the single-KPO variant
    with chi_tilde = 0, where the encoder is the pure phase e^{-i pi x n}."""
    if spec.variant != "single-kpo":
        raise ValueError("Fourier coefficients are defined for the single-KPO variant")
    if spec.encoding.chi_tilde != 0.0:
        raise ValueError("Fourier coefficient table requires chi_tilde = 0")
    model = ModelFunction(spec)
    V = model.circuit_matrix(np.asarray(theta, dtype=float))
    M = model.observable_matrices[0]
    W = V.conj().T @ M @ V
    psi = model.initial_state
    A = W * np.outer(psi.conj(), psi)  # A[k, l] contributes to offset m = k - l
    coeffs: dict[int, complex] = {}
    dim = A.shape[0]
    for m in range(-(dim - 1), dim):
        c = complex(np.trace(A, offset=-m))
        if c != 0:
            coeffs[m] = c
    return FourierCoefficients(coeffs)

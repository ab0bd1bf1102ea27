import numpy as np
import pytest

from kpoml.dynamics import (
    EncodingParams,
    KpoNetworkComponents,
    NetworkParams,
    SingleKpoParams,
    ThetaLayout,
    adiabatic_prepare,
    build_network_hamiltonian,
    build_single_hamiltonian,
    encode_input_network,
    encode_input_single,
    evolve_unitary,
    layered_circuit,
)
from kpoml.fock import (
    CompositeSpace,
    ModeSpace,
    coherent_state,
    fock_state,
    number_op,
    tensor,
)


def taylor_expm(h: np.ndarray, tau: float, terms: int = 20) -> np.ndarray:
    """Scaled 20-term Taylor-series oracle for e^{-i tau H}."""
    scale = max(1, int(np.ceil(np.linalg.norm(h) * abs(tau))))
    m = -1j * tau * h / scale
    out = np.eye(h.shape[0], dtype=complex)
    term = np.eye(h.shape[0], dtype=complex)
    for k in range(1, terms + 1):
        term = term @ m / k
        out = out + term
    result = np.eye(h.shape[0], dtype=complex)
    for _ in range(scale):
        result = result @ out
    return result


def test_single_hamiltonian_kerr_diagonal():
    H = build_single_hamiltonian(SingleKpoParams(chi=0.1), ModeSpace(5))
    # a^dag2 a^2 = n(n-1)
    assert H.entries[2, 2].real == pytest.approx(0.2)
    assert H.entries[3, 3].real == pytest.approx(0.1 * 3 * 2)


def test_vacuum_is_ground_state_when_detuned():
    H = build_single_hamiltonian(SingleKpoParams(chi=0.1, delta=0.5), ModeSpace(20))
    w, v = np.linalg.eigh(H.entries)
    ground = v[:, 0]
    assert abs(ground[0]) ** 2 == pytest.approx(1.0, abs=1e-12)


def test_pump_regime_degenerate_coherent_pair():
    chi, p = 0.1, 0.4
    sp = ModeSpace(30)
    H = build_single_hamiltonian(SingleKpoParams(chi=chi, p=p), sp)
    w, v = np.linalg.eigh(H.entries)
    # two nearly degenerate levels near -p^2/chi
    assert w[0] == pytest.approx(-(p**2) / chi, abs=0.05)
    assert w[1] - w[0] < 1e-3 * abs(w[0])
    # their eigenspace carries |+-sqrt(p/chi)> with fidelity >= 0.99
    amp = np.sqrt(p / chi)
    basis = v[:, :2]
    for alpha in (amp, -amp):
        target = coherent_state(alpha, sp).amplitudes
        proj = basis @ (basis.conj().T @ target)
        assert np.linalg.norm(proj) ** 2 >= 0.99


def test_network_hamiltonian_decoupled_sum():
    sp = CompositeSpace((ModeSpace(6), ModeSpace(6)))
    p1 = SingleKpoParams(chi=0.3, delta=0.2, p=0.1, r=-0.4)
    p2 = SingleKpoParams(chi=0.7, delta=-0.1, p=0.05, r=0.2)
    H = build_network_hamiltonian(NetworkParams((p1, p2)), sp)
    h1 = build_single_hamiltonian(p1, ModeSpace(6)).entries
    h2 = build_single_hamiltonian(p2, ModeSpace(6)).entries
    expected = np.kron(h1, np.eye(6)) + np.kron(np.eye(6), h2)
    np.testing.assert_allclose(H.entries, expected, atol=1e-14)


def test_network_hopping_matrix_element():
    sp = CompositeSpace((ModeSpace(4), ModeSpace(4)))
    J = np.zeros((2, 2), dtype=complex)
    J[1, 0] = -0.1
    params = NetworkParams(
        (SingleKpoParams(chi=0.0), SingleKpoParams(chi=0.0)), coupling=J
    )
    H = build_network_hamiltonian(params, sp)
    bra = fock_state((1, 0), sp).amplitudes
    ket = fock_state((0, 1), sp).amplitudes
    assert np.vdot(bra, H.entries @ ket) == pytest.approx(-0.1)


def test_network_hamiltonian_hermitian_random_params():
    rng = np.random.Generator(np.random.Philox(3))
    sp = CompositeSpace((ModeSpace(5), ModeSpace(5)))
    for _ in range(5):
        J = np.zeros((2, 2), dtype=complex)
        J[1, 0] = rng.normal() + 1j * rng.normal()
        params = NetworkParams(
            tuple(SingleKpoParams(*rng.normal(size=4)) for _ in range(2)), coupling=J
        )
        H = build_network_hamiltonian(params, sp)
        assert np.max(np.abs(H.entries - H.entries.conj().T)) <= 1e-12


def test_evolve_unitary_identity_at_zero_time():
    H = build_single_hamiltonian(SingleKpoParams(chi=0.1, delta=1.0), ModeSpace(6))
    U = evolve_unitary(H, 0.0)
    np.testing.assert_allclose(U.entries, np.eye(6), atol=1e-12)


def test_evolve_unitary_diagonal_phases():
    sp = ModeSpace(6)
    U = evolve_unitary(number_op(sp), 0.7)
    assert U.entries[2, 2] == pytest.approx(np.exp(-1.4j), abs=1e-12)


def test_evolve_unitary_matches_taylor_oracle():
    rng = np.random.Generator(np.random.Philox(11))
    m = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
    h = (m + m.conj().T) / 2
    sp = CompositeSpace.single(12)
    from kpoml.fock import OperatorMatrix

    U = evolve_unitary(OperatorMatrix(sp, h, hermitian=True), 0.7)
    np.testing.assert_allclose(U.entries, taylor_expm(h, 0.7), atol=1e-9)


def test_evolve_unitary_requires_hermitian_flag():
    from kpoml.fock import OperatorMatrix

    op = OperatorMatrix(CompositeSpace.single(3), np.triu(np.ones((3, 3))).astype(complex))
    with pytest.raises(ValueError):
        evolve_unitary(op, 1.0)


def test_encoder_trivial_and_phase():
    sp = ModeSpace(8)
    U0 = encode_input_single(0.0, EncodingParams(chi_tilde=0.0, t_d=0.7), sp)
    np.testing.assert_allclose(U0.entries, np.eye(8), atol=0)
    U = encode_input_single(1.0, EncodingParams(chi_tilde=0.07, t_d=0.7), sp)
    assert np.angle(U.entries[1, 1]) == pytest.approx(
        -((0.07 + np.pi) - 2 * np.pi), abs=1e-12
    )  # angle folds into (-pi, pi]


def test_encoder_equals_hamiltonian_exponential():
    # U(x) is free KPO evolution: chi n^2 + (delta - chi) n with
    # pi x = t_d (delta - chi) and chi_tilde = t_d chi.
    sp = ModeSpace(25)
    chi, t_d, x = 0.1, 0.7, 0.3
    enc = EncodingParams.from_physical(chi, t_d)
    delta = np.pi * x / t_d + chi
    H = build_single_hamiltonian(SingleKpoParams(chi=chi, delta=delta), sp)
    U_direct = encode_input_single(x, enc, sp)
    U_oracle = evolve_unitary(H, t_d)
    np.testing.assert_allclose(U_direct.entries, U_oracle.entries, atol=1e-12)


def test_encoder_commutes_with_number_op():
    sp = ModeSpace(10)
    U = encode_input_single(0.37, EncodingParams(chi_tilde=0.07, t_d=0.7), sp)
    n = number_op(sp)
    np.testing.assert_array_equal(U.entries @ n.entries, n.entries @ U.entries)


def test_network_encoder_cases():
    sp = CompositeSpace((ModeSpace(4), ModeSpace(4)))
    enc = EncodingParams(chi_tilde=0.07, t_d=0.7)
    U_empty = encode_input_network([], enc, sp, [])
    np.testing.assert_allclose(U_empty.entries, np.eye(16), atol=0)
    # same x on both modes equals the tensor of single-mode encoders
    x = 0.42
    U_both = encode_input_network([x, x], enc, sp, [0, 1])
    U_single = encode_input_single(x, enc, ModeSpace(4))
    ref = tensor([U_single, U_single])
    np.testing.assert_allclose(U_both.entries, ref.entries, atol=1e-14)
    # two different inputs: phase on |k1, k2> is the product of per-mode phases
    U2 = encode_input_network([0.2, -0.6], enc, sp, [0, 1])
    k1, k2 = 3, 1
    expected = np.exp(-1j * (0.07 * k1**2 + np.pi * 0.2 * k1)) * np.exp(
        -1j * (0.07 * k2**2 + np.pi * (-0.6) * k2)
    )
    assert U2.entries[4 * k1 + k2, 4 * k1 + k2] == pytest.approx(expected, abs=1e-14)
    with pytest.raises(ValueError):
        encode_input_network([0.1], enc, sp, [5])


def test_theta_layout_mapping():
    layout = ThetaLayout(num_layers=12, num_modes=1)
    assert layout.length == 36
    assert layout.describe(0) == (0, "delta", 0)
    assert layout.describe(1) == (0, "pump", 0)
    assert layout.describe(2) == (0, "drive", 0)
    assert layout.describe(35) == (11, "drive", 0)
    net = ThetaLayout(num_layers=6, num_modes=2)
    assert net.length == 36
    # per layer: K deltas, K pumps, K drives
    assert net.describe(0) == (0, "delta", 0)
    assert net.describe(1) == (0, "delta", 1)
    assert net.describe(2) == (0, "pump", 0)
    assert net.describe(5) == (0, "drive", 1)
    assert net.describe(6) == (1, "delta", 0)
    with pytest.raises(ValueError):
        net.unpack(np.zeros(35))


def test_layered_circuit_identity_when_everything_vanishes():
    sp = ModeSpace(6)
    layout = ThetaLayout(num_layers=3, num_modes=1)
    V = layered_circuit(np.zeros(9), layout, chi=0.0, tau=0.7, space=sp)
    np.testing.assert_allclose(V.entries, np.eye(6), atol=1e-12)


def test_layered_circuit_single_layer_reduces_to_evolution():
    sp = ModeSpace(8)
    layout = ThetaLayout(num_layers=1, num_modes=1)
    theta = np.array([0.3, -0.2, 0.5])
    V = layered_circuit(theta, layout, chi=0.1, tau=0.7, space=sp)
    H = build_single_hamiltonian(SingleKpoParams(0.1, 0.3, -0.2, 0.5), sp)
    np.testing.assert_allclose(V.entries, evolve_unitary(H, 0.7).entries, atol=1e-12)


def test_layered_circuit_factor_product_order():
    sp = ModeSpace(8)
    layout = ThetaLayout(num_layers=2, num_modes=1)
    theta = np.array([0.3, -0.2, 0.5, -0.1, 0.4, 0.2])
    V = layered_circuit(theta, layout, chi=0.1, tau=0.7, space=sp)
    V1 = evolve_unitary(build_single_hamiltonian(SingleKpoParams(0.1, 0.3, -0.2, 0.5), sp), 0.7)
    V2 = evolve_unitary(build_single_hamiltonian(SingleKpoParams(0.1, -0.1, 0.4, 0.2), sp), 0.7)
    # V_1 acts first: V = V_2 V_1
    np.testing.assert_allclose(V.entries, V2.entries @ V1.entries, atol=1e-12)


def test_layered_circuit_network_j_zero_identity():
    sp = CompositeSpace((ModeSpace(4), ModeSpace(4)))
    layout = ThetaLayout(num_layers=2, num_modes=2)
    V = layered_circuit(np.zeros(12), layout, chi=[0.0, 0.0], tau=1.0, space=sp)
    np.testing.assert_allclose(V.entries, np.eye(16), atol=1e-12)


def test_layered_circuit_unitary_for_random_theta():
    rng = np.random.Generator(np.random.Philox(5))
    sp = ModeSpace(16)
    layout = ThetaLayout(num_layers=4, num_modes=1)
    V = layered_circuit(rng.uniform(-1, 1, 12), layout, chi=0.1, tau=0.7, space=sp)
    defect = np.max(np.abs(V.entries.conj().T @ V.entries - np.eye(16)))
    assert defect <= 1e-10
    st = V.entries @ coherent_state(1.0, sp).amplitudes
    assert np.linalg.norm(st) == pytest.approx(1.0, abs=1e-10)


def test_components_reject_mismatched_layout():
    comp = KpoNetworkComponents(ModeSpace(4), 0.1)
    with pytest.raises(ValueError):
        comp.circuit(np.zeros(12), ThetaLayout(num_layers=2, num_modes=2), 0.7)


def test_adiabatic_preparation_reaches_target():
    result = adiabatic_prepare(
        chi=0.1, p_final=0.4, r_perturbation=-0.05, delta_initial=1.0,
        total_time=200.0, num_steps=400, space=ModeSpace(25),
    )
    assert result.fidelity >= 0.99
    assert result.times[0] == 0.0
    assert result.times[-1] == pytest.approx(200.0)
    assert result.fidelities[0] == pytest.approx(np.exp(-4.0), rel=1e-3)


def test_adiabatic_sudden_quench_stays_near_vacuum():
    result = adiabatic_prepare(
        chi=0.1, p_final=0.4, r_perturbation=-0.05, delta_initial=1.0,
        total_time=1e-4, num_steps=1, space=ModeSpace(25),
    )
    assert result.fidelity == pytest.approx(np.exp(-4.0), rel=1e-2)
    assert result.fidelity < 0.99


def test_adiabatic_fidelity_monotone_in_duration():
    fids = []
    for total_time in (25.0, 50.0, 100.0, 200.0):
        res = adiabatic_prepare(
            chi=0.1, p_final=0.4, r_perturbation=-0.05, delta_initial=1.0,
            total_time=total_time, num_steps=max(200, int(2 * total_time)),
            space=ModeSpace(25),
        )
        fids.append(res.fidelity)
    assert np.all(np.diff(fids) > 0)
    assert fids[-1] >= 0.99


def test_adiabatic_preconditions():
    sp = ModeSpace(10)
    with pytest.raises(ValueError):
        adiabatic_prepare(0.1, 0.4, -0.05, 0.05, 10.0, 10, sp)  # delta0 <= chi
    with pytest.raises(ValueError):
        adiabatic_prepare(0.1, 0.4, 0.05, 1.0, 10.0, 10, sp)  # r >= 0
    with pytest.raises(ValueError):
        adiabatic_prepare(0.1, 0.4, -0.05, 1.0, 10.0, 0, sp)  # steps < 1

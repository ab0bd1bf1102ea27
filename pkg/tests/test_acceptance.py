"""End-to-end reproduction of the reference experiments.

Retrains every model at the headline settings (best-of-5 theta seeds for the
comparisons) and checks the seven acceptance gates. Heavy: roughly half an
hour on two cores; run with ``pytest tests/test_acceptance.py -v -s`` to see
one PASS/FAIL line per criterion.

Fixed choices (see the fit thresholds in each test): dataset seed 1, theta
seeds 0..4 drawn uniform [-1, 1], baseline Ising seed 0, and initial
amplitude alpha = 2 for the single-KPO comparison runs (the reference
settings leave alpha open; 2 reproduces both the cost levels and the
KPO-vs-baseline ordering on all four targets).
"""

import numpy as np
import pytest

from kpoml.dynamics import adiabatic_prepare
from kpoml.experiments import (
    AnalysisConfig,
    ExperimentConfig,
    ThetaInit,
    best_record,
    fourier_transform_numeric,
    spectral_support,
    train,
    train_best_of,
)
from kpoml.fock import ModeSpace, annihilation_op, coherent_state, number_op, real_expectation
from kpoml.model import (
    ModelFunction,
    encode_two_inputs_single_kpo,
    fourier_series_coefficients,
    kpo_network_spec,
    overlap_closed_form,
    qubit_baseline_spec,
    single_kpo_spec,
)
from kpoml.dynamics import EncodingParams, SingleKpoParams, build_single_hamiltonian, encode_input_single, evolve_unitary
from kpoml.fock import overlap
from kpoml.neldermead import minimize

THETA_SEEDS = (0, 1, 2, 3, 4)
DATASET_SEED = 1
ISING_SEED = 0
TABLE1_ALPHA = 2.0
JOBS = 2

FOUR_TARGETS = ("gaussian", "abs", "square-wave", "two-sines")
KPO_COST_GATES = {
    "gaussian": 1e-3,      # reference value 1.016e-4
    "abs": 3e-3,           # reference value 3.388e-4
    "square-wave": 5e-2,   # reference value 1.344e-2
    "two-sines": 6e-2,     # reference value 1.693e-2
}
NETWORK_COST_GATES = {
    "gaussian": 1e-3,      # reference value 9.711e-5
    "square-wave": 6e-2,   # reference value 2.119e-2
}

NO_SPECTRUM = AnalysisConfig(spectrum=False)


def report(criterion: int, passed: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")


def kpo_config(target: str, alpha: float = TABLE1_ALPHA, n: int = 100) -> ExperimentConfig:
    cutoff = 25 if abs(alpha) ** 2 <= 9 else 100
    return ExperimentConfig(
        model=single_kpo_spec(alpha=alpha, cutoff=cutoff),
        target=target,
        n_samples=n,
        dataset_seed=DATASET_SEED,
        theta_init=ThetaInit(seed=0),
        analysis=NO_SPECTRUM,
    )


def baseline_config(target: str) -> ExperimentConfig:
    return ExperimentConfig(
        model=qubit_baseline_spec(ising_seed=ISING_SEED),
        target=target,
        n_samples=100,
        dataset_seed=DATASET_SEED,
        theta_init=ThetaInit(seed=0),
        analysis=NO_SPECTRUM,
    )


@pytest.fixture(scope="session")
def table1_runs():
    """Best-of-5 training runs behind the headline comparison (shared by
    criteria 1 and 3)."""
    runs = {}
    for target in FOUR_TARGETS:
        runs["kpo", target] = train_best_of(kpo_config(target), THETA_SEEDS, jobs=JOBS)
        runs["baseline", target] = train_best_of(baseline_config(target), THETA_SEEDS, jobs=JOBS)
    return runs


def test_criterion_1_headline_comparison(table1_runs):
    lines = []
    ok = True
    for target in FOUR_TARGETS:
        kpo = best_record(table1_runs["kpo", target]).final_cost
        base = best_record(table1_runs["baseline", target]).final_cost
        gate = KPO_COST_GATES[target]
        ok_target = (kpo < base) and (kpo <= gate)
        ok = ok and ok_target
        lines.append(f"{target}: kpo {kpo:.3e} (gate {gate:.0e}) vs baseline {base:.3e}")
    report(1, ok, "; ".join(lines))
    for target in FOUR_TARGETS:
        kpo = best_record(table1_runs["kpo", target]).final_cost
        base = best_record(table1_runs["baseline", target]).final_cost
        assert kpo < base, f"{target}: KPO {kpo:.3e} not below baseline {base:.3e}"
        assert kpo <= KPO_COST_GATES[target], f"{target}: KPO cost {kpo:.3e} above gate"


def test_criterion_2_network_parity():
    lines = []
    ok = True
    costs = {}
    for target, gate in NETWORK_COST_GATES.items():
        config = ExperimentConfig(
            model=kpo_network_spec(),
            target=target,
            n_samples=100,
            dataset_seed=DATASET_SEED,
            theta_init=ThetaInit(seed=0),
            analysis=NO_SPECTRUM,
        )
        records = train_best_of(config, THETA_SEEDS, jobs=JOBS)
        costs[target] = best_record(records).final_cost
        ok = ok and costs[target] <= gate
        lines.append(f"{target}: {costs[target]:.3e} (gate {gate:.0e})")
    report(2, ok, "; ".join(lines))
    for target, gate in NETWORK_COST_GATES.items():
        assert costs[target] <= gate


def test_criterion_3_iteration_accounting(table1_runs):
    # Table-style runs at N=100 land in the [5000, 7200] iteration window
    window = []
    for key, records in table1_runs.items():
        iters = best_record(records).trace.iterations
        window.append(iters)
        assert 5000 <= iters <= 7200, f"{key}: {iters} iterations outside [5000, 7200]"
    # the N=10 square-wave run (N-sweep family runs at alpha = 3, matching
    # the overfitting analysis) terminates early in at least one seed
    small = train_best_of(
        kpo_config("square-wave", alpha=3.0, n=10), THETA_SEEDS, jobs=JOBS
    )
    small_iters = [r.trace.iterations for r in small]
    early = [it for it in small_iters if it < 4000]
    report(
        3,
        bool(early),
        f"N=100 iterations {sorted(set(window))}; N=10 square-wave {small_iters} "
        f"(reference: 1821)",
    )
    assert early, f"no N=10 run under 4000 iterations: {small_iters}"


def test_criterion_4_expressibility_monotonicity():
    rng = np.random.Generator(np.random.Philox(42))
    thetas = [rng.uniform(-1, 1, 36) for _ in range(20)]
    supports = {}
    for alpha in (1.0, 3.0, 5.0):
        cutoff = 25 if alpha**2 <= 9 else 100
        spec = single_kpo_spec(alpha=alpha, cutoff=cutoff)
        supports[alpha] = spectral_support(spec, thetas, threshold=1e-3)
        # with chi_tilde = 0 the spectrum lives on nu = m/2, m < cutoff
        spec0 = single_kpo_spec(chi=0.0, alpha=alpha, cutoff=cutoff)
        nu_max = 55.0 if cutoff == 100 else 15.0
        bound = (cutoff - 1) / 2
        model0 = ModelFunction(spec0)
        for theta in thetas[:5]:
            s = spectral_support(model0, [theta], threshold=1e-3, nu_max=nu_max)
            assert s <= bound, f"alpha={alpha}: support {s} above {bound}"
    ok = supports[1.0] <= supports[3.0] <= supports[5.0]
    report(
        4,
        ok,
        f"median support alpha 1 -> 3 -> 5: {supports[1.0]} <= {supports[3.0]} "
        f"<= {supports[5.0]}; chi_tilde=0 supports within (cutoff-1)/2",
    )
    assert ok


def test_criterion_5_overfitting_behavior():
    def run(alpha, n):
        return train(kpo_config("gaussian", alpha=alpha, n=n))

    small3 = run(3.0, 10)
    large3 = run(3.0, 1000)
    small1 = run(1.0, 10)
    ratio = small3.test_mse / large3.test_mse
    gap3 = small3.test_mse - small3.final_cost
    gap1 = small1.test_mse - small1.final_cost
    ok = (ratio >= 2.0) and (gap1 < gap3)
    report(
        5,
        ok,
        f"test MSE N=10 {small3.test_mse:.3e} vs N=1000 {large3.test_mse:.3e} "
        f"(ratio {ratio:.1f}); train/test gap alpha=3 {gap3:.3e} vs alpha=1 {gap1:.3e}",
    )
    assert ratio >= 2.0
    assert gap1 < gap3


def test_criterion_6_adiabatic_preparation():
    durations, fidelities = [], []
    total_time = 25.0
    while True:
        result = adiabatic_prepare(
            chi=0.1, p_final=0.4, r_perturbation=-0.05, delta_initial=1.0,
            total_time=total_time, num_steps=max(200, int(2 * total_time)),
            space=ModeSpace(25),
        )
        durations.append(total_time)
        fidelities.append(result.fidelity)
        if result.fidelity >= 0.99 or total_time > 1600:
            break
        total_time *= 2
    ok = fidelities[-1] >= 0.99 and len(durations) >= 4 and np.all(np.diff(fidelities) > 0)
    report(
        6,
        ok,
        "fidelity over doubling durations "
        + ", ".join(f"T={t:g}: {f:.4f}" for t, f in zip(durations, fidelities)),
    )
    assert fidelities[-1] >= 0.99
    assert len(durations) >= 4, "doubling search should pass through >= 4 durations"
    assert np.all(np.diff(fidelities) > 0), "fidelity must not decrease with duration"


def test_criterion_7_oracle_suite():
    checks = []

    # unitarity of every circuit family
    rng = np.random.Generator(np.random.Philox(3))
    for spec in (single_kpo_spec(alpha=1.0), kpo_network_spec(), qubit_baseline_spec()):
        V = ModelFunction(spec).circuit_matrix(rng.uniform(-1, 1, 36))
        defect = np.max(np.abs(V.conj().T @ V - np.eye(V.shape[0])))
        checks.append(("unitarity " + spec.variant, defect <= 1e-10))

    # coherent-state identities
    sp = ModeSpace(25)
    st = coherent_state(1.3, sp)
    a = annihilation_op(sp).entries
    from kpoml.fock import OperatorMatrix

    x_op = OperatorMatrix(st.space, a + a.conj().T, hermitian=True)
    checks.append(("<a+adag> = 2 Re alpha", abs(real_expectation(st, x_op) - 2.6) <= 1e-8))
    checks.append(("<n> = |alpha|^2",
                   abs(real_expectation(st, number_op(sp)) - 1.69) <= 1e-8))

    # encoder equals the Hamiltonian-exponential oracle
    enc = EncodingParams.from_physical(0.1, 0.7)
    delta = np.pi * 0.3 / 0.7 + 0.1
    U_enc = encode_input_single(0.3, enc, sp)
    U_ham = evolve_unitary(
        build_single_hamiltonian(SingleKpoParams(chi=0.1, delta=delta), sp), 0.7
    )
    checks.append(("encoder vs exponential",
                   np.max(np.abs(U_enc.entries - U_ham.entries)) <= 1e-12))

    # Fourier coefficient table reconstructs the model on a 101-point grid
    spec = single_kpo_spec(chi=0.0, alpha=1.0)
    theta = rng.uniform(-1, 1, 36)
    fc = fourier_series_coefficients(theta, spec)
    xs = np.linspace(-1, 1, 101)
    err = np.max(np.abs(fc.reconstruct(xs).real - ModelFunction(spec).curve(xs, theta)))
    checks.append(("Fourier reconstruction", err <= 1e-8))

    # closed-form two-input overlap matches the numerical one
    enc2 = EncodingParams(chi_tilde=0.07, t_d=0.7)
    sa = encode_two_inputs_single_kpo(0.6, 0.8, enc2, sp)
    sb = encode_two_inputs_single_kpo(0.8, -0.6, enc2, sp)
    checks.append(("two-input overlap",
                   abs(overlap(sb, sa) - overlap_closed_form(0.6, 0.8, 0.8, -0.6)) <= 1e-8))

    # Nelder-Mead recovers a quadratic minimum
    trace = minimize(lambda t: (t[0] - 1) ** 2 + (t[1] + 2) ** 2, np.zeros(2))
    checks.append(("Nelder-Mead quadratic",
                   float(np.max(np.abs(trace.final_theta - [1, -2]))) <= 1e-3
                   and trace.final_cost <= 1e-6))

    # F(0) of the constant curve
    s = fourier_transform_numeric(lambda x: np.ones_like(x), nu=[0.0])
    checks.append(("F(0) of 1", abs(s.amplitude[0] - 2 / np.sqrt(2 * np.pi)) <= 1e-6))

    failed = [name for name, good in checks if not good]
    report(7, not failed, f"{len(checks)} oracle checks"
           + (f"; failed: {failed}" if failed else ""))
    assert not failed

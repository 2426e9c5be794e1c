from __future__ import annotations

from math import exp, pi

import numpy as np
import pytest

from mollow_gain.errors import (
    DegenerateSteadyState,
    DimensionMismatch,
    UnphysicalState,
)
from mollow_gain.lindblad import (
    DensityMatrix,
    Liouvillian,
    build_liouvillian,
    commutator,
    dissipator,
    hamiltonian,
    projector,
    propagate,
    spost,
    spre,
    steady_state,
    unvec,
    vec,
)
from mollow_gain.model import DeviceParams, build_pump_frame_model, mhz_to_angular


def _excited_population(params: DeviceParams, omega_pump: float, rabi: float) -> float:
    """
    Textbook two-level steady state with pure dephasing
    """
    gamma1 = mhz_to_angular(params.gamma1)
    gamma = mhz_to_angular(params.gamma)
    omega = mhz_to_angular(rabi)
    detuning = 2 * pi * (params.omega10 - omega_pump)
    return (omega**2 * gamma / 2) / (
        gamma1 * (detuning**2 + gamma**2) + omega**2 * gamma
    )


def test_vec_is_column_stacking() -> None:
    matrix = np.array([[1, 2], [3, 4]])
    np.testing.assert_array_equal(vec(matrix), [1, 3, 2, 4])
    np.testing.assert_array_equal(unvec(vec(matrix)), matrix)


def test_unvec_rejects_non_square_length() -> None:
    with pytest.raises(DimensionMismatch):
        unvec(np.ones(5))


def test_spre_spost_identity() -> None:
    rng = np.random.default_rng(7)
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    x = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    np.testing.assert_allclose(unvec(spre(a) @ vec(x)), a @ x)
    np.testing.assert_allclose(unvec(spost(a) @ vec(x)), x @ a)


def test_liouvillian_rejects_bad_shapes() -> None:
    with pytest.raises(DimensionMismatch):
        Liouvillian(matrix=np.zeros((3, 3)))
    with pytest.raises(DimensionMismatch):
        Liouvillian(matrix=np.zeros((4, 9)))
    with pytest.raises(DimensionMismatch):
        Liouvillian.zero(2) + Liouvillian.zero(3)


def test_liouvillian_addition() -> None:
    l = dissipator(projector(2, 0, 1), 1.0) + Liouvillian.zero(2)
    np.testing.assert_array_equal(l.matrix, dissipator(projector(2, 0, 1), 1.0).matrix)


def test_dissipator_rejects_negative_rate() -> None:
    with pytest.raises(ValueError):
        dissipator(projector(2, 0, 1), -1.0)


def test_decay_of_excited_state() -> None:
    l = dissipator(projector(2, 0, 1), 2.0)
    rate = l.apply(projector(2, 1, 1))
    np.testing.assert_allclose(rate, np.diag([2.0, -2.0]))


@pytest.mark.parametrize("n_levels", [2, 3, 5])
def test_hamiltonian_is_hermitian(n_levels: int) -> None:
    params = DeviceParams(n_levels=n_levels)
    model = build_pump_frame_model(params, 4.5, 120.0, phase=1.1)
    h = hamiltonian(model)
    np.testing.assert_allclose(h, h.conj().T)


def test_qubit_hamiltonian_at_zero_phase(qubit: DeviceParams) -> None:
    model = build_pump_frame_model(qubit, qubit.omega10, 100.0)
    omega = mhz_to_angular(100.0)
    np.testing.assert_allclose(
        hamiltonian(model), [[0, 0.5j * omega], [-0.5j * omega, 0]], atol=1e-15
    )


@pytest.mark.parametrize("n_levels", [2, 3, 5])
def test_generator_preserves_trace(n_levels: int) -> None:
    params = DeviceParams(n_levels=n_levels)
    model = build_pump_frame_model(params, params.omega10, 150.0, phase=0.4)
    l = build_liouvillian(model, params)
    # vec(I)ᵀ L = 0
    np.testing.assert_allclose(
        vec(np.eye(n_levels)) @ l.matrix, np.zeros(n_levels**2), atol=1e-10
    )


@pytest.mark.parametrize("rabi", [0.0, 100.0, 300.0])
def test_generator_is_contractive(device: DeviceParams, rabi: float) -> None:
    model = build_pump_frame_model(device, device.omega10, rabi, phase=1.1)
    eigenvalues = build_liouvillian(model, device).eigenvalues()
    assert eigenvalues.real.max() < 1e-9
    # one stationary mode
    assert np.count_nonzero(np.abs(eigenvalues) < 1e-6) == 1


def test_coherence_decays_at_gamma(qubit: DeviceParams) -> None:
    model = build_pump_frame_model(qubit, qubit.omega10, 0.0)
    l = build_liouvillian(model, qubit)
    rate = l.apply(projector(2, 0, 1))[0, 1]
    assert rate == pytest.approx(-mhz_to_angular(qubit.gamma))


def test_build_liouvillian_checks_levels(device: DeviceParams) -> None:
    model = build_pump_frame_model(DeviceParams(n_levels=3), device.omega10, 10.0)
    with pytest.raises(DimensionMismatch):
        build_liouvillian(model, device)


def test_undriven_steady_state_is_ground(device: DeviceParams) -> None:
    model = build_pump_frame_model(device, device.omega10, 0.0)
    rho = steady_state(build_liouvillian(model, device))
    np.testing.assert_allclose(rho.data, projector(5, 0, 0), atol=1e-12)


@pytest.mark.parametrize(
    ("detuning", "rabi"), [(0.0, 20.0), (0.0, 200.0), (0.03, 80.0), (-0.05, 150.0)]
)
def test_qubit_steady_state_population(
    qubit: DeviceParams, detuning: float, rabi: float
) -> None:
    omega_pump = qubit.omega10 + detuning
    model = build_pump_frame_model(qubit, omega_pump, rabi)
    rho = steady_state(build_liouvillian(model, qubit))
    assert rho.populations[1] == pytest.approx(
        _excited_population(qubit, omega_pump, rabi), abs=1e-10
    )


@pytest.mark.parametrize("phase", [0.0, pi / 2, pi, 3 * pi / 2])
def test_steady_state_is_physical(device: DeviceParams, phase: float) -> None:
    model = build_pump_frame_model(device, device.omega10, 300.0, phase=phase)
    l = build_liouvillian(model, device)
    rho = steady_state(l)
    rho.validate()
    np.testing.assert_allclose(l.apply(rho.data), 0, atol=1e-9)


def test_steady_state_rejects_degenerate() -> None:
    # Pure dephasing leaves every population stationary
    number = np.diag([0.0, 1.0]).astype(np.complex128)
    with pytest.raises(DegenerateSteadyState):
        steady_state(dissipator(number, 1.0))


def test_density_matrix_validation() -> None:
    DensityMatrix.basis(3, 1).validate()
    with pytest.raises(UnphysicalState):
        DensityMatrix(data=np.diag([0.5, 0.4])).validate()
    with pytest.raises(UnphysicalState):
        DensityMatrix(data=np.diag([1.2, -0.2])).validate()
    with pytest.raises(UnphysicalState):
        DensityMatrix(data=[[0.5, 0.5], [0.0, 0.5]]).validate()
    with pytest.raises(DimensionMismatch):
        DensityMatrix(data=np.ones((2, 3)))


def test_expectation_value() -> None:
    rho = DensityMatrix(data=[[0.5, 0.5], [0.5, 0.5]])
    sigma_x = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    assert rho.expect(sigma_x) == pytest.approx(1.0)


def test_propagation_reaches_steady_state(device: DeviceParams) -> None:
    model = build_pump_frame_model(device, device.omega10, 100.0)
    l = build_liouvillian(model, device)
    late = propagate(l, DensityMatrix.basis(5, 0), 200.0)
    np.testing.assert_allclose(late.data, steady_state(l).data, atol=1e-9)


def test_propagation_edge_cases(qubit: DeviceParams) -> None:
    l = build_liouvillian(build_pump_frame_model(qubit, qubit.omega10, 10.0), qubit)
    ground = DensityMatrix.basis(2, 0)
    assert propagate(l, ground, 0.0) is ground
    with pytest.raises(ValueError):
        propagate(l, ground, -1.0)
    with pytest.raises(DimensionMismatch):
        propagate(l, DensityMatrix.basis(3, 0), 1.0)


def test_commutator_of_diagonal_hamiltonian() -> None:
    h = np.diag([0.0, 2.0]).astype(np.complex128)
    rate = commutator(h).apply(projector(2, 0, 1))
    # d/dt |0><1| = -i(E0 - E1)|0><1|
    assert rate[0, 1] == pytest.approx(2.0j)


def _random_density(rng: np.random.Generator, n_levels: int) -> np.ndarray:
    shape = (n_levels, n_levels)
    a = rng.normal(size=shape) + 1j * rng.normal(size=shape)
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def _master_equation_rhs(
    params: DeviceParams, omega_pump: float, rabi: float, phase: float, rho: np.ndarray
) -> np.ndarray:
    """
    dρ/dt written out term by term in the pump frame
    """
    n = params.n_levels
    model = build_pump_frame_model(params, omega_pump, rabi, phase=phase)
    lower = np.zeros((n, n), dtype=np.complex128)
    for m in range(1, n):
        lower[m - 1, m] = np.sqrt(m)
    upper = lower.conj().T
    omega = 2 * pi * rabi * 1e-3
    h = np.diag(model.detunings) - 0.5j * omega * (
        upper * np.exp(1j * phase) - lower * np.exp(-1j * phase)
    )

    def lindblad_term(x: np.ndarray) -> np.ndarray:
        xdx = x.conj().T @ x
        return x @ rho @ x.conj().T - 0.5 * (xdx @ rho + rho @ xdx)

    rhs = -1j * (h @ rho - rho @ h)
    for m in range(1, n):
        jump = np.zeros((n, n), dtype=np.complex128)
        jump[m - 1, m] = 1.0
        rhs += m * 2 * pi * params.gamma1 * 1e-3 * lindblad_term(jump)
    number = np.diag(np.arange(n)).astype(np.complex128)
    rhs += 2 * 2 * pi * params.gamma_phi * 1e-3 * lindblad_term(number)
    return rhs


def test_liouvillian_matches_master_equation() -> None:
    rng = np.random.default_rng(11)
    for _ in range(100):
        params = DeviceParams(n_levels=int(rng.integers(2, 6)))
        omega_pump = float(rng.uniform(4.3, 4.9))
        rabi = float(rng.uniform(0.0, 400.0))
        phase = float(rng.uniform(0.0, 2 * pi))
        rho = _random_density(rng, params.n_levels)
        model = build_pump_frame_model(params, omega_pump, rabi, phase=phase)
        np.testing.assert_allclose(
            build_liouvillian(model, params).apply(rho),
            _master_equation_rhs(params, omega_pump, rabi, phase, rho),
            rtol=0,
            atol=1e-12,
        )


def test_dissipator_is_traceless() -> None:
    rng = np.random.default_rng(3)
    for n_levels in (2, 3, 4):
        shape = (n_levels, n_levels)
        op = rng.normal(size=shape) + 1j * rng.normal(size=shape)
        rho = _random_density(rng, n_levels)
        rate = dissipator(op, 1.3).apply(rho)
        assert abs(np.trace(rate)) < 1e-12


def test_excited_state_decays_exponentially(qubit: DeviceParams) -> None:
    l = build_liouvillian(build_pump_frame_model(qubit, qubit.omega10, 0.0), qubit)
    lifetime = 1 / mhz_to_angular(qubit.gamma1)
    rho = propagate(l, DensityMatrix.basis(2, 1), lifetime)
    assert rho.populations[1] == pytest.approx(exp(-1), abs=1e-6)


def test_propagation_keeps_unit_trace(device: DeviceParams) -> None:
    l = build_liouvillian(build_pump_frame_model(device, device.omega10, 150.0), device)
    lifetime = 1 / mhz_to_angular(device.gamma1)
    start = DensityMatrix.basis(5, 0)
    for t in np.linspace(0.0, 10 * lifetime, 11):
        rho = propagate(l, start, float(t))
        assert abs(np.trace(rho.data) - 1) < 1e-8


def test_steady_state_is_a_fixed_point(device: DeviceParams) -> None:
    l = build_liouvillian(build_pump_frame_model(device, device.omega10, 150.0), device)
    rho = steady_state(l)
    later = propagate(l, rho, 5 / mhz_to_angular(device.gamma1))
    assert np.linalg.norm(later.data - rho.data) < 1e-7


def test_strong_pump_saturates_qubit(qubit: DeviceParams) -> None:
    model = build_pump_frame_model(qubit, qubit.omega10, 2000.0)
    rho = steady_state(build_liouvillian(model, qubit))
    assert abs(rho.populations[1] - 0.5) < 0.01

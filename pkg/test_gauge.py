import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import expm, qr

from checks import (
    commutation_transfer,
    endomorphism_residual,
    group_law_residuals,
    propagator_residual,
    random_hermitian,
    random_transport_residual,
    reflexivity_residual,
    symmetry_residual,
    transitivity_residual,
    transport_residual,
)
from conftest import SX, SZ
from errors import DimensionMismatchError, GridMismatchError, SingularityError
from gauge import (
    Backend,
    GaugePair,
    GaugeSolution,
    apply_gauge_map,
    compose,
    conjugate_propagator,
    difference_derivative,
    gauge_from_functions,
    identity_gauge,
    intertwining_residual,
    inverse_gauge,
    map_hamiltonian,
    map_state,
    solve_omega1,
    solve_omega2,
    transitive_solution,
    unitarity_deviation,
)
from quantum_model import (
    ConstProfile,
    CosProfile,
    HamiltonianSpec,
    PolyProfile,
    StateVector,
    TimeGrid,
    evolve_state,
    propagator,
)


def _analytic_sz_to_sx(t):
    """e^{-i sigma_x t} e^{i sigma_z t}"""
    return expm(-1j * SX * t) @ expm(1j * SZ * t)


def _analytic_sz_to_sx_dot(t):
    return -1j * SX @ _analytic_sz_to_sx(t) + 1j * _analytic_sz_to_sx(t) @ SZ


@pytest.fixture
def sz_to_sx(sigma_z, sigma_x, full_turn):
    return transitive_solution(GaugePair(sigma_z, sigma_x), full_turn)


# --------------------------------------------------------------------------
# Pointwise map
# --------------------------------------------------------------------------


def test_identity_map_leaves_hamiltonian(rng):
    H = random_hermitian(rng, 3)
    assert_allclose(apply_gauge_map(np.eye(3), np.zeros((3, 3)), H), H, atol=1e-15)


def test_interaction_frame_maps_to_zero():
    t = 0.7
    omega = expm(1j * SZ * t)
    assert np.max(np.abs(apply_gauge_map(omega, 1j * SZ @ omega, SZ))) <= 1e-14


def test_product_gauge_maps_sigma_z_to_sigma_x():
    t = 0.7
    mapped = apply_gauge_map(_analytic_sz_to_sx(t), _analytic_sz_to_sx_dot(t), SZ)
    assert np.max(np.abs(mapped - SX)) <= 1e-10


def test_singular_omega_rejected():
    with pytest.raises(SingularityError):
        apply_gauge_map(np.array([[1.0, 2.0], [2.0, 4.0]]), np.zeros((2, 2)), SZ)


def test_singular_samples_rejected():
    grid = TimeGrid(0.0, 1.0, 4)
    omega = np.stack([np.eye(2)] * 5).astype(complex)
    omega[3] = 0.0
    with pytest.raises(SingularityError):
        GaugeSolution(grid, omega, np.zeros_like(omega), Backend.ANALYTIC_PRODUCT)


# --------------------------------------------------------------------------
# Trivial-case solutions
# --------------------------------------------------------------------------


def test_omega1_of_zero_is_identity(full_turn):
    g = solve_omega1(HamiltonianSpec.constant(np.zeros((2, 2))), full_turn)
    assert np.max(np.abs(g.omega - np.eye(2))) <= 1e-14


def test_omega1_sigma_z(sigma_z, full_turn):
    g = solve_omega1(sigma_z, full_turn)
    t = full_turn.nodes
    assert g.backend is Backend.MAGNUS_CONSTANT
    assert_allclose(g.omega[:, 0, 0], np.exp(-1j * t), atol=1e-10)
    assert_allclose(g.omega[:, 1, 1], np.exp(1j * t), atol=1e-10)


def test_omega1_commuting_ramp_matches_closed_form():
    spec = HamiltonianSpec(terms=((PolyProfile((0.0, 1.0)), SX),), hermitian_hint=True)
    grid = TimeGrid(0.0, 2.0, 2000)
    expected = np.stack([expm(-0.5j * t**2 * SX) for t in grid.nodes])

    closed_form = solve_omega1(spec, grid)
    integrated = solve_omega1(spec, grid, method="rk4")
    assert closed_form.backend is Backend.MAGNUS_CONSTANT
    assert integrated.backend is Backend.RK4_INTEGRATED
    assert np.max(np.abs(closed_form.omega - expected)) <= 1e-8
    assert np.max(np.abs(integrated.omega - expected)) <= 1e-8


def test_magnus_refused_for_non_commuting_family(full_turn):
    spec = HamiltonianSpec(terms=((PolyProfile((0.0, 1.0)), SZ), (ConstProfile(1.0), SX)))
    with pytest.raises(ValueError):
        solve_omega1(spec, full_turn, method="magnus")
    assert solve_omega1(spec, TimeGrid(0.0, 1.0, 100)).backend is Backend.RK4_INTEGRATED


def test_omega2_sigma_z(sigma_z, full_turn):
    g = solve_omega2(sigma_z, full_turn)
    t = full_turn.nodes
    assert_allclose(g.omega[:, 0, 0], np.exp(1j * t), atol=1e-10)
    assert_allclose(g.omega[:, 1, 1], np.exp(-1j * t), atol=1e-10)


def test_omega2_hermitian_generator_is_unitary(sigma_x, full_turn):
    g = solve_omega2(sigma_x, full_turn)
    gram = g.omega @ np.conj(np.swapaxes(g.omega, 1, 2))
    assert np.max(np.abs(gram - np.eye(2))) <= 1e-10


def test_seed_must_match_dimension(sigma_z, full_turn):
    with pytest.raises(DimensionMismatchError):
        solve_omega1(sigma_z, full_turn, seed=np.eye(3))


# --------------------------------------------------------------------------
# Transitive solution
# --------------------------------------------------------------------------


def test_reflexive_pair_gives_identity(sigma_z, full_turn):
    g = transitive_solution(GaugePair(sigma_z, sigma_z), full_turn)
    assert g.backend is Backend.COMPOSED
    assert np.max(np.abs(g.omega - np.eye(2))) <= 1e-12


def test_sigma_z_to_sigma_x(sz_to_sx, sigma_z, sigma_x, full_turn):
    expected = np.stack([_analytic_sz_to_sx(t) for t in full_turn.nodes])
    assert np.max(np.abs(sz_to_sx.omega - expected)) <= 1e-10
    assert intertwining_residual(sz_to_sx, sigma_z, sigma_x) <= 1e-7
    assert sz_to_sx.derivative_consistency() <= 1e-4


def test_mapped_hamiltonian_equals_target(sz_to_sx, sigma_z):
    mapped = map_hamiltonian(sz_to_sx, sigma_z)
    assert np.max(np.abs(mapped - SX)) <= 1e-9


def test_different_spectra(rng, full_turn):
    source = HamiltonianSpec.constant(np.diag([1.0, 2.0, 3.0]), hermitian_hint=True)
    target = HamiltonianSpec.constant(random_hermitian(rng, 3, scale=1.0), hermitian_hint=True)
    g = transitive_solution(GaugePair(source, target), full_turn)
    assert intertwining_residual(g, source, target) <= 1e-6


@pytest.mark.parametrize("seed", range(20))
def test_random_pairs_intertwine(seed):
    rng = np.random.default_rng(seed)
    n = 2 + seed % 7
    source = HamiltonianSpec.constant(random_hermitian(rng, n), hermitian_hint=True)
    target = HamiltonianSpec.constant(random_hermitian(rng, n), hermitian_hint=True)
    grid = TimeGrid(0.0, 2.0, 2000)
    g = transitive_solution(GaugePair(source, target), grid)
    assert intertwining_residual(g, source, target) <= 1e-6


@pytest.mark.parametrize("seed", [11, 12])
def test_time_dependent_pair_intertwines(seed):
    rng = np.random.default_rng(seed)
    source = HamiltonianSpec(
        terms=((ConstProfile(1.0), random_hermitian(rng, 3)), (PolyProfile((0.0, 0.5)), random_hermitian(rng, 3))),
        hermitian_hint=True,
    )
    target = HamiltonianSpec.constant(random_hermitian(rng, 3), hermitian_hint=True)
    grid = TimeGrid(0.0, 2.0, 2000)
    g = transitive_solution(GaugePair(source, target), grid)
    assert intertwining_residual(g, source, target) <= 1e-6
    assert g.derivative_consistency() <= 1e-4


def _driven_pair():
    source = HamiltonianSpec(
        terms=((CosProfile(0.5, 2.0, 0.0), SZ), (ConstProfile(1.0), SX)),
        hermitian_hint=True,
    )
    target = HamiltonianSpec(terms=((PolyProfile((0.0, 1.0)), SX),), hermitian_hint=True)
    return source, target


def test_coarse_grid_fails_intertwining():
    source, target = _driven_pair()
    coarse = transitive_solution(GaugePair(source, target), TimeGrid(0.0, 2.0, 8))
    fine = transitive_solution(GaugePair(source, target), TimeGrid(0.0, 2.0, 2000))

    assert intertwining_residual(coarse, source, target) > 1e-3
    assert intertwining_residual(coarse, source, target, stored_derivative=True) <= 1e-12
    assert intertwining_residual(fine, source, target) <= 1e-6


def test_difference_derivative_is_exact_on_quartics():
    grid = TimeGrid(0.0, 1.0, 10)
    t = grid.nodes
    samples = np.stack([np.diag([s**4, 1.0 + 2.0 * s]) for s in t]).astype(complex)
    expected = np.stack([np.diag([4.0 * s**3, 2.0]) for s in t])
    assert_allclose(difference_derivative(samples, grid.step), expected, atol=1e-10)


def test_difference_derivative_short_grid():
    grid = TimeGrid(0.0, 1.0, 2)
    samples = np.stack([np.eye(2) * s**2 for s in grid.nodes])
    assert_allclose(difference_derivative(samples, grid.step), np.stack([np.eye(2) * 2.0 * s for s in grid.nodes]))


def test_pair_dimensions_must_agree(sigma_z):
    with pytest.raises(DimensionMismatchError):
        GaugePair(sigma_z, HamiltonianSpec.constant(np.eye(3)))


# --------------------------------------------------------------------------
# Group structure
# --------------------------------------------------------------------------


def test_compose_with_identity(sz_to_sx, full_turn):
    g = compose(sz_to_sx, identity_gauge(full_turn, 2))
    assert_allclose(g.omega, sz_to_sx.omega, atol=1e-15)
    assert_allclose(g.omega_dot, sz_to_sx.omega_dot, atol=1e-15)


def test_compose_with_inverse(sz_to_sx):
    g = compose(sz_to_sx, inverse_gauge(sz_to_sx))
    assert np.max(np.abs(g.omega - np.eye(2))) <= 1e-10
    assert np.max(np.abs(g.omega_dot)) <= 1e-10


def test_compose_is_associative(rng, full_turn):
    gauges = [
        solve_omega1(HamiltonianSpec.constant(random_hermitian(rng, 3)), full_turn, seed=np.eye(3) + 0.1 * random_hermitian(rng, 3))
        for _ in range(3)
    ]
    left = compose(compose(gauges[0], gauges[1]), gauges[2])
    right = compose(gauges[0], compose(gauges[1], gauges[2]))
    assert np.max(np.abs(left.omega - right.omega)) <= 1e-10
    assert np.max(np.abs(left.omega_dot - right.omega_dot)) <= 1e-10


def test_compose_requires_same_grid(sigma_z):
    a = solve_omega1(sigma_z, TimeGrid(0.0, 1.0, 10))
    b = solve_omega1(sigma_z, TimeGrid(0.0, 1.0, 20))
    with pytest.raises(GridMismatchError):
        compose(a, b)


def test_inverse_of_identity(full_turn):
    g = inverse_gauge(identity_gauge(full_turn, 3))
    assert_allclose(g.omega, np.broadcast_to(np.eye(3), g.omega.shape), atol=1e-15)


def test_unitary_inverse_is_conjugate_transpose(sz_to_sx):
    inverse = inverse_gauge(sz_to_sx)
    assert np.max(np.abs(inverse.omega - np.conj(np.swapaxes(sz_to_sx.omega, 1, 2)))) <= 1e-10


def test_inverse_map_round_trip(rng, full_turn):
    source = HamiltonianSpec.constant(random_hermitian(rng, 3), hermitian_hint=True)
    target = HamiltonianSpec.constant(random_hermitian(rng, 3), hermitian_hint=True)
    g = transitive_solution(GaugePair(source, target), full_turn)
    inverse = inverse_gauge(g)
    H = random_hermitian(rng, 3)
    for j in (0, 700, 2000):
        forward = apply_gauge_map(g.omega[j], g.omega_dot[j], H)
        back = apply_gauge_map(inverse.omega[j], inverse.omega_dot[j], forward)
        assert np.max(np.abs(back - H)) <= 1e-9


def test_group_laws_on_random_inputs():
    laws = group_law_residuals(np.random.default_rng(99), dims=range(2, 7), draws=4)
    assert set(laws) == {"composition", "identity", "inverse"}
    assert all(residual <= 1e-9 for residual in laws.values())


def test_commuting_gauges_induce_commuting_maps(rng):
    defect, commutator = commutation_transfer(rng, TimeGrid(0.0, 2.0, 200), 3)
    assert commutator <= 1e-9
    assert defect <= 1e-9


def test_equivalence_relation(sz_to_sx, sigma_z, sigma_x, full_turn, rng):
    assert reflexivity_residual(sigma_z, full_turn) <= 1e-6
    assert symmetry_residual(sz_to_sx, sigma_z, sigma_x) <= 1e-6
    assert transitivity_residual(rng, sz_to_sx, sigma_z, sigma_x) <= 1e-6


def test_unitary_gauge_is_endomorphism(sz_to_sx, sigma_z):
    assert endomorphism_residual(sz_to_sx, sigma_z) <= 1e-9


def test_unitarity_transfer_with_unitary_seed(rng):
    source = HamiltonianSpec(
        terms=((ConstProfile(1.0), random_hermitian(rng, 3)), (PolyProfile((0.0, 1.0)), random_hermitian(rng, 3))),
        hermitian_hint=True,
    )
    target = HamiltonianSpec.constant(random_hermitian(rng, 3), hermitian_hint=True)
    seed, _ = qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    g = transitive_solution(GaugePair(source, target), TimeGrid(0.0, 2.0, 2000), seed=seed)
    assert_allclose(g.seed, seed)
    assert unitarity_deviation(g) <= 1e-7
    assert g.is_unitary(1e-7)


def test_interpolation_hits_nodes(sz_to_sx, full_turn):
    t = full_turn.nodes[123]
    assert_allclose(sz_to_sx.interpolate(t), sz_to_sx.omega[123], atol=1e-12)
    with pytest.raises(ValueError):
        sz_to_sx.interpolate(-1.0)


def test_analytic_gauge_sampling(full_turn, sigma_z, sigma_x):
    g = gauge_from_functions(full_turn, _analytic_sz_to_sx, _analytic_sz_to_sx_dot)
    assert g.backend is Backend.ANALYTIC_PRODUCT
    assert intertwining_residual(g, sigma_z, sigma_x, stored_derivative=True) <= 1e-12
    assert intertwining_residual(g, sigma_z, sigma_x) <= 1e-8


# --------------------------------------------------------------------------
# States and propagators
# --------------------------------------------------------------------------


def test_identity_gauge_keeps_path(sigma_z, up, full_turn):
    path = evolve_state(sigma_z, up, full_turn)
    mapped = map_state(identity_gauge(full_turn, 2), path)
    assert all(np.allclose(a.entries, b.entries, rtol=0.0, atol=1e-15) for a, b in zip(path, mapped))


def test_state_transport_sigma_z_to_sigma_x(sz_to_sx, sigma_z, sigma_x, up):
    assert transport_residual(sz_to_sx, sigma_z, sigma_x, up) <= 1e-7


def test_unitary_gauge_preserves_norm(sz_to_sx, sigma_z, full_turn):
    psi0 = StateVector(np.array([0.6, 0.8j]))
    path = evolve_state(sigma_z, psi0, full_turn)
    mapped = map_state(sz_to_sx, path)
    assert max(abs(a.norm() - b.norm()) for a, b in zip(path, mapped)) <= 1e-10


def test_map_state_rejects_misaligned_path(sz_to_sx, sigma_z):
    path = evolve_state(sigma_z, StateVector(np.array([1.0, 0.0])), TimeGrid(0.0, 1.0, 10))
    with pytest.raises(GridMismatchError):
        map_state(sz_to_sx, path)


def test_commutative_diagram_random_pairs():
    rng = np.random.default_rng(5)
    grid = TimeGrid(0.0, 2.0, 1000)
    for n in (2, 3, 4, 5, 6):
        assert random_transport_residual(rng, grid, n, draws=2) <= 1e-7


def test_conjugation_by_identity(sigma_z, full_turn):
    U = propagator(sigma_z, full_turn)
    result = conjugate_propagator(identity_gauge(full_turn, 2), U, 300, 1700)
    assert_allclose(result, U.between(1700, 300), atol=1e-14)


def test_conjugated_propagator_is_target_evolution(sz_to_sx, sigma_z, full_turn):
    U = propagator(sigma_z, full_turn)
    for j in (250, 1000, 2000):
        t = full_turn.nodes[j]
        conjugated = conjugate_propagator(sz_to_sx, U, 0, j, hermitian=True)
        assert np.max(np.abs(conjugated - expm(-1j * SX * t))) <= 1e-7


def test_propagator_conjugation_at_random_pairs(sz_to_sx, sigma_z, sigma_x, rng):
    assert propagator_residual(rng, sz_to_sx, sigma_z, sigma_x, hermitian=True) <= 1e-7
    assert propagator_residual(rng, sz_to_sx, sigma_z, sigma_x, hermitian=False) <= 1e-7


def test_conjugate_propagator_index_bounds(sz_to_sx, sigma_z, full_turn):
    U = propagator(sigma_z, full_turn)
    with pytest.raises(IndexError):
        conjugate_propagator(sz_to_sx, U, 0, len(full_turn))

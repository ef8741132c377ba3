"""Time steppers against dense oracles, plus stability and run orchestration."""
import numpy as np
import pytest

from dirac4cfd import (
    SCHEME_IMPLICIT,
    SCHEME_SEMI_IMPLICIT,
    SCHEME_TSSP,
    SchemeConfig,
    SolverError,
    SpinorField,
    StabilityError,
    TwoLevelState,
    amplification_factor,
    build_grid,
    check_stability,
    first_step,
    implicit_step_1d,
    mass_l2,
    run,
    sample_field,
    semi_implicit_step,
    zero_potentials,
)
from dirac4cfd.oracles import (
    circulant_Ah,
    circulant_delta_x,
    dense_implicit_step,
    dense_semi_implicit_step,
    stack,
    unstack,
)
from dirac4cfd.pauli import ID2, SIGMA1, SIGMA2, SIGMA3, combo_apply
from dirac4cfd.potentials import (
    periodic_em_potentials,
    standard_1d_potentials,
    standard_1d_initial,
)
from dirac4cfd.steppers import _SemiImplicitKernel


def rand_field(grid, seed=0):
    rng = np.random.default_rng(seed)
    shape = grid.field_shape()
    return SpinorField(grid, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


# --- configuration ------------------------------------------------------------

def test_config_validation():
    SchemeConfig(1.0, 0.01, 2.0)
    with pytest.raises(ValueError):
        SchemeConfig(0.0, 0.01, 2.0)       # epsilon out of range
    with pytest.raises(ValueError):
        SchemeConfig(1.5, 0.01, 2.0)
    with pytest.raises(ValueError):
        SchemeConfig(1.0, -0.01, 2.0)      # negative tau
    with pytest.raises(ValueError):
        SchemeConfig(1.0, 0.01, 0.005)     # t_final < tau
    with pytest.raises(ValueError):
        SchemeConfig(1.0, 0.03, 2.0)       # non-integer step count
    with pytest.raises(ValueError):
        SchemeConfig(1.0, 0.01, 2.0, scheme="leapfrog")


def test_config_step_count():
    assert SchemeConfig(1.0, 0.01, 2.0).n_steps == 200
    assert SchemeConfig(1.0, 0.45, 1.8).n_steps == 4


# --- first step ---------------------------------------------------------------

def test_first_step_of_zero_field():
    g = build_grid(0.0, 2.0 * np.pi, 16)
    cfg = SchemeConfig(1.0, 0.01, 1.0)
    pots = standard_1d_potentials().sample(g, 0.0)
    out = first_step(SpinorField.zeros(g), None, pots, cfg)
    np.testing.assert_array_equal(out.values, 0.0)


def test_first_step_constant_field_free_equation():
    g = build_grid(0.0, 2.0 * np.pi, 16)
    cfg = SchemeConfig(1.0, 0.01, 1.0)
    f = sample_field(
        lambda x: (np.full(x.shape, 1.0 + 0.5j), np.full(x.shape, -0.3)), g)
    pots = zero_potentials().sample(g, 0.0)
    out = first_step(f, None, pots, cfg)
    s = np.sin(cfg.tau / cfg.epsilon)
    expected = f.values - 1j * s * combo_apply(0.0, 0.0, 0.0, 1.0, f.values)
    np.testing.assert_allclose(out.values, expected, atol=1e-14)


def test_first_step_formula_oracle():
    """Independent node-by-node evaluation of the starting-value formula."""
    g = build_grid(0.0, 2.0 * np.pi, 32)
    eps, tau = 1.0, 0.01
    cfg = SchemeConfig(eps, tau, 1.0)
    phi0 = sample_field(standard_1d_initial, g)
    x = g.nodes()
    # analytic derivative of the initial data
    d1 = -2.0 * np.sin(x) * np.cos(x) / (1.0 + np.sin(x) ** 2) ** 2
    d2 = np.sin(x) / (3.0 + np.cos(x)) ** 2
    dphi0 = SpinorField(g, np.stack([d1, d2]).astype(complex))
    v, a = standard_1d_potentials().sample(g, 0.0)
    out = first_step(phi0, dphi0, (v, a), cfg)

    s = np.sin(tau / eps)
    expected = np.empty_like(phi0.values)
    for j in range(g.n):
        p = phi0.values[:, j]
        dp = dphi0.values[:, j]
        m = s * SIGMA3 + tau * (v[j] * ID2 - a[0][j] * SIGMA1)
        expected[:, j] = p - s * (SIGMA1 @ dp) - 1j * (m @ p)
    np.testing.assert_allclose(out.values, expected, atol=1e-14)


def test_first_step_spectral_fallback_matches_analytic_derivative():
    g = build_grid(0.0, 2.0 * np.pi, 128)
    cfg = SchemeConfig(1.0, 0.001, 1.0)
    phi0 = sample_field(standard_1d_initial, g)
    x = g.nodes()
    d1 = -2.0 * np.sin(x) * np.cos(x) / (1.0 + np.sin(x) ** 2) ** 2
    d2 = np.sin(x) / (3.0 + np.cos(x)) ** 2
    dphi0 = SpinorField(g, np.stack([d1, d2]).astype(complex))
    pots = standard_1d_potentials().sample(g, 0.0)
    with_analytic = first_step(phi0, dphi0, pots, cfg)
    with_spectral = first_step(phi0, None, pots, cfg)
    # smooth data: the spectral derivative is converged at N=128
    np.testing.assert_allclose(with_spectral.values, with_analytic.values, atol=1e-12)


# --- semi-implicit scheme -------------------------------------------------------

def test_semi_implicit_zero_stays_zero():
    g = build_grid(0.0, 2.0 * np.pi, 8)
    cfg = SchemeConfig(1.0, 0.01, 1.0)
    state = TwoLevelState(SpinorField.zeros(g), SpinorField.zeros(g), 1, 0.01)
    pots = standard_1d_potentials().sample(g, 0.0)
    out = semi_implicit_step(state, pots, cfg)
    np.testing.assert_array_equal(out.values, 0.0)


@pytest.mark.parametrize("n", [8, 16])
def test_semi_implicit_matches_dense_solve(n):
    g = build_grid(0.0, 2.0 * np.pi, n)
    cfg = SchemeConfig(1.0, 0.01, 1.0)
    v, a = standard_1d_potentials().sample(g, 0.0)
    for seed in range(5):
        prev = rand_field(g, seed=2 * seed)
        curr = rand_field(g, seed=2 * seed + 1)
        fast = semi_implicit_step(TwoLevelState(curr, prev, 1, 0.01), (v, a), cfg)
        dense = dense_semi_implicit_step(prev, curr, v, a[0], 1.0, 0.01)
        assert np.max(np.abs(fast.values - dense.values)) <= 1e-12


def test_semi_implicit_free_update_preserves_single_mode():
    g = build_grid(0.0, 2.0 * np.pi, 16)
    cfg = SchemeConfig(1.0, 0.01, 1.0)
    f = sample_field(lambda x: (np.exp(3j * x), 0.5 * np.exp(3j * x)), g)
    pots = zero_potentials().sample(g, 0.0)
    out = semi_implicit_step(TwoLevelState(f, f, 1, 0.01), pots, cfg)
    coef = np.fft.fft(out.values, axis=1) / g.n
    idx = list(g.mode_numbers()).index(3)
    mask = np.ones(g.n, dtype=bool)
    mask[idx] = False
    np.testing.assert_allclose(coef[:, mask], 0.0, atol=1e-13)
    assert np.abs(coef[0, idx]) > 0.1


def test_semi_implicit_time_symmetry():
    """Stepping forward then backward (tau -> -tau) recovers the old level."""
    g = build_grid(0.0, 2.0 * np.pi, 32)
    eps, tau = 0.5, 0.02
    v, a = standard_1d_potentials().sample(g, 0.0)
    prev, curr = rand_field(g, seed=11), rand_field(g, seed=12)
    fwd = _SemiImplicitKernel(g, eps, tau)
    bwd = _SemiImplicitKernel(g, eps, -tau)
    nxt = fwd.ifft(fwd.step_hat(fwd.fft(prev.values), curr.values, v, a))
    back = bwd.ifft(bwd.step_hat(bwd.fft(nxt), curr.values, v, a))
    assert np.max(np.abs(back - prev.values)) <= 1e-11


def test_semi_implicit_2d_matches_dense_solve():
    """Tensor-product mode symbol vs an explicitly assembled 2N^2 x 2N^2 solve."""
    n = 4
    g = build_grid(0.0, 2.0 * np.pi, n, dim=2)
    eps, tau = 1.0, 0.01
    cfg = SchemeConfig(eps, tau, 1.0)
    v, a = periodic_em_potentials().sample(g, 0.0)

    g1d = build_grid(0.0, 2.0 * np.pi, n)
    compact_dx = np.linalg.solve(circulant_Ah(g1d), circulant_delta_x(g1d))
    eye_n = np.eye(n)
    k_op = (-1j / eps) * (
        np.kron(np.kron(compact_dx, eye_n), SIGMA1)
        + np.kron(np.kron(eye_n, compact_dx), SIGMA2)
    ) + (1.0 / eps) * np.kron(np.eye(n * n), SIGMA3)
    g_op = (
        np.kron(np.diag(v.ravel()), ID2)
        - np.kron(np.diag(a[0].ravel()), SIGMA1)
        - np.kron(np.diag(a[1].ravel()), SIGMA2)
    )

    def flat(field):
        return np.moveaxis(field.values, 0, -1).reshape(-1)

    prev, curr = rand_field(g, seed=21), rand_field(g, seed=22)
    eye = np.eye(2 * n * n)
    lhs = (1j / (2.0 * tau)) * eye - 0.5 * k_op
    rhs = ((1j / (2.0 * tau)) * eye + 0.5 * k_op) @ flat(prev) + g_op @ flat(curr)
    dense = np.moveaxis(np.linalg.solve(lhs, rhs).reshape(n, n, 2), -1, 0)

    fast = semi_implicit_step(TwoLevelState(curr, prev, 1, tau), (v, a), cfg)
    assert np.max(np.abs(fast.values - dense)) <= 1e-12


# --- implicit scheme ------------------------------------------------------------

def test_implicit_zero_stays_zero():
    g = build_grid(0.0, 2.0 * np.pi, 8)
    cfg = SchemeConfig(1.0, 0.01, 1.0, SCHEME_IMPLICIT)
    pots = standard_1d_potentials().sample(g, 0.005)
    out = implicit_step_1d(SpinorField.zeros(g), pots, cfg)
    np.testing.assert_array_equal(out.values, 0.0)


@pytest.mark.parametrize("n", [8, 16])
def test_implicit_matches_dense_solve(n):
    g = build_grid(0.0, 2.0 * np.pi, n)
    cfg = SchemeConfig(1.0, 0.01, 1.0, SCHEME_IMPLICIT, linear_solver_tol=1e-13)
    v, a = standard_1d_potentials().sample(g, 0.0)
    for seed in range(5):
        f = rand_field(g, seed=30 + seed)
        fast = implicit_step_1d(f, (v, a), cfg)
        dense = dense_implicit_step(f, v, a[0], 1.0, 0.01)
        assert np.max(np.abs(fast.values - dense.values)) <= 1e-12


def test_implicit_step_conserves_mass():
    g = build_grid(0.0, 2.0 * np.pi, 32)
    cfg = SchemeConfig(1.0, 0.01, 1.0, SCHEME_IMPLICIT)
    pots = standard_1d_potentials().sample(g, 0.0)
    f = rand_field(g, seed=40)
    m0 = mass_l2(f)
    for _ in range(10):
        f = implicit_step_1d(f, pots, cfg)
    assert abs(mass_l2(f) - m0) / m0 <= 1e-10


def test_implicit_solver_failure_carries_residuals():
    g = build_grid(0.0, 2.0 * np.pi, 8)
    # an unreachable tolerance forces the iteration cap
    cfg = SchemeConfig(1.0, 0.01, 1.0, SCHEME_IMPLICIT, linear_solver_tol=1e-30)
    pots = standard_1d_potentials().sample(g, 0.0)
    with pytest.raises(SolverError) as err:
        implicit_step_1d(rand_field(g, seed=41), pots, cfg)
    assert len(err.value.residuals) == 200
    assert err.value.residuals[-1] < 1e-12  # it converged to machine level anyway


def test_implicit_rejects_2d():
    g = build_grid(0.0, 2.0 * np.pi, 8, dim=2)
    cfg = SchemeConfig(1.0, 0.01, 1.0, SCHEME_IMPLICIT)
    pots = periodic_em_potentials().sample(g, 0.0)
    with pytest.raises(ValueError, match="1D"):
        implicit_step_1d(rand_field(g), pots, cfg)


# --- stability --------------------------------------------------------------------

def test_stability_gate_standard_potentials():
    g = build_grid(0.0, 2.0 * np.pi, 64)
    pots = standard_1d_potentials()
    cfg = SchemeConfig(1.0, 0.45, 1.8, SCHEME_SEMI_IMPLICIT)
    rep = check_stability(cfg, pots, g)
    assert rep.tau_max == pytest.approx(0.5, abs=1e-3)
    assert rep.ok
    cfg = SchemeConfig(1.0, 0.6, 1.8, SCHEME_SEMI_IMPLICIT)
    assert not check_stability(cfg, pots, g).ok


def test_implicit_is_unconditionally_stable():
    g = build_grid(0.0, 2.0 * np.pi, 64)
    cfg = SchemeConfig(1.0, 10.0, 100.0, SCHEME_IMPLICIT)
    assert check_stability(cfg, standard_1d_potentials(), g).ok


def test_free_equation_has_no_stability_bound():
    g = build_grid(0.0, 2.0 * np.pi, 16)
    cfg = SchemeConfig(1.0, 1.0, 2.0, SCHEME_SEMI_IMPLICIT)
    rep = check_stability(cfg, zero_potentials(), g)
    assert rep.tau_max == np.inf
    assert rep.ok


def test_amplification_modulus_and_limits():
    rng = np.random.default_rng(55)
    for _ in range(200):
        n = 2 * int(rng.integers(2, 65))
        eta = amplification_factor(
            int(rng.integers(-n // 2, n // 2)), n,
            h=float(rng.uniform(0.01, 1.0)), eps=float(rng.uniform(0.01, 1.0)),
            tau=float(rng.uniform(1e-4, 0.5)), v0=float(rng.uniform(-2, 2)),
            a10=float(rng.uniform(-2, 2)), sign=int(rng.choice([-1, 1])))
        assert abs(abs(eta) - 1.0) <= 1e-13
    # tau -> 0 limit of the Cayley form
    assert amplification_factor(3, 16, 0.4, 0.8, 1e-12, 0.3, -0.2) == pytest.approx(1.0)


def test_amplification_formula_oracle():
    # l = 0, V0 = A10 = 0, eps = h = 1: theta = +/- 1
    tau = 0.3
    for sign in (1, -1):
        eta = amplification_factor(0, 8, 1.0, 1.0, tau, 0.0, 0.0, sign=sign)
        theta = sign * 1.0
        assert eta == pytest.approx((2 + 1j * tau * theta) / (2 - 1j * tau * theta))


# --- run orchestration -------------------------------------------------------------

def setup_standard(n=32):
    g = build_grid(0.0, 2.0 * np.pi, n)
    return g, sample_field(standard_1d_initial, g), standard_1d_potentials()


def test_run_single_step():
    g, phi0, pots = setup_standard()
    cfg = SchemeConfig(1.0, 0.01, 0.01, SCHEME_SEMI_IMPLICIT)
    res = run(cfg, g, phi0, pots)
    # T_0 = tau: exactly the first step is taken
    expected = first_step(phi0, None, pots.sample(g, 0.0), cfg)
    np.testing.assert_allclose(res.final.values, expected.values, atol=1e-14)


def test_run_refuses_unstable_tau():
    g, phi0, pots = setup_standard()
    cfg = SchemeConfig(1.0, 0.6, 1.2, SCHEME_SEMI_IMPLICIT)
    with pytest.raises(StabilityError):
        run(cfg, g, phi0, pots)
    run(cfg, g, phi0, pots, allow_unstable=True)  # override completes


def test_run_implicit_conserves_energy_over_200_steps():
    g, phi0, pots = setup_standard(n=64)
    cfg = SchemeConfig(1.0, 0.01, 2.0, SCHEME_IMPLICIT)
    res = run(cfg, g, phi0, pots, diagnostics=True)
    assert res.energy is not None and len(res.energy) == 201
    drift = np.max(np.abs(res.energy - res.energy[0])) / abs(res.energy[0])
    assert drift <= 1e-8
    mass_drift = np.max(np.abs(res.mass - res.mass[0])) / res.mass[0]
    assert mass_drift <= 1e-10


def test_run_snapshots_at_requested_times():
    g, phi0, pots = setup_standard()
    cfg = SchemeConfig(1.0, 0.01, 0.1, SCHEME_SEMI_IMPLICIT,
                       snapshot_times=(0.0, 0.05, 0.1))
    res = run(cfg, g, phi0, pots)
    assert set(res.snapshots) == {0.0, 0.05, 0.1}
    np.testing.assert_array_equal(res.snapshots[0.0].values, phi0.values)
    np.testing.assert_array_equal(res.snapshots[0.1].values, res.final.values)


def test_run_rejects_misaligned_snapshot_time():
    g, phi0, pots = setup_standard()
    cfg = SchemeConfig(1.0, 0.01, 0.1, SCHEME_SEMI_IMPLICIT, snapshot_times=(0.0251,))
    with pytest.raises(ValueError, match="snapshot time"):
        run(cfg, g, phi0, pots)


def test_run_tssp_scheme_dispatch():
    g, phi0, pots = setup_standard()
    cfg = SchemeConfig(1.0, 0.01, 0.1, SCHEME_TSSP)
    res = run(cfg, g, phi0, pots, diagnostics=True)
    assert res.mass is not None
    np.testing.assert_allclose(res.mass, res.mass[0], rtol=1e-12)


def test_run_implicit_rejects_2d_grid():
    g = build_grid(0.0, 2.0 * np.pi, 8, dim=2)
    phi0 = rand_field(g, seed=50)
    cfg = SchemeConfig(1.0, 0.01, 0.1, SCHEME_IMPLICIT)
    with pytest.raises(ValueError, match="1D"):
        run(cfg, g, phi0, periodic_em_potentials())


def test_run_semi_implicit_matches_stepwise_composition():
    """run() with its fused loop equals naive step-by-step composition."""
    g, phi0, pots = setup_standard(n=16)
    cfg = SchemeConfig(1.0, 0.01, 0.05, SCHEME_SEMI_IMPLICIT)
    res = run(cfg, g, phi0, pots)

    pots0 = pots.sample(g, 0.0)
    prev = phi0
    curr = first_step(phi0, None, pots0, cfg)
    for k in range(1, cfg.n_steps):
        nxt = semi_implicit_step(TwoLevelState(curr, prev, k, k * cfg.tau), pots0, cfg)
        prev, curr = curr, nxt
    np.testing.assert_allclose(res.final.values, curr.values, atol=1e-12)


def test_dense_stack_roundtrip():
    g = build_grid(0.0, 2.0 * np.pi, 8)
    f = rand_field(g, seed=60)
    np.testing.assert_array_equal(unstack(stack(f), g).values, f.values)

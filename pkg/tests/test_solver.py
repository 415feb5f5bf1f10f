from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import integrate

from fracschrod import solver as S
from fracschrod.errors import ConvergenceError, NonContractionError, ValidityError
from fracschrod.estimates import INF, Triplet
from fracschrod.kernels import KernelSpec
from fracschrod.special import mittag_leffler

SPEC = KernelSpec(0.5, 2.0, 1, theta=2.0)
GRID = S.GridSpec(1, 64, 10.0)


def test_grid_validation_and_frequencies():
    for bad in [dict(dim=3, points=16, L=1.0), dict(dim=1, points=24, L=1.0), dict(dim=1, points=8, L=1.0),
                dict(dim=1, points=16, L=0.0)]:
        with pytest.raises(ValueError):
            S.GridSpec(**bad)
    g = S.GridSpec(1, 16, 2.0)
    k = g.frequencies()
    assert k[1] == pytest.approx(math.pi / 2.0)
    assert g.cell_volume == pytest.approx(0.25)


def test_field_validation():
    with pytest.raises(ValueError):
        S.ComplexField(GRID, np.zeros(10))
    with pytest.raises(ValueError):
        S.ComplexField(GRID, np.full(64, np.nan))


def test_symbol_examples():
    sym = S.fractional_laplacian_symbol(GRID, 2.0)
    assert sym[0] == 0.0
    assert np.allclose(sym, GRID.frequencies() ** 2)
    g2 = S.GridSpec(2, 16, 3.0)
    s2 = S.fractional_laplacian_symbol(g2, 1.3)
    assert s2[1, 2] == s2[2, 1] == s2[-1, 2] == s2[2, -1]


def test_evolve_identity_at_zero():
    u0 = S.gaussian(GRID, 1.0, 1.0, k0=1.0)
    assert S.evolve_linear(SPEC, GRID, u0, 0.0) is u0
    with pytest.raises(ValueError):
        S.evolve_linear(SPEC, GRID, u0, -1.0)


def test_evolve_single_mode_matches_oracle():
    g = S.GridSpec(1, 16, math.pi)
    u0 = S.ComplexField(g, np.exp(2j * g.axis()))
    v = S.evolve_linear(SPEC, g, u0, 1.0).values[3] / u0.values[3]
    ref = S.caputo_ode_oracle(4.0, 0.5, 1.0, [0.0, 1.0])[-1]
    assert abs(v - ref) < 1e-5


def test_near_unitary_as_alpha_to_one():
    g = S.GridSpec(1, 16, math.pi)
    u0 = S.ComplexField(g, np.exp(2j * g.axis()))
    devs = []
    for a in (0.8, 0.95, 0.99):
        amp = [abs(S.evolve_linear(KernelSpec(a, 2.0), g, u0, t).values[0]) for t in (0.5, 1.0, 2.0)]
        devs.append(max(abs(x - 1) for x in amp))
    assert devs[0] > devs[1] > devs[2]


def test_nonlinearity_examples():
    z = S.ComplexField(GRID, np.zeros(64))
    assert np.all(S.nonlinearity(z, 2.0).values == 0)
    c = S.ComplexField(GRID, np.full(64, 1.5))
    assert np.allclose(S.nonlinearity(c, 2.0).values, 1.5**3)
    u = S.gaussian(GRID, 0.7, 1.0, k0=0.4)
    ph = np.exp(0.3j)
    lhs = S.nonlinearity(S.ComplexField(GRID, ph * u.values), 2.0).values
    assert np.allclose(lhs, ph * S.nonlinearity(u, 2.0).values, atol=1e-15)


def test_duhamel_zero_and_history_gap():
    zeros = [S.ComplexField(GRID, np.zeros(64))] * 5
    assert np.all(S.duhamel_term(SPEC, GRID, zeros, 1.0).values == 0)
    with pytest.raises(ValueError, match="history gap"):
        S.duhamel_term(SPEC, GRID, zeros[:1], 1.0)


@pytest.mark.parametrize("order", [1, 2])
def test_duhamel_constant_zero_mode(order):
    t = 0.8
    f = [S.ComplexField(GRID, np.full(64, 2.0 + 0j))] * 9
    got = S.duhamel_term(SPEC, GRID, f, t, order=order).values[0]
    a = SPEC.alpha
    # int_0^t -i (t-s)^{a-1} E_{a,a}(0) ds * 2 = -2 i t^a / Gamma(a + 1)
    ref = -2j * t**a / math.gamma(a + 1)
    assert abs(got - ref) < 1e-13


def test_duhamel_linear_mode_vs_quadrature():
    # f^(tau) = tau at frequency xi = 1 (lambda = 1), exact for the order-2 rule
    g = S.GridSpec(1, 16, math.pi)
    t, steps = 1.0, 8
    taus = np.linspace(0, t, steps + 1)
    f = [S.ComplexField(g, tau * np.exp(1j * g.axis())) for tau in taus]
    got = S.duhamel_term(SPEC, g, f, t, order=2).values[0] / np.exp(1j * g.axis()[0])
    a = SPEC.alpha

    def integrand(s, part):
        return part(-1j * s ** (a - 1) * mittag_leffler(-1j * s**a, a, a) * (t - s))

    re = integrate.quad(integrand, 0, t, args=(np.real,), limit=200, epsabs=1e-13)[0]
    im = integrate.quad(integrand, 0, t, args=(np.imag,), limit=200, epsabs=1e-13)[0]
    assert abs(got - (re + 1j * im)) < 1e-9


def test_duhamel_convergence_order():
    g = S.GridSpec(1, 16, math.pi)
    t = 1.0
    x = g.axis()

    def run(steps, order):
        taus = np.linspace(0, t, steps + 1)
        f = [S.ComplexField(g, np.cos(3 * tau) * np.exp(2j * x)) for tau in taus]
        return S.duhamel_term(SPEC, g, f, t, order=order).values[0]

    for order, expected in [(1, 1.0), (2, 2.0)]:
        a, b, c = run(16, order), run(32, order), run(64, order)
        rate = math.log2(abs(a - b) / abs(b - c))
        assert rate >= expected - 0.15


def test_oracle_examples_and_errors():
    y = S.caputo_ode_oracle(0.0, 0.5, 2 - 1j, [0.0, 0.5, 1.0])
    assert np.allclose(y, 2 - 1j)
    y1 = S.caputo_ode_oracle(1.0, 0.99, 1.0, [0.0, 1.0])[-1]
    y2 = S.caputo_ode_oracle(1.0, 0.9, 1.0, [0.0, 1.0])[-1]
    assert abs(y1 - np.exp(-1j)) < abs(y2 - np.exp(-1j))
    with pytest.raises(ConvergenceError):
        S.caputo_ode_oracle(1000.0, 0.5, 1.0, [0.0, 1.0], steps=64)
    with pytest.raises(ValueError):
        S.caputo_ode_oracle(1.0, 0.5, 1.0, [1.0, 0.5])


def test_solver_config_validation():
    with pytest.raises(ValueError):
        S.SolverConfig(T=0.0)
    with pytest.raises(ValueError):
        S.SolverConfig(T=1.0, steps=1)
    with pytest.raises(ValueError):
        S.SolverConfig(T=1.0, memory_quadrature_order=3)


def test_linear_solve_is_bitwise_evolve_linear():
    u0 = S.gaussian(GRID, 0.1, 1.0)
    traj = S.solve_picard(SPEC, GRID, u0, S.SolverConfig(T=0.5, steps=8, coupling=0.0))
    assert traj.picard_history[-1] == 0.0 and len(traj.picard_history) == 2
    for f, t in zip(traj.fields, traj.times):
        assert np.array_equal(f.values, S.evolve_linear(SPEC, GRID, u0, t).values)


def test_small_data_contracts_and_residual():
    u0 = S.gaussian(GRID, 1e-2, 1.0)
    cfg = S.SolverConfig(T=0.5, steps=16, picard_tol=1e-13)
    traj = S.solve_picard(SPEC, GRID, u0, cfg)
    h = traj.picard_history
    assert traj.metadata["converged"]
    assert all(b < 0.5 * a for a, b in zip(h, h[1:]))
    assert "designated triplet" in traj.metadata["distance"]
    # one more Picard step barely moves the solution
    again = S.solve_picard(SPEC, GRID, u0, S.SolverConfig(T=0.5, steps=16, picard_tol=1e-300,
                                                           picard_max_iters=len(h) + 1))
    last = np.stack([f.values for f in again.fields])
    prev = np.stack([f.values for f in traj.fields])
    assert S.x_distance(last - prev, traj.times, GRID.cell_volume, Triplet(INF, 2.0, 2.0)) < 2 * cfg.picard_tol


def test_focusing_and_defocusing_both_contract():
    u0 = S.gaussian(GRID, 1e-2, 1.0)
    for sign in (1, -1):
        spec = KernelSpec(0.5, 2.0, 1, theta=2.0, sign=sign)
        traj = S.solve_picard(spec, GRID, u0, S.SolverConfig(T=0.5, steps=16))
        assert traj.metadata["converged"] and traj.metadata["sign"] == sign


def test_large_data_raises_non_contraction():
    u0 = S.gaussian(GRID, 5.0, 1.0)
    with pytest.raises(NonContractionError) as info:
        S.solve_picard(SPEC, GRID, u0, S.SolverConfig(T=2.0, steps=16))
    assert info.value.suggested_T < 2.0
    assert len(info.value.history) >= 4


def test_inadmissible_triplet_rejected():
    u0 = S.gaussian(GRID, 1e-2, 1.0)
    with pytest.raises(ValidityError):
        S.solve_picard(SPEC, GRID, u0, S.SolverConfig(T=0.5, steps=4), Triplet(3.0, 2.0, 2.0))


def test_box_edge_warning():
    u0 = S.gaussian(GRID, 1.0, 4.0)
    with pytest.warns(UserWarning, match="box edge"):
        S.solve_picard(SPEC, GRID, u0, S.SolverConfig(T=0.1, steps=2, coupling=0.0))


def test_grid_refinement_stability():
    u0c = S.gaussian(S.GridSpec(1, 128, 20.0), 0.05, 1.0)
    u0f = S.gaussian(S.GridSpec(1, 256, 20.0), 0.05, 1.0)
    cfg = S.SolverConfig(T=0.5, steps=16)
    nc = S.solve_picard(SPEC, u0c.grid, u0c, cfg).fields[-1].norm(2.0)
    nf = S.solve_picard(SPEC, u0f.grid, u0f, cfg).fields[-1].norm(2.0)
    assert abs(nc - nf) < 0.01 * nf


def test_two_dimensional_solve():
    g = S.GridSpec(2, 32, 8.0)
    spec = KernelSpec(0.6, 2.0, 2, theta=2.0)
    traj = S.solve_picard(spec, g, S.gaussian(g, 1e-2, 1.0), S.SolverConfig(T=0.3, steps=8))
    assert traj.metadata["converged"] and traj.fields[-1].values.shape == (32, 32)


def test_trajectory_export_roundtrip(tmp_path):
    u0 = S.gaussian(GRID, 1e-2, 1.0)
    traj = S.solve_picard(SPEC, GRID, u0, S.SolverConfig(T=0.5, steps=4))
    b, j = S.write_trajectory(traj, tmp_path)
    assert b.stat().st_size == 5 * 64 * 16
    back = S.read_trajectory(j)
    assert back.times == traj.times and back.picard_history == traj.picard_history
    assert all(np.array_equal(x.values, y.values) for x, y in zip(back.fields, traj.fields))

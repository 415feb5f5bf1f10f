from __future__ import annotations

import math

import numpy as np
import pytest

from fracschrod import estimates as E
from fracschrod.errors import ValidityError
from fracschrod.kernels import KernelSpec

INF = math.inf
SPEC = KernelSpec(0.5, 2.0, 1, theta=2.0)


def test_triplet_validation():
    with pytest.raises(ValueError):
        E.Triplet(1.0, 2.0, 2.0)
    with pytest.raises(ValueError):
        E.Triplet(2.0, 0.5, 2.0)
    E.Triplet(INF, INF, 1.0)


def test_from_relation_hand_member():
    t = E.Triplet.from_relation(SPEC, 4.0, 2.0)
    assert t.q == pytest.approx(16.0)
    m = E.is_admissible(SPEC, E.Triplet(16.0, 4.0, 2.0))
    assert m and m.residual < 1e-15


def test_relation_violation_rejected():
    m = E.is_admissible(SPEC, E.Triplet(10.0, 4.0, 2.0))
    assert not m and m.case is None and m.residual > 1e-3


def test_admissible_cases():
    # alpha n > beta: n=2, alpha=0.8, beta=1 -> alpha n = 1.6 > 1, n/beta = 2
    spec = KernelSpec(0.8, 1.0, 2)
    assert E.is_admissible(spec, E.Triplet.from_relation(spec, 2.0, 1.5)).case == 1
    assert E.is_admissible(spec, E.Triplet.from_relation(spec, 3.0, 2.0)).case == 2   # closed at n/beta
    # alpha n < beta
    assert E.is_admissible(SPEC, E.Triplet.from_relation(SPEC, 1.0, 0.4 + 0.6)).case == 4
    spec3 = KernelSpec(0.3, 1.0, 2)
    assert E.is_admissible(spec3, E.Triplet.from_relation(spec3, 1.5, 1.2)).case == 3
    # Sobolev bound violated in case 3
    assert not E.is_admissible(spec3, E.Triplet.from_relation(spec3, 7.0, 1.2))


def test_generalized_family_and_inclusion():
    rng = np.random.default_rng(11)
    for spec in (SPEC, KernelSpec(0.7, 3.0, 2), KernelSpec(0.8, 1.0, 2)):
        for t in E.random_triplets(spec, 300, rng):
            if E.is_admissible(spec, t) and t.p < INF:
                assert E.is_generalized_admissible(spec, t)


def test_inclusion_gap_at_alpha_n_equal_beta():
    spec = KernelSpec(0.5, 1.0, 2)      # alpha n = beta
    t = E.Triplet.from_relation(spec, 3.0, 2.0)
    assert E.is_admissible(spec, t)
    assert not E.is_generalized_admissible(spec, t)


def test_smoothing_exponent_cases():
    assert E.smoothing_exponent(KernelSpec(0.5, 3.0, 2), 1.0, 4.0)[1] == 1
    assert E.smoothing_exponent(KernelSpec(0.5, 2.0, 2), 1.0, 4.0)[1] == 2
    assert E.smoothing_exponent(KernelSpec(0.5, 1.0, 2), 1.5, 4.0)[1] == 3
    assert E.smoothing_exponent(KernelSpec(0.5, 1.0, 2), 2.0, 4.0)[1] == 4
    e, case = E.smoothing_exponent(KernelSpec(0.5, 1.0, 2), 3.0, INF)
    assert case == 5 and e == pytest.approx(-0.5 * 2 / 1.0 / 3.0)
    with pytest.raises(ValidityError, match="rn/"):
        E.smoothing_exponent(KernelSpec(0.5, 1.0, 2), 1.5, 10.0)
    with pytest.raises(ValidityError):
        E.smoothing_exponent(KernelSpec(0.5, 2.0, 2), 1.0, INF)
    with pytest.raises(ValidityError):
        E.smoothing_exponent(SPEC, 3.0, 2.0)


def test_predicted_exponents():
    assert E.predicted_exponent(SPEC, 1.0) == 0.0
    assert E.predicted_exponent(SPEC, INF) == pytest.approx(-0.25)
    assert E.predicted_exponent(SPEC, 2.0, "P") == pytest.approx(-0.5 - 0.125)


def test_s_range_validation():
    with pytest.raises(ValidityError):
        E.ls_norm_s(KernelSpec(0.5, 1.0, 2), 1.0, 2.0)
    with pytest.raises(ValidityError):
        E.ls_norm_s(KernelSpec(0.5, 2.0, 2), 1.0, INF)
    with pytest.raises(ValidityError):
        E.ls_norm_p(KernelSpec(0.5, 0.8, 2), 1.0, 6.0)


def test_l1_norm_of_heat_like_kernel_scale_free():
    # ||S(t)||_{L^1} is independent of t
    a = E.ls_norm_s(SPEC, 0.5, 1.0, "loggrid")
    b = E.ls_norm_s(SPEC, 3.0, 1.0, "loggrid")
    assert a == pytest.approx(b, rel=1e-8)


def test_adaptive_and_loggrid_agree():
    a = E.ls_norm_s(SPEC, 1.0, 2.0, "adaptive")
    b = E.ls_norm_s(SPEC, 1.0, 2.0, "loggrid")
    assert a == pytest.approx(b, rel=1e-6)


def test_l2_norm_matches_plancherel():
    # ||S(t)||_2^2 = (1/2pi) int |E_alpha(-i xi^2 t^alpha)|^2 dxi
    from scipy import integrate
    from fracschrod.special import mittag_leffler

    val = integrate.quad(lambda x: abs(mittag_leffler(-1j * x * x, 0.5)) ** 2, 0, np.inf, limit=400)[0] / math.pi
    assert E.ls_norm_s(SPEC, 1.0, 2.0, "loggrid") == pytest.approx(math.sqrt(val), rel=1e-6)


def test_decay_fit_validation_and_slope():
    t = np.geomspace(0.5, 8, 5)
    assert E.decay_fit(t, 3 * t**-0.4) == pytest.approx(-0.4)
    with pytest.raises(ValidityError):
        E.decay_fit([1, 2, 3], [1, 1, 1])
    with pytest.raises(ValidityError):
        E.decay_fit([1, 2, 3, 4], [1, 1, 1, 1])
    with pytest.raises(ValidityError):
        E.decay_study(SPEC, 2.0, [1.0], "S")


def test_decay_study_report_rows():
    rep = E.decay_study(SPEC, 2.0, np.geomspace(0.25, 4.0, 4), "S")
    assert rep.margin < 0.05
    rows = rep.rows()
    assert len(rows) == 4 and set(rows[0]) == {"s", "t", "measured", "predicted_exponent", "fitted_exponent", "margin"}


def test_weak_norm_requires_beta_below_n():
    with pytest.raises(ValidityError):
        E.weak_ls_norm(SPEC, 1.0)


def test_space_time_norms_toy():
    class G:
        cell_volume = 0.5

    class F:
        def __init__(self, v):
            self.values = np.asarray(v, dtype=complex)

    class T:
        grid = G()
        times = (0.0, 1.0, 2.0)
        fields = [F([1, 1]), F([2, 0]), F([0, 0])]

    n = E.space_time_norms(T(), E.Triplet(2.0, 2.0, 2.0))
    assert n.sup_r_norm == pytest.approx(math.sqrt(2.0))
    # ||u(t)||_2 = 1, sqrt 2, 0 -> trapezoid of squares = 0.5*(1+2) + 0.5*(2+0) = 2.5
    assert n.LqLp_norm == pytest.approx(math.sqrt(2.5))
    with pytest.raises(ValueError):
        T.times = (0.0, 1.0)
        E.space_time_norms(T(), E.Triplet(2.0, 2.0, 2.0))


def test_critical_index_and_nonhomogeneous_exponent():
    assert E.critical_index(SPEC) == pytest.approx(1.0)
    e, g = E.nonhomogeneous_exponent(SPEC, 2.0, 8.0)
    assert e == pytest.approx(0.5 - 0.5 * 2 / (2 * 2))
    assert g == pytest.approx((8 - 6) / (6 * 3))
    with pytest.raises(ValidityError):
        E.nonhomogeneous_exponent(KernelSpec(0.5, 1.0, 2, theta=2.0), 2.0)


def test_estimate_params_chi():
    p = E.estimate_params(SPEC, E.Triplet(6.0, 4.0, 2.0))
    assert p.chi == pytest.approx(1 / (1 - 3 / 6))
    assert E.estimate_params(SPEC, E.Triplet(2.0, 4.0, 2.0)).chi is None


def test_existence_time_examples():
    assert E.existence_time(SPEC, 2.0, 4.0) == pytest.approx(4.0**-0.125)
    assert E.existence_time(SPEC, 1.0, 3.0) == E.existence_time(SPEC, 1.0, 30.0)
    assert E.existence_time(SPEC, 1.0, 1e-3) == INF
    info = E.existence_time_info(SPEC, 1.0, 1e-3)
    assert info.global_branch
    with pytest.raises(ValidityError):
        E.existence_time(SPEC, 0.5, 1.0)
    with pytest.raises(ValueError):
        E.existence_time(SPEC, 2.0, 0.0)

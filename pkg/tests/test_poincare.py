import math

import mpmath as mp
import pytest

from maass_poincare import arith, bases
from maass_poincare import poincare as pc
from maass_poincare.poincare import TruncationPolicy, Weight

FIXED = TruncationPolicy(c_max=256, c_start=256, tol=1e-30)


def test_weight_and_policy_validation():
    assert Weight.of(1.5) == Weight(3)
    assert Weight(3).lam == 1
    with pytest.raises(ValueError):
        Weight.of(0.3)
    with pytest.raises(ValueError):
        Weight(2).lam
    with pytest.raises(ValueError):
        TruncationPolicy(stability_factor=1)
    with pytest.raises(ValueError):
        TruncationPolicy(tol=0, rtol=0)


def test_input_validation():
    with pytest.raises(ValueError):
        pc.coefficient_table(1, Weight(1), 2, [1], 0.9)
    with pytest.raises(ValueError):
        pc.coefficient_table(1, Weight(0), 1, [1], 0.5)
    with pytest.raises(pc.PlusSpaceViolation):
        pc.coefficient_table(1, Weight(3), 4, [4], 0.9, plus=True)
    with pytest.raises(pc.PlusSpaceViolation):
        pc.coefficient_table(0, Weight(2), 4, [4], 0.9, plus=True)


def test_zero_zero_coefficient_matches_zeta_ratio():
    # K_0(0, 0, c) = phi(c), and sum phi(c) c^{-2s} = zeta(2s-1)/zeta(2s)
    s = 2.0
    v = pc.coefficient_table(0, Weight(0), 1, [0], s, TruncationPolicy(tol=1e-6, c_max=8192))[0]
    ref = 0.5 * math.gamma(2 * s) * 2 ** (1 - 2 * s) * float(mp.zeta(2 * s - 1) / mp.zeta(2 * s))
    assert v.converged
    assert abs(v.value - ref) <= 2 * v.error_estimate + 1e-12


def test_eisenstein_weight_four_ratios():
    table = pc.coefficient_table(0, Weight(8), 1, range(1, 13), 2.0, TruncationPolicy(tol=1e-10, rtol=1e-9))
    c1 = table[1].value
    for n in range(1, 13):
        assert abs(table[n].value / c1 * n**3 - arith.divisor_sigma(n, 3)) < 1e-6 * arith.divisor_sigma(n, 3)


def test_eisenstein_weight_four_expansion_is_E4():
    exp = pc.expansion_special(0, Weight(8), 1, 8, TruncationPolicy(tol=1e-9))
    e4 = bases.e4_oracle(8)
    for n in range(0, 9):
        assert abs(exp.hol.get(n, 0) - float(e4[n])) < 1e-6


def test_weight_four_cusp_poincare_series_vanishes():
    # there are no cusp forms of weight 4 on SL2(Z), so P_1 is identically zero
    exp = pc.expansion_special(1, Weight(8), 1, 6, TruncationPolicy(tol=1e-10))
    for n in range(1, 7):
        assert abs(exp.hol.get(n, 0)) <= exp.errors.get(n, 0.0) + 1e-12


def test_weight_twelve_cusp_poincare_series_is_delta():
    exp = pc.expansion_special(1, Weight(24), 1, 6, TruncationPolicy(tol=1e-12, rtol=1e-12))
    tau = {1: 1, 2: -24, 3: 252, 4: -1472, 5: 4830, 6: -6048}
    c1 = exp.hol[1]
    for n, t in tau.items():
        assert abs(exp.hol[n] / c1 - t) < 1e-6 * abs(t)


def test_weight_zero_symmetry():
    a = pc.coefficient_table(2, Weight(0), 1, [3, -5], 1.3, FIXED)
    b = pc.coefficient_table(3, Weight(0), 1, [2], 1.3, FIXED)
    c = pc.coefficient_table(-5, Weight(0), 1, [2], 1.3, FIXED)
    assert abs(a[3].value - b[2].value) < 1e-12
    assert abs(a[-5].value - c[2].value) < 1e-12


@pytest.mark.parametrize("m,n", [(3, 4), (3, 8), (4, -4), (-1, 3), (0, 7)])
def test_three_halves_symmetric_in_indices(m, n):
    a = pc.coefficient_table(m, Weight(3), 4, [n], 0.9, FIXED, plus=True)[n].value
    b = pc.coefficient_table(n, Weight(3), 4, [m], 0.9, FIXED, plus=True)[m].value
    assert abs(a - b) < 1e-10 * max(1, abs(a))


def _symmetry_factor(D, d):
    if D * d:
        return -abs(D * d) ** -0.5
    if D != d:
        return -2 * math.sqrt(math.pi) * abs(D - d) ** -0.5
    return -4 * math.pi


@pytest.mark.parametrize("s", [0.8, 0.9, 1.1])
@pytest.mark.parametrize("D,d", [(-4, -3), (3, -4), (-1, 5), (0, -3), (-4, 0), (3, 0), (0, 0)])
def test_symmetry_between_weights(D, d, s):
    # b_{D,3/2}(-d, s) = b_{-D,1/2}(d, s) times a factor depending on D d
    a = pc.coefficient_table(D, Weight(3), 4, [-d], s, FIXED, plus=True)[-d].value
    b = pc.coefficient_table(-D, Weight(1), 4, [d], s, FIXED, plus=True)[d].value
    assert abs(a - b * _symmetry_factor(D, d)) < 1e-10 * max(1e-3, abs(a))


def test_symmetry_with_adaptive_truncation():
    pol = TruncationPolicy(tol=1e-12, rtol=1e-6, c_max=2048)
    for D, d in [(-4, -3), (-4, 0)]:
        a = pc.coefficient_table(D, Weight(3), 4, [-d], 0.85, pol, plus=True)[-d]
        b = pc.coefficient_table(-D, Weight(1), 4, [d], 0.85, pol, plus=True)[d]
        assert abs(a.value - b.value * _symmetry_factor(D, d)) < 1e-6 * abs(a.value)


def _fixed_cut(C, ns):
    pol = TruncationPolicy(c_max=C, c_start=C, tol=1e-30)
    return pc.coefficient_table(0, Weight(3), 4, ns, 0.75, pol, plus=True)


def test_doubling_stays_within_estimate():
    ns = [3, 4, 7]
    vals = {C: _fixed_cut(C, ns) for C in (512, 1024, 2048, 4096)}
    for C in (512, 1024, 2048):
        for n in ns:
            assert abs(vals[2 * C][n].value - vals[C][n].value) <= vals[C][n].error_estimate


def test_doubling_shrinks_the_change():
    # the Hurwitz query: the change under doubling is required to shrink by 1.2
    vals = {C: _fixed_cut(C, [3])[3].value for C in (1024, 2048, 4096)}
    d1 = abs(vals[2048] - vals[1024])
    d2 = abs(vals[4096] - vals[2048])
    assert d2 * 1.2 <= d1


def test_pole_guard_and_residues():
    with pytest.raises(pc.PoleAtS):
        pc.coefficient_table(0, Weight(1), 4, [4], 0.75, plus=True)
    with pytest.raises(pc.PoleAtS):
        pc.coefficient_table(-1, Weight(3), 4, [-4], 0.75, plus=True)
    with pytest.raises(pc.PoleAtS):
        pc.coeff_b_plus_ds_table(-1, [0], FIXED)
    # not a pole away from s = 3/4
    pc.coefficient_table(0, Weight(1), 4, [4], 0.8, FIXED, plus=True)
    assert pc.residue_b_half(0, 0) == pytest.approx(3 / (16 * math.pi))
    assert pc.residue_b_half(0, 4) == pytest.approx(3 / math.pi)
    assert pc.residue_b_half(-9, 0) == pytest.approx(9 / (2 * math.pi))
    assert pc.residue_b_half(-1, 1) == pytest.approx(12 / math.pi)
    with pytest.raises(pc.NotAPolePair):
        pc.residue_b_half(-3, 1)


def test_derivative_stencil_on_closed_form():
    N = 4
    f = lambda s: math.gamma(2 * s) * (2 * N) ** (1 - 2 * s)
    want = float(mp.diff(lambda s: mp.gamma(2 * s) * (2 * N) ** (1 - 2 * s), 0.75))
    got = sum(w * f(s) for s, w in pc.derivative_stencil(0.75, 1e-3))
    assert abs(got - want) < 1e-9 * abs(want)
    with pytest.raises(pc.StepTooSmall):
        pc.derivative_stencil(0.75, 1e-8)


def test_derivative_matches_difference_of_coefficients():
    h = 1e-3
    d = pc.coeff_b_plus_ds_table(3, [4], FIXED, step=h)[4].value
    vals = {s: pc.coefficient_table(3, Weight(3), 4, [4], s, FIXED, plus=True)[4].value for s, _ in pc.derivative_stencil(0.75, h)}
    combo = sum(w * vals[s] for s, w in pc.derivative_stencil(0.75, h))
    assert abs(d - combo) < 1e-9 * abs(d)


def test_derivative_only_at_three_quarters():
    q = pc.CoefficientQuery(3, Weight(3), 4, 4, 0.8)
    with pytest.raises(pc.UnsupportedWeightRange):
        pc.coeff_b_plus_ds(q)


def test_converged_means_within_tolerance():
    pol = TruncationPolicy(tol=1e-4, c_max=4096)
    for n, v in pc.coefficient_table(-3, Weight(1), 4, [1, 4, 5, 8], 0.75, pol, plus=True).items():
        assert v.converged == (v.error_estimate <= pol.tol)


def test_strict_policy_raises():
    pol = TruncationPolicy(tol=1e-12, c_max=64, strict=True)
    with pytest.raises(pc.NotConverged):
        pc.coefficient_table(-3, Weight(1), 4, [1], 0.75, pol, plus=True)


def test_results_identical_across_thread_counts():
    pol = TruncationPolicy(tol=1e-3, c_max=1024)
    targets = [pc.SeriesTarget(m, 3, 4, True, n, ((0.75, 1.0),)) for m in (-1, -4, -5) for n in (4, 7, 8)]
    pc.clear_memo()
    one = pc.sum_series(targets, pol, threads=1)
    pc.clear_memo()
    many = pc.sum_series(targets, pol, threads=3)
    assert [v.value for v in one] == [v.value for v in many]
    assert [v.c_used for v in one] == [v.c_used for v in many]


def test_memo_returns_same_values():
    pol = TruncationPolicy(tol=1e-3, c_max=512)
    a = pc.coefficient_table(-4, Weight(3), 4, [3, 4], 0.75, pol, plus=True)
    b = pc.coefficient_table(-4, Weight(3), 4, [3, 4], 0.75, pol, plus=True)
    assert a == b


def test_theta_automorphy():
    theta = pc.HarmonicExpansion(Weight(1), 4, n_max=3600)
    for m in range(61):
        theta.add_hol(m * m, 1.0 if m == 0 else 2.0)
    z = 0.13 + 0.9j
    for g in (((1, 0), (4, 1)), ((1, 1), (0, 1)), ((-3, 1), (-4, 1)), ((5, 2), (12, 5))):
        assert pc.modularity_residual(lambda w: theta(w, y_min=0.005), g, z, Weight(1)) < 1e-12


def test_modularity_rejects_bad_matrix():
    with pytest.raises(ValueError):
        pc.modularity_residual(lambda w: 0, ((1, 1), (1, 1)), 1j, Weight(1))


def test_evaluate_respects_y_min():
    exp = bases.eisenstein_F0(20)
    with pytest.raises(ValueError):
        exp(0.1 + 0.05j)
    with pytest.raises(pc.TailTooLarge):
        exp(0.1 + 0.2j, tail_tol=1e-12)


def test_negative_weight_expansion_modular():
    # weight -2 Maass-Poincare series at s = 1 - k/2 = 2 on SL2(Z)
    exp = pc.expansion_special(-1, Weight(-4), 1, 40, TruncationPolicy(tol=1e-10, c_max=8192))
    z = 0.1 + 1.05j
    for g in (((0, -1), (1, 0)), ((1, 1), (0, 1))):
        assert pc.modularity_residual(lambda w: exp(w, y_min=0.3), g, z, Weight(-4)) < 1e-6


def test_raw_evaluation_matches_expansion_at_harmonic_point():
    pol = TruncationPolicy(tol=1e-10, c_max=8192)
    exp = pc.expansion_special(-1, Weight(-4), 1, 30, pol)
    z = 0.2 + 1.2j
    assert abs(pc.evaluate_raw(-1, Weight(-4), 1, 2.0, z, 30, pol) - exp(z)) < 1e-8


def test_shadow_of_eisenstein_is_theta_multiple():
    sh = pc.shadow(bases.eisenstein_F0(16))
    theta = bases.theta_series(16)
    for n in range(0, 17):
        assert abs(sh.get(n, 0) - 3 / (4 * math.pi) * float(theta[n])) < 1e-12

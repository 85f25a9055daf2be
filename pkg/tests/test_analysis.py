import math

import pytest

from qstab.analysis import (
    AnalysisPoint,
    CurveConfig,
    alpha,
    alpha_approx,
    break_even,
    choose_r,
    curve,
    curve_csv,
    p1,
    p2,
    step_failure,
    steps_supported,
)

# frozen oracle values, computed with exact rational tail sums
STEANE_ALPHA_1E4 = 0.002307438917575461          # n=7, gamma=1e-4, eps=gamma/70
STEANE_P1_R3 = 1.5985108512887735e-05
STEANE_P2_R3 = 4.971158859075608e-05             # q = gamma + 7 eps, N = 91
GOLAY_ALPHA_1E5 = 0.000758715481264703


def test_alpha_zero_and_one():
    assert alpha(7, 0.0, 0.0) == 0.0
    assert alpha(7, 1.0, 0.0) == 1.0


def test_alpha_exact_and_approx_agree_at_small_gamma():
    g = 1e-4
    a = alpha(7, g, g / 70)
    assert abs(a - STEANE_ALPHA_1E4) / STEANE_ALPHA_1E4 < 1e-10
    approx = alpha_approx(7, g, g / 70)
    assert abs(approx - 0.00231) < 1e-12
    assert abs(a - approx) / approx < 2e-3


def test_alpha_exact_below_approx_on_grid():
    for n in (5, 7, 23, 50):
        for g in (1e-5, 1e-3, 0.05, 0.1):
            for eps in (0.0, g / (10 * n), g):
                assert alpha(n, g, eps) <= alpha_approx(n, g, eps) + 1e-12


def test_p1_base_cases():
    assert p1(3, 0.0) == 0.0
    assert p1(1, 0.37) == 0.37
    a = STEANE_ALPHA_1E4
    assert abs(p1(3, a) - (3 * a**2 + a**3)) < 1e-18
    assert abs(p1(3, a) - STEANE_P1_R3) < 1e-18


def test_p1_rejects_even_r():
    with pytest.raises(ValueError):
        p1(4, 0.1)


def test_p1_exact_tail_below_literal():
    for a in (1e-4, 1e-2, 0.3, 0.5):
        for r in (3, 7, 15):
            assert p1(r, a, exact=True) <= p1(r, a) + 1e-15


def test_p2_values():
    assert p2(7, 1, 3, 1, 0.0) == 0.0
    q = 1e-4 + 7 * (1e-4 / 70)
    assert abs(p2(7, 1, 3, 1, q) - STEANE_P2_R3) / STEANE_P2_R3 < 1e-12
    # leading term sanity: C(91, 2) q^2
    lead = math.comb(91, 2) * q**2
    assert lead < p2(7, 1, 3, 1, q) < 1.01 * lead


def test_p2_empty_sum():
    assert p2(2, 40, 3, 1, 0.5) == 0.0


def test_p2_monotonicity():
    base = p2(7, 1, 3, 1, 1e-4)
    assert p2(7, 1, 3, 1, 2e-4) > base
    assert p2(7, 1, 5, 1, 1e-4) > base
    assert p2(9, 1, 3, 1, 1e-4) > base
    assert p2(7, 1, 3, 3, 1e-4) > base
    assert p2(7, 2, 3, 1, 1e-4) < base


def test_choose_r_zero_alpha():
    r, flagged = choose_r(7, 1, 1, 0.0, 0.0)
    assert (r, flagged) == (3, False)


def test_choose_r_golay_anchor():
    # at gamma = 1e-5: r=3 and r=5 have P1 > P2, r=7 crosses
    a = alpha(23, 1e-5, 1e-5 / 230)
    assert abs(a - GOLAY_ALPHA_1E5) / GOLAY_ALPHA_1E5 < 1e-10
    q = 1e-5 + 23 * (1e-5 / 230)
    assert p1(3, a) > p2(23, 3, 3, 1, q)
    assert p1(5, a) > p2(23, 3, 5, 1, q)
    assert p1(7, a) < p2(23, 3, 7, 1, q)
    r, flagged = choose_r(23, 3, 1, 1e-5, 1e-5 / 230)
    assert (r, flagged) == (7, False)


def test_choose_r_monotone_in_gamma():
    prev = 3
    for g in (1e-2, 3e-3, 1e-3, 3e-4, 1e-4, 3e-5, 1e-5, 3e-6, 1e-6):
        r, flagged = choose_r(23, 3, 1, g, g / 230)
        if flagged:
            continue  # saturated regime: r pegged at r_max
        assert r >= prev
        prev = r


def test_choose_r_flag_means_p1_dominates():
    r, flagged = choose_r(5, 1, 1, 0.3, 0.03, r_max=5)
    if flagged:
        a = alpha(5, 0.3, 0.03)
        assert p1(r, a) >= p2(5, 1, r, 1, min(0.3 + 5 * 0.03, 1.0))


def test_curve_monotone_and_r_range():
    cfg = CurveConfig(n=7, t=1, gamma_min=1e-6, gamma_max=1e-2, points=40)
    pts = curve(cfg)
    assert all(3 <= pt.r <= 15 and pt.r % 2 == 1 for pt in pts)
    for a, b in zip(pts, pts[1:]):
        assert b.p >= a.p - 1e-15
    for pt in pts:
        assert pt.p == min(4 * (pt.p1 + pt.p2), 1.0)


def test_curve_steane_anchor_magnitude():
    cfg = CurveConfig(n=7, t=1, gamma_min=1e-4, gamma_max=1e-4, points=1)
    pt = curve(cfg)[0]
    assert pt.r == 3
    assert 1e-4 <= pt.p <= 1e-3
    assert abs(pt.p - 4 * (STEANE_P1_R3 + STEANE_P2_R3)) / pt.p < 1e-9


def test_break_even_steane_band():
    cfg = CurveConfig(n=7, t=1, gamma_min=1e-6, gamma_max=1e-2, points=60)
    g_star = break_even(cfg)
    assert g_star is not None
    assert 3e-5 <= g_star <= 3e-4


def test_break_even_none_when_no_crossing():
    cfg = CurveConfig(n=7, t=1, gamma_min=5e-3, gamma_max=1e-2, points=10)
    assert break_even(cfg) is None


def test_slope_below_break_even():
    from qstab.stats import loglog_slope

    cfg = CurveConfig(n=7, t=1, gamma_min=2e-6, gamma_max=8e-6, points=8)
    pts = curve(cfg)
    rs = {pt.r for pt in pts}
    assert len(rs) == 1, "pick a kink-free window"
    slope = loglog_slope([pt.gamma for pt in pts], [pt.p for pt in pts])
    assert abs(slope - 2.0) < 0.2


def test_golay_reaches_deep_suppression():
    cfg = CurveConfig(n=23, t=3, gamma_min=1e-6, gamma_max=1e-2, points=40)
    pts = curve(cfg)
    assert any(pt.p <= 1e-9 and pt.gamma >= 1e-6 for pt in pts)


def test_steps_supported():
    assert steps_supported(1e-12) == 10**12
    assert steps_supported(1.0) == 1
    assert steps_supported(0.5) == 2
    assert steps_supported(0.0) is None


def test_curve_csv_format():
    cfg = CurveConfig(n=7, t=1, gamma_min=1e-5, gamma_max=1e-4, points=3)
    text = curve_csv(curve(cfg), "steane7")
    lines = text.strip().splitlines()
    assert lines[0] == "code,gamma,epsilon,r,alpha,p1,p2,p"
    assert len(lines) == 4
    assert all(line.startswith("steane7,") for line in lines[1:])


def test_analysis_point_validates():
    with pytest.raises(ValueError):
        AnalysisPoint(0.1, 0.01, 3, 0.5, 0.2, 0.1, 1.5)

"""Acceptance gate: one test per criterion, each printing a pass/fail line."""
import math
import time

import numpy as np

from wavedelay.characteristics import envelope_constant, extend_trace, init_trace, simulate, decay_fit
from wavedelay.companion import propagate_switched, switched_system
from wavedelay.model import DelaySchedule, StringConfig, sine_state
from wavedelay.oracle import FDGrid, compare_traces, fd_simulate, weak_residual_run
from wavedelay.spectral import (
    build_char_poly,
    explicit_quintic,
    find_roots,
    stability_margin,
    stability_report,
)

SQ = math.sqrt(467857)
F0_CLOSED = (-519801 - 761 * SQ) / 303170688


def rel(a, b):
    return abs(a - b) / abs(b)


def test_criterion_1_f0_reproduction(criterion):
    start = time.perf_counter()
    fac = explicit_quintic(1 / 36)
    f_err = rel(fac.f, F0_CLOSED)

    roots = find_roots(build_char_poly(2, fac.f)).roots
    a = 1 / 36
    im = math.sqrt(fac.R - a * a)
    pair = [complex(a, im), complex(a, -im)]
    pair_err = max(float(np.min(np.abs(roots - z))) for z in pair)

    # cubic factor from the root finder: the three roots away from the pair
    rest = [z for z in roots if min(abs(z - p) for p in pair) > 1e-6]
    from_roots = np.real(np.poly(rest))[1:]
    expect = np.array([19 / 18, (723 - SQ) / 24624, -(3244 + 5 * SQ) / 110808])
    from_formula = np.array([fac.b, fac.c, fac.d])
    coef_err = max(float(np.max(np.abs(from_formula - expect) / np.abs(expect))),
                   float(np.max(np.abs(from_roots - expect) / np.abs(expect))))
    elapsed = time.perf_counter() - start

    ok = f_err <= 1e-12 and pair_err <= 1e-10 and coef_err <= 1e-12 and len(rest) == 3 and elapsed < 1
    criterion(1, ok, f"f rel err {f_err:.2e}, pair err {pair_err:.2e}, "
                     f"cubic coeff rel err {coef_err:.2e}, {elapsed:.3f}s")
    assert ok


def test_criterion_2_norm_certificates(criterion):
    start = time.perf_counter()
    sys_ = switched_system(F0_CLOSED)
    elapsed = time.perf_counter() - start
    ok = sys_.norm_D2 <= 0.994 and sys_.norm_H1 <= 0.997 and sys_.L0 < 1 and elapsed < 1
    criterion(2, ok, f"|D2|_1 = {sys_.norm_D2:.6f}, |H1|_1 = {sys_.norm_H1:.6f}, "
                     f"L0 = {sys_.L0:.6f}, {elapsed:.3f}s")
    assert ok


def test_criterion_3_stability_margins(criterion):
    start = time.perf_counter()
    d1 = stability_margin(1)
    d2 = stability_margin(2)
    rng = np.random.default_rng(0)
    stable = True
    for j, lo in ((1, 1 - math.sqrt(2)), (2, -81 / 2500)):
        fs = rng.uniform(lo, 0, 50)
        fs = fs[(fs > lo) & (fs < 0)]
        stable &= len(fs) == 50 and all(
            stability_report(find_roots(build_char_poly(j, f))).schur_stable for f in fs)
    unstable = not stability_report(find_roots(build_char_poly(1, -0.5))).schur_stable
    elapsed = time.perf_counter() - start
    ok = (abs(d1 - (math.sqrt(2) - 1)) <= 1e-6 and d2 >= 81 / 2500 and stable and unstable
          and elapsed < 5)
    criterion(3, ok, f"margin(1) = {d1:.10f} (sqrt2-1 = {math.sqrt(2) - 1:.10f}), "
                     f"margin(2) = {d2:.6f} >= 0.0324, samples stable {stable}, "
                     f"f=-0.5 unstable {unstable}, {elapsed:.2f}s")
    assert ok


def test_criterion_4_switched_product_bound(criterion):
    start = time.perf_counter()
    sys_ = switched_system(F0_CLOSED)
    rng = np.random.default_rng(2024)
    envelope = 5 * sys_.L0 ** np.arange(201)
    worst = 0.0
    for _ in range(1000):
        tr = propagate_switched(sys_, rng.choice(["4L", "8L"], size=200))
        worst = max(worst, float(np.max(tr.norms / envelope)))
    elapsed = time.perf_counter() - start
    ok = worst <= 1 + 1e-12 and elapsed < 10
    criterion(4, ok, f"max |gamma_j|_1 / (5 L0^j) = {worst:.6f} over 1000 sequences, {elapsed:.2f}s")
    assert ok


def test_criterion_5_switching_energy_decay(criterion):
    start = time.perf_counter()
    cfg = StringConfig(1.0, 1.0, F0_CLOSED, 2)
    L0 = switched_system(F0_CLOSED).L0
    periods = 200
    t_end = periods * cfg.period
    Cs, ratios = [], []
    for seed in range(10):
        sched = DelaySchedule.random_switching(cfg, t_end, 3 * cfg.period, seed=seed)
        run = simulate(cfg, sched, sine_state(cfg.L), 512, t_end)
        E1 = run.energy_trace(periods).E1
        Cs.append(envelope_constant(E1, L0))
        ratios.append(E1[-1] / E1[0])
    elapsed = time.perf_counter() - start
    C = max(Cs)
    worst = max(ratios)
    finite = bool(np.isfinite(C))
    decayed = worst <= 1e-3
    ok = finite and decayed and elapsed < 30
    criterion(5, ok, f"max C = {C:.4f} (finite {finite}), max E1(200h)/E1(0) = {worst:.4e} "
                     f"(needs <= 1e-3), {elapsed:.2f}s")
    assert finite, "envelope constant is not finite"
    assert decayed, f"E1 at the horizon is {worst:.3e} of E1(0), above 1e-3"
    assert elapsed < 30


def test_criterion_6_constant_delay_decay(criterion):
    start = time.perf_counter()
    cfg = StringConfig(1.0, 1.0, -0.2, 1)
    M0 = stability_report(find_roots(build_char_poly(1, -0.2))).max_modulus
    run = simulate(cfg, DelaySchedule.constant(cfg), sine_state(cfg.L), 512, 60 * cfg.period)
    fit = decay_fit(run.energy_trace(60))
    err = rel(fit.per_period_factor, M0**2)
    elapsed = time.perf_counter() - start
    ok = err <= 0.05 and elapsed < 10
    criterion(6, ok, f"fitted factor {fit.per_period_factor:.5f} vs M0^2 = {M0 ** 2:.5f} "
                     f"(rel {err:.2%}), {elapsed:.2f}s")
    assert ok


def test_criterion_7_conservation_and_exactness(criterion):
    start = time.perf_counter()
    cfg = StringConfig(1.0, 1.0, 0.0, 1)
    sched = DelaySchedule.constant(cfg)
    run = simulate(cfg, sched, sine_state(cfg.L), 512, 100 * cfg.period)
    t = np.linspace(0, 100 * cfg.period, 2001)
    E = np.array([run.energy(s) for s in t])
    drift = float(np.max(np.abs(E - E[0])) / E[0])

    cfg_f = StringConfig(1.0, 1.0, -0.2, 1)
    sched_f = DelaySchedule.constant(cfg_f)
    coarse = init_trace(cfg_f, sine_state(1.0), 512)
    a = extend_trace(coarse, cfg_f, sched_f, 200.0)
    b = extend_trace(coarse.refined(2), cfg_f, sched_f, 200.0)
    exact = bool(np.array_equal(np.repeat(a.values, 2), b.values))
    elapsed = time.perf_counter() - start
    ok = drift <= 1e-12 and exact and elapsed < 5
    criterion(7, ok, f"energy drift {drift:.2e} over 100 periods, doubled-N cells identical {exact}, "
                     f"{elapsed:.2f}s")
    assert ok


def test_criterion_8_cross_solver_agreement(criterion):
    start = time.perf_counter()
    grid = FDGrid(2001, 0.999)
    details, ok = [], True
    cases = [
        ("f=0", StringConfig(1.0, 1.0, 0.0, 1), None),
        ("switching f0", StringConfig(1.0, 1.0, F0_CLOSED, 2), 7),
    ]
    t_end = 40.0
    for name, cfg, seed in cases:
        sched = (DelaySchedule.constant(cfg) if seed is None
                 else DelaySchedule.random_switching(cfg, t_end, 3 * cfg.period, seed=seed))
        ex = simulate(cfg, sched, sine_state(cfg.L), 512, t_end)
        fd = fd_simulate(cfg, sched, sine_state(cfg.L), grid, t_end)
        rep = compare_traces(ex, fd)
        good = rep.sup_v <= 1e-3 and rep.max_rel_energy <= 0.01
        ok &= good
        details.append(f"{name}: sup {rep.sup_v:.2e}, energy rel {rep.max_rel_energy:.2e}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60
    criterion(8, ok, "; ".join(details) + f", {elapsed:.2f}s")
    assert ok


def test_criterion_9_weak_form_residual(criterion):
    start = time.perf_counter()
    cfg = StringConfig(1.0, 1.0, F0_CLOSED, 2)
    sched = DelaySchedule.random_switching(cfg, 20.0, 3 * cfg.period, seed=1)
    run = simulate(cfg, sched, sine_state(cfg.L), 512, 20.0)
    t1 = 9.0
    rect = (t1, t1 + 50 / 256, 100 / 256, 150 / 256)
    base = weak_residual_run(run, rect, n_test=20, seed=0)
    fine = weak_residual_run(run, rect, n_test=20, seed=0, refine=2)
    elapsed = time.perf_counter() - start
    ok = (base.cells >= 10**4 and base.max_residual <= 1e-6
          and fine.max_residual < base.max_residual and elapsed < 30)
    criterion(9, ok, f"residual {base.max_residual:.2e} at {base.cells} cells, "
                     f"{fine.max_residual:.2e} at {fine.cells} cells, {elapsed:.2f}s")
    assert ok

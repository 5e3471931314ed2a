"""Acceptance gate: every top-level criterion at its stated tolerance.

Each test prints one PASS/FAIL line (run with `pytest -s` to see them all);
the statistical criteria run the full desk-scale protocols, so this module
takes several minutes.
"""

import math
import time

import numpy as np

import oracles
from prefbench.comparison import (
    ComparisonModel,
    ModelKind,
    d2log_density_du2,
    dlog_density_du,
    log_density,
    sample_outcomes,
)
from prefbench.graphs import GraphDesign, build_laplacian, design_counts
from prefbench.harness import SweepConfig, _replication_resources, cell_seed, run_arch_sweep, run_noise_sweep
from prefbench.margin import MarginCurve, MarginKind, fit_margin_exponent, margin_cdf, verify_gap_inequalities
from prefbench.network import MLPArchitecture, forward, init_params
from prefbench.rewards import RewardFamily, random_policy_regret, sample_states

BT = ComparisonModel(ModelKind.BT)
THURSTONIAN = ComparisonModel(ModelKind.THURSTONIAN)
ALL_MODELS = [
    BT,
    THURSTONIAN,
    ComparisonModel(ModelKind.RAO_KUPPER, tie_param=2.0),
    ComparisonModel(ModelKind.DAVIDSON, tie_param=1.0),
]

U_GRID = np.round(np.arange(-50, 51) * 0.1, 10)

DESK_SPLITS = (2**12, 2**11, 2**12)


def report(name: str, ok: bool, detail: str, started: float, budget_s: float):
    elapsed = time.perf_counter() - started
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail} [{elapsed:.1f}s < {budget_s:.0f}s]")
    assert ok, f"{name}: {detail}"
    assert elapsed < budget_s, f"{name} exceeded its runtime budget ({elapsed:.1f}s)"


def test_comparison_model_axiom_suite(capsys):
    started = time.perf_counter()
    worst = {"sym": 0.0, "norm": 0.0, "d1": 0.0, "d2": 0.0}
    monotone = concave = True
    for model in ALL_MODELS:
        total = np.zeros_like(U_GRID)
        for y in model.outcomes:
            y_vec = np.full(U_GRID.size, y)
            dens = np.exp(log_density(model, y_vec, U_GRID))
            mirror = np.exp(log_density(model, -y_vec, -U_GRID))
            total += dens
            worst["sym"] = max(worst["sym"], float(np.max(np.abs(dens - mirror))))
            curv = d2log_density_du2(model, y_vec, U_GRID)
            concave &= bool(np.all(curv < 0))
            for u in U_GRID:
                fd1 = oracles.central_diff(lambda x: log_density(model, y, x), float(u), 1e-5)
                an1 = dlog_density_du(model, y, float(u))
                worst["d1"] = max(worst["d1"], abs(an1 - fd1) - 1e-6 * abs(fd1))
                fd2 = oracles.central_second_diff(lambda x: log_density(model, y, x), float(u), 1e-3)
                an2 = d2log_density_du2(model, y, float(u))
                worst["d2"] = max(worst["d2"], abs(an2 - fd2) - 1e-4 * abs(fd2))
        worst["norm"] = max(worst["norm"], float(np.max(np.abs(total - 1.0))))
        losing = np.exp(log_density(model, np.full(U_GRID.size, -1), U_GRID))
        monotone &= bool(np.all(np.diff(losing) < 0))
    ok = (
        worst["sym"] <= 1e-12
        and worst["norm"] <= 1e-12
        and monotone
        and concave
        and worst["d1"] <= 1e-9
        and worst["d2"] <= 1e-9
    )
    with capsys.disabled():
        report(
            "comparison-model axiom suite", ok,
            f"sym {worst['sym']:.1e}, norm {worst['norm']:.1e}, monotone {monotone}, "
            f"log-concave {concave}, d1/d2 slack {worst['d1']:.1e}/{worst['d2']:.1e}",
            started, budget_s=5.0,
        )


def test_sampler_calibration(capsys):
    started = time.perf_counter()
    n = 10**5
    p_bt = oracles.logistic(1.0)  # 0.7310585786300049
    draws = sample_outcomes(BT, np.full(n, 1.0), np.random.default_rng(2024))
    err_bt = abs(float(np.mean(draws == 1)) - p_bt)
    p_th = oracles.normal_cdf(1.0)  # 0.8413447460685429
    draws = sample_outcomes(THURSTONIAN, np.full(n, 1.0), np.random.default_rng(2025))
    err_th = abs(float(np.mean(draws == 1)) - p_th)
    ok = err_bt <= oracles.three_sigma_binomial(p_bt, n) and err_th <= oracles.three_sigma_binomial(p_th, n)
    with capsys.disabled():
        report(
            "sampler calibration", ok,
            f"BT dev {err_bt:.2e} (3s {oracles.three_sigma_binomial(p_bt, n):.2e}), "
            f"probit dev {err_th:.2e} (3s {oracles.three_sigma_binomial(p_th, n):.2e})",
            started, budget_s=5.0,
        )


def test_gradient_correctness(capsys):
    from test_network import fd_gradient_max_rel_error

    from prefbench.data import generate_dataset
    from prefbench.rewards import GroundTruthReward

    started = time.perf_counter()
    worst = 0.0
    arch = MLPArchitecture.rectangular(3, 5, 2, 2)
    for seed in range(20):
        rng = np.random.default_rng(1000 + seed)
        gt = GroundTruthReward.sample(RewardFamily.SINUSOIDAL, 3, rng)
        batch = generate_dataset(gt, BT, 16, seed=seed).samples
        params = init_params(arch, rng)
        worst = max(worst, fd_gradient_max_rel_error(params, batch, BT))
    ok = worst <= 1e-4
    with capsys.disabled():
        report("gradient correctness", ok, f"max relative error {worst:.2e} over 20 nets",
               started, budget_s=10.0)


def test_identification_constraint(capsys):
    started = time.perf_counter()
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(10**3):
        arch = MLPArchitecture.rectangular(6, int(rng.integers(2, 32)), int(rng.integers(1, 4)), 2)
        params = init_params(arch, rng)
        out = forward(params, rng.normal(size=6))
        worst = max(worst, abs(float(out.sum())))
    ok = worst <= 1e-9
    with capsys.disabled():
        report("identification constraint", ok, f"max |sum_a r(s,a)| = {worst:.1e}",
               started, budget_s=1.0)


def test_spectral_checks(capsys):
    started = time.perf_counter()
    chain = np.zeros((4, 4), dtype=np.int64)
    for i in range(3):
        chain[i, i + 1] = chain[i + 1, i] = 1
    sparse_gap = build_laplacian(chain, 3).lambda2
    err_sparse = abs(sparse_gap - (2.0 - math.sqrt(2.0)) / 3.0)
    complete_gap = build_laplacian(design_counts(GraphDesign.COMPLETE, 4, 60), 60).lambda2
    err_complete = abs(complete_gap - 2.0 / 3.0)
    rng = np.random.default_rng(3)
    trace_err = 0.0
    for _ in range(100):
        m = int(rng.integers(2, 9))
        counts = rng.integers(0, 5, size=(m, m))
        counts = np.triu(counts, 1)
        counts = counts + counts.T
        if counts.sum() == 0:
            counts[0, 1] = counts[1, 0] = 1
        lam = build_laplacian(counts, int(counts.sum() // 2)).lambda_matrix
        trace_err = max(trace_err, abs(float(np.trace(lam)) - 2.0))
    ok = err_sparse <= 1e-10 and err_complete <= 1e-10 and trace_err <= 1e-12
    with capsys.disabled():
        report(
            "spectral checks", ok,
            f"chain gap err {err_sparse:.1e}, complete gap err {err_complete:.1e}, "
            f"trace err {trace_err:.1e}", started, budget_s=5.0,
        )


def test_desk_scale_learning(capsys):
    started = time.perf_counter()
    cfg = SweepConfig(
        noise_levels=(0.0,), replications=10, split_sizes=DESK_SPLITS, base_seed=0,
    )
    rows = run_noise_sweep(cfg, width=64, depth=4)
    trained = []
    baselines = []
    for row in rows:
        assert row.note == "", row.note
        trained.append(row.regret)
        gt, _, _, _, test = _replication_resources(
            cfg, row.replication, cell_seed(0, 64, 4, 0.0, row.replication)
        )
        baselines.append(random_policy_regret(gt, test.states))
    med_trained = float(np.median(trained))
    med_baseline = float(np.median(baselines))
    ok = med_trained < 0.5 * med_baseline
    with capsys.disabled():
        report(
            "desk-scale learning", ok,
            f"median trained regret {med_trained:.3f} vs 0.5 x random baseline "
            f"{0.5 * med_baseline:.3f}", started, budget_s=15 * 60,
        )


def test_noise_monotonicity(capsys):
    started = time.perf_counter()
    levels = (0.0, 0.2, 0.4, 0.6, 0.8)
    cfg = SweepConfig(
        noise_levels=levels, replications=10, split_sizes=DESK_SPLITS, base_seed=0,
    )
    rows = run_noise_sweep(cfg, width=64, depth=4)
    medians = []
    for m in levels:
        regrets = [r.regret for r in rows if r.noise_level == m]
        assert len(regrets) == 10
        medians.append(float(np.median(regrets)))
    # medians strictly increasing in m <=> Spearman rank correlation is 1
    spearman_one = all(a < b for a, b in zip(medians, medians[1:]))
    ok = spearman_one and medians[-1] > medians[0]
    with capsys.disabled():
        report(
            "noise monotonicity", ok,
            "medians " + " -> ".join(f"{v:.3f}" for v in medians)
            + f", Spearman {'1.0' if spearman_one else '<1'}",
            started, budget_s=45 * 60,
        )


def test_architecture_sweep_shape(capsys):
    started = time.perf_counter()
    cfg = SweepConfig(
        widths=(4, 16, 64, 256), depths=(3, 5, 7, 9), replications=5,
        split_sizes=DESK_SPLITS, base_seed=0,
    )
    rows = run_arch_sweep(cfg)
    medians = {}
    for width in cfg.widths:
        for depth in cfg.depths:
            cell = [r.regret for r in rows if (r.width, r.depth) == (width, depth)]
            assert len(cell) == 5
            medians[(width, depth)] = float(np.median(cell))
    best_cell = min(medians, key=medians.get)
    ok = medians[best_cell] <= 0.67 * medians[(4, 3)]
    with capsys.disabled():
        report(
            "architecture sweep shape", ok,
            f"best cell {best_cell} median {medians[best_cell]:.3f} vs 0.67 x (4,3) "
            f"median {0.67 * medians[(4, 3)]:.3f}", started, budget_s=60 * 60,
        )


def test_margin_exponent_recovery(capsys):
    started = time.perf_counter()
    # exact inversion of synthetic power-law curves
    grid = np.linspace(0.01, 0.2, 40)
    inv_err = 0.0
    for c, s in ((1.0, 1.0), (0.5, 2.0), (2.0, 0.7)):
        cdf = np.minimum(c * grid**s, 0.999)
        keep = c * grid**s < 0.999
        fit = fit_margin_exponent(MarginCurve(grid[keep], cdf[keep], MarginKind.PROBABILITY_GAP, 0))
        inv_err = max(inv_err, abs(fit.alpha_hat - s / (1 + s)))
    # brute-force large-sample refit on the sinusoidal logistic truth
    from prefbench.rewards import GroundTruthReward

    gt = GroundTruthReward.sample(RewardFamily.SINUSOIDAL, 10, np.random.default_rng(1))
    states = sample_states(10**5, 10, np.random.default_rng(2))
    fit = fit_margin_exponent(margin_cdf(gt, BT, states, grid, MarginKind.PROBABILITY_GAP))
    big = sample_states(10**6, 10, np.random.default_rng(3))
    r1 = 2.0 * np.sin(4.0 * np.sin(big) @ gt.w_star)
    values = 1.0 / (1.0 + np.exp(-np.abs(2.0 * r1))) - 0.5
    cdf_big = oracles.empirical_cdf(values, grid)
    keep = (cdf_big > 0) & (cdf_big < 1)
    slope, _ = oracles.loglog_slope(grid[keep], cdf_big[keep])
    refit_err = abs(fit.alpha_hat - slope / (1 + slope))
    ok = inv_err <= 1e-6 and refit_err <= 0.1
    with capsys.disabled():
        report(
            "margin-exponent recovery", ok,
            f"synthetic inversion err {inv_err:.1e}, brute-force refit dev {refit_err:.3f}",
            started, budget_s=2 * 60,
        )


def test_gap_transfer_inequalities(capsys):
    started = time.perf_counter()
    grid = np.linspace(1e-6, 1.0 - 1e-6, 1000)
    bt_report = verify_gap_inequalities(BT, grid)
    th_report = verify_gap_inequalities(THURSTONIAN, grid)
    ok = bt_report.max_violation <= 0.0 and th_report.max_violation <= 0.0
    with capsys.disabled():
        report(
            "proof gap inequalities", ok,
            f"max violations: logistic {bt_report.max_violation:.2e}, "
            f"probit {th_report.max_violation:.2e}", started, budget_s=1.0,
        )

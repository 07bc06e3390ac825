"""End-to-end acceptance gates.

One test per criterion, each printing a PASS/FAIL line with the measured
quantities (run with ``pytest tests/test_acceptance.py -v -s``). The Monte
Carlo suites parallelize across datasets; every seed is pinned.
"""

import json
import math
import os
import subprocess
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
import pytest

from gevboot import (
    CovariateSpec,
    SimSpec,
    fit_mle,
    link,
    log_likelihood,
    response_prob,
    run_bootstrap,
    score,
    simulate_dataset,
)
from gevboot.cli import main
from gevboot.errors import GevbootError

GOLDEN = Path(__file__).parent / "golden"
DATASET_WORKERS = min(4, os.cpu_count() or 1)

GEN_TAU = -0.25
GEN_BETA = (1.0, -0.05)
NULL_INTERCEPT = link(0.155, GEN_TAU)

RECOVERY_SEEDS = tuple(range(1000, 1100))
COVERAGE_SEEDS = tuple(range(2000, 2200))
NULL_SEEDS = tuple(range(3000, 3200))
POWER_SEEDS = tuple(range(4000, 4200))


def _report(name, ok, detail):
    print(f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}")


def _gen(n, seed, beta=GEN_BETA):
    spec = SimSpec(
        n=n,
        beta=beta,
        tau=GEN_TAU,
        covariates=(CovariateSpec("weight", "uniform", (20.0, 80.0)),),
        seed=seed,
    )
    return simulate_dataset(spec)


def _pmap(fn, args):
    if DATASET_WORKERS <= 1:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=DATASET_WORKERS) as pool:
        return list(pool.map(fn, args))


def test_criterion_01_link_round_trip():
    pis = np.array(
        [0.001, 0.01, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.99, 0.999]
    )
    taus = [-2.0, -0.5, -1e-7, 0.0, 1e-7, 0.5, 2.0]
    t0 = time.perf_counter()
    worst = 0.0
    for tau in taus:
        back = response_prob(link(pis, tau), tau)
        worst = max(worst, float(np.max(np.abs(back - pis))))
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-10 and elapsed < 1.0
    _report(
        "criterion 01 link round trip",
        ok,
        f"max |error| = {worst:.2e} (< 1e-10), {elapsed:.3f}s (< 1s)",
    )
    assert ok


def test_criterion_02_limit_continuity():
    eta = np.linspace(-3.0, 3.0, 10001)
    gap = float(np.max(np.abs(response_prob(eta, 1e-8) - (1.0 - np.exp(-np.exp(eta))))))
    ok = gap < 1e-6
    _report("criterion 02 limit continuity", ok, f"sup gap = {gap:.2e} (< 1e-6)")
    assert ok


def test_criterion_03_gradient_fidelity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(515)
    worst = 0.0
    for ds in range(5):
        spec = SimSpec(
            n=200,
            beta=(0.3, -0.4, 0.25),
            tau=0.2,
            covariates=(
                CovariateSpec("u", "uniform", (-1.0, 1.0)),
                CovariateSpec("z", "normal", (0.0, 1.0)),
            ),
            seed=600 + ds,
        )
        data = simulate_dataset(spec)
        checked = 0
        while checked < 10:
            tau = rng.uniform(-1.5, 1.5)
            beta = rng.normal(scale=0.2, size=3)
            eta = data.X @ beta
            if abs(tau) > 1e-6 and np.min(1.0 - tau * eta) < 0.05:
                continue
            g = score(data, beta, tau)
            fd = np.empty_like(g)
            for j in range(3):
                h = 1e-6 * max(1.0, abs(beta[j]))
                bp, bm = beta.copy(), beta.copy()
                bp[j] += h
                bm[j] -= h
                fd[j] = (
                    log_likelihood(data, bp, tau) - log_likelihood(data, bm, tau)
                ) / (2 * h)
            rel = float(np.max(np.abs(g - fd) / np.maximum(1.0, np.abs(g))))
            worst = max(worst, rel)
            checked += 1
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-6 and elapsed < 10.0
    _report(
        "criterion 03 gradient fidelity",
        ok,
        f"max rel err = {worst:.2e} (< 1e-6) at 50 points, {elapsed:.2f}s (< 10s)",
    )
    assert ok


def test_criterion_04_intercept_only_closed_form():
    worst = 0.0
    for n, ones in ((200, 31), (10, 5)):  # ybar = 0.155 and 0.5
        y = np.zeros(n, dtype=np.int64)
        y[:ones] = 1
        from gevboot import Dataset
        from gevboot.data import INTERCEPT_NAME

        data = Dataset(y=y, X=np.ones((n, 1)), column_names=(INTERCEPT_NAME,))
        for tau in (-0.5, 0.0, 0.5):
            fit = fit_mle(data, tau=tau)
            assert fit.converged
            worst = max(worst, abs(fit.beta[0] - link(ones / n, tau)))
    ok = worst < 1e-6
    _report(
        "criterion 04 intercept-only closed form",
        ok,
        f"max |beta1 - link(ybar)| = {worst:.2e} (< 1e-6)",
    )
    assert ok


def _recovery_task(seed):
    data = _gen(2000, seed)
    try:
        fit = fit_mle(data, tau=GEN_TAU)
    except GevbootError:
        return (False, np.nan, np.nan)
    return (fit.converged, float(fit.beta[1]), float(fit.se[1]))


def test_criterion_05_parameter_recovery():
    t0 = time.perf_counter()
    rows = _pmap(_recovery_task, RECOVERY_SEEDS)
    elapsed = time.perf_counter() - t0
    conv = [r for r in rows if r[0]]
    vals = np.array([r[1] for r in conv])
    mc_se = vals.std(ddof=1) / math.sqrt(len(vals))
    bias = abs(vals.mean() - GEN_BETA[1])
    ok = len(conv) >= 97 and bias < 3 * mc_se and elapsed < 120.0
    _report(
        "criterion 05 parameter recovery",
        ok,
        f"converged {len(conv)}/100 (>= 97), |mean - truth| = {bias:.2e} "
        f"(< 3 MC SE = {3 * mc_se:.2e}), {elapsed:.1f}s (< 120s)",
    )
    assert ok


def _coverage_task(i):
    data = _gen(500, COVERAGE_SEEDS[i])
    try:
        fit = fit_mle(data, tau=GEN_TAU)
        if not fit.converged:
            return None
        res = run_bootstrap(data, fit, B=200, alpha=0.05, seed=9000 + i, workers=1)
    except GevbootError:
        return None
    return bool(res.ci[1, 0] <= GEN_BETA[1] <= res.ci[1, 1])


def test_criterion_06_bootstrap_ci_coverage():
    t0 = time.perf_counter()
    rows = _pmap(_coverage_task, range(len(COVERAGE_SEEDS)))
    elapsed = time.perf_counter() - t0
    valid = [r for r in rows if r is not None]
    coverage = sum(valid) / len(valid)
    ok = 0.90 <= coverage <= 0.99 and elapsed < 900.0 and len(valid) >= 190
    _report(
        "criterion 06 bootstrap CI coverage",
        ok,
        f"coverage = {coverage:.3f} over {len(valid)} runs (in [0.90, 0.99]), "
        f"{elapsed:.1f}s (< 900s)",
    )
    assert ok


def _null_task(i):
    data = _gen(500, NULL_SEEDS[i], beta=(NULL_INTERCEPT, 0.0))
    try:
        fit = fit_mle(data, tau=GEN_TAU)
        if not fit.converged:
            return None
        res = run_bootstrap(data, fit, B=200, alpha=0.05, seed=9500 + i, workers=1)
    except GevbootError:
        return None
    return bool(res.p_values[1] < 0.05)


def _power_task(i):
    data = _gen(2000, POWER_SEEDS[i])
    try:
        fit = fit_mle(data, tau=GEN_TAU)
        if not fit.converged:
            return None
        res = run_bootstrap(data, fit, B=200, alpha=0.05, seed=10000 + i, workers=1)
    except GevbootError:
        return None
    return bool(res.p_values[1] < 0.05)


def test_criterion_07_bootstrap_test_calibration():
    rows_null = _pmap(_null_task, range(len(NULL_SEEDS)))
    valid_null = [r for r in rows_null if r is not None]
    size = sum(valid_null) / len(valid_null)

    rows_pow = _pmap(_power_task, range(len(POWER_SEEDS)))
    valid_pow = [r for r in rows_pow if r is not None]
    power = sum(valid_pow) / len(valid_pow)

    ok = (
        0.01 <= size <= 0.12
        and power >= 0.95
        and len(valid_null) >= 190
        and len(valid_pow) >= 190
    )
    _report(
        "criterion 07 bootstrap test calibration",
        ok,
        f"null rejection = {size:.3f} over {len(valid_null)} (in [0.01, 0.12]); "
        f"power = {power:.3f} over {len(valid_pow)} (>= 0.95)",
    )
    assert ok


def _se_ratio_task(seed):
    data = _gen(2000, seed)
    try:
        fit = fit_mle(data, tau=GEN_TAU)
        if not fit.converged:
            return None
        res = run_bootstrap(data, fit, B=200, alpha=0.05, seed=11000 + seed, workers=1)
    except GevbootError:
        return None
    return float(res.se[1] / fit.se[1])


def test_criterion_08_bootstrap_vs_wald_se():
    rows = _pmap(_se_ratio_task, RECOVERY_SEEDS)
    ratios = np.array([r for r in rows if r is not None])
    in_band = bool(np.all((ratios >= 0.5) & (ratios <= 2.0)))
    med = float(np.median(ratios))
    ok = in_band and med >= 1.0 and len(ratios) >= 95
    _report(
        "criterion 08 bootstrap vs Wald SE",
        ok,
        f"ratios in [{ratios.min():.3f}, {ratios.max():.3f}] (within [0.5, 2.0]: "
        f"{in_band}), median = {med:.3f} (>= 1.0), {len(ratios)} fits",
    )
    assert ok


def test_criterion_09_byte_identical_json(tmp_path):
    csv_path = tmp_path / "dengue.csv"
    subprocess.run(
        [sys.executable, "-m", "gevboot", "simulate", "--dengue-analog",
         "--seed", "11", "--out", str(csv_path)],
        check=True, capture_output=True,
    )
    outputs = []
    for i, workers in enumerate(("1", "1", "8")):
        out_path = tmp_path / f"boot{i}.json"
        proc = subprocess.run(
            [sys.executable, "-m", "gevboot", "boot",
             "--input", str(csv_path), "--response", "infected",
             "--predictors", "weight", "--tau", "fixed=-0.25",
             "--B", "100", "--seed", "7", "--workers", workers,
             "--format", "json", "--out", str(out_path)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0, proc.stderr
        outputs.append(out_path.read_bytes())
    ok = outputs[0] == outputs[1] == outputs[2]
    _report(
        "criterion 09 determinism",
        ok,
        f"two runs and workers {{1, 8}} produced "
        f"{'identical' if ok else 'DIFFERENT'} JSON ({len(outputs[0])} bytes)",
    )
    assert ok


def test_criterion_10_table_fidelity(tmp_path):
    csv_path = tmp_path / "dengue.csv"
    assert main(["simulate", "--dengue-analog", "--seed", "11",
                 "--out", str(csv_path)]) == 0
    fit_out = tmp_path / "fit.txt"
    boot_out = tmp_path / "boot.txt"
    assert main(["fit", "--input", str(csv_path), "--response", "infected",
                 "--predictors", "weight", "--tau", "fixed=-0.25",
                 "--out", str(fit_out)]) == 0
    assert main(["boot", "--input", str(csv_path), "--response", "infected",
                 "--predictors", "weight", "--tau", "fixed=-0.25",
                 "--B", "100", "--seed", "7", "--workers", "1",
                 "--out", str(boot_out)]) == 0
    ok = True
    details = []
    for name, path in (("fit_dengue.txt", fit_out), ("boot_dengue.txt", boot_out)):
        golden = (GOLDEN / name).read_text(encoding="utf-8")
        got = path.read_text(encoding="utf-8")
        match = got == golden
        ok = ok and match
        details.append(f"{name} {'matches' if match else 'DIFFERS'}")
        header = got.splitlines()[0]
        for col in ("Parameter", "Estimate", "SE", "95% C.I", "P-value"):
            ok = ok and col in header
    _report("criterion 10 table fidelity", ok, "; ".join(details))
    assert ok

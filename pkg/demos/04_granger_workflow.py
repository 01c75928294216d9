"""The full two-way temporal analysis between crossings and readership.

The workflow: check both series are stationary (ADF), pick the lag order by
AIC over bivariate VAR fits, verify the fit is clean (no residual
autocorrelation, stable companion matrix), then run the Granger F-test in
both directions. A one-way coupled system should light up in exactly one.
"""

from datetime import date, timedelta

import numpy as np

from viewshift import (
    DailySeries,
    Granularity,
    ProportionSeries,
    adf_test,
    fit_var,
    granger_test,
    lm_autocorrelation_test,
    run_granger_pipeline,
    select_lag,
    stability_check,
)
from viewshift.series import align

rng = np.random.default_rng(12)
start = date(2022, 2, 24)
n = 370

# Border crossings: a persistent, positive daily count.
z = np.zeros(n)
for t in range(1, n):
    z[t] = 0.6 * z[t - 1] + rng.standard_normal()
crossings_values = np.round(np.maximum(12_000 + 4_000 * z, 0))

# Readership responds to crossings three days later.
views = 900 + 0.05 * np.concatenate([np.zeros(3), crossings_values[:-3]]) + 10 * rng.standard_normal(n)

dates = [start + timedelta(days=i) for i in range(n)]
crossings = DailySeries("border-crossings", tuple(zip(dates, crossings_values)))
shares = ProportionSeries(
    None, Granularity.daily(), tuple((d, float(v) / 5e7) for d, v in zip(dates, views))
)

# --- step by step ----------------------------------------------------------
pair = align(crossings, DailySeries("views", tuple(shares.present())))
print("stationarity (ADF, constant-only, 5% critical value):")
for label, xs in (("crossings", pair.a), ("views", pair.b)):
    res = adf_test(xs, max_lag=6)
    verdict = "stationary" if res.reject_at_5pct else "unit root not rejected"
    print(f"  {label:<10} stat={res.statistic:7.2f}  lag={res.lag_used}  -> {verdict}")

lag = select_lag(pair, p_max=10)
print(f"\nAIC lag selection over 1..10 -> p = {lag}")

fit = fit_var(pair, lag)
lm_stat, lm_p = lm_autocorrelation_test(fit, h=lag)
max_modulus, stable = stability_check(fit)
print(f"VAR({lag}): LM autocorrelation p = {lm_p:.3f}, companion max |eigenvalue| = {max_modulus:.3f}"
      f" ({'stable' if stable else 'UNSTABLE'})")

for direction, described in (("a->b", "crossings -> views"), ("b->a", "views -> crossings")):
    res = granger_test(pair, direction, lag)
    print(f"granger {described:<22} F={res.f_stat:6.2f}  p={res.p_value:.4f}")

# --- or in one call --------------------------------------------------------
record = run_granger_pipeline(shares, crossings, p_max=10, adf_max_lag=6)
print(f"\npipeline record: lag={record.selected_lag}, valid={record.valid}, "
      f"failed checks={list(record.diagnostics_failed) or 'none'}")
forward = record.granger_crossings_to_views
backward = record.granger_views_to_crossings
print(f"  {forward.cause} -> {forward.effect}: F={forward.f_stat:.2f} p={forward.p_value:.4f}")
print(f"  {backward.cause} -> {backward.effect}: F={backward.f_stat:.2f} p={backward.p_value:.4f}")

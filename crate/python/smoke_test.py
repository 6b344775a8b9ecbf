"""Smoke test for the ppvf Python extension.

Build and install the extension first, e.g.

    pip install maturin
    pip install --no-build-isolation ./crates/py

then run ``python python/smoke_test.py``.
"""

import math
import sys

import ppvf


def check(cond, message):
    if not cond:
        print(f"FAIL {message}")
        sys.exit(1)
    print(f"ok   {message}")


def main():
    log = ppvf.EventLog.skewed(catalog_size=60, edges=2, horizon=300.0, base_rate=1.0, seed=7)
    check(len(log) > 0 and log.edge_count == 2, f"synthetic trace ({len(log)} events)")
    check(sum(len(p) for p in log.partition()) == len(log), "partition keeps every event")

    params = ppvf.ModelParams.uniform(log.catalog_size, 2)
    edge0 = log.partition()[0]
    ll = ppvf.window_log_likelihood(params, edge0, 96.0)
    check(math.isfinite(ll), f"window log-likelihood {ll:.3f}")

    corr = ppvf.CorrelationState(3)
    for k in range(5):
        x = float(k)
        corr.update([x, 2.0 * x + 1.0, 4.0 - x])
    check(abs(corr.correlation_degree(0, 1) - 1.0) < 1e-12, "perfect correlation")
    check(abs(corr.correlation_degree(0, 2) + 1.0) < 1e-12, "perfect anti-correlation")

    ratio = ppvf.dp_ratio_check([1.0, 2.0, 0.5], [1.5, 2.0, 0.5], 1.0, 0.5)
    check(ratio <= 1.0, f"exponential mechanism ratio {ratio:.4f} <= eps")

    cr = ppvf.empirical_cr(seed=1, instances=50)
    check(cr["passed"], f"competitive ratio {cr['worst_ratio']:.4f} within {cr['limit']:.4f}")

    report = ppvf.simulate(log, policies=["ppvf", "lru"], init_horizon=100.0, test_horizon=300.0)
    for name, row in report.items():
        check(0.0 <= row["chr"] <= 1.0, f"{name}: chr {row['chr']:.4f}, mean_js {row['mean_js']:.4f}")


if __name__ == "__main__":
    main()

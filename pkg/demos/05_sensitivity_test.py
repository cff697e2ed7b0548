"""The aggregation-sensitivity test end to end.

The statistic M(rho, theta) maps the variable's spatial autocorrelation and
the aggregation ratio theta = k/N into (0, 1). The null hypothesis — the
variable is not sensitive to aggregation into k regions — is rejected when
M exceeds the tabulated critical value for (N, rho). Scanning k from N
downward locates the minimum safe aggregation level.
"""

from smaup import (
    SarSpec,
    build_lattice_rook,
    estimate_rho,
    generate_sar,
    min_safe_k,
    scan_k,
    smaup_test,
)

w = build_lattice_rook(10, 10)
y = generate_sar(w, SarSpec(rho=0.0, seed=3))
rho_hat = estimate_rho(w, y)
print(f"variable on 100 areas, estimated rho = {rho_hat:+.3f}")

print(f"\n{'k':>4} {'theta':>6} {'M':>8} {'crit(0.05)':>11} decision")
for k in (100, 90, 70, 50, 30, 12):
    res = smaup_test(y, w, k, rho=rho_hat)
    verdict = "reject" if res.decision[0.05] else "keep"
    print(f"{k:>4} {res.theta:>6.2f} {res.m_value:>8.4f} "
          f"{res.critical_values[0.05]:>11.5f} {verdict:>7} {res.significance_stars()}")

safe = min_safe_k(y, w, alpha=0.05, rho=rho_hat)
print(f"\nminimum safe k at alpha=0.05: {safe}")

# scan_k exposes the per-level results the verdict is built from
results = scan_k(y, w, alpha=0.05, k_min=safe - 2, k_max=safe + 2, rho=rho_hat)
for res in results:
    print(f"  k={res.k}: M={res.m_value:.4f} "
          f"{'rejects' if res.decision[0.05] else 'does not reject'}")

"""Exact finite-N mean and variance of S_N(f) against their large-N slopes."""
from cuecorr import (mean_asymptotic, mean_exact, variance_asymptotic, variance_closed_form_pairs,
                     variance_exact)
from cuecorr.testfunctions import gaussian, triangle

for f in (triangle(1.5), gaussian(1.0)):
    M = mean_asymptotic(f)
    s2 = variance_asymptotic(f)
    print(f"\n{f.name} {f.params}:  M(f) = {M:.10f}   sigma^2(f) = {s2:.10f}")
    # the partition sum and the three-integral pair formula are independent routes
    print(f"  pair-formula variance  {variance_closed_form_pairs(f):.10f}")
    print("     N    E S/N - M      Var S/N - sigma^2")
    for N in (8, 16, 32, 64, 128):
        print(f"  {N:4d}   {mean_exact(N, f) / N - M:+.3e}   {variance_exact(N, f) / N - s2:+.3e}")

# the term breakdown shows which partitions carry the variance
res = variance_asymptotic(triangle(1.5), return_details=True)
print("\nnon-zero partition terms for triangle a=1.5:")
for blocks, v in res.terms:
    print(f"  {blocks}: {v:+.6f}")
print(f"error estimate {res.error_estimate:.1e}")

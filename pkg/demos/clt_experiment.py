"""Monte Carlo look at the Gaussian limit of S_N(f).

The centred statistic has variance ~ N sigma^2(f) and third cumulant ~ N c_3,
so its skewness decays like N^{-1/2}.  With a unit Gaussian kernel the
constant is large, and N = 64 is still visibly skewed.
"""
import math

from cuecorr import ExperimentConfig, mean_exact, monte_carlo_clt_experiment, variance_exact
from cuecorr.statistic import centered_moment_exact
from cuecorr.testfunctions import gaussian

f = gaussian(1.0)

# at N = 4 the exact third moment is cheap enough to compare with sampling
N = 4
rep = monte_carlo_clt_experiment(ExperimentConfig(N, 20_000, seed=1), f)
var = variance_exact(N, f)
print(f"N={N}: exact skewness {centered_moment_exact(N, f, 3) / var**1.5:.3f}, "
      f"sampled {rep.skewness:.3f} +- {rep.se_skewness:.3f}")

print("\n   N   mean (exact)        variance (exact)     skew     kurt   skew*sqrt(N)")
for N, S in ((16, 6000), (32, 4000), (64, 4000)):
    rep = monte_carlo_clt_experiment(ExperimentConfig(N, S, seed=2), f)
    print(f"{N:4d}   {rep.mean:7.3f} ({mean_exact(N, f):7.3f})   "
          f"{rep.variance:6.3f} ({variance_exact(N, f):6.3f})   "
          f"{rep.skewness:6.3f}   {rep.kurtosis:6.3f}   {rep.skewness * math.sqrt(N):6.2f}")

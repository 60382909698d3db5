"""Exact joint cumulants of CUE trace powers, and where they vanish."""
import numpy as np

from cuecorr import kappa_closed_form, kappa_exact
from cuecorr.cumulants import c_rescaled

N = 6

# two frequencies: kappa_2(k, -k) = min(N, |k|), a ramp that saturates at N
print("kappa_2(k, -k) for N =", N)
print([kappa_exact(N, (k, -k)) for k in range(1, 2 * N + 1)])

# three frequencies (a, b, -(a+b)) with a, b > 0 on a small grid
print("\nkappa_3(a, b, -a-b), rows a = 1..8, columns b = 1..8")
table = np.array([[kappa_exact(N, (a, b, -a - b)) for b in range(1, 9)] for a in range(1, 9)])
print(table)
# everything with a + b <= N is zero; that is the vanishing rule sum|k| <= 2N
assert np.all(table[np.add.outer(np.arange(1, 9), np.arange(1, 9)) <= N] == 0)

# the tabulated p=4 pair shapes agree with the general formula
for a, b in [(2, 5), (4, 4), (7, 3), (9, 9)]:
    k = (a, b, -a, -b)
    print(f"kappa_4{k}: exact {kappa_exact(N, k):3d}   closed form {kappa_closed_form(N, k):3d}")

# beyond p = 4 only the general formula is available
k = (4, 4, 3, -5, -6)
print(f"\nkappa_5{k} = {kappa_exact(N, k)}")

# rescaled limit: kappa_p(tN) / N is a piecewise linear function c_p(t)
t = np.array([0.7, 0.7, -1.4])
for M in (10, 100, 1000):
    k = np.rint(t * M).astype(int)
    print(f"N={M:5d}: kappa_3 / N = {kappa_exact(M, k) / M:.4f}")
print(f"limit c_3(t) = {c_rescaled(t):.4f}")

"""Sampling Haar unitaries, and why the phase correction after QR matters."""
import math

import numpy as np

from cuecorr.sampler import haar_unitary, trace_second_moments

rng = np.random.default_rng(0)
N, reps = 4, 4000

# Haar: E |Tr U|^2 = 1 for every N >= 1
haar = np.mean([abs(np.trace(haar_unitary(N, rng))) ** 2 for _ in range(reps)])

# plain QR of a complex Ginibre matrix fixes diag(R) > 0, which biases Q
raw = []
for _ in range(reps):
    z = (rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N))) / math.sqrt(2)
    q, _ = np.linalg.qr(z)
    raw.append(abs(np.trace(q)) ** 2)
print(f"E|Tr U|^2  with phase correction {haar:.3f}   without {np.mean(raw):.3f}   (Haar: 1)")

# second moments of trace powers: E |Tr U^s|^2 = min(s, N)
N = 8
mean, se = trace_second_moments(N, 4000, seed=1)
print("\n s   E|T_s|^2   min(s, N)    z")
for s, (m, e) in enumerate(zip(mean, se), start=1):
    print(f"{s:2d}   {m:7.3f}   {min(s, N):5d}   {(m - min(s, N)) / e:+.2f}")

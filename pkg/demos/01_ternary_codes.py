"""Sparse ternary codes from scratch.

A signature is a unit vector in R^d.  Projecting it onto an orthonormal
basis of a smaller subspace and keeping only the strongest coordinates as
+/-1 yields a short, sparse, heavily quantized code: cheap to compare,
hard to invert.
"""

import numpy as np

from gmkit import ProjectionMatrix, correlation, embed, squared_distance, ternarize

rng = np.random.default_rng(0)

# ternarization alone: keep the 3 largest magnitudes as their signs
v = np.array([0.1, -1.4, 0.05, 2.2, -0.6, 0.3, 0.0, 1.1])
code = ternarize(v, 3)
print("input:          ", v)
print("ternary code:   ", code.symbols, f"({code.sparsity} nonzeros out of {code.length})")

# scaling the input never changes the code
assert np.array_equal(ternarize(4.0 * v, 3).symbols, code.symbols)

# the full pipeline: project a signature with an orthonormal basis, then quantize
d, code_length, sparsity = 32, 8, 3
basis, _ = np.linalg.qr(rng.standard_normal((d, code_length)))
projection = ProjectionMatrix(basis)

signature = rng.standard_normal(d)
signature /= np.linalg.norm(signature)
p = embed(projection, signature, sparsity)
print("\nembedded query: ", p.symbols)

# a noisy sample of the same signature usually lands on a nearby code
noisy = signature + 0.1 * rng.standard_normal(d)
noisy /= np.linalg.norm(noisy)
q = embed(projection, noisy, sparsity)
print("noisy resample: ", q.symbols)
print("correlation:    ", correlation(p, q))
print("sq. distance:   ", squared_distance(p, q), f"(range 0..{4 * sparsity})")

# for exactly-S codes the two comparisons are interchangeable
assert squared_distance(p, q) == 2 * sparsity - 2 * correlation(p, q)
print("\nidentity ||p-q||^2 == 2S - 2 p.q holds, as the protocol relies on")

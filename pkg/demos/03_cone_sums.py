"""Decay of the cone double sum that controls almost-localized endomorphisms."""

import math

from anyonlab import ConeRegion, FFunctionSpec, cone_double_sum

spec = FFunctionSpec(nu=2.0, eps_hat=1.0, g="power", alpha=1.0, b=1.0)
X = ConeRegion((0, 0), (1, 0), math.pi / 4)
eps = math.pi / 8
print(" n      S(n)          n^4 S(n)     d(X, Y_n)")
for n in (4, 8, 16, 32, 64):
    r = cone_double_sum(X, eps, n, spec)
    print(f"{n:3d}  {r.value:.6e}  {n ** 4 * r.value:.6e}  {r.distance:7.3f}")

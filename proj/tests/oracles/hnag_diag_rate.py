"""Fitted decay of the quadratic modified energy for HNAG on diag(linspace(1, 100, 100)),
x0 = ones, minimizer 0, stopped at |g| <= 1e-8 |g0|. Fit: least squares of log E
over the last half of the trace (same window rule as estimate_rate)."""
import math

import numpy as np

lam = np.linspace(1.0, 100.0, 100)
mu, lip = 1.0, 100.0
a = math.sqrt(2 * mu / lip)
ab = 1 / lip


def e_tilde(x, y):
    g = lam * x
    d_shift = 0.5 * np.dot(lam - mu, x * x)
    return d_shift + 0.5 * mu * np.dot(y, y) - np.dot(g - mu * x, g - mu * x) / (2 * lip)


x = np.ones(100)
y = x.copy()
g = lam * x
g0 = np.linalg.norm(g)
es = [e_tilde(x, y)]
while np.linalg.norm(g) > 1e-8 * g0:
    x = (x + a * y - ab * g) / (1 + a)
    g = lam * x
    y = (y + a * x - (a / mu) * g) / (1 + a)
    es.append(e_tilde(x, y))

usable = 0
while usable < len(es) and es[usable] >= 1e-28 * es[0] and es[usable] > 0:
    usable += 1
window = max(11, math.ceil(0.5 * usable))
ks = np.arange(usable - window, usable)
slope = np.polyfit(ks, np.log(es[usable - window:usable]), 1)[0]
print(f"steps {len(es) - 1}, window [{ks[0]}, {ks[-1]}], 1 - r = {1 - math.exp(slope)!r}")
print(f"asymptote 1 - (1+sqrt(2/kappa))^-2 = {1 - (1 + math.sqrt(2 / 100)) ** -2!r}")

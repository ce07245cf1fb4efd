"""Independent numpy/scipy runs of the five methods on the seeded 2-D
Laplacian, stopping at |grad f(x_k)| <= tol |grad f(x_0)|."""
import math
import sys

import numpy as np
import scipy.sparse as sp

from splitmix import SplitMix64


def laplacian(n):
    h = 1.0 / (n + 1)
    t = sp.diags([-1.0, 2.0, -1.0], [-1, 0, 1], shape=(n, n))
    eye = sp.identity(n)
    a = (sp.kron(eye, t) + sp.kron(t, eye)) / h**2
    mu = 8 / h**2 * math.sin(math.pi * h / 2) ** 2
    lip = 8 / h**2 * math.cos(math.pi * h / 2) ** 2
    return a.tocsr(), mu, lip


def run(method, a, mu, lip, x0, tol=1e-8, max_iter=10**6):
    grad = lambda z: a @ z
    kappa = lip / mu
    x = x0.copy()
    g = grad(x)
    stop = tol * np.linalg.norm(g)
    if method == "gd":
        for k in range(1, max_iter + 1):
            x = x - 2 / (lip + mu) * g
            g = grad(x)
            if np.linalg.norm(g) <= stop:
                return k
    if method == "nag":
        y = x.copy()
        mom = (math.sqrt(kappa) - 1) / (math.sqrt(kappa) + 1)
        for k in range(1, max_iter + 1):
            xn = y - grad(y) / lip
            y = xn + mom * (xn - x)
            x = xn
            if np.linalg.norm(grad(x)) <= stop:
                return k
    if method == "tm":
        rho = 1 - 1 / math.sqrt(kappa)
        al, be = (1 + rho) / lip, rho**2 / (2 - rho)
        ga, de = rho**2 / ((1 + rho) * (2 - rho)), rho**2 / (1 - rho**2)
        xi_prev, xi = x.copy(), x.copy()
        for k in range(1, max_iter + 1):
            y = (1 + ga) * xi - ga * xi_prev
            xi_prev, xi = xi, (1 + be) * xi - be * xi_prev - al * grad(y)
            x = (1 + de) * xi - de * xi_prev
            if np.linalg.norm(grad(x)) <= stop:
                return k
    if method in ("hnag", "hnag+"):
        w = 1 if method == "hnag" else 2
        alpha = math.sqrt((2 if method == "hnag" else 1) * mu / lip)
        y = x.copy()
        for k in range(1, max_iter + 1):
            x = (x + w * alpha * y - g / lip) / (1 + w * alpha)
            g = grad(x)
            y = (y + alpha * x - alpha / mu * g) / (1 + alpha)
            if np.linalg.norm(g) <= stop:
                return k
    raise RuntimeError("no convergence")


if __name__ == "__main__":
    n = int(sys.argv[1]) if len(sys.argv) > 1 else 19
    a, mu, lip = laplacian(n)
    g = SplitMix64(42)
    x0 = np.array([g.uniform() for _ in range(n * n)])
    print("n", n, "kappa", repr(lip / mu))
    for m in ("gd", "nag", "tm", "hnag", "hnag+"):
        print(m, run(m, a, mu, lip, x0))

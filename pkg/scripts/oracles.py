"""Recompute the independent oracle constants frozen in the test suite.

* ``v(t)``: inner potential profile, by a one-dimensional reduction with
  complete elliptic integrals, ``int_0^1 Phi'(u) u I(t, u) du``.
* ``G(0)``: unit diagonal Galerkin entry in Fourier form,
  ``(1/4pi) int_0^inf rho^2 hat(Phi)(rho)^2 d rho`` with a power-law tail.
"""
import math

import numpy as np
from scipy import integrate, special

from rbfscreen.kernels import ScaledRbf, profile_deriv, profile_eval, wendland
from rbfscreen.quadrature import double_layer_energy_pair, inner_potential

TS = (0.1, 0.5, 0.9, 1.0, 1.5, 4.0)


def ring_integral(t, u):
    """``int_0^{2pi} cos(th) / |t e1 - u e(th)| d th``."""
    a, b = t * t + u * u, 2 * t * u
    if b == 0:
        return 0.0
    m = min(2 * b / (a + b), 1 - 1e-16)
    return 4 / (b * math.sqrt(a + b)) * (a * special.ellipk(m) - (a + b) * special.ellipe(m))


def v_oracle(kernel, t):
    f = lambda u: profile_deriv(kernel, u) * u * ring_integral(t, u)
    pieces = ((0, t), (t, 1)) if 0 < t < 1 else ((0, 1),)
    return sum(integrate.quad(f, a, b, limit=500, epsabs=1e-16, epsrel=1e-13)[0] for a, b in pieces)


def diagonal_oracle(kernel, L=400.0, per_unit=10):
    x, w = np.polynomial.legendre.leggauss(20)
    e = np.linspace(0, 1, 201)
    s = (e[:-1, None] + np.diff(e)[:, None] * (x + 1) / 2).ravel()
    ws = np.repeat(np.diff(e) / 2, 20) * np.tile(w, 200)
    weights = profile_eval(kernel, s) * s * ws

    edges = np.linspace(0, L, int(L * per_unit) + 1)
    rho = (edges[:-1, None] + np.diff(edges)[:, None] * (x + 1) / 2).ravel()
    wr = np.repeat(np.diff(edges) / 2, 20) * np.tile(w, len(edges) - 1)
    hat = np.concatenate([2 * np.pi * special.j0(np.outer(chunk, s)) @ weights
                          for chunk in np.array_split(rho, max(1, len(rho) // 2000))])
    f = rho**2 * hat**2
    p = 4 * kernel.m + 4  # decay of rho^2 hat^2
    far = rho > L / 2
    A = np.sum(wr[far] * f[far]) / np.sum(wr[far] * rho[far] ** (-p))
    return (np.sum(wr * f) + A * L ** (1 - p) / (p - 1)) / (4 * np.pi)


def main():
    for m in (0, 1, 2):
        k = wendland(m)
        pot = inner_potential(k)
        for t in TS:
            ref = v_oracle(k, t)
            print(f"m={m} t={t}: v oracle {ref:.13g}  implementation {float(pot(t)):.13g}")
        unit = ScaledRbf(k, (0, 0), 1)
        print(f"m={m} G(0): oracle {diagonal_oracle(k):.13g}  implementation "
              f"{double_layer_energy_pair(unit, unit):.13g}", flush=True)


if __name__ == "__main__":
    main()

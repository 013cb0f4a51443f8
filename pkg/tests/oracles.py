"""Independent reference computations used to freeze and check expected values.

None of these go through the engine's closed-form integrals, contour code or
eigen-refinement: quadrature, extended-precision arithmetic and textbook
perturbation theory only.
"""

import math

import mpmath as mp
import numpy as np


def composite_simpson(f, a, b, panels=2**14):
    x = np.linspace(a, b, panels + 1)
    y = f(x)
    h = (b - a) / panels
    return h / 3 * (y[0] + y[-1] + 4 * y[1:-1:2].sum() + 2 * y[2:-1:2].sum())


def trace_series(cos_tr, sin_tr, order=0):
    """Numpy callable for tr Q^(order)(x) given scalar trace coefficients."""

    def f(x):
        out = np.zeros_like(x)
        for r, c in cos_tr.items():
            # d^n/dx^n cos(rx) = r^n cos(rx + n pi/2)
            out += c * r**order * np.cos(r * x + order * np.pi / 2)
        for s, c in sin_tr.items():
            out += c * s**order * np.sin(s * x + order * np.pi / 2)
        return out

    return f


def quad_coupling(cos_terms, sin_terms, dim, m, mp_, panels=2**14):
    """K_m K_m' * integral Q(x) cos(mx) cos(m'x), entrywise by Simpson."""
    k = lambda n: 1 / math.sqrt(math.pi) if n == 0 else math.sqrt(2 / math.pi)
    out = np.zeros((dim, dim))
    for i in range(dim):
        for j in range(dim):
            def f(x, i=i, j=j):
                v = np.zeros_like(x)
                for r, a in cos_terms.items():
                    v += np.asarray(a)[i, j] * np.cos(r * x)
                for s, b in sin_terms.items():
                    v += np.asarray(b)[i, j] * np.sin(s * x)
                return v * np.cos(m * x) * np.cos(mp_ * x)
            out[i, j] = k(m) * k(mp_) * composite_simpson(f, 0, math.pi, panels)
    return out


def pt2_level(coupling_fn, m, m_max, k):
    """Second-order Rayleigh-Schrodinger estimate of lambda_m^k - m^(2k) for d = 1.

    Returns (first order part, second order part) of the k-th power sum.
    """
    mu = float(m * m)
    a = coupling_fn(m, m)
    b = sum(coupling_fn(m, q) ** 2 / (mu - q * q) for q in range(m_max + 1) if q != m)
    first = k * mu ** (k - 1) * a
    second = k * mu ** (k - 1) * b + (math.comb(k, 2) * mu ** (k - 2) * a * a if k >= 2 else 0.0)
    return first, second


def pt2_residue_terms(coupling_fn, m, m_max, k):
    """Residue corrections j = 1 and j = 2 by partial fractions (d = 1, no contour)."""
    mu = float(m * m)
    a = coupling_fn(m, m)
    res1 = -(mu ** (k - 1)) * a
    # (m, m) double pole and the (m, q), (q, m) chains
    res2 = (k - 1) * mu ** (k - 2) * a * a if k >= 2 else 0.0
    res2 += sum(-2 * mu ** (k - 1) * coupling_fn(m, q) ** 2 / (q * q - mu)
                for q in range(m_max + 1) if q != m)
    # contribution to sum_j (-1)^j k/j Res_j
    return -k * res1, k / 2 * res2


class MpEngine:
    """Extended-precision (mpmath) rebuild of eigenvalues and residues for d = 1.

    Couplings come from exact integer-frequency integrals evaluated in mpmath.
    """

    def __init__(self, cos_terms, sin_terms, m_max, dps=40):
        mp.mp.dps = dps
        self.m_max = m_max
        n = m_max + 1

        def K(q):
            return 1 / mp.sqrt(mp.pi) if q == 0 else mp.sqrt(2 / mp.pi)

        def icos(a):
            return mp.pi if a == 0 else mp.mpf(0)

        def isin(a):
            return mp.mpf(0) if a % 2 == 0 else mp.mpf(2) / a

        C = mp.matrix(n, n)
        for m in range(n):
            for q in range(n):
                v = mp.mpf(0)
                for r, c in cos_terms.items():
                    v += mp.mpf(c) * (icos(r - (m - q)) + icos(r + (m - q))
                                      + icos(r - (m + q)) + icos(r + (m + q))) / 4
                for s, c in sin_terms.items():
                    v += mp.mpf(c) * (isin(s + (m - q)) + isin(s - (m - q))
                                      + isin(s + (m + q)) + isin(s - (m + q))) / 4
                C[m, q] = K(m) * K(q) * v
        self.C = C
        A = C.copy()
        for m in range(n):
            A[m, m] += m * m
        ev = mp.eigsy(A, eigvals_only=True)
        self.eigs = sorted(ev[i] for i in range(n))

    def power_sum(self, m, k):
        return self.eigs[m] ** k - mp.mpf(m) ** (2 * k)

    def residues(self, m, k, jmax, nodes=48):
        n = self.m_max + 1
        R = mp.mpf(1) / 4
        tot = [mp.mpc(0)] * jmax
        for t in range(nodes):
            z = mp.expjpi(mp.mpf(2 * t) / nodes)
            lam = m * m + R * z
            X = mp.matrix(n, n)
            for a in range(n):
                for b in range(n):
                    X[a, b] = self.C[a, b] / (b * b - lam)
            P = X
            for j in range(jmax):
                tot[j] += lam ** (k - 1) * sum(P[i, i] for i in range(n)) * R * z / nodes
                if j < jmax - 1:
                    P = P * X
        return [x.real for x in tot]

    def remainders(self, p_list, k, N):
        """M_p^(N) for each p in p_list."""
        out = {}
        eig = mp.mpf(0)
        res = [mp.mpf(0)] * N
        for m in range(max(p_list) + 1):
            eig += self.power_sum(m, k)
            r = self.residues(m, k, N)
            for j in range(N):
                res[j] += r[j]
            if m in p_list:
                out[m] = eig - sum((-1) ** (j + 1) * k * res[j] / (j + 1) for j in range(N))
        return out

"""Matrix-valued trigonometric potentials on [0, pi].

A potential is a finite series

    Q(x) = sum_r A_r cos(r x) + sum_s B_s sin(s x)

with real symmetric d x d coefficients. Every integral the trace machinery
needs (Fourier moments, Galerkin couplings) is evaluated in closed form from
integer-frequency product-to-sum identities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from scipy.optimize import minimize_scalar

from optrace.errors import ConfigurationError, DomainError

ENDPOINT_TOL = 1e-10


def sym_matrix(entries, dim: int | None = None) -> np.ndarray:
    """Return ``entries`` as a read-only float array, insisting on exact symmetry."""
    a = np.array(entries, dtype=float)
    if a.ndim == 0:
        a = a.reshape(1, 1)
    if a.ndim == 1 and dim is not None and a.size == dim * dim:
        a = a.reshape(dim, dim)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ConfigurationError(f"coefficient must be a square matrix, got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise ConfigurationError(f"coefficient has dimension {a.shape[0]}, expected {dim}")
    if not np.array_equal(a, a.T):
        raise ConfigurationError("coefficient matrix is not symmetric")
    a.setflags(write=False)
    return a


def _int_cos(a: int) -> float:
    # integral of cos(a x) over [0, pi], integer a
    return math.pi if a == 0 else 0.0


def _int_sin(a: int) -> float:
    # integral of sin(a x) over [0, pi], integer a
    if a == 0 or a % 2 == 0:
        return 0.0
    return 2.0 / a


def int_cos_cos(r: int, b: int) -> float:
    """Integral over [0, pi] of cos(r x) cos(b x)."""
    return 0.5 * (_int_cos(r - b) + _int_cos(r + b))


def int_sin_cos(s: int, b: int) -> float:
    """Integral over [0, pi] of sin(s x) cos(b x)."""
    return 0.5 * (_int_sin(s + b) + _int_sin(s - b))


def basis_norm(m: int) -> float:
    """Normalisation K_m of cos(m x) in L2(0, pi)."""
    return 1.0 / math.sqrt(math.pi) if m == 0 else math.sqrt(2.0 / math.pi)


def _cos_at(r: int, x: float) -> float:
    if x == 0.0:
        return 1.0
    if x == math.pi:
        return -1.0 if r % 2 else 1.0
    return math.cos(r * x)


def _sin_at(s: int, x: float) -> float:
    if x == 0.0 or x == math.pi:
        return 0.0
    return math.sin(s * x)


@dataclass(frozen=True)
class TrigOperatorPotential:
    """Q(x) = sum_r A_r cos(r x) + sum_s B_s sin(s x) with symmetric A_r, B_s."""

    dim: int
    cos_terms: Mapping[int, np.ndarray] = field(default_factory=dict)
    sin_terms: Mapping[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if self.dim < 1:
            raise ConfigurationError("dim must be a positive integer")
        cos_terms = {}
        for r in sorted(self.cos_terms):
            if int(r) != r or r < 0:
                raise ConfigurationError(f"cosine harmonic must be an integer >= 0, got {r}")
            cos_terms[int(r)] = sym_matrix(self.cos_terms[r], self.dim)
        sin_terms = {}
        for s in sorted(self.sin_terms):
            if int(s) != s or s < 1:
                raise ConfigurationError(f"sine harmonic must be an integer >= 1, got {s}")
            sin_terms[int(s)] = sym_matrix(self.sin_terms[s], self.dim)
        object.__setattr__(self, "cos_terms", cos_terms)
        object.__setattr__(self, "sin_terms", sin_terms)

    @classmethod
    def zero(cls, dim: int = 1) -> TrigOperatorPotential:
        return cls(dim)

    @classmethod
    def scalar(cls, cos: Mapping[int, float] | None = None, sin: Mapping[int, float] | None = None):
        """Convenience constructor for d = 1, e.g. ``scalar(cos={2: 0.3})``."""
        return cls(
            1,
            {r: [[c]] for r, c in (cos or {}).items()},
            {s: [[c]] for s, c in (sin or {}).items()},
        )

    @property
    def bandwidth(self) -> int:
        harmonics = list(self.cos_terms) + list(self.sin_terms)
        return max(harmonics, default=0)

    def is_zero(self) -> bool:
        terms = list(self.cos_terms.values()) + list(self.sin_terms.values())
        return all(not np.any(a) for a in terms)

    def scaled(self, alpha: float) -> TrigOperatorPotential:
        return TrigOperatorPotential(
            self.dim,
            {r: alpha * a for r, a in self.cos_terms.items()},
            {s: alpha * b for s, b in self.sin_terms.items()},
        )

    def trace_coefficients(self) -> tuple[dict[int, float], dict[int, float]]:
        """Scalar series of tr Q(x)."""
        return (
            {r: math.fsum(np.diag(a)) for r, a in self.cos_terms.items()},
            {s: math.fsum(np.diag(b)) for s, b in self.sin_terms.items()},
        )

    def describe(self) -> dict:
        return {
            "dim": self.dim,
            "cos_terms": {str(r): a.tolist() for r, a in self.cos_terms.items()},
            "sin_terms": {str(s): b.tolist() for s, b in self.sin_terms.items()},
        }

    def __eq__(self, other):
        if not isinstance(other, TrigOperatorPotential):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.cos_terms.keys() == other.cos_terms.keys()
            and self.sin_terms.keys() == other.sin_terms.keys()
            and all(np.array_equal(a, other.cos_terms[r]) for r, a in self.cos_terms.items())
            and all(np.array_equal(b, other.sin_terms[s]) for s, b in self.sin_terms.items())
        )

    __hash__ = None


def evaluate(Q: TrigOperatorPotential, x: float) -> np.ndarray:
    """Q(x) as a d x d symmetric array; x must lie in [0, pi]."""
    if not (0.0 <= x <= math.pi):
        raise DomainError(f"x = {x} outside [0, pi]")
    out = np.zeros((Q.dim, Q.dim))
    for r, a in Q.cos_terms.items():
        out += _cos_at(r, x) * a
    for s, b in Q.sin_terms.items():
        out += _sin_at(s, x) * b
    return out


def evaluate_grid(Q: TrigOperatorPotential, xs: np.ndarray) -> np.ndarray:
    """Vectorised evaluation, shape (len(xs), d, d). No domain check."""
    xs = np.asarray(xs, dtype=float)
    out = np.zeros((xs.size, Q.dim, Q.dim))
    for r, a in Q.cos_terms.items():
        out += np.cos(r * xs)[:, None, None] * a
    for s, b in Q.sin_terms.items():
        out += np.sin(s * xs)[:, None, None] * b
    return out


# derivative of order n: cos(rx) -> r^n * sign * {cos|sin}(rx), cycling with period 4
_COS_CYCLE = [(1.0, "cos"), (-1.0, "sin"), (-1.0, "cos"), (1.0, "sin")]
_SIN_CYCLE = [(1.0, "sin"), (1.0, "cos"), (-1.0, "sin"), (-1.0, "cos")]


def derivative(Q: TrigOperatorPotential, order: int) -> TrigOperatorPotential:
    """Exact term-wise derivative of the given order."""
    if order < 0:
        raise DomainError("derivative order must be >= 0")
    if order == 0:
        return Q
    cos_terms: dict[int, np.ndarray] = {}
    sin_terms: dict[int, np.ndarray] = {}
    for cycle, terms in ((_COS_CYCLE, Q.cos_terms), (_SIN_CYCLE, Q.sin_terms)):
        sign, kind = cycle[order % 4]
        for r, a in terms.items():
            if r == 0:
                continue
            target = cos_terms if kind == "cos" else sin_terms
            coeff = sign * float(r**order) * a
            target[r] = target[r] + coeff if r in target else coeff
    return TrigOperatorPotential(Q.dim, cos_terms, sin_terms)


def endpoint_trace(Q: TrigOperatorPotential, order: int, endpoint: float) -> float:
    """tr Q^(order) at x = 0 or x = pi."""
    if endpoint not in (0.0, math.pi):
        raise DomainError("endpoint must be 0 or pi")
    # sine terms vanish at both endpoints
    cos_tr, _ = derivative(Q, order).trace_coefficients()
    return math.fsum(_cos_at(r, endpoint) * t for r, t in cos_tr.items())


def endpoint_value(Q: TrigOperatorPotential, order: int, endpoint: float) -> np.ndarray:
    return evaluate(derivative(Q, order), endpoint)


def cos_moment(Q: TrigOperatorPotential, order: int, m: int) -> float:
    """Integral over [0, pi] of tr Q^(order)(x) cos(2 m x), in closed form."""
    cos_tr, sin_tr = derivative(Q, order).trace_coefficients()
    b = 2 * m
    return math.fsum(
        [t * int_cos_cos(r, b) for r, t in cos_tr.items()]
        + [t * int_sin_cos(s, b) for s, t in sin_tr.items()]
    )


def _level_weights(harmonic: int, kind: str, m_max: int) -> np.ndarray:
    """W[m, m'] = K_m K_m' * integral of {cos|sin}(h x) cos(m x) cos(m' x)."""
    integral = int_cos_cos if kind == "cos" else int_sin_cos
    w = np.zeros((m_max + 1, m_max + 1))
    for m in range(m_max + 1):
        for mp in range(m, m_max + 1):
            val = 0.5 * (integral(harmonic, m - mp) + integral(harmonic, m + mp))
            if val:
                w[m, mp] = w[mp, m] = basis_norm(m) * basis_norm(mp) * val
    return w


def coupling_block(Q: TrigOperatorPotential, m: int, mp: int) -> np.ndarray:
    """Matrix element block of Q between the levels cos(m x) and cos(m' x)."""
    out = np.zeros((Q.dim, Q.dim))
    km = basis_norm(m) * basis_norm(mp)
    for r, a in Q.cos_terms.items():
        val = 0.5 * (int_cos_cos(r, m - mp) + int_cos_cos(r, m + mp))
        if val:
            out += km * val * a
    for s, b in Q.sin_terms.items():
        val = 0.5 * (int_sin_cos(s, m - mp) + int_sin_cos(s, m + mp))
        if val:
            out += km * val * b
    return out


def coupling_matrix(Q: TrigOperatorPotential, m_max: int) -> np.ndarray:
    """All coupling blocks for levels 0..m_max; index of (m, n) is m * d + n."""
    size = (m_max + 1) * Q.dim
    out = np.zeros((size, size))
    for r, a in Q.cos_terms.items():
        out += np.kron(_level_weights(r, "cos", m_max), a)
    for s, b in Q.sin_terms.items():
        out += np.kron(_level_weights(s, "sin", m_max), b)
    return out


def _spectral_norm(Q: TrigOperatorPotential, x: float) -> float:
    return float(np.max(np.abs(np.linalg.eigvalsh(evaluate(Q, x)))))


def sup_norm_estimate(Q: TrigOperatorPotential, refine: bool = True) -> float:
    """Lower estimate of sup_x ||Q(x)||_2 from a uniform grid, optionally polished.

    The grid has max(1024, 64 * bandwidth) points; polishing runs a bounded
    scalar maximisation in the cells around the best grid points.
    """
    if Q.is_zero():
        return 0.0
    n = max(1024, 64 * Q.bandwidth)
    xs = np.linspace(0.0, math.pi, n)
    norms = np.max(np.abs(np.linalg.eigvalsh(evaluate_grid(Q, xs))), axis=1)
    best = float(norms.max())
    if not refine:
        return best
    h = xs[1] - xs[0]
    for i in np.argsort(norms)[::-1][:4]:
        lo, hi = max(0.0, xs[i] - h), min(math.pi, xs[i] + h)
        res = minimize_scalar(
            lambda x: -_spectral_norm(Q, x), bounds=(lo, hi), method="bounded",
            options={"xatol": 1e-12},
        )
        best = max(best, -float(res.fun))
    return best


def coefficient_norm_bound(Q: TrigOperatorPotential) -> float:
    """Upper bound sum ||A_r||_2 + sum ||B_s||_2 on the sup norm."""
    mats = list(Q.cos_terms.values()) + list(Q.sin_terms.values())
    return math.fsum(float(np.linalg.norm(a, 2)) for a in mats)


@dataclass
class ConditionReport:
    q2_sup_norm: float
    q2_pass: bool
    q2_upper_bound: float
    q5_pass_per_order: list[bool]
    q6_mean_trace: float
    q6_pass: bool
    symmetric: bool

    @property
    def q5_pass(self) -> bool:
        return all(self.q5_pass_per_order)

    def warnings(self) -> list[str]:
        out = []
        if not self.q2_pass:
            out.append(f"sup norm estimate {self.q2_sup_norm:.6g} is not below 1/2")
        if not self.q5_pass:
            out.append("odd derivatives do not vanish at the endpoints")
        if not self.q6_pass:
            out.append(f"integral of tr Q is {self.q6_mean_trace:.6g}, not zero")
        if not self.symmetric:
            out.append("potential is not symmetric")
        return out

    def to_dict(self) -> dict:
        return {
            "q2_sup_norm": self.q2_sup_norm,
            "q2_pass": self.q2_pass,
            "q2_upper_bound": self.q2_upper_bound,
            "q5_pass_per_order": list(self.q5_pass_per_order),
            "q6_mean_trace": self.q6_mean_trace,
            "q6_pass": self.q6_pass,
            "symmetric": self.symmetric,
        }

    @classmethod
    def from_dict(cls, data: dict) -> ConditionReport:
        return cls(**data)


def check_conditions(Q: TrigOperatorPotential, k: int, tol: float = ENDPOINT_TOL) -> ConditionReport:
    """Check the norm bound, odd-derivative endpoint and zero-mean-trace conditions."""
    if k < 2:
        raise DomainError("k must be >= 2")
    sup = sup_norm_estimate(Q)
    q5 = []
    for order in range(1, 2 * k - 2, 2):
        ok = True
        for endpoint in (0.0, math.pi):
            ok &= abs(endpoint_trace(Q, order, endpoint)) <= tol
            ok &= bool(np.all(np.abs(endpoint_value(Q, order, endpoint)) <= tol))
        q5.append(bool(ok))
    mean = cos_moment(Q, 0, 0)
    xs = np.linspace(0.0, math.pi, 33)
    vals = evaluate_grid(Q, xs)
    symmetric = bool(np.array_equal(vals, np.swapaxes(vals, 1, 2)))
    return ConditionReport(
        q2_sup_norm=sup,
        q2_pass=sup < 0.5,
        q2_upper_bound=coefficient_norm_bound(Q),
        q5_pass_per_order=q5,
        q6_mean_trace=mean,
        q6_pass=abs(mean) <= tol,
        symmetric=symmetric,
    )

"""Traces of resolvent-power expressions, contour integrals and residues.

On the truncated basis the unperturbed resolvent is diagonal,
R0(lam) = diag(1 / (m^2 - lam)), so Q R0(lam) is the coupling matrix with
scaled columns. All quantities below are built from its powers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Literal

import numpy as np

from optrace.errors import (
    DomainError,
    PoleProximityError,
    SymmetryViolationError,
    TruncationRangeError,
)
from optrace.galerkin import GalerkinModel, SpectralClusters, power_sum

POLE_EPS = 1e-8
IMAG_TOL = 1e-9


def _fsum_complex(values) -> complex:
    values = np.asarray(values, dtype=complex).ravel()
    return complex(math.fsum(values.real), math.fsum(values.imag))


def _fsum_rows(a: np.ndarray) -> np.ndarray:
    """Compensated sum over the last axis of a 2-d complex array."""
    return np.array([_fsum_complex(row) for row in a])


@dataclass(frozen=True)
class ContourSpec:
    center: complex
    radius: float
    nodes: int

    def __post_init__(self):
        if self.radius <= 0:
            raise DomainError("contour radius must be positive")
        if self.nodes < 16:
            raise DomainError("contour needs at least 16 nodes")

    def points(self) -> np.ndarray:
        """Equispaced nodes; conjugate-symmetric about the centre's horizontal line."""
        n = self.nodes
        theta = 2.0 * math.pi * np.arange(n) / n
        unit = np.cos(theta) + 1j * np.sin(theta)
        # mirror the upper half exactly so that node i and node N - i are conjugates
        idx = np.arange(n)
        lower = 2 * idx > n
        unit[lower] = np.conj(unit[n - idx[lower]])
        unit[0] = 1.0
        if n % 2 == 0:
            unit[n // 2] = -1.0
        return self.center + self.radius * unit

    def check_poles(self, poles) -> None:
        """Refuse circles passing within min(radius / 2, 1/2) of a known pole."""
        poles = np.asarray(poles, dtype=complex)
        gap = np.abs(np.abs(poles - self.center) - self.radius)
        limit = min(0.5 * self.radius, 0.5)
        if poles.size and gap.min() < limit:
            bad = poles[np.argmin(gap)]
            raise PoleProximityError(
                f"contour |lam - {self.center}| = {self.radius} passes within {gap.min():.3g} of pole {bad}"
            )


@dataclass(frozen=True)
class ContourOptions:
    """Quadrature settings.

    With ``scale_small_radius`` the residue circle around m^2 has radius
    small_radius * max(1, 2m - 1): the ratio to the nearest other pole stays
    fixed while the integrand magnitude, and with it the rounding noise,
    drops at higher levels.
    """

    small_radius: float = 0.25
    small_nodes: int = 128
    big_nodes: int | None = None
    scale_small_radius: bool = True

    def small_radius_for(self, m: int) -> float:
        if not self.scale_small_radius:
            return self.small_radius
        return self.small_radius * max(1, 2 * m - 1)

    def big_nodes_for(self, p: int) -> int:
        return self.big_nodes if self.big_nodes is not None else max(256, 64 * p)

    def doubled(self, p: int) -> ContourOptions:
        return ContourOptions(self.small_radius, 2 * self.small_nodes, 2 * self.big_nodes_for(p),
                              self.scale_small_radius)


def big_circle(p: int, opts: ContourOptions = ContourOptions()) -> ContourSpec:
    """The circle |lam| = p^2 + p separating levels 0..p from the rest."""
    if p < 1:
        raise DomainError("the separating circle needs p >= 1")
    return ContourSpec(0.0, float(p * p + p), opts.big_nodes_for(p))


def contour_integral(f: Callable[[np.ndarray], np.ndarray], contour: ContourSpec):
    """(1 / 2 pi i) * closed integral of f over the circle, by the trapezoidal rule.

    ``f`` receives the whole node array and returns shape (N,) or (N, K).
    """
    lam = contour.points()
    weights = (lam - contour.center) / contour.nodes
    vals = np.asarray(f(lam), dtype=complex)
    if vals.ndim == 1:
        return _fsum_complex(weights * vals)
    terms = weights[:, None] * vals
    return np.array([_fsum_complex(terms[:, i]) for i in range(vals.shape[1])])


@dataclass(frozen=True)
class TraceVariant:
    """plain: tr (Q R0)^j; resolvent_weighted: tr R0 (Q R0)^j; full_difference: tr (R - R0)."""

    kind: Literal["plain", "resolvent_weighted", "full_difference"]
    j: int = 1

    def __post_init__(self):
        if self.kind not in ("plain", "resolvent_weighted", "full_difference"):
            raise DomainError(f"unknown trace variant {self.kind!r}")
        if self.j < 1:
            raise DomainError("j must be >= 1")

    @classmethod
    def plain(cls, j: int) -> TraceVariant:
        return cls("plain", j)

    @classmethod
    def resolvent_weighted(cls, j: int) -> TraceVariant:
        return cls("resolvent_weighted", j)

    @classmethod
    def full_difference(cls) -> TraceVariant:
        return cls("full_difference")


def _check_off_levels(model: GalerkinModel, lam: np.ndarray) -> None:
    dist = np.abs(lam[:, None] - model.levels[None, :]).min()
    if dist <= POLE_EPS:
        raise PoleProximityError(f"spectral parameter within {dist:.3g} of an unperturbed level")


def trace_powers(model: GalerkinModel, lam, jmax: int) -> tuple[np.ndarray, np.ndarray]:
    """tr (Q R0)^j and tr R0 (Q R0)^j for j = 1..jmax at every lam.

    Returns two complex arrays of shape (len(lam), jmax).
    """
    lam = np.atleast_1d(np.asarray(lam, dtype=complex))
    _check_off_levels(model, lam)
    r0 = 1.0 / (model.levels[None, :] - lam[:, None])
    x = model.coupling[None, :, :] * r0[:, None, :]
    plain = np.empty((lam.size, jmax), dtype=complex)
    weighted = np.empty((lam.size, jmax), dtype=complex)
    power = x
    for j in range(jmax):
        diag = np.einsum("nii->ni", power)
        plain[:, j] = _fsum_rows(diag)
        weighted[:, j] = _fsum_rows(diag * r0)
        if j + 1 < jmax:
            power = power @ x
    return plain, weighted


def full_difference_trace(model: GalerkinModel, lam: complex) -> complex:
    """tr[(A - lam)^-1 - (A0 - lam)^-1] with both inverses formed explicitly."""
    lam = complex(lam)
    _check_off_levels(model, np.array([lam]))
    if np.abs(model.eigenvalues - lam).min() <= POLE_EPS:
        raise PoleProximityError("spectral parameter on the perturbed spectrum")
    n = model.spec.size
    inv = np.linalg.solve(model.matrix - lam * np.eye(n), np.eye(n, dtype=complex))
    return _fsum_complex(np.concatenate([np.diag(inv), -1.0 / (model.levels - lam)]))


def weighted_trace(model: GalerkinModel, lam: complex, variant: TraceVariant) -> complex:
    if variant.kind == "full_difference":
        return full_difference_trace(model, lam)
    plain, weighted = trace_powers(model, [lam], variant.j)
    src = plain if variant.kind == "plain" else weighted
    return complex(src[0, variant.j - 1])


def _check_level(model: GalerkinModel, m: int) -> None:
    if m < 0 or m > model.spec.usable_p:
        raise TruncationRangeError(f"level {m} is beyond usable_p = {model.spec.usable_p}")


def residues_at(model: GalerkinModel, m: int, k: int, jmax: int,
                opts: ContourOptions = ContourOptions()) -> np.ndarray:
    """Res at lam = m^2 of lam^(k-1) tr (Q R0)^j, for j = 1..jmax (one contour sweep)."""
    _check_level(model, m)
    circle = ContourSpec(float(m * m), opts.small_radius_for(m), opts.small_nodes)
    circle.check_poles(np.arange(model.spec.m_max + 1, dtype=float) ** 2)
    lam = circle.points()
    plain, _ = trace_powers(model, lam, jmax)
    f = lam[:, None] ** (k - 1) * plain
    res = contour_integral(lambda _: f, circle)
    mass = np.abs((lam - circle.center)[:, None] * f).sum(axis=0) / circle.nodes
    for j in range(jmax):
        if abs(res[j].imag) > IMAG_TOL * max(1.0, mass[j]):
            raise SymmetryViolationError(
                f"residue at m={m}, j={j + 1} has imaginary part {res[j].imag:.3g}"
            )
    return res.real.copy()


def residue_at(model: GalerkinModel, m: int, k: int, j: int,
               opts: ContourOptions = ContourOptions()) -> float:
    return float(residues_at(model, m, k, j, opts)[j - 1])


Via = Literal["eq24", "eq26", "residue_sum"]


def m_pj_all(model: GalerkinModel, p: int, k: int, jmax: int, via: Via = "residue_sum",
             opts: ContourOptions = ContourOptions()) -> np.ndarray:
    """The contour terms M_pj for j = 1..jmax, computed by one of three routes.

    eq24:        (-1)^(j+1)/(2 pi i) * int lam^k tr R0 (Q R0)^j  over |lam| = p^2 + p
    eq26:        (-1)^j k/(2 pi i j) * int lam^(k-1) tr (Q R0)^j over the same circle
    residue_sum: (-1)^j k/j * sum_{m<=p} Res_{m^2} lam^(k-1) tr (Q R0)^j
    """
    _check_level(model, p)
    js = np.arange(1, jmax + 1)
    signs = np.where(js % 2 == 0, 1.0, -1.0)
    if via == "residue_sum":
        table = np.array([residues_at(model, m, k, jmax, opts) for m in range(p + 1)])
        sums = np.array([math.fsum(table[:, j]) for j in range(jmax)])
        return signs * k / js * sums
    circle = big_circle(p, opts)
    circle.check_poles(np.arange(model.spec.m_max + 1, dtype=float) ** 2)
    lam = circle.points()
    plain, weighted = trace_powers(model, lam, jmax)
    if via == "eq24":
        vals = contour_integral(lambda _: lam[:, None] ** k * weighted, circle)
        return (-signs * vals).real.copy()
    if via == "eq26":
        vals = contour_integral(lambda _: lam[:, None] ** (k - 1) * plain, circle)
        return (signs * k / js * vals).real.copy()
    raise DomainError(f"unknown route {via!r}")


def m_pj(model: GalerkinModel, p: int, k: int, j: int, via: Via = "residue_sum",
         opts: ContourOptions = ContourOptions()) -> float:
    return float(m_pj_all(model, p, k, j, via, opts)[j - 1])


def remainder_estimate(model: GalerkinModel, clusters: SpectralClusters, p: int, k: int, N: int,
                       opts: ContourOptions = ContourOptions()) -> float:
    """M_p^(N): eigen power sums over levels 0..p minus the first N contour terms."""
    eig = math.fsum(power_sum(clusters, m, k) for m in range(p + 1))
    terms = m_pj_all(model, p, k, N, "residue_sum", opts)
    return math.fsum([eig] + [-t for t in terms])


def eigensum_contour(model: GalerkinModel, p: int, k: int,
                     opts: ContourOptions = ContourOptions()) -> complex:
    """(1 / 2 pi i) * int lam^k tr(R - R0) over |lam| = p^2 + p."""
    circle = big_circle(p, opts)
    circle.check_poles(np.concatenate([model.levels, model.eigenvalues]))
    lam = circle.points()
    vals = np.array([full_difference_trace(model, z) for z in lam])
    return contour_integral(lambda _: lam**k * vals, circle)

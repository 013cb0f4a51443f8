"""Finite sections of L = -d^2/dx^2 + Q(x) in the Neumann cosine basis."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from optrace.errors import ClusteringError, ConfigurationError, DomainError, TruncationRangeError
from optrace.potential import TrigOperatorPotential, coupling_matrix


def default_buffer(bandwidth: int) -> int:
    return max(8, 4 * bandwidth)


@dataclass(frozen=True)
class TruncationSpec:
    """Basis levels m = 0..m_max are kept; levels up to usable_p are reported."""

    m_max: int
    d: int
    usable_p: int

    def __post_init__(self):
        if self.m_max < 0 or self.d < 1:
            raise ConfigurationError("m_max must be >= 0 and d >= 1")
        if not 0 <= self.usable_p <= self.m_max:
            raise ConfigurationError(
                f"usable_p = {self.usable_p} must lie in [0, m_max = {self.m_max}]"
            )

    @classmethod
    def for_potential(cls, Q: TrigOperatorPotential, usable_p: int, buffer: int | None = None,
                      m_max: int | None = None) -> TruncationSpec:
        """Pick m_max = usable_p + buffer with buffer >= 4 * bandwidth."""
        if buffer is None:
            buffer = default_buffer(Q.bandwidth)
        if buffer < 4 * Q.bandwidth:
            raise ConfigurationError(
                f"buffer {buffer} is below 4 * bandwidth = {4 * Q.bandwidth}"
            )
        if m_max is None:
            m_max = usable_p + buffer
        elif usable_p + buffer > m_max:
            raise ConfigurationError(
                f"m_max = {m_max} leaves less than buffer = {buffer} levels above usable_p = {usable_p}"
            )
        return cls(m_max=m_max, d=Q.dim, usable_p=usable_p)

    @property
    def size(self) -> int:
        return (self.m_max + 1) * self.d

    def has_buffer(self, bandwidth: int) -> bool:
        return self.m_max - self.usable_p >= 4 * bandwidth


def level_values(spec: TruncationSpec) -> np.ndarray:
    """Unperturbed eigenvalue m^2 for every basis index (m, n)."""
    return np.repeat(np.arange(spec.m_max + 1, dtype=float) ** 2, spec.d)


def assemble_matrix(Q: TrigOperatorPotential, spec: TruncationSpec) -> np.ndarray:
    if Q.dim != spec.d:
        raise ConfigurationError(f"potential has dim {Q.dim}, truncation expects {spec.d}")
    return np.diag(level_values(spec)) + coupling_matrix(Q, spec.m_max)


@dataclass
class GalerkinModel:
    """Cached truncated operator: coupling part, levels, and the full matrix."""

    potential: TrigOperatorPotential
    spec: TruncationSpec
    coupling: np.ndarray = field(init=False, repr=False)
    levels: np.ndarray = field(init=False, repr=False)
    matrix: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.potential.dim != self.spec.d:
            raise ConfigurationError(
                f"potential has dim {self.potential.dim}, truncation expects {self.spec.d}"
            )
        self.coupling = coupling_matrix(self.potential, self.spec.m_max)
        self.levels = level_values(self.spec)
        self.matrix = np.diag(self.levels) + self.coupling
        self._eigenvalues = None

    def clusters(self, sup_norm_bound: float, strict: bool = True) -> SpectralClusters:
        return eigen_clusters(self.matrix, self.spec, sup_norm_bound, strict=strict,
                              eigenvalues=self.eigenvalues, coupling=self.coupling)

    @property
    def eigenvalues(self) -> np.ndarray:
        if self._eigenvalues is None:
            self._eigenvalues = np.linalg.eigvalsh(self.matrix)
        return self._eigenvalues


@dataclass
class SpectralClusters:
    """Eigenvalues grouped by level, with shifts lambda_mn - m^2 kept separately.

    The shifts carry the precision: for large m, lambda itself cannot resolve
    a shift below ulp(m^2).
    """

    shifts: dict[int, np.ndarray]
    sup_norm_bound: float
    usable_p: int

    @property
    def clusters(self) -> dict[int, np.ndarray]:
        return {m: m * m + v for m, v in self.shifts.items()}

    def __getitem__(self, m: int) -> np.ndarray:
        return m * m + self.shifts[m]

    def to_dict(self) -> dict:
        return {
            "sup_norm_bound": self.sup_norm_bound,
            "usable_p": self.usable_p,
            "clusters": {str(m): (m * m + v).tolist() for m, v in self.shifts.items()},
        }


def refine_shifts(coupling: np.ndarray, spec: TruncationSpec, m: int, shifts: np.ndarray,
                  max_iter: int = 60) -> np.ndarray:
    """Polish the shifts of cluster m with the Feshbach effective matrix.

    delta solves  delta in spec(C_II + C_IR (m^2 + delta - A_RR)^-1 C_RI),
    where I is the level-m block and R everything else. The effective matrix
    has entries of the size of Q, so its eigenvalues are accurate relative to
    ||Q|| instead of relative to ||A|| ~ m_max^2.
    """
    d = spec.d
    inner = np.arange(m * d, (m + 1) * d)
    rest = np.setdiff1d(np.arange(spec.size), inner)
    gaps = float(m * m) - level_values(spec)[rest]
    c_ii = coupling[np.ix_(inner, inner)]
    c_ir = coupling[np.ix_(inner, rest)]
    c_rr = coupling[np.ix_(rest, rest)]
    out = np.array(shifts, dtype=float)
    if rest.size == 0:
        return np.linalg.eigvalsh(c_ii)
    for n in range(d):
        delta = out[n]
        for _ in range(max_iter):
            shifted = np.diag(gaps + delta) - c_rr
            h_eff = c_ii + c_ir @ np.linalg.solve(shifted, c_ir.T)
            new = np.linalg.eigvalsh(0.5 * (h_eff + h_eff.T))[n]
            if abs(new - delta) <= 1e-17 + 4e-16 * abs(new):
                delta = new
                break
            delta = new
        else:
            # no contraction (strong coupling): keep the dense value
            delta = out[n]
        out[n] = delta
    return np.sort(out)


def eigen_clusters(matrix: np.ndarray, spec: TruncationSpec, sup_norm_bound: float,
                   strict: bool = True, eigenvalues: np.ndarray | None = None,
                   coupling: np.ndarray | None = None, refine: bool = True) -> SpectralClusters:
    """Group the sorted spectrum into consecutive blocks of d around 0, 1, 4, ...

    With ``strict`` the bound must be below 1/2 and every eigenvalue must sit
    within it of its level. Without it, each group is only required to lie
    between the midpoints to the neighbouring levels, which is what the trace
    machinery needs when exploring potentials that break the norm condition.
    Clusters up to usable_p are polished by ``refine_shifts``.
    """
    if strict and not sup_norm_bound < 0.5:
        raise DomainError(f"clustering needs sup norm bound < 1/2, got {sup_norm_bound}")
    lam = np.sort(np.linalg.eigvalsh(matrix) if eigenvalues is None else eigenvalues)
    d = spec.d
    if lam.size != spec.size:
        raise ConfigurationError("matrix size does not match the truncation")
    if coupling is None:
        coupling = matrix - np.diag(level_values(spec))
    shifts = {}
    for m in range(spec.m_max + 1):
        group = lam[m * d:(m + 1) * d]
        level = float(m * m)
        if strict:
            lo, hi = level - sup_norm_bound, level + sup_norm_bound
        else:
            lo = level - (m - 0.5) if m > 0 else -math.inf
            hi = level + m + 0.5
        # slack for the rounding of the dense eigensolver
        slack = 1e-9
        if group[0] < lo - slack or group[-1] > hi + slack:
            raise ClusteringError(
                f"cluster m={m} spans [{group[0]:.12g}, {group[-1]:.12g}], outside [{lo:.6g}, {hi:.6g}]"
            )
        delta = group - level
        if refine and m <= spec.usable_p:
            delta = refine_shifts(coupling, spec, m, delta)
        shifts[m] = delta
    return SpectralClusters(shifts, sup_norm_bound, spec.usable_p)


def power_sum(clusters: SpectralClusters, m: int, k: int) -> float:
    """sum_n (lambda_mn^k - m^(2k)), expanded in the shift lambda_mn - m^2."""
    if k < 2:
        raise DomainError("k must be >= 2")
    if m > clusters.usable_p or m < 0:
        raise TruncationRangeError(f"level {m} is beyond usable_p = {clusters.usable_p}")
    mu = float(m * m)
    terms = []
    for delta in clusters.shifts[m]:
        for i in range(1, k + 1):
            terms.append(math.comb(k, i) * mu ** (k - i) * delta**i)
    return math.fsum(terms)

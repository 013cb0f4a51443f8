"""Both sides of the k-th regularized trace formula and its intermediate identities.

Per level m the left side collects

    bracket_m = sum_n (lam_mn^k - m^2k)
                - k sum_{j=2}^{2k+2} (-1)^j / j * Res_{m^2}[lam^(k-1) tr (Q R0)^j]
                - k/pi m^(2k-2) int tr Q
                - 4k/pi sum_{i=2}^k m^(2k-2i) a_i

with the last two corrections taken as zero at m = 0. The right side is

    (-1)^(k-1) k 2^(-2k) [tr Q^(2k-2)(0) + tr Q^(2k-2)(pi)] + 2k/pi a_k,
    a_i = (-1)^i 2^(-2i) [tr Q^(2i-3)(pi) - tr Q^(2i-3)(0)].
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np

from optrace.errors import DomainError
from optrace.galerkin import GalerkinModel, SpectralClusters, TruncationSpec, power_sum
from optrace.potential import (
    ConditionReport,
    TrigOperatorPotential,
    check_conditions,
    cos_moment,
    endpoint_trace,
    sup_norm_estimate,
)
from optrace.resolvent import ContourOptions, m_pj_all, residues_at

PI = math.pi


def _endpoint_jump(Q: TrigOperatorPotential, order: int) -> float:
    return endpoint_trace(Q, order, PI) - endpoint_trace(Q, order, 0.0)


def ibp_check(Q: TrigOperatorPotential, m: int, k: int) -> tuple[float, float]:
    """Fourier moment of tr Q against cos 2mx, directly and after 2k-2 integrations by parts."""
    if m < 1:
        raise DomainError("m must be >= 1")
    if k < 2:
        raise DomainError("k must be >= 2")
    lhs = cos_moment(Q, 0, m)
    terms = [
        (-1) ** i * (2.0 * m) ** (2 - 2 * i) * _endpoint_jump(Q, 2 * i - 3)
        for i in range(2, k + 1)
    ]
    terms.append((-1) ** (k - 1) * (2.0 * m) ** (2 - 2 * k) * cos_moment(Q, 2 * k - 2, m))
    return lhs, math.fsum(terms)


def fourier_boundary_sum(Q: TrigOperatorPotential, k: int, m_terms: int) -> tuple[float, float]:
    """Partial sum of (1/pi) int tr Q^(2k-2) cos 2mx over m = 1..m_terms, and its limit."""
    if m_terms < 1:
        raise DomainError("m_terms must be >= 1")
    partial = math.fsum(cos_moment(Q, 2 * k - 2, m) / PI for m in range(1, m_terms + 1))
    rhs = math.fsum([
        0.25 * (endpoint_trace(Q, 2 * k - 2, 0.0) + endpoint_trace(Q, 2 * k - 2, PI)),
        -_endpoint_jump(Q, 2 * k - 3) / (2 * PI),
    ])
    return partial, rhs


def a_coefficient(Q: TrigOperatorPotential, i: int) -> float:
    if i < 2:
        raise DomainError("i must be >= 2")
    return (-1) ** i * 2.0 ** (-2 * i) * _endpoint_jump(Q, 2 * i - 3)


def rhs_value(Q: TrigOperatorPotential, k: int, simplified: bool = False) -> float:
    """Right side of the trace formula; ``simplified`` drops the a_k term."""
    if k < 2:
        raise DomainError("k must be >= 2")
    first = (-1) ** (k - 1) * k * 2.0 ** (-2 * k) * (
        endpoint_trace(Q, 2 * k - 2, 0.0) + endpoint_trace(Q, 2 * k - 2, PI)
    )
    if simplified:
        report = check_conditions(Q, k)
        if not (report.q5_pass and report.q6_pass):
            warnings.warn("simplified right side used although the endpoint and zero-mean conditions do not hold", stacklevel=2)
        return first
    return math.fsum([first, 2.0 / PI * k * a_coefficient(Q, k)])


def rhs_candidates(Q: TrigOperatorPotential, k: int) -> dict[str, float]:
    """The right side with and without the factor k on the endpoint term.

    The limit display before the final formula lacks that factor on its first
    term; both values are reported so a mismatch would be visible.
    """
    endpoint = (-1) ** (k - 1) * 2.0 ** (-2 * k) * (
        endpoint_trace(Q, 2 * k - 2, 0.0) + endpoint_trace(Q, 2 * k - 2, PI)
    )
    tail = 2.0 / PI * k * a_coefficient(Q, k)
    return {"with_k": math.fsum([k * endpoint, tail]), "without_k": math.fsum([endpoint, tail])}


def first_order_correction(Q: TrigOperatorPotential, m: int, k: int) -> float:
    if m == 0:
        return 0.0
    return k / PI * float(m) ** (2 * k - 2) * cos_moment(Q, 0, 0)


def boundary_correction(Q: TrigOperatorPotential, m: int, k: int) -> float:
    if m == 0:
        return 0.0
    return 4 * k / PI * math.fsum(
        float(m) ** (2 * k - 2 * i) * a_coefficient(Q, i) for i in range(2, k + 1)
    )


def terminal_term(Q: TrigOperatorPotential, m: int, k: int) -> float:
    """k/pi (-1)^(k-1) 2^(2-2k) int tr Q^(2k-2) cos 2mx, the leftover of the by-parts cascade."""
    if m == 0:
        return 0.0
    return k / PI * (-1) ** (k - 1) * 2.0 ** (2 - 2 * k) * cos_moment(Q, 2 * k - 2, m)


def first_order_chain(Q: TrigOperatorPotential, p: int, k: int) -> float:
    """M_p1 reassembled from closed-form first-order, boundary and terminal pieces."""
    return math.fsum(
        first_order_correction(Q, m, k) + boundary_correction(Q, m, k) + terminal_term(Q, m, k)
        for m in range(1, p + 1)
    )


@dataclass
class TraceTermBreakdown:
    m: int
    eigensum: float
    residue_correction: float
    first_order_correction: float
    boundary_correction: float
    bracket: float


def level_breakdown(Q: TrigOperatorPotential, m: int, k: int, eigensum: float,
                    residues: np.ndarray) -> TraceTermBreakdown:
    """Compose one bracket from the eigensum and residues for j = 1..2k+2."""
    js = range(2, 2 * k + 3)
    residue_correction = k * math.fsum((-1) ** j / j * residues[j - 1] for j in js)
    first = first_order_correction(Q, m, k)
    boundary = boundary_correction(Q, m, k)
    bracket = math.fsum([eigensum, -residue_correction, -first, -boundary])
    return TraceTermBreakdown(m, eigensum, residue_correction, first, boundary, bracket)


def lhs_partial(model: GalerkinModel, clusters: SpectralClusters, k: int, p: int,
                opts: ContourOptions = ContourOptions()) -> tuple[float, list[TraceTermBreakdown]]:
    """Partial sum over m = 0..p of the regularized brackets."""
    if k < 2:
        raise DomainError("k must be >= 2")
    Q = model.potential
    breakdowns = [
        level_breakdown(Q, m, k, power_sum(clusters, m, k), residues_at(model, m, k, 2 * k + 2, opts))
        for m in range(p + 1)
    ]
    return math.fsum(b.bracket for b in breakdowns), breakdowns


@dataclass
class ReportRow:
    p: int
    lhs_partial: float
    rhs: float
    deviation: float
    remainder_N: float


@dataclass
class VerificationReport:
    k: int
    d: int
    potential: dict
    N: int
    rows: list[ReportRow]
    conditions: ConditionReport
    settings: dict
    rhs_candidates: dict[str, float]
    breakdowns: list[TraceTermBreakdown] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def tolerance(self) -> float:
        """Default convergence tolerance derived from the remainder diagnostic.

        LHS(p) - RHS equals M_p^(N) minus the Fourier tail beyond p, so twice
        the larger of |M_p^(N)| + |tail| over the last two rows bounds what the
        remaining rows can still move.
        """
        tails = self.settings.get("fourier_tail", {})
        scale = [abs(r.remainder_N) + abs(tails.get(str(r.p), 0.0)) for r in self.rows[-2:]]
        return 2.0 * max(scale, default=0.0) + 1e-12

    def converged(self, tol: float | None = None) -> bool:
        if not self.rows:
            return True
        tol = self.tolerance() if tol is None else tol
        return self.rows[-1].deviation <= tol

    def to_dict(self) -> dict:
        return {
            "k": self.k,
            "d": self.d,
            "N": self.N,
            "potential": self.potential,
            "rows": [asdict(r) for r in self.rows],
            "conditions": self.conditions.to_dict(),
            "settings": self.settings,
            "rhs_candidates": dict(self.rhs_candidates),
            "breakdowns": [asdict(b) for b in self.breakdowns],
            "warnings": list(self.warnings),
        }

    @classmethod
    def from_dict(cls, data: dict) -> VerificationReport:
        return cls(
            k=data["k"],
            d=data["d"],
            potential=data["potential"],
            N=data["N"],
            rows=[ReportRow(**r) for r in data["rows"]],
            conditions=ConditionReport.from_dict(data["conditions"]),
            settings=data["settings"],
            rhs_candidates=data["rhs_candidates"],
            breakdowns=[TraceTermBreakdown(**b) for b in data["breakdowns"]],
            warnings=list(data["warnings"]),
        )


def fourier_tail(Q: TrigOperatorPotential, k: int, p: int) -> float:
    """RHS minus the terminal terms summed over m = 1..p (exact for cosine potentials)."""
    partial, limit = fourier_boundary_sum(Q, k, max(p, 1))
    if p == 0:
        partial = 0.0
    scale = k * (-1) ** (k - 1) * 2.0 ** (2 - 2 * k)
    return scale * (limit - partial)


def verify_convergence(Q: TrigOperatorPotential, k: int, p_list, spec: TruncationSpec | None = None,
                       opts: ContourOptions = ContourOptions()) -> VerificationReport:
    """Run the whole pipeline once and tabulate LHS(p), RHS and M_p^(2k+2) for each p."""
    p_list = sorted(int(p) for p in p_list)
    if not p_list:
        raise DomainError("p_list must not be empty")
    p_max = p_list[-1]
    if spec is None:
        spec = TruncationSpec.for_potential(Q, p_max)
    if p_max > spec.usable_p:
        raise DomainError(f"max p = {p_max} exceeds usable_p = {spec.usable_p}")
    conditions = check_conditions(Q, k)
    notes = conditions.warnings()
    if not spec.has_buffer(Q.bandwidth):
        notes.append("truncation buffer below 4 * bandwidth")

    model = GalerkinModel(Q, spec)
    clusters = model.clusters(sup_norm_estimate(Q), strict=conditions.q2_pass)
    N = 2 * k + 2
    rhs = rhs_value(Q, k)

    residue_table = [residues_at(model, m, k, N, opts) for m in range(p_max + 1)]
    breakdowns = [
        level_breakdown(Q, m, k, power_sum(clusters, m, k), residue_table[m])
        for m in range(p_max + 1)
    ]
    js = np.arange(1, N + 1)
    coeff = np.where(js % 2 == 0, 1.0, -1.0) * k / js
    rows = []
    for p in p_list:
        lhs = math.fsum(b.bracket for b in breakdowns[:p + 1])
        eig = math.fsum(b.eigensum for b in breakdowns[:p + 1])
        m_terms = [coeff[j] * math.fsum(r[j] for r in residue_table[:p + 1]) for j in range(N)]
        remainder = math.fsum([eig] + [-t for t in m_terms])
        rows.append(ReportRow(p, lhs, rhs, abs(lhs - rhs), remainder))

    settings = {
        "m_max": spec.m_max,
        "usable_p": spec.usable_p,
        "small_radius": opts.small_radius,
        "scale_small_radius": opts.scale_small_radius,
        "small_nodes": opts.small_nodes,
        "big_nodes": opts.big_nodes,
        "fourier_tail": {str(p): fourier_tail(Q, k, p) for p in p_list},
    }
    return VerificationReport(
        k=k,
        d=Q.dim,
        potential=Q.describe(),
        N=N,
        rows=rows,
        conditions=conditions,
        settings=settings,
        rhs_candidates=rhs_candidates(Q, k),
        breakdowns=breakdowns,
        warnings=notes,
    )


def route_table(model: GalerkinModel, p_list, k: int, jmax: int,
                    opts: ContourOptions = ContourOptions()) -> list[dict]:
    """M_pj by the three routes, with their largest pairwise spread."""
    out = []
    for p in p_list:
        routes = {via: m_pj_all(model, p, k, jmax, via, opts) for via in ("eq24", "eq26", "residue_sum")}
        for j in range(1, jmax + 1):
            vals = [routes[v][j - 1] for v in ("eq24", "eq26", "residue_sum")]
            out.append({
                "p": p, "j": j,
                "eq24": vals[0], "eq26": vals[1], "residue_sum": vals[2],
                "spread": max(vals) - min(vals),
            })
    return out

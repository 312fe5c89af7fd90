"""Entanglement diagnostics across an Alice:Bob cut.

All logarithms are base 2, so entropies and log-negativities are in ebits.
Distillable entanglement itself is never computed: the single-copy
protocol in :mod:`mes_locc.protocols` gives a lower bound, and
log-negativity gives an upper bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .states import (
    RHO_S_LABELS,
    bell_indices,
    bell_vector,
    build_rho,
    build_rho_s,
    factorized_rho,
)
from .tensor import (
    EXACT_TOL,
    PSD_TOL,
    SPECTRAL_TOL,
    DensityMatrix,
    LayoutError,
    StateVector,
    SubsystemLayout,
    as_density,
    hermitian_eigenvalues,
    partial_trace,
    partial_transpose,
    permute_subsystems,
    trace_norm,
)

RANK_TOL = 1e-10


@dataclass(frozen=True)
class Cut:
    party_a: frozenset[str]
    party_b: frozenset[str]

    def __post_init__(self):
        object.__setattr__(self, "party_a", frozenset(self.party_a))
        object.__setattr__(self, "party_b", frozenset(self.party_b))
        if self.party_a & self.party_b:
            raise LayoutError(f"cut sides overlap: {sorted(self.party_a & self.party_b)}")

    @classmethod
    def of(cls, layout: SubsystemLayout) -> "Cut":
        """The cut given by the layout's own A/B party assignment."""
        return cls(frozenset(layout.labels_of("A")), frozenset(layout.labels_of("B")))

    @classmethod
    def between(cls, a: Iterable[str], b: Iterable[str]) -> "Cut":
        return cls(frozenset(a), frozenset(b))

    def check(self, layout: SubsystemLayout) -> None:
        if (self.party_a | self.party_b) != set(layout.labels):
            raise LayoutError(f"cut {sorted(self.party_a)}:{sorted(self.party_b)} does not cover {layout.labels}")
        if not self.party_a or not self.party_b:
            raise LayoutError("both sides of a cut must be nonempty")


def _cut(x, cut: Cut | None) -> Cut:
    cut = Cut.of(x.layout) if cut is None else cut
    cut.check(x.layout)
    return cut


def schmidt_decomposition(phi: StateVector, cut: Cut | None = None) -> tuple[np.ndarray, int]:
    """Descending Schmidt coefficients of ``phi`` across ``cut`` and the Schmidt rank."""
    if not isinstance(phi, StateVector):
        raise TypeError("Schmidt decomposition needs a pure state")
    cut = _cut(phi, cut)
    a = [lbl for lbl in phi.layout.labels if lbl in cut.party_a]
    b = [lbl for lbl in phi.layout.labels if lbl in cut.party_b]
    ordered = permute_subsystems(phi, a + b)
    da = phi.layout.subset(a).total_dim
    coeffs = np.linalg.svd(ordered.amplitudes.reshape(da, -1), compute_uv=False)
    return coeffs, int(np.sum(coeffs > RANK_TOL))


def shannon_bits(p) -> float:
    p = np.asarray(p, dtype=float)
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p))) + 0.0


def entanglement_entropy(phi: StateVector, cut: Cut | None = None) -> float:
    coeffs, _ = schmidt_decomposition(phi, cut)
    return shannon_bits(coeffs**2)


def von_neumann_entropy(rho) -> float:
    lam = np.clip(hermitian_eigenvalues(as_density(rho)), 0.0, None)
    return shannon_bits(lam)


def reduced_entropy(rho, keep: Iterable[str]) -> float:
    """Von Neumann entropy of the reduction to ``keep``."""
    return von_neumann_entropy(partial_trace(rho, keep))


def _pt_across(rho, cut: Cut | None) -> np.ndarray:
    cut = _cut(rho, cut)
    return partial_transpose(rho, sorted(cut.party_b))


def log_negativity(rho, cut: Cut | None = None) -> float:
    """log2 of the trace norm of the partial transpose."""
    return max(0.0, math.log2(trace_norm(_pt_across(rho, cut))))


def negativity(rho, cut: Cut | None = None) -> float:
    return (trace_norm(_pt_across(rho, cut)) - 1.0) / 2.0


def ppt_check(rho, cut: Cut | None = None, tol: float = PSD_TOL) -> tuple[bool, float]:
    """``(is_ppt, min_eigenvalue)`` of the partial transpose across ``cut``."""
    lo = float(hermitian_eigenvalues(_pt_across(rho, cut))[0])
    return lo >= -tol, lo


def smolin_terms() -> list[tuple[float, DensityMatrix]]:
    """The d=2 separable decomposition of rho_s, one product term per Bell index.

    Each term is |phi><phi|_{A1A2} (x) |phi><phi|_{B1B2}, returned on the
    A1,B1,A2,B2 layout.
    """
    layout = SubsystemLayout.of(("A1", 2, "A"), ("A2", 2, "A"), ("B1", 2, "B"), ("B2", 2, "B"))
    terms = []
    for idx in bell_indices(2):
        v = np.kron(bell_vector(idx), bell_vector(idx))
        term = DensityMatrix._trusted(layout, np.outer(v, v.conj()))
        terms.append((0.25, permute_subsystems(term, RHO_S_LABELS)))
    return terms


def smolin_decomposition_check(tolerance: float = EXACT_TOL, d: int = 2) -> tuple[bool, float]:
    """Compare rho_s(2) against its explicit product-term decomposition.

    Returns ``(equal, frobenius_distance)``.  Only d=2 has this form.
    """
    if d != 2:
        raise ValueError(f"the explicit Smolin decomposition exists only for d=2, got d={d}")
    rhs = sum(w * t.matrix for w, t in smolin_terms())
    dist = float(np.linalg.norm(build_rho_s(2).matrix - rhs))
    return dist <= tolerance, dist


def is_maximally_entangled(phi: StateVector, d: int, tol: float = EXACT_TOL) -> bool:
    """True when ``phi`` has Schmidt rank >= d and entropy >= log2 d."""
    _, rank = schmidt_decomposition(phi)
    return rank >= d and entanglement_entropy(phi) >= math.log2(d) - tol


def check_entry(name: str, d: int, params: dict, measured, tolerance, passed: bool | None) -> dict:
    """One report line; ``passed=None`` marks an informational entry."""
    return {
        "name": name,
        "d": d,
        "params": params,
        "measured": measured,
        "tolerance": tolerance,
        "pass": None if passed is None else bool(passed),
    }


def necessity_report(d: int, psi: StateVector, psi_name: str = "psi", include_distillation: bool = True,
                     tolerances: dict | None = None) -> dict:
    """Collect the computable ingredients of the necessity argument for ``psi``.

    Checks: factorization of rho, PPT of rho_s, log-negativity equality
    between rho and psi, single-copy distillation yield, and the Schmidt
    rank / entropy of psi against log2 d.  The verdict reports whether psi
    meets the bound; the first three checks pass for every psi.
    """
    if d not in (2, 3):
        raise ValueError(f"necessity_report supports d in {{2, 3}}, got {d}")
    from .protocols import distill_copy

    tols = {"exact": EXACT_TOL, "psd": PSD_TOL, "spectral": SPECTRAL_TOL, **(tolerances or {})}
    exact, spectral = tols["exact"], tols["spectral"]
    params = {"psi": psi_name}
    checks = []

    rho = build_rho(d, psi)
    dist = float(np.linalg.norm(rho.matrix - factorized_rho(d, psi).matrix))
    checks.append(check_entry("rho.factorization", d, params, dist, exact, dist <= exact))

    ok, lo = ppt_check(build_rho_s(d), tol=tols["psd"])
    checks.append(check_entry("rho_s.ppt", d, {}, lo, tols["psd"], ok))

    ln_rho, ln_psi = log_negativity(rho), log_negativity(psi)
    gap = abs(ln_rho - ln_psi)
    checks.append(check_entry("rho.lognegativity_chain", d, dict(params, log_negativity_psi=ln_psi),
                              ln_rho, spectral, gap <= spectral))

    target = math.log2(d)
    if include_distillation:
        fids, ents = [], []
        for comp in bell_indices(d):
            res = distill_copy(d, comp, psi)
            fids.append(res.fidelity())
            ents.append(reduced_entropy(res.output, ["A3"]))
        worst_f, worst_e = min(fids), min(ents)
        checks.append(check_entry("distill.fidelity", d, params, worst_f, exact,
                                  abs(worst_f - 1.0) <= exact))
        checks.append(check_entry("distill.yield", d, params, worst_e, exact,
                                  abs(worst_e - target) <= exact))

    ent = entanglement_entropy(psi)
    _, rank = schmidt_decomposition(psi)
    meets = rank >= d and ent >= target - exact
    checks.append(check_entry("psi.schmidt_rank", d, params, rank, None, rank >= d))
    checks.append(check_entry("psi.entropy", d, params, ent, exact, ent >= target - exact))

    return {
        "d": d,
        "psi": psi_name,
        "checks": checks,
        "verdict": "consistent with necessity bound" if meets else "below necessity bound",
    }

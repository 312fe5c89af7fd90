"""Verification suites producing the JSON check report.

A report is ``{"config": ..., "checks": [...], "summary": ..., "pass": bool}``
where every check is ``{name, d, params, measured, tolerance, pass}``.
Checks are sorted by name, then d, then parameters, so equal configs give
byte-identical reports.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .entanglement import (
    check_entry,
    log_negativity,
    necessity_report,
    smolin_decomposition_check,
)
from .protocols import bob_premessage_state, discriminate, teleport
from .states import (
    BellIndex,
    bell_basis_matrix,
    bell_indices,
    bell_state,
    bell_vector,
    conjugate_state,
    haar_random_state,
    schmidt_state,
    weyl_operator,
)
from .tensor import EXACT_TOL, PSD_TOL, SPECTRAL_TOL, StateVector, fidelity_pure, partial_trace

SUITES = ("basis", "teleport", "discriminate", "necessity")
MAX_D = 6
PROTOCOL_MAX_D = 5
RHO_MAX_D = 3
TELEPORT_INPUTS = 20
WEAK_MARGIN = 1e-6

WEAK_SCHMIDT = (math.sqrt(0.8), math.sqrt(0.2))
WEAK_SCHMIDT_3 = (math.sqrt(0.5), math.sqrt(0.3), math.sqrt(0.2))


@dataclass
class SuiteConfig:
    suites: tuple[str, ...] = SUITES
    max_d: int = 3
    seed: int = 0
    tolerances: dict = field(default_factory=dict)

    def __post_init__(self):
        unknown = [s for s in self.suites if s not in SUITES]
        if unknown:
            raise ValueError(f"unknown suite(s) {unknown}; choose from {SUITES}")
        if not 2 <= self.max_d <= MAX_D:
            raise ValueError(f"max_d must be in [2, {MAX_D}], got {self.max_d}")
        bad = set(self.tolerances) - {"exact", "psd", "spectral"}
        if bad:
            raise ValueError(f"unknown tolerance keys {sorted(bad)}")

    def tol(self, key: str) -> float:
        default = {"exact": EXACT_TOL, "psd": PSD_TOL, "spectral": SPECTRAL_TOL}[key]
        return float(self.tolerances.get(key, default))


def _maxdev(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))


def basis_checks(d: int, cfg: SuiteConfig) -> list[dict]:
    tol = cfg.tol("exact")
    out = []
    b = bell_basis_matrix(d)
    gram = b.conj() @ b.T
    dev = _maxdev(gram, np.eye(d * d))
    out.append(check_entry("basis.gram", d, {}, dev, tol, dev <= tol))
    dev = _maxdev(b.T @ b.conj(), np.eye(d * d))
    out.append(check_entry("basis.completeness", d, {}, dev, tol, dev <= tol))

    red = 0.0
    disp = conj = 0.0
    ref = bell_state(BellIndex(d, 0, 0))
    for idx in bell_indices(d):
        phi = bell_state(idx)
        for keep in ("A", "B"):
            red = max(red, _maxdev(partial_trace(phi, [keep]).matrix, np.eye(d) / d))
        displaced = np.kron(np.eye(d), weyl_operator(idx)) @ ref.amplitudes
        disp = max(disp, _maxdev(displaced, phi.amplitudes))
        conj = max(conj, _maxdev(conjugate_state(phi).amplitudes, bell_vector(idx.neg())))
    out.append(check_entry("basis.reductions", d, {}, red, tol, red <= tol))
    out.append(check_entry("basis.weyl_displacement", d, {}, disp, tol, disp <= tol))
    out.append(check_entry("basis.conjugation", d, {}, conj, tol, conj <= tol))
    return out


def teleport_checks(d: int, cfg: SuiteConfig) -> list[dict]:
    tol = cfg.tol("exact")
    params = {"inputs": TELEPORT_INPUTS, "seed": cfg.seed}
    resource = bell_state(BellIndex(d, 0, 0))
    counts, pdev, fdev, cdev, pruned = [], 0.0, 0.0, 0.0, 0.0
    for k in range(TELEPORT_INPUTS):
        chi = haar_random_state([d], np.random.SeedSequence([cfg.seed, d, k]), labels=["C"])
        target = StateVector(resource.layout.subset(["B"]), chi.amplitudes)
        run = teleport(chi, resource)
        counts.append(len(run.branches))
        pruned += run.pruned_mass
        cdev = max(cdev, abs(run.total_probability - 1.0))
        for br in run.branches:
            pdev = max(pdev, abs(br.probability - 1.0 / d**2))
            fdev = max(fdev, 1.0 - fidelity_pure(target, br.post_state))
    n_ok = all(c == d * d for c in counts)
    return [
        check_entry("teleport.branch_count", d, params, min(counts), 0, n_ok),
        check_entry("teleport.completeness", d, params, cdev, tol, cdev <= tol),
        check_entry("teleport.fidelity", d, params, fdev, tol, fdev <= tol),
        check_entry("teleport.probability", d, params, pdev, tol, pdev <= tol),
        check_entry("teleport.pruned_mass", d, params, pruned, tol, pruned <= tol),
    ]


def discriminate_checks(d: int, cfg: SuiteConfig) -> list[dict]:
    tol = cfg.tol("exact")
    resource = bell_state(BellIndex(d, 0, 0))
    worst, cdev, nsig, pruned = 1.0, 0.0, 0.0, 0.0
    bob_ref = None
    for hidden in bell_indices(d):
        run = discriminate(hidden, resource)
        worst = min(worst, run.distribution().get(hidden, 0.0))
        cdev = max(cdev, abs(run.total_probability - 1.0))
        pruned += run.pruned_mass
        bob = bob_premessage_state(hidden, resource).matrix
        bob_ref = bob if bob_ref is None else bob_ref
        nsig = max(nsig, _maxdev(bob, bob_ref))
    params = {"resource": "mes"}
    out = [
        check_entry("discriminate.completeness", d, params, cdev, tol, cdev <= tol),
        check_entry("discriminate.no_signalling", d, params, nsig, tol, nsig <= tol),
        check_entry("discriminate.pruned_mass", d, params, pruned, tol, pruned <= tol),
        check_entry("discriminate.success", d, params, worst, tol, abs(worst - 1.0) <= tol),
    ]
    if d == 2:
        weak = schmidt_state(WEAK_SCHMIDT)
        probs = [discriminate(h, weak).distribution().get(h, 0.0) for h in bell_indices(d)]
        lowest = min(probs)
        out.append(check_entry("discriminate.weak_resource", d, {"resource": "schmidt:0.8,0.2 (squared)"},
                               lowest, WEAK_MARGIN, lowest < 1.0 - WEAK_MARGIN))
    return out


def _chain_psis(d: int) -> list[tuple[str, StateVector]]:
    return [
        (f"mes:{d}", bell_state(BellIndex(d, 0, 0))),
        ("schmidt:0.8,0.2 (squared)", schmidt_state(WEAK_SCHMIDT)),
        ("schmidt:0.5,0.3,0.2 (squared)", schmidt_state(WEAK_SCHMIDT_3)),
    ]


def necessity_checks(d: int, cfg: SuiteConfig) -> list[dict]:
    out = []
    tols = {k: cfg.tol(k) for k in ("exact", "psd", "spectral")}
    for k, (name, psi) in enumerate(_chain_psis(d)):
        if k == 0:
            rep = necessity_report(d, psi, name, tolerances=tols)
            out.extend(rep["checks"])
        else:
            rep = necessity_report(d, psi, name, include_distillation=False, tolerances=tols)
            out.extend(c for c in rep["checks"] if c["name"] in ("rho.factorization", "rho.lognegativity_chain"))
    ln = log_negativity(bell_state(BellIndex(d, 0, 0)))
    tol = cfg.tol("spectral")
    out.append(check_entry("mes.lognegativity", d, {}, ln, tol, abs(ln - math.log2(d)) <= tol))
    if d == 2:
        ok, dist = smolin_decomposition_check(cfg.tol("exact"))
        out.append(check_entry("rho_s.smolin_decomposition", d, {}, dist, cfg.tol("exact"), ok))
    return out


_RUNNERS = {
    "basis": (basis_checks, MAX_D),
    "teleport": (teleport_checks, PROTOCOL_MAX_D),
    "discriminate": (discriminate_checks, PROTOCOL_MAX_D),
    "necessity": (necessity_checks, RHO_MAX_D),
}


def sort_checks(checks: list[dict]) -> list[dict]:
    return sorted(checks, key=lambda c: (c["name"], c["d"], json.dumps(c["params"], sort_keys=True)))


def summarize(checks: list[dict], config: dict | None = None) -> dict:
    checks = sort_checks(checks)
    gated = [c for c in checks if c["pass"] is not None]
    failed = sum(1 for c in gated if not c["pass"])
    return {
        "config": config or {},
        "checks": checks,
        "summary": {"total": len(gated), "passed": len(gated) - failed, "failed": failed},
        "pass": failed == 0,
    }


def run_suite(config: SuiteConfig) -> dict:
    """Run the configured suites for every supported d up to ``config.max_d``."""
    checks = []
    for suite in dict.fromkeys(config.suites):
        fn, cap = _RUNNERS[suite]
        for d in range(2, min(config.max_d, cap) + 1):
            checks.extend(fn(d, config))
    cfg = {
        "suites": sorted(set(config.suites)),
        "max_d": config.max_d,
        "seed": config.seed,
        "tolerances": {k: config.tol(k) for k in ("exact", "psd", "spectral")},
    }
    return summarize(checks, cfg)

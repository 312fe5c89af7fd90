"""End-to-end acceptance checks, one test per criterion.

Run with ``pytest tests/test_acceptance.py -s`` to see each PASS/FAIL line as
it happens; a plain run lists them in the terminal summary.
"""

import math

import numpy as np

from mes_locc.cli import main
from mes_locc.entanglement import Cut, log_negativity, ppt_check, reduced_entropy, smolin_decomposition_check
from mes_locc.protocols import distill_copy, success_probability, teleport
from mes_locc.states import (
    BellIndex,
    bell_basis_matrix,
    bell_indices,
    bell_state,
    build_rho,
    build_rho_s,
    factorized_rho,
    haar_random_state,
    schmidt_state,
)
from mes_locc.tensor import StateVector, fidelity_pure, partial_trace

WEAK = (math.sqrt(0.8), math.sqrt(0.2))
WEAK3 = (math.sqrt(0.5), math.sqrt(0.3), math.sqrt(0.2))


def mes(d):
    return bell_state(BellIndex(d, 0, 0))


def test_criterion_1_basis(criterion):
    worst_gram = worst_red = 0.0
    for d in range(2, 7):
        b = bell_basis_matrix(d)
        worst_gram = max(worst_gram, np.abs(b.conj() @ b.T - np.eye(d * d)).max())
        for idx in bell_indices(d):
            phi = bell_state(idx)
            for side in ("A", "B"):
                red = partial_trace(phi, [side]).matrix
                worst_red = max(worst_red, np.abs(red - np.eye(d) / d).max())
    ok = worst_gram <= 1e-12 and worst_red <= 1e-12
    criterion(1, ok, f"d=2..6 max Gram dev {worst_gram:.3e}, max reduction dev {worst_red:.3e} (tol 1e-12)")


def test_criterion_2_teleportation(criterion):
    counts_ok, pdev, fdev = True, 0.0, 0.0
    for d in range(2, 6):
        resource = mes(d)
        for k in range(20):
            chi = haar_random_state([d], np.random.SeedSequence([2024, d, k]), labels=["C"])
            target = StateVector(resource.layout.subset(["B"]), chi.amplitudes)
            run = teleport(chi, resource)
            counts_ok &= len(run.branches) == d * d
            for br in run.branches:
                pdev = max(pdev, abs(br.probability - 1 / d**2))
                fdev = max(fdev, abs(1 - fidelity_pure(target, br.post_state)))
    ok = counts_ok and pdev <= 1e-12 and fdev <= 1e-12
    criterion(2, ok, f"d=2..5 x 20 inputs, d^2 branches={counts_ok}, "
                     f"max |p-1/d^2| {pdev:.3e}, max |1-F| {fdev:.3e} (tol 1e-12)")


def test_criterion_3_discrimination(criterion):
    worst = 0.0
    for d in range(2, 6):
        resource = mes(d)
        for hidden in bell_indices(d):
            worst = max(worst, abs(1 - success_probability(hidden, resource)))
    criterion(3, worst <= 1e-12, f"d=2..5 all hidden indices, max |1-P(correct)| {worst:.3e} (tol 1e-12)")


def test_criterion_4_factorization(criterion):
    worst = 0.0
    for d in (2, 3):
        for psi in (mes(d), schmidt_state(WEAK)):
            diff = build_rho(d, psi).matrix - factorized_rho(d, psi).matrix
            worst = max(worst, np.linalg.norm(diff, "fro"))
    criterion(4, worst <= 1e-12, f"d=2,3 psi in {{MES, weak}}, max Frobenius distance {worst:.3e} (tol 1e-12)")


def test_criterion_5_separability(criterion):
    cut = Cut.between(["A1", "A2"], ["B1", "B2"])
    mins = {}
    for d in (2, 3):
        ok, lo = ppt_check(build_rho_s(d), cut)
        mins[d] = (ok, lo)
    smolin_ok, dist = smolin_decomposition_check(1e-12)
    ok = all(v[0] and v[1] >= -1e-10 for v in mins.values()) and smolin_ok and dist <= 1e-12
    criterion(5, ok, f"PT min eig d=2 {mins[2][1]:.3e}, d=3 {mins[3][1]:.3e} (>= -1e-10); "
                     f"Smolin decomposition distance {dist:.3e} (tol 1e-12)")


def test_criterion_6_distillation(criterion):
    fdev = sdev = 0.0
    for d in (2, 3):
        for component in bell_indices(d):
            res = distill_copy(d, component, mes(d))
            fdev = max(fdev, abs(1 - res.fidelity()))
            sdev = max(sdev, abs(reduced_entropy(res.output, ["A3"]) - math.log2(d)))
    ok = fdev <= 1e-12 and sdev <= 1e-12
    criterion(6, ok, f"d=2,3 every component, max |1-F| {fdev:.3e}, max |S-log2 d| {sdev:.3e} (tol 1e-12)")


def test_criterion_7_lognegativity_chain(criterion):
    chain = mes_dev = 0.0
    for d in (2, 3):
        for psi in (mes(d), schmidt_state(WEAK), schmidt_state(WEAK3)):
            chain = max(chain, abs(log_negativity(build_rho(d, psi)) - log_negativity(psi)))
        mes_dev = max(mes_dev, abs(log_negativity(mes(d)) - math.log2(d)))
    ok = chain <= 1e-9 and mes_dev <= 1e-9
    criterion(7, ok, f"d=2,3 three psi, max chain dev {chain:.3e}, max |E_N(MES)-log2 d| {mes_dev:.3e} (tol 1e-9)")


def test_criterion_8_weak_resource(criterion):
    resource = schmidt_state(WEAK)
    probs = {str(h): success_probability(h, resource) for h in bell_indices(2)}
    lowest = min(probs.values())
    shown = ", ".join(f"{k}: {v:.9f}" for k, v in probs.items())
    criterion(8, lowest < 1 - 1e-6, f"d=2 weak resource success {shown} (need some < 1-1e-6)")


def test_criterion_9_determinism(criterion, tmp_path):
    paths = [tmp_path / "r1.json", tmp_path / "r2.json"]
    codes = [main(["verify", "--suite", "all", "--max-d", "3", "--seed", "7", "--report", str(p)]) for p in paths]
    same = paths[0].read_bytes() == paths[1].read_bytes()
    criterion(9, same and codes == [0, 0], f"two verify runs byte-identical={same}, exit codes {codes}")

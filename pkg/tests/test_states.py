import cmath
import math

import numpy as np
import pytest

import oracles
from mes_locc.entanglement import entanglement_entropy
from mes_locc.states import (
    BellIndex,
    ResourceSpec,
    bell_basis,
    bell_indices,
    bell_state,
    build_rho,
    build_rho_s,
    conjugate_state,
    factorized_rho,
    haar_random_state,
    resource_state,
    schmidt_state,
    weyl_operator,
)
from mes_locc.serialization import save_state
from mes_locc.tensor import StateVector, SubsystemLayout, partial_trace, permute_subsystems, relabel

WEAK = [math.sqrt(0.8), math.sqrt(0.2)]


def test_bell_index_bounds_and_negation():
    with pytest.raises(ValueError):
        BellIndex(3, 3, 0)
    with pytest.raises(ValueError):
        BellIndex(1, 0, 0)
    assert BellIndex(5, 2, 1).neg() == BellIndex(5, 2, 4)
    assert BellIndex(4, 0, 0).neg() == BellIndex(4, 0, 0)
    assert all(i.neg() == i for i in bell_indices(2))


def test_bell_state_examples():
    r = 1 / math.sqrt(2)
    assert np.allclose(bell_state(BellIndex(2, 0, 0)).amplitudes, [r, 0, 0, r], atol=1e-15)
    assert np.allclose(bell_state(BellIndex(2, 1, 1)).amplitudes, [0, r, -r, 0], atol=1e-15)
    w = cmath.exp(2j * math.pi / 3)
    expected = np.zeros(9, dtype=complex)
    expected[0 * 3 + 1] = 1
    expected[1 * 3 + 2] = w**2
    expected[2 * 3 + 0] = w**4
    assert np.allclose(bell_state(BellIndex(3, 1, 2)).amplitudes, expected / math.sqrt(3), atol=1e-15)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_bell_state_matches_oracle(d):
    for idx in bell_indices(d):
        assert np.allclose(bell_state(idx).amplitudes, oracles.bell(d, idx.m, idx.n), atol=1e-14)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_basis_orthonormal_and_complete(d):
    vecs = np.array([s.amplitudes for s in bell_basis(d)])
    assert vecs.shape == (d * d, d * d)
    gram = vecs.conj() @ vecs.T
    assert np.max(np.abs(gram - np.eye(d * d))) <= 1e-12
    proj = sum(np.outer(v, v.conj()) for v in vecs)
    assert np.max(np.abs(proj - np.eye(d * d))) <= 1e-12


def test_basis_order_is_m_n_lexicographic():
    assert [(i.m, i.n) for i in bell_indices(3)] == [(m, n) for m in range(3) for n in range(3)]


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_reductions_are_maximally_mixed(d):
    for idx in bell_indices(d):
        phi = bell_state(idx)
        for keep in ("A", "B"):
            assert np.max(np.abs(partial_trace(phi, [keep]).matrix - np.eye(d) / d)) <= 1e-12


def test_weyl_examples():
    assert np.allclose(weyl_operator(BellIndex(2, 1, 1)), [[0, -1], [1, 0]], atol=1e-15)
    for d in (2, 3, 5):
        assert np.array_equal(weyl_operator(BellIndex(d, 0, 0)), np.eye(d))


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_weyl_matches_oracle_and_is_unitary(d):
    for idx in bell_indices(d):
        u = weyl_operator(idx)
        assert np.allclose(u, oracles.weyl(d, idx.m, idx.n), atol=1e-14)
        assert np.max(np.abs(u @ u.conj().T - np.eye(d))) <= 1e-12


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_weyl_displacement(d):
    ref = oracles.bell(d, 0, 0)
    for idx in bell_indices(d):
        displaced = np.kron(np.eye(d), oracles.weyl(d, idx.m, idx.n)) @ ref
        assert np.allclose(displaced, bell_state(idx).amplitudes, atol=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_weyl_composition_phase(d):
    w = cmath.exp(2j * math.pi / d)
    for a in bell_indices(d):
        for b in bell_indices(d):
            lhs = weyl_operator(a) @ weyl_operator(b)
            rhs = w ** (b.m * a.n) * weyl_operator(BellIndex(d, (a.m + b.m) % d, (a.n + b.n) % d))
            assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_conjugate_state_examples():
    real = schmidt_state(WEAK)
    assert np.array_equal(conjugate_state(real).amplitudes, real.amplitudes)
    assert np.allclose(conjugate_state(bell_state(BellIndex(3, 1, 1))).amplitudes, oracles.bell(3, 1, 2), atol=1e-15)
    for idx in bell_indices(2):
        assert np.allclose(conjugate_state(bell_state(idx)).amplitudes, bell_state(idx).amplitudes, atol=1e-15)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_conjugation_negates_phase_index(d):
    for idx in bell_indices(d):
        got = conjugate_state(bell_state(idx)).amplitudes
        assert np.max(np.abs(got - oracles.bell(d, idx.m, (d - idx.n) % d))) <= 1e-12


# ---- resources ------------------------------------------------------------

def test_resource_examples():
    r = 1 / math.sqrt(2)
    assert np.allclose(resource_state(ResourceSpec("mes", d=2)).amplitudes, [r, 0, 0, r])
    prod = resource_state(ResourceSpec("schmidt", coefficients=(1.0,)))
    assert np.array_equal(prod.amplitudes, [1, 0, 0, 0])
    weak = resource_state(ResourceSpec("schmidt", coefficients=tuple(WEAK)))
    oracle = -(0.8 * math.log2(0.8) + 0.2 * math.log2(0.2))
    assert oracle == pytest.approx(0.7219280948873623, abs=1e-15)
    assert entanglement_entropy(weak) == pytest.approx(oracle, abs=1e-12)


def test_resource_spec_validation():
    with pytest.raises(ValueError, match="squared sum"):
        ResourceSpec("schmidt", coefficients=(0.9, 0.4))
    with pytest.raises(ValueError, match="descending"):
        ResourceSpec("schmidt", coefficients=(math.sqrt(0.2), math.sqrt(0.8)))
    with pytest.raises(ValueError):
        ResourceSpec("schmidt", coefficients=(-1.0,))
    with pytest.raises(ValueError):
        ResourceSpec("bogus")


def test_resource_spec_parsing(tmp_path):
    assert ResourceSpec.parse("mes", 3) == ResourceSpec("mes", d=3)
    spec = ResourceSpec.parse("schmidt:0.894427,0.447214")
    assert sum(c * c for c in spec.coefficients) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(ValueError):
        ResourceSpec.parse("schmidt:0.5,0.5")
    with pytest.raises(ValueError):
        ResourceSpec.parse("nope")

    phi = bell_state(BellIndex(3, 1, 2), ("L", "R"))
    path = tmp_path / "res.json"
    save_state(phi, path)
    loaded = resource_state(ResourceSpec.parse(f"file:{path}"))
    assert loaded.layout.labels == ("A", "B")
    assert np.array_equal(loaded.amplitudes, phi.amplitudes)


def test_resource_file_must_be_bipartite(tmp_path):
    path = tmp_path / "bad.json"
    save_state(haar_random_state([2, 2, 2], 0, parties=["A", "A", "B"]), path)
    with pytest.raises(ValueError):
        resource_state(ResourceSpec.parse(f"file:{path}"))


# ---- rho and rho_s --------------------------------------------------------

def test_rho_s_construction():
    rho_s = build_rho_s(2)
    assert rho_s.dim == 16
    assert rho_s.layout.labels == ("A1", "B1", "A2", "B2")
    # four-qubit Smolin state: (1/16)(I + sum_k sigma_k^{x4})
    x = np.array([[0, 1], [1, 0]])
    y = np.array([[0, -1j], [1j, 0]])
    z = np.diag([1, -1])
    smolin = np.eye(16, dtype=complex)
    for p in (x, y, z):
        smolin += np.kron(np.kron(p, p), np.kron(p, p))
    assert np.allclose(rho_s.matrix, smolin / 16, atol=1e-15)


@pytest.mark.parametrize("d", [2, 3])
def test_rho_s_purity_and_marginal(d):
    rho_s = build_rho_s(d)
    purity = np.trace(rho_s.matrix @ rho_s.matrix).real
    assert purity == pytest.approx(1 / d**2, abs=1e-12)
    assert np.allclose(partial_trace(rho_s, ["A1", "B1"]).matrix, np.eye(d * d) / d**2, atol=1e-12)


def test_rho_basic_properties():
    rho = build_rho(2, resource_state(ResourceSpec("mes", d=2)))
    assert rho.dim == 64
    assert np.trace(rho.matrix).real == pytest.approx(1.0, abs=1e-12)
    assert rho.layout.labels == ("A1", "B1", "A2", "B2", "A3", "B3")
    assert rho.layout.labels_of("A") == ("A1", "A2", "A3")
    purity = np.trace(rho.matrix @ rho.matrix).real
    assert purity == pytest.approx(0.25, abs=1e-12)


def _rho_oracle(d, psi):
    acc = 0
    for m in range(d):
        for n in range(d):
            v = np.kron(np.kron(oracles.bell(d, m, n), psi), oracles.bell(d, m, (d - n) % d))
            acc = acc + np.outer(v, v.conj())
    return acc / d**2


@pytest.mark.parametrize("d", [2, 3])
@pytest.mark.parametrize("which", ["mes", "weak"])
def test_rho_factorization(d, which):
    psi = bell_state(BellIndex(d, 0, 0)) if which == "mes" else schmidt_state(WEAK)
    rho = build_rho(d, psi)
    assert np.allclose(rho.matrix, _rho_oracle(d, psi.amplitudes), atol=1e-14)
    fact = factorized_rho(d, psi)
    assert np.linalg.norm(rho.matrix - fact.matrix) <= 1e-12


def test_rho_rejects_non_bipartite_resource():
    with pytest.raises(ValueError):
        build_rho(2, haar_random_state([2, 2, 2], 0, parties=["A", "B", "B"]))
    with pytest.raises(ValueError):
        build_rho(2, haar_random_state([2, 2], 0, parties=["A", "A"]))


def test_rho_accepts_reordered_resource():
    psi = schmidt_state(WEAK, ("x", "y"))
    swapped = permute_subsystems(psi, ["y", "x"])
    assert np.allclose(build_rho(2, swapped).matrix, build_rho(2, psi).matrix, atol=0)


# ---- haar -----------------------------------------------------------------

def test_haar_deterministic_and_normalized():
    a = haar_random_state([3, 2], 42)
    b = haar_random_state([3, 2], 42)
    assert np.array_equal(a.amplitudes, b.amplitudes)
    assert not np.array_equal(a.amplitudes, haar_random_state([3, 2], 43).amplitudes)
    for seed in range(1000):
        s = haar_random_state([2, 2], seed)
        assert abs(np.linalg.norm(s.amplitudes) - 1) <= 1e-12


def test_haar_mean_overlap_with_zero():
    dims, n = [2, 2], 4000
    big_d = 4
    f = np.array([abs(haar_random_state(dims, s).amplitudes[0]) ** 2 for s in range(n)])
    # |a_0|^2 ~ Beta(1, D-1): mean 1/D, var (D-1)/(D^2 (D+1))
    sigma = math.sqrt((big_d - 1) / (big_d**2 * (big_d + 1)) / n)
    assert abs(f.mean() - 1 / big_d) <= 5 * sigma


def test_relabel_keeps_amplitudes():
    s = haar_random_state([2, 3], 0)
    r = relabel(s, {"q0": "x"})
    assert r.layout.labels == ("x", "q1")
    assert isinstance(r, StateVector)
    assert r.layout == SubsystemLayout.of(("x", 2, "A"), ("q1", 3, "A"))

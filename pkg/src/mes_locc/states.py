"""Canonical maximally entangled basis, Weyl operators and the mixed states
built from them.

The basis is ``|phi_{m,n}> = d^{-1/2} sum_j w^{jn} |j>|j+m mod d>`` with
``w = exp(2 pi i / d)``.  The Weyl operator ``U_{m,n}|j> = w^{jn}|j+m>``
displaces ``|phi_{0,0}>`` onto ``|phi_{m,n}>`` when applied to the second
qudit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .tensor import (
    EXACT_TOL,
    DensityMatrix,
    StateVector,
    SubsystemLayout,
    permute_subsystems,
    relabel,
    tensor_product,
)

RHO_LABELS = ("A1", "B1", "A2", "B2", "A3", "B3")
RHO_S_LABELS = ("A1", "B1", "A2", "B2")


@dataclass(frozen=True, order=True)
class BellIndex:
    d: int
    m: int
    n: int

    def __post_init__(self):
        if self.d < 2:
            raise ValueError(f"d must be >= 2, got {self.d}")
        if not (0 <= self.m < self.d and 0 <= self.n < self.d):
            raise ValueError(f"Bell index ({self.m}, {self.n}) out of range for d={self.d}")

    def neg(self) -> "BellIndex":
        """(m, -n): the phase index negated mod d."""
        return BellIndex(self.d, self.m, (self.d - self.n) % self.d)

    @property
    def pair(self) -> tuple[int, int]:
        return (self.m, self.n)

    def __str__(self):
        return f"({self.m},{self.n})"


def bell_indices(d: int) -> list[BellIndex]:
    """All d^2 indices in (m, n) lexicographic order."""
    return [BellIndex(d, m, n) for m in range(d) for n in range(d)]


def omega(d: int) -> complex:
    return np.exp(2j * np.pi / d)


def _phases(d: int, n: int) -> np.ndarray:
    # exact integer exponent reduction keeps w^{jn} accurate for large jn
    return np.exp(2j * np.pi * ((np.arange(d) * n) % d) / d)


def bell_layout(d: int, labels: tuple[str, str] = ("A", "B")) -> SubsystemLayout:
    return SubsystemLayout.of((labels[0], d, "A"), (labels[1], d, "B"))


def bell_vector(idx: BellIndex) -> np.ndarray:
    d = idx.d
    vec = np.zeros(d * d, dtype=np.complex128)
    j = np.arange(d)
    vec[j * d + (j + idx.m) % d] = _phases(d, idx.n) / math.sqrt(d)
    return vec


def bell_state(idx: BellIndex, labels: tuple[str, str] = ("A", "B")) -> StateVector:
    return StateVector(bell_layout(idx.d, labels), bell_vector(idx))


def bell_basis(d: int, labels: tuple[str, str] = ("A", "B")) -> list[StateVector]:
    return [bell_state(idx, labels) for idx in bell_indices(d)]


def bell_basis_matrix(d: int) -> np.ndarray:
    """Rows are the basis vectors in (m, n) order."""
    return np.array([bell_vector(idx) for idx in bell_indices(d)])


def shift_operator(d: int) -> np.ndarray:
    """X|j> = |j+1 mod d>."""
    return np.roll(np.eye(d, dtype=np.complex128), 1, axis=0)


def phase_operator(d: int) -> np.ndarray:
    """Z|j> = w^j |j>."""
    return np.diag(_phases(d, 1))


def weyl_operator(idx: BellIndex) -> np.ndarray:
    """U_{m,n} = X^m Z^n, i.e. U_{m,n}|j> = w^{jn}|j+m>."""
    d = idx.d
    u = np.zeros((d, d), dtype=np.complex128)
    j = np.arange(d)
    u[(j + idx.m) % d, j] = _phases(d, idx.n)
    return u


def conjugate_state(phi: StateVector) -> StateVector:
    return StateVector(phi.layout, phi.amplitudes.conj())


@dataclass(frozen=True)
class ResourceSpec:
    """Description of the shared resource state.

    ``kind`` is one of ``"mes"`` (needs ``d``), ``"schmidt"`` (needs
    ``coefficients``) or ``"file"`` (needs ``path``).
    """

    kind: str
    d: int | None = None
    coefficients: tuple[float, ...] | None = None
    path: str | None = None

    def __post_init__(self):
        if self.kind == "mes":
            if self.d is None or self.d < 2:
                raise ValueError("MES resource needs d >= 2")
        elif self.kind == "schmidt":
            c = self.coefficients
            if not c:
                raise ValueError("Schmidt resource needs at least one coefficient")
            c = tuple(float(x) for x in c)
            if any(x < 0 or not math.isfinite(x) for x in c):
                raise ValueError(f"Schmidt coefficients must be finite and nonnegative: {c}")
            if abs(sum(x * x for x in c) - 1.0) > EXACT_TOL:
                raise ValueError(f"Schmidt coefficients must have unit squared sum, got {sum(x * x for x in c)!r}")
            if list(c) != sorted(c, reverse=True):
                raise ValueError(f"Schmidt coefficients must be sorted descending: {c}")
            object.__setattr__(self, "coefficients", c)
        elif self.kind == "file":
            if not self.path:
                raise ValueError("file resource needs a path")
        else:
            raise ValueError(f"unknown resource kind {self.kind!r}")

    @classmethod
    def parse(cls, text: str, d: int | None = None) -> "ResourceSpec":
        """Parse ``mes``, ``schmidt:c0,c1,...`` or ``file:PATH``.

        Schmidt coefficients typed by hand are rarely normalized to 1e-12,
        so they are rescaled here if their squared sum is within 1e-4 of 1.
        """
        head, _, rest = text.partition(":")
        head = head.strip().lower()
        if head == "mes":
            if rest:
                d = int(rest)
            return cls("mes", d=d)
        if head == "schmidt":
            try:
                c = [float(x) for x in rest.split(",") if x.strip()]
            except ValueError:
                raise ValueError(f"bad Schmidt coefficient list {rest!r}") from None
            total = math.sqrt(sum(x * x for x in c)) if c else 0.0
            if not c or abs(total * total - 1.0) > 1e-4:
                raise ValueError(f"Schmidt coefficients {c} are not normalized")
            return cls("schmidt", coefficients=tuple(x / total for x in c))
        if head == "file":
            return cls("file", path=rest)
        raise ValueError(f"unknown resource {text!r}; use mes, schmidt:c0,c1,... or file:PATH")


def schmidt_state(coefficients: Sequence[float], labels: tuple[str, str] = ("A", "B")) -> StateVector:
    """sum_k c_k |k>|k> on two qudits of dimension max(2, len(c))."""
    c = np.asarray(coefficients, dtype=float)
    k = max(2, c.size)
    vec = np.zeros(k * k, dtype=np.complex128)
    vec[np.arange(c.size) * (k + 1)] = c
    return StateVector(bell_layout(k, labels), vec)


def resource_state(spec: ResourceSpec, labels: tuple[str, str] = ("A", "B")) -> StateVector:
    if spec.kind == "mes":
        return bell_state(BellIndex(spec.d, 0, 0), labels)
    if spec.kind == "schmidt":
        return schmidt_state(spec.coefficients, labels)
    from .serialization import StateFormatError, load_state

    state = load_state(Path(spec.path))
    if not isinstance(state, StateVector):
        raise StateFormatError(f"{spec.path}: resource must be a pure state")
    if len(state.layout) != 2 or sorted(state.layout.parties) != ["A", "B"]:
        raise StateFormatError(f"{spec.path}: resource must be one A subsystem and one B subsystem")
    a, b = state.layout.labels_of("A")[0], state.layout.labels_of("B")[0]
    state = permute_subsystems(state, [a, b])
    return relabel(state, {a: labels[0], b: labels[1]})


def _check_bipartite(psi: StateVector) -> tuple[str, str]:
    if not isinstance(psi, StateVector):
        raise TypeError("resource must be a StateVector")
    a, b = psi.layout.labels_of("A"), psi.layout.labels_of("B")
    if len(psi.layout) != 2 or len(a) != 1 or len(b) != 1:
        raise ValueError(f"resource must have one A and one B subsystem, got {psi.layout.labels}")
    return a[0], b[0]


def build_rho_s(d: int) -> DensityMatrix:
    """(1/d^2) sum |phi_{m,n}><phi_{m,n}| (x) |phi_{m,-n}><phi_{m,-n}| on A1,B1,A2,B2.

    At d=2 this is the four-qubit Smolin state.
    """
    layout = SubsystemLayout.of(("A1", d, "A"), ("B1", d, "B"), ("A2", d, "A"), ("B2", d, "B"))
    acc = np.zeros((d**4, d**4), dtype=np.complex128)
    for idx in bell_indices(d):
        v = np.kron(bell_vector(idx), bell_vector(idx.neg()))
        acc += np.outer(v, v.conj())
    return DensityMatrix(layout, acc / d**2)


def build_rho(d: int, psi: StateVector) -> DensityMatrix:
    """Flagged mixture with the resource ``psi`` inserted on A2,B2.

    (1/d^2) sum |phi_{m,n}><phi_{m,n}|_{A1B1} (x) |psi><psi|_{A2B2} (x) |phi_{m,-n}><phi_{m,-n}|_{A3B3}
    """
    a, b = _check_bipartite(psi)
    psi = permute_subsystems(psi, [a, b])
    k_a, k_b = psi.layout.dims
    layout = SubsystemLayout.of(
        ("A1", d, "A"), ("B1", d, "B"), ("A2", k_a, "A"), ("B2", k_b, "B"), ("A3", d, "A"), ("B3", d, "B")
    )
    acc = np.zeros((layout.total_dim,) * 2, dtype=np.complex128)
    for idx in bell_indices(d):
        v = np.kron(np.kron(bell_vector(idx), psi.amplitudes), bell_vector(idx.neg()))
        acc += np.outer(v, v.conj())
    return DensityMatrix(layout, acc / d**2)


def factorized_rho(d: int, psi: StateVector) -> DensityMatrix:
    """The same state as :func:`build_rho`, assembled as a reordering of rho_s (x) psi."""
    a, b = _check_bipartite(psi)
    rho_s = relabel(build_rho_s(d), {"A2": "A3", "B2": "B3"})
    psi = relabel(permute_subsystems(psi, [a, b]), {a: "A2", b: "B2"})
    return permute_subsystems(tensor_product(rho_s, psi.density()), RHO_LABELS)


def haar_random_state(dims: Sequence[int], seed, labels: Sequence[str] | None = None,
                      parties: Sequence[str] | None = None) -> StateVector:
    """Haar-random pure state from a normalized complex Gaussian vector.

    ``seed`` is passed to ``np.random.default_rng`` (an int or a
    ``SeedSequence``), so equal seeds give bit-identical states.
    """
    dims = [int(x) for x in dims]
    labels = list(labels) if labels is not None else [f"q{k}" for k in range(len(dims))]
    parties = list(parties) if parties is not None else ["A"] * len(dims)
    layout = SubsystemLayout.of(*zip(labels, dims, parties))
    rng = np.random.default_rng(seed)
    n = layout.total_dim
    z = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return StateVector.normalized(layout, z)

"""Dense tensor algebra over labelled multi-qudit systems.

Composite basis indices follow the first-subsystem-most-significant
convention, i.e. the index of ``|i_0 i_1 ... i_{n-1}>`` is
``sum_k i_k * prod_{l>k} d_l``.  This is the ordering produced by
``np.kron`` and by a C-order reshape, so every operation here is a
reshape/transpose of one contiguous array.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

# tolerance ladder: construction checks, PSD checks, spectral identities
EXACT_TOL = 1e-12
PSD_TOL = 1e-10
SPECTRAL_TOL = 1e-9

PARTIES = ("A", "B")


class LayoutError(ValueError):
    """Raised for malformed layouts, label collisions and bad permutations."""


@dataclass(frozen=True)
class Subsystem:
    label: str
    dim: int
    party: str

    def __post_init__(self):
        if not isinstance(self.label, str) or not self.label:
            raise LayoutError(f"subsystem label must be a non-empty string, got {self.label!r}")
        if int(self.dim) != self.dim or self.dim < 2:
            raise LayoutError(f"subsystem {self.label!r} has dimension {self.dim}; need an integer >= 2")
        if self.party not in PARTIES:
            raise LayoutError(f"subsystem {self.label!r} has party {self.party!r}; expected 'A' or 'B'")
        object.__setattr__(self, "dim", int(self.dim))


@dataclass(frozen=True)
class SubsystemLayout:
    """Ordered subsystems defining tensor index order and the A/B split."""

    subsystems: tuple[Subsystem, ...]

    def __post_init__(self):
        subs = tuple(
            s if isinstance(s, Subsystem) else Subsystem(*s) for s in self.subsystems
        )
        if not subs:
            raise LayoutError("layout must contain at least one subsystem")
        labels = [s.label for s in subs]
        if len(set(labels)) != len(labels):
            raise LayoutError(f"duplicate labels in layout: {labels}")
        object.__setattr__(self, "subsystems", subs)

    @classmethod
    def of(cls, *entries: tuple[str, int, str]) -> "SubsystemLayout":
        """``SubsystemLayout.of(("A1", 2, "A"), ("B1", 2, "B"))``"""
        return cls(tuple(Subsystem(*e) for e in entries))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.subsystems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(s.dim for s in self.subsystems)

    @property
    def parties(self) -> tuple[str, ...]:
        return tuple(s.party for s in self.subsystems)

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims))

    def __len__(self):
        return len(self.subsystems)

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LayoutError(f"unknown label {label!r}; layout has {self.labels}") from None

    def __getitem__(self, label: str) -> Subsystem:
        return self.subsystems[self.index(label)]

    def labels_of(self, party: str) -> tuple[str, ...]:
        return tuple(s.label for s in self.subsystems if s.party == party)

    def concat(self, other: "SubsystemLayout") -> "SubsystemLayout":
        clash = set(self.labels) & set(other.labels)
        if clash:
            raise LayoutError(f"label collision in tensor product: {sorted(clash)}")
        return SubsystemLayout(self.subsystems + other.subsystems)

    def reorder(self, order: Sequence[str]) -> "SubsystemLayout":
        return SubsystemLayout(tuple(self[label] for label in order))

    def subset(self, labels: Iterable[str]) -> "SubsystemLayout":
        """Sub-layout of ``labels``, kept in this layout's order."""
        wanted = set(labels)
        return SubsystemLayout(tuple(s for s in self.subsystems if s.label in wanted))

    def relabel(self, mapping: dict[str, str]) -> "SubsystemLayout":
        return SubsystemLayout(
            tuple(Subsystem(mapping.get(s.label, s.label), s.dim, s.party) for s in self.subsystems)
        )

    def permutation(self, order: Sequence[str]) -> list[int]:
        """Axis permutation taking this layout to ``order``."""
        order = list(order)
        if sorted(order) != sorted(self.labels) or len(set(order)) != len(order):
            raise LayoutError(f"{order} is not a permutation of {list(self.labels)}")
        return [self.index(label) for label in order]


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=np.complex128, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class StateVector:
    """Normalized pure state on ``layout``."""

    layout: SubsystemLayout
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = _frozen(np.ravel(self.amplitudes))
        if amps.shape != (self.layout.total_dim,):
            raise ValueError(
                f"state has {amps.size} amplitudes, layout {self.layout.labels} needs {self.layout.total_dim}"
            )
        if not np.all(np.isfinite(amps)):
            raise ValueError("state amplitudes must be finite")
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > EXACT_TOL:
            raise ValueError(f"state norm is {norm!r}, expected 1 within {EXACT_TOL}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, layout: SubsystemLayout, vector) -> "StateVector":
        vector = np.asarray(vector, dtype=np.complex128)
        norm = np.linalg.norm(vector)
        if norm == 0:
            raise ValueError("cannot normalize the zero vector")
        return cls(layout, vector / norm)

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.layout.dims)

    def density(self) -> "DensityMatrix":
        return DensityMatrix._trusted(self.layout, np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive semidefinite operator on ``layout``."""

    layout: SubsystemLayout
    matrix: np.ndarray

    def __post_init__(self):
        mat = _frozen(self.matrix)
        n = self.layout.total_dim
        if mat.shape != (n, n):
            raise ValueError(f"density matrix has shape {mat.shape}, layout needs ({n}, {n})")
        if not np.all(np.isfinite(mat)):
            raise ValueError("density matrix entries must be finite")
        herm = np.max(np.abs(mat - mat.conj().T))
        if herm > EXACT_TOL:
            raise ValueError(f"density matrix is not Hermitian (max deviation {herm:.3e})")
        tr = np.trace(mat)
        if abs(tr - 1.0) > EXACT_TOL:
            raise ValueError(f"density matrix trace is {tr!r}, expected 1")
        lo = np.linalg.eigvalsh((mat + mat.conj().T) / 2)[0]
        if lo < -PSD_TOL:
            raise ValueError(f"density matrix has eigenvalue {lo:.3e} < -{PSD_TOL}")
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def _trusted(cls, layout: SubsystemLayout, matrix) -> "DensityMatrix":
        # for results of operations that preserve the invariants by construction
        obj = object.__new__(cls)
        object.__setattr__(obj, "layout", layout)
        object.__setattr__(obj, "matrix", _frozen(matrix))
        return obj

    @property
    def dim(self) -> int:
        return self.layout.total_dim

    def tensor(self) -> np.ndarray:
        return self.matrix.reshape(self.layout.dims * 2)

    def purity(self) -> float:
        return float(np.real(np.vdot(self.matrix.conj().T, self.matrix)))


Quantum = Union[StateVector, DensityMatrix]


def as_density(x: Quantum) -> DensityMatrix:
    return x.density() if isinstance(x, StateVector) else x


def mixture(weights: Sequence[float], states: Sequence[Quantum]) -> DensityMatrix:
    """Convex combination of states sharing one layout."""
    if len(weights) != len(states) or not states:
        raise ValueError("need one weight per state and at least one state")
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1.0) > EXACT_TOL:
        raise ValueError("mixture weights must be nonnegative and sum to 1")
    layout = states[0].layout
    acc = np.zeros((layout.total_dim,) * 2, dtype=np.complex128)
    for wi, s in zip(w, states):
        if s.layout != layout:
            raise LayoutError("all states in a mixture must share one layout")
        acc += wi * as_density(s).matrix
    return DensityMatrix._trusted(layout, acc)


def tensor_product(a: Quantum, b: Quantum) -> Quantum:
    """Kronecker product, ``a``'s subsystems first."""
    layout = a.layout.concat(b.layout)
    if isinstance(a, StateVector) and isinstance(b, StateVector):
        return StateVector(layout, np.kron(a.amplitudes, b.amplitudes))
    if isinstance(a, DensityMatrix) and isinstance(b, DensityMatrix):
        return DensityMatrix._trusted(layout, np.kron(a.matrix, b.matrix))
    raise TypeError("tensor_product needs two states of the same kind")


def relabel(x: Quantum, mapping: dict[str, str]) -> Quantum:
    layout = x.layout.relabel(mapping)
    if isinstance(x, StateVector):
        return StateVector(layout, x.amplitudes)
    return DensityMatrix._trusted(layout, x.matrix)


def permute_subsystems(x: Quantum, order: Sequence[str]) -> Quantum:
    """Reorder the tensor factors of ``x`` to ``order`` (a permutation of its labels)."""
    perm = x.layout.permutation(order)
    layout = x.layout.reorder(order)
    if isinstance(x, StateVector):
        amps = np.transpose(x.tensor(), perm).reshape(-1)
        return StateVector(layout, amps)
    n = len(perm)
    mat = np.transpose(x.tensor(), perm + [p + n for p in perm]).reshape(x.matrix.shape)
    return DensityMatrix._trusted(layout, mat)


def partial_trace(rho: Quantum, keep: Iterable[str]) -> DensityMatrix:
    """Reduced state on ``keep``; kept subsystems retain their original order."""
    keep = set(keep)
    if not keep:
        raise LayoutError("partial_trace needs at least one subsystem to keep")
    unknown = keep - set(rho.layout.labels)
    if unknown:
        raise LayoutError(f"cannot keep unknown labels {sorted(unknown)}")
    kept = rho.layout.subset(keep)
    traced = [lbl for lbl in rho.layout.labels if lbl not in keep]
    dk = kept.total_dim
    dt = rho.layout.total_dim // dk
    if isinstance(rho, StateVector):
        amps = permute_subsystems(rho, list(kept.labels) + traced).amplitudes.reshape(dk, dt)
        return DensityMatrix._trusted(kept, amps @ amps.conj().T)
    mat = permute_subsystems(rho, list(kept.labels) + traced).matrix
    reduced = np.trace(mat.reshape(dk, dt, dk, dt), axis1=1, axis2=3)
    return DensityMatrix._trusted(kept, reduced)


def _transpose_labels(layout: SubsystemLayout, party) -> list[str]:
    if isinstance(party, str) and party in PARTIES:
        labels = list(layout.labels_of(party))
    else:
        labels = [party] if isinstance(party, str) else list(party)
        for lbl in labels:
            layout.index(lbl)
    if not labels:
        raise LayoutError(f"no subsystems selected for partial transpose ({party!r})")
    return labels


def partial_transpose(rho, party, layout: SubsystemLayout | None = None) -> np.ndarray:
    """Transpose the indices of ``party`` ("A", "B", or an iterable of labels).

    Returns a bare Hermitian matrix, since the result is in general not a state.
    Plain arrays are accepted together with an explicit ``layout``, which makes
    the operation an involution on matrices.
    """
    if isinstance(rho, (StateVector, DensityMatrix)):
        layout = rho.layout
        mat = as_density(rho).matrix
    else:
        if layout is None:
            raise LayoutError("a layout is required to partially transpose a bare matrix")
        mat = np.asarray(rho)
    labels = _transpose_labels(layout, party)
    n = len(layout)
    axes = list(range(2 * n))
    for lbl in labels:
        k = layout.index(lbl)
        axes[k], axes[k + n] = k + n, k
    out = np.transpose(mat.reshape(layout.dims * 2), axes).reshape(mat.shape)
    return np.ascontiguousarray(out)


def hermitian_eigenvalues(m) -> np.ndarray:
    """Ascending real spectrum of a Hermitian matrix (symmetrized before solving)."""
    mat = m.matrix if isinstance(m, DensityMatrix) else np.asarray(m, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {mat.shape}")
    dev = np.max(np.abs(mat - mat.conj().T)) if mat.size else 0.0
    if dev > PSD_TOL:
        raise ValueError(f"matrix is not Hermitian (max deviation {dev:.3e})")
    return np.linalg.eigvalsh((mat + mat.conj().T) / 2)


def trace_norm(m) -> float:
    return float(np.sum(np.abs(hermitian_eigenvalues(m))))


def fidelity_pure(phi: StateVector, rho) -> float:
    """Overlap of the pure state ``phi`` with ``rho``: <phi|rho|phi> or |<phi|chi>|^2."""
    if isinstance(rho, StateVector):
        if rho.dim != phi.dim:
            raise ValueError(f"dimension mismatch: {phi.dim} vs {rho.dim}")
        f = abs(np.vdot(phi.amplitudes, rho.amplitudes)) ** 2
    else:
        mat = rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)
        if mat.shape != (phi.dim, phi.dim):
            raise ValueError(f"dimension mismatch: {phi.dim} vs {mat.shape}")
        f = np.real(np.vdot(phi.amplitudes, mat @ phi.amplitudes))
    return float(min(1.0, max(0.0, f)))


def apply_unitary(state: StateVector, labels: Sequence[str], u: np.ndarray) -> StateVector:
    """Apply ``u`` to the subsystems ``labels`` (in that tensor order)."""
    labels = list(labels)
    axes = [state.layout.index(lbl) for lbl in labels]
    dims = [state.layout.dims[a] for a in axes]
    u = np.asarray(u, dtype=np.complex128)
    k = int(np.prod(dims))
    if u.shape != (k, k):
        raise ValueError(f"operator shape {u.shape} does not match subsystems {labels} (dim {k})")
    t = np.tensordot(u.reshape(dims * 2), state.tensor(), axes=(list(range(len(dims), 2 * len(dims))), axes))
    # tensordot puts the acted-on axes first; move them back
    t = np.moveaxis(t, list(range(len(axes))), axes)
    return StateVector(state.layout, t.reshape(-1))

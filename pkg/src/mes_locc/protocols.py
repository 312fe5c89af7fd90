"""Exact LOCC protocol simulation by branch enumeration.

Every measurement splits the run into one branch per outcome; branches
with probability at or below ``PRUNE_TOL`` are dropped and their mass is
kept in ``ProtocolRun.pruned_mass``.  No sampling is involved in any
probability reported here.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .states import (
    BellIndex,
    bell_basis_matrix,
    bell_state,
    bell_vector,
    phase_operator,
    shift_operator,
    weyl_operator,
)
from .tensor import (
    DensityMatrix,
    LayoutError,
    StateVector,
    apply_unitary,
    fidelity_pure,
    mixture,
    partial_trace,
    permute_subsystems,
    relabel,
    tensor_product,
)

PRUNE_TOL = 1e-14


class Action(str, Enum):
    LOCAL_UNITARY = "LocalUnitary"
    MEASUREMENT = "Measurement"
    CLASSICAL_MESSAGE = "ClassicalMessage"


@dataclass(frozen=True)
class Step:
    actor: str
    action: Action
    payload: dict


@dataclass
class Transcript:
    """Ordered record of local operations and classical messages.

    Outcomes are symbolic (``"k0"``, ``"k1"``, ...); the concrete values
    live in each branch's ``history``.
    """

    steps: list[Step] = field(default_factory=list)

    def _add(self, actor: str, action: Action, **payload) -> int:
        self.steps.append(Step(actor, action, payload))
        return len(self.steps) - 1

    def measure(self, actor: str, labels: Sequence[str], outcome: str, basis: str = "bell") -> int:
        return self._add(actor, Action.MEASUREMENT, labels=list(labels), basis=basis, outcome=outcome)

    def send(self, actor: str, to: str, measurement: int) -> int:
        outcome = self.steps[measurement].payload["outcome"]
        return self._add(actor, Action.CLASSICAL_MESSAGE, to=to, carries=outcome, cites=measurement)

    def unitary(self, actor: str, labels: Sequence[str], op: str, conditioned_on: int | None = None) -> int:
        return self._add(actor, Action.LOCAL_UNITARY, labels=list(labels), op=op, conditioned_on=conditioned_on)

    def validate(self) -> None:
        """Raise ``ValueError`` if a message or conditioned action is inconsistent."""
        for k, step in enumerate(self.steps):
            p = step.payload
            if step.action is Action.CLASSICAL_MESSAGE:
                src = p["cites"]
                if not (0 <= src < k) or self.steps[src].action is not Action.MEASUREMENT:
                    raise ValueError(f"step {k}: message does not cite a prior measurement")
                if self.steps[src].actor != step.actor:
                    raise ValueError(f"step {k}: {step.actor} sends an outcome measured by {self.steps[src].actor}")
                if p["to"] == step.actor:
                    raise ValueError(f"step {k}: message sent to self")
            elif step.action is Action.LOCAL_UNITARY and p.get("conditioned_on") is not None:
                src = p["conditioned_on"]
                if not (0 <= src < k) or self.steps[src].action is not Action.CLASSICAL_MESSAGE:
                    raise ValueError(f"step {k}: conditioned action does not cite a prior message")
                if self.steps[src].payload["to"] != step.actor:
                    raise ValueError(f"step {k}: {step.actor} acts on a message it never received")

    def to_json(self) -> list[dict]:
        return [{"actor": s.actor, "action": s.action.value, **s.payload} for s in self.steps]


@dataclass(frozen=True)
class Branch:
    outcome: BellIndex
    probability: float
    post_state: StateVector
    history: tuple[BellIndex, ...] = ()


@dataclass
class ProtocolRun:
    branches: list[Branch]
    transcript: Transcript
    pruned_mass: float = 0.0

    @property
    def total_probability(self) -> float:
        return math.fsum(b.probability for b in self.branches)

    def distribution(self) -> dict[BellIndex, float]:
        """Probability of each final outcome, summed over branches."""
        out: dict[BellIndex, list[float]] = defaultdict(list)
        for b in self.branches:
            out[b.outcome].append(b.probability)
        return {k: math.fsum(v) for k, v in sorted(out.items())}

    def output(self) -> DensityMatrix:
        """Branch-averaged post-state (requires a common layout)."""
        total = self.total_probability
        return mixture([b.probability / total for b in self.branches], [b.post_state for b in self.branches])

    def sample(self, shots: int, seed) -> list[BellIndex]:
        """Draw outcomes from the exact distribution; for demonstrations only."""
        dist = self.distribution()
        keys = list(dist)
        p = np.array([dist[k] for k in keys])
        rng = np.random.default_rng(seed)
        return [keys[i] for i in rng.choice(len(keys), size=shots, p=p / p.sum())]


def _measure(state: StateVector, pair: Sequence[str], threshold: float) -> tuple[list[Branch], float]:
    first, second = pair
    layout = state.layout
    s1, s2 = layout[first], layout[second]
    if first == second:
        raise LayoutError("Bell measurement needs two distinct subsystems")
    if s1.dim != s2.dim:
        raise LayoutError(f"Bell measurement on unequal dimensions {s1.dim} and {s2.dim}")
    if s1.party != s2.party:
        raise LayoutError(f"{first} and {second} are held by different parties")
    d = s1.dim
    rest = [lbl for lbl in layout.labels if lbl not in (first, second)]
    ordered = permute_subsystems(state, [first, second] + rest)
    coeffs = bell_basis_matrix(d).conj() @ ordered.amplitudes.reshape(d * d, -1)
    probs = np.sum(np.abs(coeffs) ** 2, axis=1)
    rest_layout = layout.subset(rest) if rest else None

    branches, pruned = [], 0.0
    for k, p in enumerate(probs):
        if p <= threshold:
            pruned += float(p)
            continue
        idx = BellIndex(d, k // d, k % d)
        if rest_layout is None:
            post = StateVector(layout.reorder([first, second]), bell_vector(idx))
        else:
            post = StateVector.normalized(rest_layout, coeffs[k])
        branches.append(Branch(idx, float(p), post, (idx,)))
    return branches, pruned


def bell_measurement(state: StateVector, pair: Sequence[str], threshold: float = PRUNE_TOL) -> list[Branch]:
    """Project the ordered ``pair`` of qudits onto the d^2 canonical MES.

    Each branch carries the renormalized state of the *unmeasured*
    subsystems; the measured pair is known to be in ``|phi_{m,n}>`` and is
    dropped.  If nothing else remains, the collapsed pair itself is the
    post-state.  Outcomes with probability <= ``threshold`` are omitted.
    """
    return _measure(state, pair, threshold)[0]


def teleport_correction(idx: BellIndex) -> np.ndarray:
    """Bob's fix-up after Alice announces (m, n): Z^n X^{-m}."""
    d = idx.d
    x_inv = np.linalg.matrix_power(shift_operator(d), (d - idx.m) % d)
    z = np.linalg.matrix_power(phase_operator(d), idx.n)
    return z @ x_inv


def _teleport_step(branches_in, transcript: Transcript, source: str, alice_half: str, bob_half: str,
                   threshold: float):
    """Alice Bell-measures (source, alice_half); Bob corrects bob_half."""
    k = sum(1 for s in transcript.steps if s.action is Action.MEASUREMENT)
    meas = transcript.measure("A", [source, alice_half], f"k{k}")
    msg = transcript.send("A", "B", meas)
    transcript.unitary("B", [bob_half], f"teleport_correction(k{k})", conditioned_on=msg)
    out, pruned = [], 0.0
    for parent in branches_in:
        children, lost = _measure(parent.post_state, (source, alice_half), threshold)
        pruned += parent.probability * lost
        for c in children:
            post = apply_unitary(c.post_state, [bob_half], teleport_correction(c.outcome))
            out.append(Branch(c.outcome, parent.probability * c.probability, post, parent.history + (c.outcome,)))
    return out, pruned


def _single_pair(resource: StateVector) -> tuple[str, str]:
    a, b = resource.layout.labels_of("A"), resource.layout.labels_of("B")
    if len(resource.layout) != 2 or len(a) != 1 or len(b) != 1:
        raise ValueError(f"resource must be one A and one B subsystem, got {resource.layout.labels}")
    return a[0], b[0]


def teleport(chi: StateVector, resource: StateVector, threshold: float = PRUNE_TOL) -> ProtocolRun:
    """Teleport the single-qudit state ``chi`` (held by A) through ``resource``.

    Each branch's ``post_state`` is Bob's corrected qudit, carrying the
    label of his resource half.
    """
    if len(chi.layout) != 1:
        raise ValueError("teleport input must be a single qudit")
    source = chi.layout.labels[0]
    if chi.layout.parties[0] != "A":
        raise ValueError("the teleported qudit must be held by party A")
    a, b = _single_pair(resource)
    d = chi.layout.dims[0]
    if resource.layout[a].dim != d or resource.layout[b].dim != d:
        raise ValueError(f"resource dims {resource.layout.dims} do not match input dimension {d}")
    full = tensor_product(chi, resource)
    transcript = Transcript()
    branches, pruned = _teleport_step([Branch(None, 1.0, full)], transcript, source, a, b, threshold)
    transcript.validate()
    return ProtocolRun(branches, transcript, pruned)


def _discrimination_state(hidden: BellIndex, resource: StateVector) -> StateVector:
    a, b = _single_pair(resource)
    d = hidden.d
    if resource.layout[a].dim != d or resource.layout[b].dim != d:
        raise ValueError(f"resource dims {resource.layout.dims} do not match d={d}")
    resource = relabel(permute_subsystems(resource, [a, b]), {a: "A2", b: "B2"})
    return tensor_product(bell_state(hidden, ("A1", "B1")), resource)


def _teleport_and_identify(full: StateVector, threshold: float) -> ProtocolRun:
    transcript = Transcript()
    branches, pruned = _teleport_step([Branch(None, 1.0, full)], transcript, "A1", "A2", "B2", threshold)
    meas = transcript.measure("B", ["B2", "B1"], "k1")
    transcript.send("B", "A", meas)
    out = []
    for parent in branches:
        children, lost = _measure(parent.post_state, ("B2", "B1"), threshold)
        pruned += parent.probability * lost
        for c in children:
            out.append(Branch(c.outcome, parent.probability * c.probability, c.post_state,
                              parent.history + (c.outcome,)))
    return ProtocolRun(out, transcript, pruned)


def discriminate(hidden: BellIndex, resource: StateVector, threshold: float = PRUNE_TOL) -> ProtocolRun:
    """Identify ``|phi_hidden>`` on A1,B1 by LOCC, consuming ``resource`` on A2,B2.

    Alice teleports A1 to Bob; Bob Bell-measures (B2, B1) and announces the
    result.  ``run.distribution()`` is the law of the announced index.
    """
    run = _teleport_and_identify(_discrimination_state(hidden, resource), threshold)
    run.transcript.validate()
    return run


def success_probability(hidden: BellIndex, resource: StateVector) -> float:
    return discriminate(hidden, resource).distribution().get(hidden, 0.0)


def bob_premessage_state(hidden: BellIndex, resource: StateVector) -> DensityMatrix:
    """Bob's reduced state on (B1, B2) after Alice measures, before her message arrives."""
    full = _discrimination_state(hidden, resource)
    branches = bell_measurement(full, ("A1", "A2"))
    total = math.fsum(b.probability for b in branches)
    rho = mixture([b.probability / total for b in branches], [b.post_state for b in branches])
    return partial_trace(rho, ["B1", "B2"])


@dataclass
class DistillResult:
    run: ProtocolRun

    @property
    def branches(self) -> list[Branch]:
        return self.run.branches

    @property
    def transcript(self) -> Transcript:
        return self.run.transcript

    @property
    def announced(self) -> BellIndex:
        """Most probable announced index (first in (m, n) order on ties)."""
        dist = self.run.distribution()
        return max(dist, key=lambda k: (dist[k], [-k.m, -k.n]))

    @property
    def output(self) -> DensityMatrix:
        """A3,B3 state averaged over all branches."""
        return self.run.output()

    def fidelity(self) -> float:
        d = self.output.layout.dims[0]
        return fidelity_pure(bell_state(BellIndex(d, 0, 0), ("A3", "B3")), self.output)


def distill_copy(d: int, component: BellIndex, psi: StateVector, threshold: float = PRUNE_TOL) -> DistillResult:
    """Turn one term of the flagged mixture into a copy of |phi_{0,0}> on A3,B3.

    The flag on A1,B1 is identified with :func:`discriminate` using ``psi``;
    Bob then undoes the Weyl displacement of the announced (m, -n) on B3.
    """
    if component.d != d:
        raise ValueError(f"component {component} is not a d={d} index")
    flag = _discrimination_state(component, psi)
    full = tensor_product(flag, bell_state(component.neg(), ("A3", "B3")))
    run = _teleport_and_identify(full, threshold)
    run.transcript.unitary("B", ["B3"], "weyl(k1.m, -k1.n)^dagger", conditioned_on=None)
    branches = []
    for br in run.branches:
        undo = weyl_operator(br.outcome.neg()).conj().T
        post = permute_subsystems(br.post_state, ["A3", "B3"])
        branches.append(Branch(br.outcome, br.probability, apply_unitary(post, ["B3"], undo), br.history))
    run.branches = branches
    run.transcript.validate()
    return DistillResult(run)

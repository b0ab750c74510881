"""Identification sets: transition graphs, connected spanning sets, connected bases."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from . import matkernel as mk
from .errors import NotConnectedSpanning

OVERLAP_TOL = 1e-9
RANK_TOL = 1e-9


@dataclass(frozen=True)
class StateSet:
    states: tuple
    labels: tuple | None = None

    def __post_init__(self):
        states = tuple(mk.as_vector(s) for s in self.states)
        if states and len({s.size for s in states}) != 1:
            raise ValueError("all states must share one dimension")
        for s in states:
            if abs(np.linalg.norm(s) - 1.0) > 1e-12:
                raise ValueError("states must be normalized")
        if self.labels is not None and len(self.labels) != len(states):
            raise ValueError("labels and states differ in length")
        object.__setattr__(self, "states", states)

    @classmethod
    def of(cls, vectors, labels=None) -> "StateSet":
        return cls(tuple(mk.normalize(v) for v in vectors), None if labels is None else tuple(labels))

    @property
    def dim(self) -> int:
        return self.states[0].size

    def __len__(self) -> int:
        return len(self.states)

    def matrix(self) -> np.ndarray:
        """States stacked as rows."""
        return np.array(self.states)

    def subset(self, idx) -> "StateSet":
        labels = None if self.labels is None else tuple(self.labels[i] for i in idx)
        return StateSet(tuple(self.states[i] for i in idx), labels)

    def to_dict(self) -> dict:
        d = {"states": [mk.vector_to_json(s) for s in self.states]}
        if self.labels is not None:
            d["labels"] = list(self.labels)
        d["edges"] = transition_graph(self).edges()
        return d

    @classmethod
    def from_dict(cls, obj: dict) -> "StateSet":
        return cls.of([mk.vector_from_json(s) for s in obj["states"]], obj.get("labels"))


@dataclass(frozen=True)
class TransitionGraph:
    n: int
    adjacency: np.ndarray
    overlapTolerance: float

    def edges(self) -> list:
        return [[i, j] for i in range(self.n) for j in range(i + 1, self.n) if self.adjacency[i, j]]

    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        seen = {0}
        queue = deque([0])
        while queue:
            i = queue.popleft()
            for j in np.flatnonzero(self.adjacency[i]):
                if j not in seen:
                    seen.add(int(j))
                    queue.append(int(j))
        return len(seen) == self.n


def transition_graph(states: StateSet, tol: float = OVERLAP_TOL) -> TransitionGraph:
    if tol <= 0:
        raise ValueError("overlap tolerance must be positive")
    m = states.matrix()
    gram = m.conj() @ m.T
    adj = np.abs(gram) > tol
    np.fill_diagonal(adj, False)
    return TransitionGraph(len(states), adj, tol)


def is_connected_spanning(states: StateSet, tol: float = OVERLAP_TOL) -> tuple[bool, bool]:
    connected = transition_graph(states, tol).is_connected()
    spanning = mk.numerical_rank(states.matrix(), RANK_TOL) == states.dim
    return connected, spanning


def is_connected_basis(states: StateSet, tol: float = OVERLAP_TOL) -> bool:
    if len(states) != states.dim:
        return False
    connected, spanning = is_connected_spanning(states, tol)
    return connected and spanning


def extract_connected_basis(states: StateSet, tol: float = OVERLAP_TOL) -> StateSet:
    """Grow a maximal connected linearly independent subset greedily.

    Scans the input in order and adds a state when it raises the rank and
    overlaps some state already chosen, restarting the scan after each
    addition. For a connected spanning input the result is a connected basis.
    """
    connected, spanning = is_connected_spanning(states, tol)
    if not (connected and spanning):
        raise NotConnectedSpanning(f"input is connected={connected}, spanning={spanning}")
    d = states.dim
    chosen = [0]
    grew = True
    while len(chosen) < d and grew:
        grew = False
        current = states.matrix()[chosen]
        for i in range(len(states)):
            if i in chosen:
                continue
            psi = states.states[i]
            if not np.any(np.abs(current.conj() @ psi) > tol):
                continue
            if mk.numerical_rank(np.vstack([current, psi]), RANK_TOL) > len(chosen):
                chosen.append(i)
                grew = True
                break
    if len(chosen) < d:
        raise NotConnectedSpanning("greedy growth stalled before reaching a basis")
    return states.subset(chosen)


def standard_mis(d: int) -> StateSet:
    """``{|1>, ..., |d-1>}`` plus the uniform superposition of all basis states."""
    if d < 1:
        raise ValueError("d must be positive")
    eye = np.eye(d, dtype=complex)
    phi = np.ones(d, dtype=complex) / math.sqrt(d)
    if d == 1:
        return StateSet((phi,), ("phi",))
    return StateSet(tuple(eye[j] for j in range(1, d)) + (phi,),
                    tuple(str(j) for j in range(1, d)) + ("phi",))

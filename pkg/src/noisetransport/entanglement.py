"""Logarithmic negativity across contiguous site bipartitions.

A single-excitation state on sites A = {1..k}, B = {k+1..N} is embedded in
``(vac_A + singles_A) x (vac_B + singles_B)``: site i in A maps to |i>|vac>,
site j in B to |vac>|j>, and the ground and sink populations are lumped into
the global vacuum |vac>|vac> (they carry no coherence with the sector).
Negativities are reported in bits (log base 2).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .network import ExcitonState, SpecError


@dataclass(frozen=True)
class Bipartition:
    split_k: int

    def check(self, n_sites: int) -> None:
        if not 1 <= self.split_k <= n_sites - 1:
            raise ValueError(f"split must lie in 1..{n_sites - 1}, got {self.split_k}")


def _as_split(split) -> Bipartition:
    return split if isinstance(split, Bipartition) else Bipartition(int(split))


def embed(state: ExcitonState, split: Bipartition) -> np.ndarray:
    """Density matrix of ``state`` on the bipartite (vacuum + single) space."""
    rho = state.rho
    n = rho.shape[0]
    k = split.split_k
    d_a, d_b = k + 1, n - k + 1
    index = np.array([(i + 1) * d_b if i < k else i - k + 1 for i in range(n)])
    big = np.zeros((d_a * d_b, d_a * d_b), dtype=complex)
    big[np.ix_(index, index)] = rho
    big[0, 0] = state.p_ground + state.p_sink
    return big


def partial_transpose(mat: np.ndarray, d_a: int, d_b: int, subsystem: str = "A") -> np.ndarray:
    t = mat.reshape(d_a, d_b, d_a, d_b)
    t = t.transpose(2, 1, 0, 3) if subsystem == "A" else t.transpose(0, 3, 2, 1)
    return t.reshape(d_a * d_b, d_a * d_b)


def log_negativity(
    state: ExcitonState, split, tol: float = 1e-10, subsystem: str = "A"
) -> float:
    split = _as_split(split)
    n = state.rho.shape[0]
    split.check(n)
    defect = np.linalg.norm(state.rho - state.rho.conj().T)
    if defect > tol * max(1.0, np.linalg.norm(state.rho)):
        raise SpecError(f"state is not Hermitian (defect {defect:.3e})")
    d_a, d_b = split.split_k + 1, n - split.split_k + 1
    pt = partial_transpose(embed(state, split), d_a, d_b, subsystem)
    trace_norm = np.linalg.svd(pt, compute_uv=False).sum()
    value = float(np.log2(trace_norm))
    if -1e-12 <= value < 0:
        value = 0.0
    return value


def log_negativity_from_coherences(vacuum_weight: float, cross_moduli) -> float:
    """Same quantity from the vacuum weight and the |rho_ij| with i in A, j in B.

    Under the partial transpose the cross coherences pair the global vacuum
    with doubly excited states; the resulting arrow block has eigenvalues
    ``v/2 +- sqrt(v^2/4 + c^2)`` with ``c^2 = sum |rho_ij|^2``.
    """
    c2 = float(np.sum(np.abs(np.asarray(cross_moduli, dtype=float)) ** 2))
    v = float(vacuum_weight)
    negative = np.sqrt(v * v / 4.0 + c2) - v / 2.0
    return float(np.log2(1.0 + 2.0 * negative))


def negativity_timeseries(trajectory, splits: Iterable = range(1, 7)) -> np.ndarray:
    """Array of shape ``(len(trajectory), len(splits))``."""
    splits = [_as_split(s) for s in splits]
    return np.array(
        [[log_negativity(state, s) for s in splits] for state in trajectory.states()]
    ).reshape(len(trajectory), len(splits))

"""Invariant (excitation-trapping) subspaces of a network Hamiltonian.

A state is invariant when it is an eigenstate of ``H`` with no amplitude on
the sink-coupled site.  Non-degenerate eigenstates are invariant only if their
sink amplitude vanishes; inside a degenerate manifold with ``D'`` sink-coupled
eigenvectors the combinations

    |Psi~_l> = D'^(-1/2) sum_k exp(2 pi i l k / D') / <N|Psi_k> |Psi_k>,  l = 1..D'

have sink overlap ``D'^(-1/2) sum_k exp(2 pi i l k / D')``, which vanishes for
``l < D'``.  Under noiseless dynamics with a local sink, the weight of the
initial state outside the invariant subspace is what eventually reaches the
sink.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .network import SpecError, check_hermitian


@dataclass
class Manifold:
    energy: float
    indices: np.ndarray  # positions in the ascending spectrum
    dark: np.ndarray  # eigenvectors with vanishing sink overlap (N x d0)
    transformed: np.ndarray  # the DFT combinations, columns l = 1..D' (N x D')
    invariant: np.ndarray  # orthonormal invariant vectors of this manifold
    noninvariant: np.ndarray  # orthonormal sink-coupled direction (N x 0 or N x 1)
    near_degenerate: bool = False

    @property
    def degeneracy(self) -> int:
        return len(self.indices)

    @property
    def n_coupled(self) -> int:
        return self.transformed.shape[1]


@dataclass
class InvariantAnalysis:
    hamiltonian: np.ndarray
    sink_site: int
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    manifolds: list[Manifold]
    degeneracy_tol: float
    overlap_tol: float
    invariant_basis: np.ndarray = field(init=False)
    noninvariant_basis: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        n = self.hamiltonian.shape[0]
        inv = [m.invariant for m in self.manifolds if m.invariant.size]
        non = [m.noninvariant for m in self.manifolds if m.noninvariant.size]
        self.invariant_basis = np.hstack(inv) if inv else np.zeros((n, 0), complex)
        self.noninvariant_basis = np.hstack(non) if non else np.zeros((n, 0), complex)

    @property
    def n_sites(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def invariant_dimension(self) -> int:
        return self.invariant_basis.shape[1]

    def predicted_psink(self, initial) -> float:
        return predict_psink(self, initial)

    def report(self) -> dict:
        return {
            "n_sites": self.n_sites,
            "sink_site": self.sink_site,
            "degeneracy_tol": self.degeneracy_tol,
            "invariant_dimension": self.invariant_dimension,
            "manifolds": [
                {
                    "energy": m.energy,
                    "degeneracy": m.degeneracy,
                    "coupled": m.n_coupled,
                    "invariant": m.invariant.shape[1],
                    "near_degenerate": m.near_degenerate,
                }
                for m in self.manifolds
            ],
        }


def _group_spectrum(evals: np.ndarray, degeneracy_tol: float) -> list[np.ndarray]:
    spread = evals[-1] - evals[0]
    if spread == 0:
        return [np.arange(evals.size)]
    cut = degeneracy_tol * spread
    groups, start = [], 0
    for i in range(1, evals.size):
        if evals[i] - evals[i - 1] > cut:
            groups.append(np.arange(start, i))
            start = i
    groups.append(np.arange(start, evals.size))
    return groups


def _orthonormal(vectors: np.ndarray, rank: int) -> np.ndarray:
    if rank == 0:
        return np.zeros((vectors.shape[0], 0), complex)
    cols = vectors / np.linalg.norm(vectors, axis=0)
    u, _, _ = np.linalg.svd(cols, full_matrices=False)
    return u[:, :rank]


def find_invariant_subspace(
    H,
    sink_site: int,
    degeneracy_tol: float = 1e-9,
    overlap_tol: float = 1e-10,
) -> InvariantAnalysis:
    """Split the site space into the invariant subspace and its complement.

    ``degeneracy_tol`` is relative to the spectral range; eigenvectors whose
    sink amplitude is below ``overlap_tol`` are treated as decoupled (which
    also keeps the DFT transformation well conditioned).
    """
    h = np.asarray(H, dtype=complex)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise SpecError("Hamiltonian must be square")
    check_hermitian(h, "hamiltonian")
    n = h.shape[0]
    if not 1 <= sink_site <= n:
        raise SpecError(f"sink_site must be in 1..{n}")
    k = sink_site - 1
    evals, evecs = np.linalg.eigh(0.5 * (h + h.conj().T))
    groups = _group_spectrum(evals, degeneracy_tol)
    spread = evals[-1] - evals[0]
    manifolds = []
    for gi, idx in enumerate(groups):
        vecs = evecs[:, idx]
        amp = vecs[k, :]
        is_dark = np.abs(amp) < overlap_tol
        dark = vecs[:, is_dark]
        coupled = vecs[:, ~is_dark]
        c = amp[~is_dark]
        d_prime = coupled.shape[1]
        if d_prime:
            ks = np.arange(1, d_prime + 1)
            phases = np.exp(2j * np.pi * np.outer(ks, ks) / d_prime)  # [l, k]
            u = phases / c[None, :] / np.sqrt(d_prime)
            transformed = coupled @ u.T
            direction = coupled @ c.conj()
            noninvariant = (direction / np.linalg.norm(direction))[:, None]
        else:
            transformed = np.zeros((n, 0), complex)
            noninvariant = np.zeros((n, 0), complex)
        candidates = np.hstack([dark, transformed[:, : max(d_prime - 1, 0)]])
        invariant = _orthonormal(candidates, candidates.shape[1])
        gaps = []
        if gi > 0:
            gaps.append(evals[idx[0]] - evals[groups[gi - 1][-1]])
        if gi + 1 < len(groups):
            gaps.append(evals[groups[gi + 1][0]] - evals[idx[-1]])
        # resolved, but close enough to the cut that the grouping is a convention
        near = bool(gaps) and min(gaps) < 1e3 * degeneracy_tol * spread
        manifolds.append(
            Manifold(
                energy=float(evals[idx].mean()),
                indices=idx,
                dark=dark,
                transformed=transformed,
                invariant=invariant,
                noninvariant=noninvariant,
                near_degenerate=bool(near),
            )
        )
    return InvariantAnalysis(h, sink_site, evals, evecs, manifolds, degeneracy_tol, overlap_tol)


def predict_psink(analysis: InvariantAnalysis, initial) -> float:
    """Noiseless asymptotic sink population: weight of ``initial`` off the invariant subspace."""
    psi = np.asarray(initial, dtype=complex)
    if psi.shape != (analysis.n_sites,):
        raise ValueError(f"initial vector must have length {analysis.n_sites}, got {psi.shape}")
    norm = np.linalg.norm(psi)
    if not np.isclose(norm, 1.0, atol=1e-10):
        raise ValueError(f"initial vector must be normalized (norm {norm:.12g})")
    trapped = np.sum(np.abs(analysis.invariant_basis.conj().T @ psi) ** 2)
    return float(min(max(1.0 - trapped, 0.0), 1.0))


def fcn_pair_basis(N: int) -> tuple[list[np.ndarray], np.ndarray]:
    """Pair states ``|1> - |j>`` (j = 2..N-1) and the uniform state of the FCN.

    The expansion ``|1> = (sum_j |psi_j> + sqrt(N)|phi> - |N>) / (N - 1)`` is
    checked before returning.
    """
    if N < 3:
        raise ValueError("pair basis needs N >= 3")
    eye = np.eye(N)
    pairs = [eye[0] - eye[j] for j in range(1, N - 1)]
    phi = np.ones(N) / np.sqrt(N)
    rebuilt = (sum(pairs) + np.sqrt(N) * phi - eye[N - 1]) / (N - 1)
    if not np.allclose(rebuilt, eye[0], atol=1e-14):
        raise ArithmeticError("pair-state expansion does not reproduce |1>")
    return pairs, phi


def plus_state(N: int) -> np.ndarray:
    """Unnormalized sink-coupled remainder ``sqrt(N)|phi> - |N>`` of the FCN expansion."""
    v = np.ones(N)
    v[N - 1] = 0.0
    return v

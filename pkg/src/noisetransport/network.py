"""Network problem definition and the single-excitation Liouvillian.

All noise channels in this model (local dissipation, local or spatially
correlated dephasing, and the irreversible sink) act on the single-excitation
block either through the commutator with ``H`` or as an element-wise damping
of ``rho``.  The generator therefore reduces to

    d rho / dt = -i [H, rho] / hbar + D * rho

with a real damping matrix ``D``, plus two scalar counters for the population
lost to the environment and the population delivered to the sink.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

import numpy as np

#: hbar in cm^-1 ps, rounded as in the FMO literature.
HBAR_CM_PS = 5.3

#: FMO site energies and couplings in cm^-1 (zero of energy shifted by 12230 cm^-1).
FMO_HAMILTONIAN_CM = np.array(
    [
        [215.0, -104.1, 5.1, -4.3, 4.7, -15.1, -7.8],
        [-104.1, 220.0, 32.6, 7.1, 5.4, 8.3, 0.8],
        [5.1, 32.6, 0.0, -46.8, 1.0, -8.1, 5.1],
        [-4.3, 7.1, -46.8, 125.0, -70.7, -14.7, -61.5],
        [4.7, 5.4, 1.0, -70.7, 450.0, 89.7, -2.5],
        [-15.1, 8.3, -8.1, -14.7, 89.7, 330.0, 32.7],
        [-7.8, 0.8, 5.1, -61.5, -2.5, 32.7, 280.0],
    ]
)

#: Sink coupling of site 3 in cm^-1.
FMO_SINK_CM = 62.8 / 1.88
#: Population decay rate 2*Gamma_k of every site in cm^-1 (about 1 ns lifetime).
FMO_DECAY_CM = 1.0 / 188.0

#: Reference set of local dephasing rates (ps^-1) tuned for transfer at 5 ps.
FMO_OPTIMAL_DEPHASING = (0.157, 9.432, 7.797, 9.432, 7.797, 0.922, 9.433)

UnitSystem = Literal["dimensionless", "cm_inverse_ps"]

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10


class SpecError(ValueError):
    """A network or state violates one of its physical invariants."""


def _as_matrix(value: Any, n: int, name: str) -> np.ndarray:
    arr = np.asarray(value, dtype=complex)
    if arr.shape != (n, n):
        raise SpecError(f"{name} must be {n}x{n}, got shape {arr.shape}")
    return arr


def _dephasing_matrix(value: Any, n: int) -> np.ndarray:
    arr = np.asarray(value, dtype=complex)
    if arr.ndim == 0:
        return np.eye(n) * arr
    if arr.ndim == 1:
        if arr.shape != (n,):
            raise SpecError(f"dephasing diagonal must have length {n}")
        return np.diag(arr)
    return _as_matrix(arr, n, "dephasing")


def check_hermitian(mat: np.ndarray, name: str, tol: float = HERMITIAN_TOL) -> None:
    scale = np.linalg.norm(mat)
    defect = np.linalg.norm(mat - mat.conj().T)
    if defect > tol * max(scale, 1.0):
        raise SpecError(f"{name} is not Hermitian (defect {defect:.3e})")


@dataclass(frozen=True)
class NetworkSpec:
    """Hamiltonian plus noise and sink rates of an N-site network.

    ``hamiltonian`` is in energy units (cm^-1 when ``unit_system`` is
    ``"cm_inverse_ps"``, otherwise already a rate); every rate is in ps^-1 or
    dimensionless.  ``dephasing`` may be given as a scalar, a length-N vector
    of local rates or a full Hermitian correlation matrix.  ``sink_site`` is
    1-based.
    """

    hamiltonian: np.ndarray
    dissipation: np.ndarray
    dephasing: np.ndarray
    sink_site: int
    sink_rate: float
    unit_system: UnitSystem = "dimensionless"
    hbar_cm_ps: float = HBAR_CM_PS
    n_sites: int = field(init=False)

    def __post_init__(self) -> None:
        h = np.asarray(self.hamiltonian, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1] or h.shape[0] < 1:
            raise SpecError(f"hamiltonian must be square, got shape {h.shape}")
        n = h.shape[0]
        diss = np.asarray(self.dissipation, dtype=float)
        if diss.ndim == 0:
            diss = np.full(n, float(diss))
        if diss.shape != (n,):
            raise SpecError(f"dissipation must have length {n}")
        if not 1 <= int(self.sink_site) <= n:
            raise SpecError(f"sink_site must be in 1..{n}, got {self.sink_site}")
        if self.unit_system not in ("dimensionless", "cm_inverse_ps"):
            raise SpecError(f"unknown unit system {self.unit_system!r}")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "dissipation", diss)
        object.__setattr__(self, "dephasing", _dephasing_matrix(self.dephasing, n))
        object.__setattr__(self, "sink_site", int(self.sink_site))
        object.__setattr__(self, "sink_rate", float(self.sink_rate))
        object.__setattr__(self, "n_sites", n)
        for arr in (self.hamiltonian, self.dissipation, self.dephasing):
            arr.setflags(write=False)

    @property
    def sink_index(self) -> int:
        return self.sink_site - 1

    @property
    def hbar(self) -> float:
        return self.hbar_cm_ps if self.unit_system == "cm_inverse_ps" else 1.0

    def validate(self, hermitian_tol: float = HERMITIAN_TOL, psd_tol: float = PSD_TOL) -> None:
        """Raise :class:`SpecError` unless every physical invariant holds."""
        check_hermitian(self.hamiltonian, "hamiltonian", hermitian_tol)
        check_hermitian(self.dephasing, "dephasing", hermitian_tol)
        if np.any(self.dissipation < 0):
            raise SpecError("dissipation rates must be non-negative")
        if self.sink_rate < 0:
            raise SpecError("sink_rate must be non-negative")
        if self.hbar <= 0:
            raise SpecError("hbar must be positive")
        evals = np.linalg.eigvalsh(0.5 * (self.dephasing + self.dephasing.conj().T))
        scale = max(np.max(np.abs(evals)), 1.0) if evals.size else 1.0
        if evals.min() < -psd_tol * scale:
            raise SpecError(
                f"dephasing matrix is not positive semidefinite "
                f"(smallest eigenvalue {evals.min():.6g})"
            )

    def with_dephasing(self, dephasing: Any) -> NetworkSpec:
        return dataclasses.replace(self, dephasing=dephasing)

    def with_hamiltonian(self, hamiltonian: Any) -> NetworkSpec:
        return dataclasses.replace(self, hamiltonian=hamiltonian)

    def rate_hamiltonian(self) -> np.ndarray:
        """Hamiltonian divided by hbar, i.e. in the same units as the rates."""
        return self.hamiltonian / self.hbar

    def to_json(self) -> dict:
        def cplx(m: np.ndarray) -> list:
            if np.allclose(m.imag, 0.0):
                return m.real.tolist()
            return [[[z.real, z.imag] for z in row] for row in m]

        return {
            "n_sites": self.n_sites,
            "hamiltonian": cplx(self.hamiltonian),
            "dissipation": self.dissipation.tolist(),
            "dephasing": cplx(self.dephasing),
            "sink_site": self.sink_site,
            "sink_rate": self.sink_rate,
            "units": self.unit_system,
            "hbar_cm_ps": self.hbar_cm_ps,
        }


def _parse_complex_matrix(rows: Any) -> np.ndarray:
    out = []
    for row in rows:
        out_row = []
        for z in row:
            if isinstance(z, (list, tuple)):
                if len(z) != 2:
                    raise SpecError("complex entries must be [re, im] pairs")
                out_row.append(complex(z[0], z[1]))
            else:
                out_row.append(complex(z))
        out.append(out_row)
    return np.array(out, dtype=complex)


def spec_from_json(data: dict) -> NetworkSpec:
    """Build and validate a :class:`NetworkSpec` from its JSON representation."""
    try:
        h = _parse_complex_matrix(data["hamiltonian"])
        n = int(data.get("n_sites", h.shape[0]))
        if h.shape != (n, n):
            raise SpecError(f"hamiltonian shape {h.shape} does not match n_sites={n}")
        deph = data.get("dephasing", 0.0)
        if isinstance(deph, list) and deph and isinstance(deph[0], list):
            deph = _parse_complex_matrix(deph)
        spec = NetworkSpec(
            hamiltonian=h,
            dissipation=data.get("dissipation", 0.0),
            dephasing=deph,
            sink_site=data["sink_site"],
            sink_rate=data["sink_rate"],
            unit_system=data.get("units", "dimensionless"),
            hbar_cm_ps=data.get("hbar_cm_ps", HBAR_CM_PS),
        )
    except KeyError as exc:
        raise SpecError(f"network file is missing field {exc.args[0]!r}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, SpecError):
            raise
        raise SpecError(f"malformed network file: {exc}") from None
    spec.validate()
    return spec


def load_network(path: str | Path) -> NetworkSpec:
    """Read a network JSON file.  ``json.JSONDecodeError`` propagates for bad syntax."""
    with open(path) as fh:
        data = json.load(fh)
    return spec_from_json(data)


def save_network(spec: NetworkSpec, path: str | Path) -> None:
    with open(path, "w") as fh:
        json.dump(spec.to_json(), fh, indent=2)


def fcn_preset(
    N: int,
    J: float = 1.0,
    omega: float = 0.0,
    Gamma: float = 0.0,
    gamma: float = 0.0,
    sink_rate: float = 1.0,
) -> NetworkSpec:
    """Uniform fully connected network with the sink attached to site N."""
    if N < 2:
        raise SpecError(f"a fully connected network needs N >= 2, got {N}")
    h = J * (np.ones((N, N)) - np.eye(N)) + omega * np.eye(N)
    spec = NetworkSpec(
        hamiltonian=h,
        dissipation=np.full(N, float(Gamma)),
        dephasing=np.full(N, float(gamma)),
        sink_site=N,
        sink_rate=sink_rate,
    )
    spec.validate()
    return spec


def fmo_preset(hbar_cm_ps: float = HBAR_CM_PS) -> NetworkSpec:
    """Seven-site FMO complex, sink on site 3, no dephasing."""
    spec = NetworkSpec(
        hamiltonian=FMO_HAMILTONIAN_CM,
        dissipation=np.full(7, 0.5 * FMO_DECAY_CM / hbar_cm_ps),
        dephasing=np.zeros(7),
        sink_site=3,
        sink_rate=FMO_SINK_CM / hbar_cm_ps,
        unit_system="cm_inverse_ps",
        hbar_cm_ps=hbar_cm_ps,
    )
    spec.validate()
    return spec


@dataclass
class ExcitonState:
    """Single-excitation block of the density matrix plus ground and sink populations."""

    rho: np.ndarray
    p_ground: float = 0.0
    p_sink: float = 0.0

    def __post_init__(self) -> None:
        self.rho = np.asarray(self.rho, dtype=complex)

    @classmethod
    def localized(cls, n_sites: int, site: int) -> ExcitonState:
        """Excitation on a single (1-based) site."""
        if not 1 <= site <= n_sites:
            raise SpecError(f"site must be in 1..{n_sites}, got {site}")
        rho = np.zeros((n_sites, n_sites), dtype=complex)
        rho[site - 1, site - 1] = 1.0
        return cls(rho)

    @classmethod
    def pure(cls, vector: Any) -> ExcitonState:
        psi = np.asarray(vector, dtype=complex)
        norm = np.linalg.norm(psi)
        if norm == 0:
            raise SpecError("state vector must be non-zero")
        psi = psi / norm
        return cls(np.outer(psi, psi.conj()))

    @property
    def n_sites(self) -> int:
        return self.rho.shape[0]

    @property
    def populations(self) -> np.ndarray:
        return self.rho.diagonal().real.copy()

    def total_probability(self) -> float:
        return float(np.trace(self.rho).real + self.p_ground + self.p_sink)

    def validate(self, trace_tol: float = 1e-8, psd_tol: float = 1e-8) -> None:
        check_hermitian(self.rho, "rho", max(trace_tol, HERMITIAN_TOL))
        if self.p_ground < -trace_tol or self.p_sink < -trace_tol:
            raise SpecError("ground and sink populations must be non-negative")
        defect = abs(self.total_probability() - 1.0)
        if defect > trace_tol:
            raise SpecError(f"total probability deviates from 1 by {defect:.3e}")
        lam = np.linalg.eigvalsh(0.5 * (self.rho + self.rho.conj().T)).min()
        if lam < -psd_tol:
            raise SpecError(f"rho is not positive semidefinite (eigenvalue {lam:.3e})")


@dataclass(frozen=True)
class Generator:
    """Right-hand side of the master equation on the single-excitation sector.

    Calling the generator on an :class:`ExcitonState` returns its time
    derivative as another ``ExcitonState`` (whose ``rho`` is a Hermitian
    derivative matrix, not a state).
    """

    hamiltonian: np.ndarray  # in rate units
    damping: np.ndarray  # real N x N, element-wise
    dissipation: np.ndarray
    sink_index: int
    sink_rate: float

    @property
    def n_sites(self) -> int:
        return self.hamiltonian.shape[0]

    @property
    def size(self) -> int:
        """Length of the packed real state vector."""
        return 2 * self.n_sites**2 + 2

    def __call__(self, state: ExcitonState) -> ExcitonState:
        rho = state.rho
        h = self.hamiltonian
        drho = -1j * (h @ rho - rho @ h) + self.damping * rho
        pops = rho.diagonal().real
        k = self.sink_index
        return ExcitonState(
            drho,
            p_ground=float(2.0 * self.dissipation @ pops),
            p_sink=float(2.0 * self.sink_rate * pops[k]),
        )

    def pack(self, state: ExcitonState) -> np.ndarray:
        rho = np.asarray(state.rho, dtype=complex)
        return np.concatenate([rho.real.ravel(), rho.imag.ravel(), [state.p_ground, state.p_sink]])

    def unpack(self, y: np.ndarray) -> ExcitonState:
        n2 = self.n_sites**2
        rho = (y[:n2] + 1j * y[n2 : 2 * n2]).reshape(self.n_sites, self.n_sites)
        return ExcitonState(rho, float(y[-2]), float(y[-1]))

    def superoperator(self) -> np.ndarray:
        """Real matrix ``M`` with ``d y/dt = M y`` for the packed state ``y``."""
        n = self.n_sites
        n2 = n * n
        eye = np.eye(n)
        # row-major vec: vec(A X B) = kron(A, B^T) vec(X)
        lc = -1j * (np.kron(self.hamiltonian, eye) - np.kron(eye, self.hamiltonian.T))
        lc = lc + np.diag(self.damping.ravel())
        m = np.zeros((self.size, self.size))
        m[:n2, :n2] = lc.real
        m[:n2, n2 : 2 * n2] = -lc.imag
        m[n2 : 2 * n2, :n2] = lc.imag
        m[n2 : 2 * n2, n2 : 2 * n2] = lc.real
        diag_idx = np.arange(n) * (n + 1)
        m[-2, diag_idx] = 2.0 * self.dissipation
        m[-1, diag_idx[self.sink_index]] = 2.0 * self.sink_rate
        return m


def damping_matrix(spec: NetworkSpec) -> np.ndarray:
    """Element-wise decay rates of rho_ij from dissipation, dephasing and the sink.

    Correlated dephasing contributes ``-(g_ii + g_jj) + g_ij + g_ji`` to element
    (i, j); for a diagonal matrix this is the usual local pure dephasing.
    """
    n = spec.n_sites
    g = spec.dephasing
    gd = g.diagonal().real
    deph = -(gd[:, None] + gd[None, :]) + (g + g.T).real
    diss = -(spec.dissipation[:, None] + spec.dissipation[None, :])
    sink = np.zeros((n, n))
    sink[spec.sink_index, :] -= spec.sink_rate
    sink[:, spec.sink_index] -= spec.sink_rate
    return deph + diss + sink


def build_generator(spec: NetworkSpec, *, check: bool = True) -> Generator:
    """Assemble the Liouvillian of ``spec``.

    With ``check=False`` the physical validation is skipped; this exists only to
    study what a non-positive dephasing matrix would do and must not be used for
    production runs.
    """
    if check:
        spec.validate()
    h = spec.rate_hamiltonian()
    h = 0.5 * (h + h.conj().T)
    return Generator(
        hamiltonian=h,
        damping=damping_matrix(spec),
        dissipation=spec.dissipation.copy(),
        sink_index=spec.sink_index,
        sink_rate=spec.sink_rate,
    )

"""Two-photon polarization states and the linear algebra around them.

Basis order is fixed to |HH>, |HV>, |VH>, |VV> (Alice index major)
everywhere in the package. Kets are plain complex numpy vectors; density
matrices are wrapped in :class:`DensityMatrix` once they have been
checked by :func:`validate`.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import Illegitimate, MalformedOperator, ParameterError

HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = -1e-9

BASIS_LABELS = ("HH", "HV", "VH", "VV")

SQRT_HALF = 1.0 / np.sqrt(2.0)

# single-photon polarization kets
H = np.array([1.0, 0.0], dtype=complex)
V = np.array([0.0, 1.0], dtype=complex)
D = np.array([SQRT_HALF, SQRT_HALF], dtype=complex)
A = np.array([SQRT_HALF, -SQRT_HALF], dtype=complex)
R = np.array([SQRT_HALF, 1j * SQRT_HALF], dtype=complex)
L = np.array([SQRT_HALF, -1j * SQRT_HALF], dtype=complex)

NAMED_KETS = {"H": H, "V": V, "D": D, "A": A, "R": R, "L": L}

PAULI_I = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (PAULI_I, PAULI_X, PAULI_Y, PAULI_Z)


def normalize(amplitudes) -> np.ndarray:
    """Return ``amplitudes`` as a unit-norm complex vector."""
    v = np.asarray(amplitudes, dtype=complex).ravel()
    norm = np.linalg.norm(v)
    if norm == 0.0 or not np.isfinite(norm):
        raise ParameterError("cannot normalize a zero or non-finite vector")
    return v / norm


def linear_polarizer(angle_deg: float) -> np.ndarray:
    """Transmission ket cos(t)|H> + sin(t)|V> of a polarizer at ``angle_deg``."""
    t = np.deg2rad(angle_deg)
    return np.array([np.cos(t), np.sin(t)], dtype=complex)


def bell_phi_plus() -> np.ndarray:
    """(|HH> + |VV>)/sqrt(2)."""
    return np.array([SQRT_HALF, 0.0, 0.0, SQRT_HALF], dtype=complex)


def tensor(a, b) -> np.ndarray:
    """Two-photon ket a (Alice) x b (Bob) in the fixed basis order."""
    return normalize(np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)))


def projector(ket) -> np.ndarray:
    ket = np.asarray(ket, dtype=complex)
    return np.outer(ket, ket.conj())


def _as_square4(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.shape != (4, 4):
        raise MalformedOperator(f"expected a 4x4 matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise MalformedOperator("matrix has non-finite entries")
    return m


def hermiticity_error(m) -> float:
    m = np.asarray(m, dtype=complex)
    return float(np.max(np.abs(m - m.conj().T)))


def eig_hermitian(m, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigen-decomposition of a 4x4 Hermitian matrix.

    Returns
    -------
    eigenvalues : ndarray, shape (4,)
        Real, sorted in descending order.
    eigenvectors : ndarray, shape (4, 4)
        Orthonormal columns; column ``k`` belongs to ``eigenvalues[k]``.
    """
    m = _as_square4(m.entries if isinstance(m, DensityMatrix) else m)
    err = hermiticity_error(m)
    if err > tol:
        raise MalformedOperator(f"matrix is not Hermitian (max asymmetry {err:.3g})")
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    order = np.argsort(w)[::-1]
    return w[order], v[:, order]


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Validated two-qubit density matrix.

    Construct through :func:`validate`, :func:`density` or the JSON
    readers; the constructor itself does not check anything.
    """

    entries: np.ndarray

    def __post_init__(self):
        arr = np.array(self.entries, dtype=complex)
        arr.setflags(write=False)
        object.__setattr__(self, "entries", arr)

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    @property
    def eigenvalues(self) -> np.ndarray:
        return eig_hermitian(self.entries)[0]

    def to_json(self) -> dict:
        return matrix_to_json(self.entries)

    @classmethod
    def from_json(cls, obj: dict) -> "DensityMatrix":
        return validate(matrix_from_json(obj))


def validate(rho, herm_tol: float = HERMITIAN_TOL, trace_tol: float = TRACE_TOL,
             psd_tol: float = PSD_TOL) -> DensityMatrix:
    """Check Hermiticity, unit trace and positivity; return a DensityMatrix.

    Raises
    ------
    MalformedOperator
        Wrong shape, non-Hermitian, or trace away from one.
    Illegitimate
        Everything else fine but the smallest eigenvalue is below ``psd_tol``.
    """
    if isinstance(rho, DensityMatrix):
        return rho
    m = _as_square4(rho)
    err = hermiticity_error(m)
    if err > herm_tol:
        raise MalformedOperator(f"matrix is not Hermitian (max asymmetry {err:.3g})")
    tr = np.trace(m)
    if abs(tr - 1.0) > trace_tol:
        raise MalformedOperator(f"trace is {tr.real:.12g}, expected 1")
    w, _ = eig_hermitian(m, tol=herm_tol)
    if w[-1] < psd_tol:
        raise Illegitimate(w[-1], eigenvalues=w)
    return DensityMatrix(0.5 * (m + m.conj().T))


def density(ket) -> DensityMatrix:
    """Pure-state density matrix of a normalized two-photon ket."""
    return validate(projector(normalize(ket)))


def maximally_mixed() -> DensityMatrix:
    return DensityMatrix(np.eye(4, dtype=complex) / 4.0)


def fidelity_pure(rho, ket) -> float:
    """<psi|rho|psi> for a pure reference state."""
    ket = normalize(ket)
    return float(np.real(ket.conj() @ np.asarray(rho) @ ket))


def trace_distance(rho1, rho2) -> float:
    diff = np.asarray(rho1, dtype=complex) - np.asarray(rho2, dtype=complex)
    w = np.linalg.eigvalsh(0.5 * (diff + diff.conj().T))
    return 0.5 * float(np.sum(np.abs(w)))


# --- file format -----------------------------------------------------------

def matrix_to_json(m) -> dict:
    """Serialize a 4x4 complex matrix; floats are written round-trip exact."""
    m = np.asarray(m, dtype=complex)
    return {
        "basis": ",".join(BASIS_LABELS),
        "re": [[float(x) for x in row] for row in m.real],
        "im": [[float(x) for x in row] for row in m.imag],
    }


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        basis = obj.get("basis", ",".join(BASIS_LABELS))
        if basis.replace(" ", "") != ",".join(BASIS_LABELS):
            raise MalformedOperator(f"unsupported basis order {basis!r}")
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros((4, 4))), dtype=float)
    except (KeyError, TypeError, AttributeError, ValueError) as exc:
        if isinstance(exc, MalformedOperator):
            raise
        raise MalformedOperator(f"bad density-matrix JSON: {exc}") from exc
    if re.shape != (4, 4) or im.shape != (4, 4):
        raise MalformedOperator("density-matrix JSON must hold 4x4 're' and 'im' arrays")
    return re + 1j * im


def write_matrix(path, m) -> None:
    Path(path).write_text(json.dumps(matrix_to_json(np.asarray(m)), indent=2) + "\n")


def read_matrix(path) -> np.ndarray:
    """Raw (unchecked) matrix from a density-matrix JSON file."""
    try:
        obj = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise MalformedOperator(f"{path}: not valid JSON ({exc})") from exc
    return matrix_from_json(obj)


def read_density(path) -> DensityMatrix:
    return validate(read_matrix(path))

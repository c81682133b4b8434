"""Projective polarization measurements, coincidence simulation and CHSH."""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import MalformedOperator, UndefinedCorrelation
from .qstate import (
    NAMED_KETS,
    PAULIS,
    D,
    H,
    L,
    R,
    V,
    DensityMatrix,
    linear_polarizer,
    normalize,
    tensor,
)

PROB_TOL = -1e-9


def _ket_label(ket: np.ndarray) -> str:
    for name, ref in NAMED_KETS.items():
        if np.allclose(ket, ref, atol=1e-12):
            return name
    return "?"


def parse_ket(token) -> tuple[np.ndarray, str]:
    """Ket from a name (H, V, D, A, R, L) or a linear-polarizer angle in degrees."""
    if isinstance(token, str) and token.strip().upper() in NAMED_KETS:
        name = token.strip().upper()
        return NAMED_KETS[name], name
    try:
        angle = float(token)
    except (TypeError, ValueError):
        raise ValueError(f"unknown polarization {token!r}") from None
    if not np.isfinite(angle):
        raise ValueError(f"unknown polarization {token!r}")
    return linear_polarizer(angle), f"{angle:g}"


@dataclass(frozen=True, eq=False)
class ProjectionSetting:
    alice: np.ndarray
    bob: np.ndarray
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "alice", normalize(self.alice))
        object.__setattr__(self, "bob", normalize(self.bob))
        if not self.label:
            object.__setattr__(self, "label", _ket_label(self.alice) + _ket_label(self.bob))

    @property
    def ket(self) -> np.ndarray:
        return tensor(self.alice, self.bob)

    @property
    def names(self) -> tuple[str, str]:
        """Alice / Bob tokens as written in counts files."""
        if len(self.label) == 2 and all(c in NAMED_KETS for c in self.label):
            return self.label[0], self.label[1]
        if ":" in self.label:
            a, b = self.label.split(":", 1)
            return a, b
        return _ket_label(self.alice), _ket_label(self.bob)


@dataclass(frozen=True)
class TomographyRecord:
    setting: ProjectionSetting
    coincidences: float
    exposure: float

    def __post_init__(self):
        if not self.exposure > 0:
            raise ValueError(f"exposure must be positive, got {self.exposure}")
        if not self.coincidences >= 0:
            raise ValueError(f"coincidences must be non-negative, got {self.coincidences}")

    @property
    def frequency(self) -> float:
        return self.coincidences / self.exposure


@dataclass(frozen=True)
class AngleSet:
    """Polarizer angles (degrees) for a CHSH test."""

    alice_angles: tuple[float, float] = (0.0, 45.0)
    bob_angles: tuple[float, float] = (22.5, 67.5)

    def __post_init__(self):
        for a in (*self.alice_angles, *self.bob_angles):
            if not 0.0 <= a < 180.0:
                raise ValueError(f"polarizer angles must lie in [0, 180), got {a}")

    @classmethod
    def parse(cls, text: str) -> "AngleSet":
        """From ``"a1,a2,b1,b2"``."""
        parts = [float(x) for x in text.split(",")]
        if len(parts) != 4:
            raise ValueError("angle set needs exactly four comma-separated values")
        return cls((parts[0], parts[1]), (parts[2], parts[3]))


DEFAULT_ANGLES = AngleSet()

ALICE_TOMOGRAPHY = (("H", H), ("V", V), ("D", D), ("R", R))
BOB_TOMOGRAPHY = (("H", H), ("V", V), ("D", D), ("L", L))


def standard_tomography_set() -> list[ProjectionSetting]:
    """Alice {H, V, D, R} x Bob {H, V, D, L}, Alice-major order."""
    return [ProjectionSetting(ka, kb, na + nb) for na, ka in ALICE_TOMOGRAPHY for nb, kb in BOB_TOMOGRAPHY]


def _rho_array(rho) -> np.ndarray:
    return np.asarray(rho.entries if isinstance(rho, DensityMatrix) else rho, dtype=complex)


def born_probability(rho, setting: ProjectionSetting) -> float:
    psi = setting.ket
    p = psi.conj() @ _rho_array(rho) @ psi
    if abs(p.imag) > 1e-12 or p.real < PROB_TOL:
        raise MalformedOperator(f"invalid density matrix: projection gives {p:.3g}")
    return float(min(max(p.real, 0.0), 1.0))


def simulate_counts(rho, settings: Sequence[ProjectionSetting], exposure: float, seed) -> list[TomographyRecord]:
    """Poisson coincidence counts with mean ``exposure * p`` for each setting."""
    if not exposure > 0:
        raise ValueError(f"exposure must be positive, got {exposure}")
    rng = np.random.default_rng(seed)
    means = np.array([exposure * born_probability(rho, s) for s in settings])
    counts = rng.poisson(means)
    return [TomographyRecord(s, int(n), float(exposure)) for s, n in zip(settings, counts)]


def noiseless_records(rho, settings: Sequence[ProjectionSetting], exposure: float,
                      rounding: bool = False) -> list[TomographyRecord]:
    """Records with counts equal to their expectation (optionally rounded)."""
    out = []
    for s in settings:
        mean = exposure * born_probability(rho, s)
        out.append(TomographyRecord(s, float(round(mean)) if rounding else mean, float(exposure)))
    return out


def correlation(rho, theta_a: float, theta_b: float) -> float:
    """Polarization correlation E(theta_a, theta_b) from four linear-polarizer coincidences."""
    m = _rho_array(rho)
    a = (linear_polarizer(theta_a), linear_polarizer(theta_a + 90.0))
    b = (linear_polarizer(theta_b), linear_polarizer(theta_b + 90.0))
    p = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            psi = np.kron(a[i], b[j])
            p[i, j] = max(float(np.real(psi.conj() @ m @ psi)), 0.0)
    total = p.sum()
    if total <= 1e-15:
        raise UndefinedCorrelation(f"no coincidences at ({theta_a}, {theta_b})")
    return float((p[0, 0] - p[0, 1] - p[1, 0] + p[1, 1]) / total)


def chsh_fixed(rho, angles: AngleSet = DEFAULT_ANGLES) -> float:
    a1, a2 = angles.alice_angles
    b1, b2 = angles.bob_angles
    s = correlation(rho, a1, b1) - correlation(rho, a1, b2) + correlation(rho, a2, b1) + correlation(rho, a2, b2)
    return abs(s)


def correlation_tensor(rho) -> np.ndarray:
    """T_ij = Tr[rho sigma_i x sigma_j] for i, j in (x, y, z)."""
    m = _rho_array(rho)
    t = np.empty((3, 3))
    for i, si in enumerate(PAULIS[1:]):
        for j, sj in enumerate(PAULIS[1:]):
            t[i, j] = np.real(np.trace(m @ np.kron(si, sj)))
    return t


def chsh_max(rho) -> float:
    """Largest CHSH value over all local projective measurements (Horodecki)."""
    t = correlation_tensor(rho)
    m = np.sort(np.linalg.eigvalsh(t.T @ t))[::-1]
    return float(2.0 * np.sqrt(max(m[0] + m[1], 0.0)))


def chsh_grid_search(rho, step_deg: float = 1.0) -> float:
    """Brute-force CHSH maximum over linear-polarizer angles on a regular grid.

    S = (E[a1,b1] + E[a2,b1]) + (E[a2,b2] - E[a1,b2]) separates in b1 and
    b2 for each Alice pair, so the grid maximum over all four angles is
    exact without enumerating every quadruple.
    """
    angles = np.arange(0.0, 180.0, step_deg)
    m = _rho_array(rho)
    pol = np.stack([linear_polarizer(a) for a in angles])
    perp = np.stack([linear_polarizer(a + 90.0) for a in angles])
    p = {}
    for i, ka in enumerate((pol, perp)):
        for j, kb in enumerate((pol, perp)):
            k = np.einsum("ai,bj->abij", ka, kb).reshape(len(angles), len(angles), 4)
            p[i, j] = np.clip(np.real(np.einsum("abi,ij,abj->ab", k.conj(), m, k)), 0.0, None)
    total = p[0, 0] + p[0, 1] + p[1, 0] + p[1, 1]
    if np.any(total <= 1e-15):
        raise UndefinedCorrelation("no coincidences at some grid angles")
    e = (p[0, 0] - p[0, 1] - p[1, 0] + p[1, 1]) / total
    best = 0.0
    for i in range(len(angles)):
        u = e[i][None, :] + e  # rows: a2 index
        v = e - e[i][None, :]
        hi = u.max(axis=1) + v.max(axis=1)
        lo = u.min(axis=1) + v.min(axis=1)
        best = max(best, float(hi.max()), float(-lo.min()))
    return best


# --- counts file ------------------------------------------------------------

def records_to_json(records: Sequence[TomographyRecord]) -> list[dict]:
    out = []
    for r in records:
        a, b = r.setting.names
        n = r.coincidences
        out.append({
            "alice": a,
            "bob": b,
            "coincidences": int(n) if float(n).is_integer() else float(n),
            "exposure": float(r.exposure),
        })
    return out


def records_from_json(items) -> list[TomographyRecord]:
    if not isinstance(items, list):
        raise ValueError("counts file must hold a JSON array")
    records = []
    for k, item in enumerate(items):
        try:
            ka, na = parse_ket(item["alice"])
            kb, nb = parse_ket(item["bob"])
            label = na + nb if len(na) == 1 and len(nb) == 1 else f"{na}:{nb}"
            records.append(TomographyRecord(ProjectionSetting(ka, kb, label),
                                            item["coincidences"], float(item["exposure"])))
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"record {k}: {exc}") from exc
    return records


def write_counts(path, records: Sequence[TomographyRecord]) -> None:
    Path(path).write_text(json.dumps(records_to_json(records), indent=2) + "\n")


def read_counts(path) -> list[TomographyRecord]:
    try:
        items = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from exc
    return records_from_json(items)

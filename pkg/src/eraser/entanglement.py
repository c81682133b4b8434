"""Concurrence, von Neumann entropy and the combined entanglement report."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .measurement import DEFAULT_ANGLES, AngleSet, chsh_fixed, chsh_max
from .qstate import PAULI_Y, eig_hermitian, validate

LN4 = math.log(4.0)
_YY = np.kron(PAULI_Y, PAULI_Y)


def _sqrtm_psd(m: np.ndarray) -> np.ndarray:
    w, v = eig_hermitian(m, tol=1e-9)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def spin_flip(rho) -> np.ndarray:
    """(sigma_y x sigma_y) rho* (sigma_y x sigma_y)."""
    m = np.asarray(rho, dtype=complex)
    return _YY @ m.conj() @ _YY


def concurrence(rho) -> float:
    """Wootters concurrence.

    The square roots of the eigenvalues of rho * rho_tilde are taken as the
    singular values of sqrt(rho) sqrt(rho_tilde), which keeps exact zeros
    at machine precision instead of amplifying them through a square root.
    """
    m = np.asarray(validate(rho).entries)
    root = _sqrtm_psd(m)
    root_flip = _YY @ root.conj() @ _YY
    lam = np.linalg.svd(root @ root_flip, compute_uv=False)
    lam = np.sort(lam)[::-1]
    return float(min(max(lam[0] - lam[1] - lam[2] - lam[3], 0.0), 1.0))


def von_neumann_entropy(rho) -> float:
    """-Tr[rho ln rho] in nats; eigenvalues within 1e-9 below zero are clipped."""
    w = eig_hermitian(validate(rho).entries)[0]
    w = w[w > 0.0]
    return float(min(max(-np.sum(w * np.log(w)), 0.0), LN4))


@dataclass(frozen=True)
class EntanglementReport:
    concurrence: float
    entropy_nats: float
    eigenvalues: tuple[float, float, float, float]
    s_fixed: float
    s_max: float

    @property
    def entropy_bits(self) -> float:
        return self.entropy_nats / math.log(2.0)

    @property
    def violates_chsh(self) -> bool:
        return self.s_fixed > 2.0

    def to_json(self) -> dict:
        out = asdict(self)
        out["eigenvalues"] = list(self.eigenvalues)
        out["entropy_bits"] = self.entropy_bits
        out["violates_chsh"] = self.violates_chsh
        return {k: out[k] for k in ("concurrence", "entropy_nats", "entropy_bits", "eigenvalues",
                                    "s_fixed", "s_max", "violates_chsh")}


def report(rho, angles: AngleSet = DEFAULT_ANGLES) -> EntanglementReport:
    rho = validate(rho)
    w = eig_hermitian(rho.entries)[0]
    w = np.where((w < 0) & (w >= -1e-9), 0.0, w)
    return EntanglementReport(
        concurrence=concurrence(rho),
        entropy_nats=von_neumann_entropy(rho),
        eigenvalues=tuple(float(x) for x in w),
        s_fixed=chsh_fixed(rho, angles),
        s_max=chsh_max(rho),
    )


"""Density-matrix reconstruction from 16 coincidence records.

Linear inversion solves the Born-rule equations exactly through the dual
basis of the supplied projectors and may return an unphysical matrix.
The maximum-likelihood route fits ``rho(t) = T^dag T / Tr[T^dag T]`` with
``T`` lower triangular, which is positive semidefinite by construction.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import DegenerateTomography, Illegitimate, ParameterError
from .measurement import TomographyRecord
from .qstate import PAULIS, DensityMatrix, eig_hermitian, validate

log = logging.getLogger(__name__)

N_SETTINGS = 16
EPS_GUARD = 1e-12
CLIP_EIGENVALUE = 1e-6
# lower-triangular off-diagonal positions, in parameter order
_OFFDIAG = ((1, 0), (2, 1), (3, 2), (2, 0), (3, 1), (3, 0))
_DIAG = np.arange(4)
_ROWS = np.array([i for i, _ in _OFFDIAG])
_COLS = np.array([j for _, j in _OFFDIAG])

# Hermitian operator basis, orthonormal under Tr[A B]
_GAMMA = np.array([np.kron(a, b) / 2.0 for a in PAULIS for b in PAULIS])


@dataclass(frozen=True, eq=False)
class RawReconstruction:
    """Linear-inversion estimate: Hermitian and unit trace, not necessarily PSD."""

    entries: np.ndarray
    eigenvalues: np.ndarray

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def legitimate(self) -> bool:
        try:
            validate(self.entries)
        except Illegitimate:
            return False
        return True


@dataclass(frozen=True)
class MleResult:
    rho: DensityMatrix
    objective: float
    iterations: int
    converged: bool
    evaluations: int = 0
    history: tuple = field(default=(), repr=False)
    restart: int = 0


def _check_records(records: Sequence[TomographyRecord]) -> None:
    if len(records) != N_SETTINGS:
        raise ValueError(f"expected {N_SETTINGS} tomography records, got {len(records)}")


def _kets(records) -> np.ndarray:
    return np.array([r.setting.ket for r in records])


def dual_basis(kets: np.ndarray) -> np.ndarray:
    """Operators M_nu with Tr[M_nu P_mu] = delta_nu,mu for projectors P_mu = |k_mu><k_mu|."""
    # B[nu, mu] = <k_nu| Gamma_mu |k_nu>
    b = np.real(np.einsum("ni,mij,nj->nm", kets.conj(), _GAMMA, kets))
    if np.linalg.matrix_rank(b, tol=1e-10) < N_SETTINGS:
        raise DegenerateTomography("projectors are linearly dependent; tomography is incomplete")
    b_inv = np.linalg.inv(b)
    return np.einsum("mn,mij->nij", b_inv, _GAMMA)


def linear_invert(records: Sequence[TomographyRecord]) -> RawReconstruction:
    _check_records(records)
    freqs = np.array([r.frequency for r in records])
    rho = np.einsum("n,nij->ij", freqs, dual_basis(_kets(records)))
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if not tr > 0:
        raise ValueError("records carry no coincidences; cannot normalize")
    rho = rho / tr
    w = eig_hermitian(rho, tol=1e-9)[0]
    return RawReconstruction(rho, w)


# --- parametrization -----------------------------------------------------------

def t_matrix(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    T = np.zeros((4, 4), dtype=complex)
    T[_DIAG, _DIAG] = t[:4]
    T[_ROWS, _COLS] = t[4::2] + 1j * t[5::2]
    return T


def t_params(T: np.ndarray) -> np.ndarray:
    t = np.empty(16)
    t[:4] = T[_DIAG, _DIAG].real
    off = T[_ROWS, _COLS]
    t[4::2] = off.real
    t[5::2] = off.imag
    return t


def rho_from_params(t) -> np.ndarray:
    T = t_matrix(t)
    g = T.conj().T @ T
    tr = np.trace(g).real
    if not tr > 0:
        raise ParameterError("parameter vector is zero; rho(t) undefined")
    return g / tr


def cholesky_init_from_raw(raw) -> np.ndarray:
    """Warm-start parameters reproducing a (clipped) linear-inversion estimate."""
    m = np.asarray(raw.entries if isinstance(raw, (RawReconstruction, DensityMatrix)) else raw, dtype=complex)
    w, v = eig_hermitian(m, tol=1e-9)
    w = np.clip(w, CLIP_EIGENVALUE, None)
    m = (v * w) @ v.conj().T
    m = m / np.trace(m).real
    # rho = T^dag T with T lower triangular: reverse index order, Cholesky, reverse back
    lower = np.linalg.cholesky(m[::-1, ::-1])
    T = lower.conj().T[::-1, ::-1]
    return t_params(T)


# --- likelihood ------------------------------------------------------------------

class _Objective:
    """Vectorized Gaussian-approximation likelihood with analytic gradient."""

    def __init__(self, records: Sequence[TomographyRecord]):
        _check_records(records)
        self.kets = _kets(records)
        self.kets_conj = self.kets.conj()
        self.n = np.array([float(r.coincidences) for r in records])
        self.N = np.array([float(r.exposure) for r in records])
        self.evaluations = 0

    def probabilities(self, T: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
        tk = self.kets @ T.T  # row nu: T |k_nu>
        s = float(np.vdot(T, T).real)
        if not s > 0:
            raise ParameterError("parameter vector is zero; rho(t) undefined")
        return (tk.real ** 2 + tk.imag ** 2).sum(axis=1) / s, tk, s

    def value(self, t) -> float:
        p, _, _ = self.probabilities(t_matrix(t))
        expected = self.N * p
        return float(np.sum((expected - self.n) ** 2 / (2.0 * expected + EPS_GUARD)))

    def __call__(self, t) -> tuple[float, np.ndarray]:
        self.evaluations += 1
        T = t_matrix(t)
        p, tk, s = self.probabilities(T)
        a = self.N * p - self.n
        b = 2.0 * self.N * p + EPS_GUARD
        value = float(np.sum(a * a / b))
        dl_dp = 2.0 * self.N * a * (b - a) / (b * b)
        # dF/dRe T + i dF/dIm T = 2 dF/dT*;  dq/dT* = (T k) k^dag,  ds/dT* = T
        gq = (tk * dl_dp[:, None]).T @ self.kets_conj
        grad_c = 2.0 * (gq - np.dot(dl_dp, p) * T) / s
        return value, t_params(grad_c)


def mle_objective(t, records: Sequence[TomographyRecord]) -> float:
    """sum_nu (N p_nu(t) - n_nu)^2 / (2 N p_nu(t) + eps)."""
    return _Objective(records).value(t)


def mle_gradient(t, records: Sequence[TomographyRecord]) -> np.ndarray:
    return _Objective(records)(t)[1]


def _run_local(objective: _Objective, t0: np.ndarray, max_evaluations: int, ftol: float, restart: int) -> MleResult:
    history = [objective.value(t0)]

    def record(intermediate_result):
        history.append(float(intermediate_result.fun))

    start_evals = objective.evaluations
    res = minimize(objective, t0, jac=True, method="L-BFGS-B", callback=record,
                   options={"ftol": ftol, "gtol": 1e-12, "maxfun": max_evaluations,
                            "maxiter": max_evaluations, "maxls": 50})
    t_best = res.x
    value = objective.value(t_best)
    if value > history[0]:
        # never hand back something worse than the starting point
        t_best, value = t0, history[0]
    if np.any(np.diff(history) > 1e-12 * max(1.0, history[0])):
        log.warning("restart %d: objective increased between accepted iterations", restart)
    rho = rho_from_params(t_best)
    rho = 0.5 * (rho + rho.conj().T)
    # res.status 0: stopping rule met; 1: evaluation/iteration cap; 2: line search stall at a flat minimum
    converged = bool(res.status in (0, 2))
    return MleResult(
        rho=validate(rho),
        objective=value,
        iterations=int(res.nit),
        converged=converged,
        evaluations=objective.evaluations - start_evals,
        history=tuple(history),
        restart=restart,
    )


def mle_reconstruct(records: Sequence[TomographyRecord], init: Optional[RawReconstruction] = None,
                    seed=0, restarts: int = 8, max_evaluations: int = 100_000,
                    ftol: float = 1e-10, spread: float = 0.1) -> MleResult:
    """Maximum-likelihood density matrix with seeded multi-start.

    Restart 0 starts from the Cholesky factor of the (clipped) linear
    inversion estimate; the others from Gaussian perturbations of it with
    relative scale ``spread``. The lowest objective wins, ties going to
    the lower restart index.
    """
    objective = _Objective(records)
    if init is None:
        try:
            init = linear_invert(records)
        except (DegenerateTomography, ValueError):
            init = None
    t0 = cholesky_init_from_raw(init) if init is not None else t_params(np.eye(4) / 2.0)
    rng = np.random.default_rng(seed)
    scale = spread * np.linalg.norm(t0) / 4.0
    best = None
    for k in range(max(restarts, 1)):
        start = t0 if k == 0 else t0 + scale * rng.standard_normal(16)
        result = _run_local(objective, start, max_evaluations, ftol, k)
        if best is None or result.objective < best.objective:
            best = result
    return best


# --- reports -------------------------------------------------------------------

def reconstruction_report(raw: RawReconstruction, mle: MleResult) -> dict:
    return {
        "objective": mle.objective,
        "iterations": mle.iterations,
        "converged": mle.converged,
        "evaluations": mle.evaluations,
        "min_eigenvalue_raw": raw.min_eigenvalue,
        "eigenvalues_raw": [float(x) for x in raw.eigenvalues],
        "legitimate_raw": raw.legitimate,
        "eigenvalues_mle": [float(x) for x in mle.rho.eigenvalues],
    }


def write_report(path, obj: dict) -> None:
    Path(path).write_text(json.dumps(obj, indent=2) + "\n")


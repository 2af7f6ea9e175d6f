"""Deterministic complex-matrix primitives used by every solver.

Tolerances are module constants so tests and callers agree on what
"numerically zero" means:

* ``TAU_HERM``  relative max-abs asymmetry allowed before NotHermitian
* ``TAU_PSD``   eigenvalue floor, scaled by the spectral norm
* ``TAU_RANK``  relative singular-value cutoff for pseudoinverses
* ``TAU_ZERO``  absolute norm below which a vector counts as zero
* ``TAU_MP``    Moore-Penrose residual allowance (test-facing)
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import NoSignChange, NotHermitian, NotPSD, NumericalFailure, ZeroVector

TAU_HERM = 1e-10
TAU_PSD = 1e-10
TAU_RANK = 1e-12
TAU_ZERO = 1e-14
TAU_MP = 1e-9

_MAX_BRACKET_DOUBLINGS = 60


def _as_complex(a) -> np.ndarray:
    out = np.asarray(a, dtype=np.complex128)
    if not (np.all(np.isfinite(out.real)) and np.all(np.isfinite(out.imag))):
        raise NumericalFailure("non-finite entries in matrix/vector input")
    return out


def kron(a, b) -> np.ndarray:
    """Kronecker product of two matrices (dims multiply)."""
    return np.kron(_as_complex(a), _as_complex(b))


def hermitian_sqrt(f) -> np.ndarray:
    """Hermitian PSD square root S of f with S^H S = f.

    Computed by eigendecomposition so exactly singular inputs (rank
    deficient Hessians) are handled uniformly: eigenvalues below
    TAU_PSD * spectral_norm are clamped to zero before rooting.

    Raises NotHermitian if the asymmetry exceeds TAU_HERM (relative
    max-abs) and NotPSD if an eigenvalue falls below -TAU_PSD scaled.
    """
    f = _as_complex(f)
    if f.ndim != 2 or f.shape[0] != f.shape[1]:
        raise NotHermitian(f"expected a square matrix, got shape {f.shape}")
    scale = float(np.max(np.abs(f))) if f.size else 0.0
    asym = float(np.max(np.abs(f - f.conj().T))) if f.size else 0.0
    if asym > TAU_HERM * max(scale, TAU_ZERO):
        raise NotHermitian(f"asymmetry {asym:.3e} exceeds tolerance for scale {scale:.3e}")
    h = 0.5 * (f + f.conj().T)
    evals, evecs = np.linalg.eigh(h)
    spectral = float(np.max(np.abs(evals))) if evals.size else 0.0
    floor = TAU_PSD * max(spectral, TAU_ZERO)
    if evals.size and float(evals[0]) < -floor:
        raise NotPSD(f"eigenvalue {float(evals[0]):.3e} below -{floor:.3e}")
    clamped = np.where(evals < floor, 0.0, evals)
    return (evecs * np.sqrt(clamped)) @ evecs.conj().T


def pseudo_inverse(m) -> np.ndarray:
    """Moore-Penrose pseudoinverse with singular values below
    TAU_RANK * sigma_max treated as zero."""
    return np.linalg.pinv(_as_complex(m), rcond=TAU_RANK)


def vector_projector(y) -> np.ndarray:
    """Rank-1 Hermitian idempotent projector y y^H / ||y||^2."""
    y = _as_complex(y).reshape(-1)
    n2 = float(np.real(y.conj() @ y))
    if np.sqrt(n2) <= TAU_ZERO:
        raise ZeroVector("cannot build a projector from a zero vector")
    return np.outer(y, y.conj()) / n2


def bisect_root(
    f: Callable[[float], float],
    lo: float,
    hi: float,
    tol: float,
) -> float:
    """Bisection root of a monotone scalar function.

    Returns x with |f(x)| <= tol or bracket width <= tol. If f(lo) and
    f(hi) share a sign, hi is pushed out by geometric doubling (up to
    60 times) before NoSignChange is raised.
    """
    if not hi > lo:
        raise ValueError("bisect_root needs hi > lo")
    flo = float(f(lo))
    if abs(flo) <= tol:
        return lo
    fhi = float(f(hi))
    if abs(fhi) <= tol:
        return hi
    if np.sign(flo) == np.sign(fhi):
        for _ in range(_MAX_BRACKET_DOUBLINGS):
            hi = lo + 2.0 * (hi - lo)
            fhi = float(f(hi))
            if abs(fhi) <= tol:
                return hi
            if np.sign(fhi) != np.sign(flo):
                break
        else:
            raise NoSignChange(
                f"no sign change on [{lo:.3e}, {hi:.3e}] after "
                f"{_MAX_BRACKET_DOUBLINGS} doublings"
            )
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:  # bracket exhausted at float resolution
            break
        fmid = float(f(mid))
        if abs(fmid) <= tol:
            return mid
        if np.sign(fmid) == np.sign(flo):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)

"""Interaction matrix validation and the Lambda_J polynomials."""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .errors import (
    DimensionTooLarge,
    NegativeEntry,
    NotSymmetric,
    Reducible,
    Singular,
)

MAX_SUBSET_DIM = 20
SINGULAR_RTOL = 1e-12


@dataclass(frozen=True)
class CoefficientMatrix:
    """A validated interaction matrix together with its inverse.

    Construct through :func:`validate_matrix`; the arrays are read-only.
    """

    n: int
    a: np.ndarray
    a_inv: np.ndarray
    positive_definite: bool

    def tolist(self) -> list[list[float]]:
        return self.a.tolist()

    def shifted(self, eps: float) -> "CoefficientMatrix":
        """Validated ``A + eps * I``."""
        return validate_matrix(self.a + eps * np.eye(self.n))


def _is_connected(a: np.ndarray) -> bool:
    n = a.shape[0]
    seen = {0}
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in np.flatnonzero(a[i] > 0):
            if j not in seen:
                seen.add(int(j))
                queue.append(int(j))
    return len(seen) == n


def validate_matrix(entries) -> CoefficientMatrix:
    """Check symmetry, nonnegativity, irreducibility and invertibility of ``entries``."""
    a = np.array(entries, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"coefficient matrix must be square and nonempty, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("coefficient matrix has non-finite entries")
    n = a.shape[0]
    if not np.array_equal(a, a.T):
        i, j = np.argwhere(a != a.T)[0]
        raise NotSymmetric(f"NotSymmetric: a[{i}][{j}]={a[i, j]} != a[{j}][{i}]={a[j, i]}")
    if np.any(a < 0):
        i, j = np.argwhere(a < 0)[0]
        raise NegativeEntry(f"NegativeEntry: a[{i}][{j}]={a[i, j]} < 0")
    if not _is_connected(a):
        raise Reducible("Reducible: the positivity graph of A is not connected")
    scale = np.abs(a).max()
    det = np.linalg.det(a)
    if scale == 0 or abs(det) < SINGULAR_RTOL * scale**n:
        raise Singular(f"Singular: |det A| = {abs(det):.3e} below {SINGULAR_RTOL:g} * scale^n")
    a_inv = np.linalg.inv(a)
    # symmetrize the inverse so a^{ij} = a^{ji} holds bitwise
    a_inv = 0.5 * (a_inv + a_inv.T)
    pd = bool(np.all(np.linalg.eigvalsh(a) > 0))
    a.setflags(write=False)
    a_inv.setflags(write=False)
    return CoefficientMatrix(n=n, a=a, a_inv=a_inv, positive_definite=pd)


def lambda_J(A: CoefficientMatrix, sigma, J: Iterable[int]) -> float:
    """4 sum_{i in J} sigma_i - sum_{i,j in J} a_ij sigma_i sigma_j (0-based indices)."""
    sigma = np.asarray(sigma, dtype=float)
    idx = np.array(sorted(set(J)), dtype=int)
    if idx.size == 0:
        return 0.0
    s = sigma[idx]
    return float(4.0 * s.sum() - s @ A.a[np.ix_(idx, idx)] @ s)


@dataclass(frozen=True)
class PiResidual:
    lambda_I: float
    min_proper_lambda: float
    worst_J: tuple[int, ...]

    def on_pi(self, tol: float = 1e-5) -> bool:
        return abs(self.lambda_I) <= tol and self.min_proper_lambda > 0

    def to_dict(self) -> dict:
        return {
            "lambda_I": self.lambda_I,
            "min_proper_lambda": self.min_proper_lambda,
            "worst_J": [i + 1 for i in self.worst_J],
        }


def proper_subsets(n: int):
    for k in range(1, n):
        yield from itertools.combinations(range(n), k)


def pi_residual(A: CoefficientMatrix, sigma) -> PiResidual:
    """Lambda_I and the minimum of Lambda_J over all proper nonempty subsets.

    With no proper subsets (n = 1) the minimum is ``inf`` and ``worst_J`` is empty.
    """
    if A.n > MAX_SUBSET_DIM:
        raise DimensionTooLarge(f"DimensionTooLarge: n={A.n} > {MAX_SUBSET_DIM}")
    sigma = np.asarray(sigma, dtype=float)
    lam_I = lambda_J(A, sigma, range(A.n))
    best, worst = np.inf, ()
    for J in proper_subsets(A.n):
        val = lambda_J(A, sigma, J)
        if val < best:
            best, worst = val, J
    return PiResidual(lambda_I=lam_I, min_proper_lambda=float(best), worst_J=tuple(worst))

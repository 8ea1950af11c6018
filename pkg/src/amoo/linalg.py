"""Dense symmetric eigen-routines for desk-scale matrices.

A cyclic Jacobi sweep is enough at the sizes this package works with
(weight optimization touches Hessians of a few hundred rows at most).  The
contracts are on the results, not the method: ``min_eigenpair`` returns a
certified eigenpair, ``spectral_norm`` the largest absolute eigenvalue.
"""

import numpy as np

from .core import Array, NumericError

SYMMETRY_TOL = 1e-12
MAX_SWEEPS = 10_000


def check_symmetric(A, tol: float = SYMMETRY_TOL) -> Array:
    """Validate symmetry to within ``tol`` (scaled) and return a symmetrized copy."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    scale = 1.0 + np.abs(A).max(initial=0.0)
    if np.abs(A - A.T).max(initial=0.0) > tol * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    return 0.5 * (A + A.T)


def weighted_hessian(hessians, w) -> Array:
    """Entrywise sum_i w_i H_i of symmetric matrices sharing one size."""
    from .core import WeightVector

    wa = w.as_array() if isinstance(w, WeightVector) else np.asarray(w, np.float64)
    if len(hessians) != len(wa):
        raise ValueError(f"{len(hessians)} matrices for {len(wa)} weights")
    mats = [check_symmetric(H) for H in hessians]
    n = mats[0].shape[0]
    for H in mats:
        if H.shape[0] != n:
            raise ValueError("matrices disagree on size")
    return np.einsum("i,ijk->jk", wa, np.stack(mats))


def jacobi_eigh(A, tol: float = 1e-10, max_sweeps: int = MAX_SWEEPS):
    """Full eigendecomposition by cyclic Jacobi rotations.

    Returns (eigenvalues ascending, eigenvectors as columns).  Raises
    NumericError carrying the best estimate if the off-diagonal mass has not
    dropped below ``tol * (1 + ||A||_F)`` within ``max_sweeps`` sweeps.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    A = check_symmetric(A)
    n = A.shape[0]
    V = np.eye(n)
    if n == 1:
        return A.diagonal().copy(), V

    target = tol * (1.0 + np.linalg.norm(A, "fro"))
    M = A.copy()
    for _ in range(max_sweeps):
        off = np.sqrt(np.sum(np.square(M - np.diag(np.diagonal(M)))))
        if off <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = M[p, q]
                if abs(apq) <= 0.25 * target / max(n, 1):
                    continue
                # Annihilation angle: t solves t^2 - 2 theta t - 1 = 0; take
                # the smaller-magnitude root for stability.
                theta = (M[q, q] - M[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                else:
                    t = -np.sign(theta) / (abs(theta) + np.hypot(1.0, theta))
                c = 1.0 / np.hypot(1.0, t)
                s = t * c
                rot = np.array([[c, s], [-s, c]])
                M[[p, q], :] = rot @ M[[p, q], :]
                M[:, [p, q]] = M[:, [p, q]] @ rot.T
                M[p, q] = M[q, p] = 0.0
                V[:, [p, q]] = V[:, [p, q]] @ rot.T
    else:
        raise NumericError(
            f"Jacobi did not converge in {max_sweeps} sweeps",
            payload=(np.sort(np.diagonal(M)), V),
        )

    evals = np.diagonal(M).copy()
    order = np.argsort(evals)
    return evals[order], V[:, order]


def min_eigenpair(A, tol: float = 1e-10):
    """Smallest eigenvalue and a unit eigenvector of a symmetric matrix.

    The eigenvector is defined up to sign, and arbitrary within the
    eigenspace when the smallest eigenvalue is repeated.
    """
    evals, evecs = jacobi_eigh(A, tol=tol)
    v = evecs[:, 0]
    return float(evals[0]), v / np.linalg.norm(v)


def spectral_norm(A) -> float:
    """Largest absolute eigenvalue of a symmetric matrix."""
    evals, _ = jacobi_eigh(A)
    return float(np.max(np.abs(evals), initial=0.0))

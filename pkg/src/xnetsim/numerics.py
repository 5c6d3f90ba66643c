"""Dense complex linear algebra used by every other module.

All functions are thin, checked wrappers around LAPACK (through numpy);
they add the tolerances and failure modes the rest of the package relies on.
"""

import numpy as np

from .exceptions import ConvergenceFailure, DefectiveMatrix, SingularMatrix

RANK_RTOL = 1e-9
_COND_RTOL = 1e-12


def as_cmat(a):
    """Return `a` as a 2-D complex128 array, rejecting NaN/Inf."""
    a = np.asarray(a, dtype=np.complex128)
    if a.ndim == 1:
        a = a[:, None]
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"expected a non-empty matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    return a


def svd(a, compute_uv=True):
    """Singular value decomposition ``a = U @ diag(s) @ Vh``.

    Parameters
    ----------
    a : array_like
        Complex matrix of any shape.
    compute_uv : bool
        When False only the singular values are returned.

    Returns
    -------
    s or (U, s, Vh)
        Singular values in descending order and, optionally, the unitary
        factors.
    """
    a = as_cmat(a)
    try:
        out = np.linalg.svd(a, compute_uv=compute_uv)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK failure
        raise ConvergenceFailure(str(exc)) from exc
    return out


def numeric_rank(a, rel_tol=RANK_RTOL):
    """Count singular values above ``rel_tol * sigma_max``; 0 for a zero matrix."""
    if not 0.0 < rel_tol < 1.0:
        raise ValueError("rel_tol must lie in (0, 1)")
    s = svd(a, compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))


def inverse(a):
    """Inverse of a square, numerically nonsingular matrix.

    Raises
    ------
    SingularMatrix
        If the smallest singular value is below ``1e-12`` times the largest.
    """
    a = as_cmat(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError("inverse needs a square matrix")
    s = svd(a, compute_uv=False)
    if s[0] == 0.0 or s[-1] <= _COND_RTOL * s[0]:
        raise SingularMatrix(f"matrix is numerically singular (cond={s[0] / max(s[-1], 1e-300):.3g})")
    return np.linalg.inv(a)


def eig_general(a, tol=1e-8):
    """Eigen-decomposition of a general (non-Hermitian) square matrix.

    Eigenvectors are returned unit-norm as columns, with the first entry
    of non-negligible magnitude made real-positive so the basis does not
    depend on the LAPACK build.

    Raises
    ------
    DefectiveMatrix
        If the eigenvector matrix is numerically singular or a residual
        ``||a v - lambda v||`` exceeds ``tol * ||a||``.
    """
    a = as_cmat(a)
    if a.shape[0] != a.shape[1]:
        raise ValueError("eig_general needs a square matrix")
    try:
        w, v = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise ConvergenceFailure(str(exc)) from exc
    v = v / np.linalg.norm(v, axis=0, keepdims=True)
    for k in range(v.shape[1]):
        col = v[:, k]
        lead = np.flatnonzero(np.abs(col) > 1e-8)[0]
        v[:, k] = col * (np.conj(col[lead]) / abs(col[lead]))
    scale = max(np.linalg.norm(a), 1e-300)
    resid = np.linalg.norm(a @ v - v * w[None, :], axis=0)
    if np.any(resid > tol * scale):
        raise DefectiveMatrix("eigen residual above tolerance")
    sv = np.linalg.svd(v, compute_uv=False)
    if sv[-1] <= 1e-10 * sv[0]:
        raise DefectiveMatrix("eigenvector basis is numerically singular")
    return w, v


def kron(a, b):
    """Kronecker product with the standard block layout."""
    return np.kron(as_cmat(a), as_cmat(b))


def batch_inverse(a):
    """Invert a stack of square matrices ``(..., n, n)``.

    Returns the inverses and a boolean mask of entries whose reciprocal
    condition number fell below ``1e-12`` (those inverses are not usable).
    """
    a = np.asarray(a, dtype=np.complex128)
    try:
        inv = np.linalg.inv(a)
    except np.linalg.LinAlgError:
        inv = None
    if inv is not None:
        # Frobenius condition estimate, an upper bound on the 2-norm one
        cond = np.linalg.norm(a, axis=(-2, -1)) * np.linalg.norm(inv, axis=(-2, -1))
        bad = ~np.isfinite(cond) | (cond * _COND_RTOL >= 1.0)
        if not np.any(bad):
            return inv, bad
    s = np.linalg.svd(a, compute_uv=False)
    bad = s[..., -1] <= _COND_RTOL * s[..., 0]
    safe = np.where(bad[..., None, None], np.eye(a.shape[-1]), a)
    return np.linalg.inv(safe), bad

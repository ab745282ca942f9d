"""Dense complex linear-algebra kernel.

Everything here operates on small dense complex arrays (problem sizes are a
few hundred at most): Kronecker products, the top eigenpair of a Hermitian
PSD matrix, Hermitian positive-definite solves, and projectors onto the
orthogonal complement of a span.
"""

import numpy as np
import scipy.linalg

__all__ = [
    "EigenSolveError",
    "hermitian_defect",
    "is_hermitian",
    "kron",
    "max_eigpair",
    "projector_complement",
    "solve_hpd",
]

_POWER_ITER_SEED = 20260114
_POWER_ITER_CAP = 10_000


class EigenSolveError(RuntimeError):
    """Raised when the power iteration cannot certify the top eigenpair."""


def kron(a, b):
    """Kronecker product of two matrices (thin wrapper, kept for API symmetry)."""
    return np.kron(np.asarray(a), np.asarray(b))


def hermitian_defect(a):
    """max|A - A^H| / max|A|, zero for the all-zero matrix."""
    a = np.asarray(a)
    scale = np.abs(a).max()
    if scale == 0.0:
        return 0.0
    return float(np.abs(a - a.conj().T).max() / scale)


def is_hermitian(a, tol=1e-10):
    return hermitian_defect(a) <= tol


def max_eigpair(h, tol=1e-10, max_iter=_POWER_ITER_CAP, seed=_POWER_ITER_SEED):
    """Top eigenpair of a Hermitian PSD matrix by power iteration.

    Returns ``(lam, v)`` with ``||H v - lam v|| <= tol * ||H||_F`` and
    ``||v|| = 1``.  The starting vector is drawn from a fixed-seed generator so
    repeated calls are bit-identical.  Near-degenerate spectra make plain
    power iteration gap-limited; after the iteration cap the eigenpair is
    taken from a dense Hermitian eigendecomposition instead, which satisfies
    the same contract.
    """
    h = np.asarray(h)
    n = h.shape[0]
    if h.shape != (n, n):
        raise ValueError("max_eigpair expects a square matrix")
    hnorm = float(np.linalg.norm(h))
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    if hnorm == 0.0:
        return 0.0, v
    for _ in range(max_iter):
        hv = h @ v
        lam = float(np.real(np.vdot(v, hv)))
        if np.linalg.norm(hv - lam * v) <= tol * hnorm:
            return lam, v
        nrm = np.linalg.norm(hv)
        if nrm <= 1e-300 * hnorm:
            # start vector lies in the kernel; re-randomize
            v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            v /= np.linalg.norm(v)
            continue
        v = hv / nrm
    # gap-limited: fall back to a dense decomposition
    vals, vecs = np.linalg.eigh(0.5 * (h + h.conj().T))
    v = vecs[:, -1]
    lam = float(np.real(np.vdot(v, h @ v)))
    if np.linalg.norm(h @ v - lam * v) > max(tol, 1e-9) * hnorm:
        raise EigenSolveError("top eigenpair did not converge (degenerate spectrum?)")
    return lam, v


def solve_hpd(a, b):
    """Solve A x = b for Hermitian positive-definite A via Cholesky.

    Raises ``numpy.linalg.LinAlgError`` when a non-positive pivot is met,
    which for the covariance matrices used here signals a missing noise
    floor; callers may add diagonal loading and retry.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    try:
        c, low = scipy.linalg.cho_factor(a, lower=True, check_finite=False)
    except scipy.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(f"matrix is not positive definite: {exc}") from exc
    return scipy.linalg.cho_solve((c, low), b, check_finite=False)


def projector_complement(vectors, dim=None, rank_tol=1e-10):
    """Projector onto the orthogonal complement of span(vectors).

    The span basis is built by modified Gram-Schmidt with re-orthogonalization;
    a candidate is dropped when its residual norm falls below
    ``rank_tol * max_input_norm``.  An empty input returns the identity
    (``dim`` must then be given).  The result satisfies P = P^H, P^2 = P and
    P v = 0 for every input v.
    """
    vectors = [np.asarray(v, dtype=complex) for v in vectors]
    if vectors:
        n = vectors[0].shape[0]
    elif dim is not None:
        n = int(dim)
    else:
        raise ValueError("empty span: pass dim explicitly")
    basis = []
    norms = [np.linalg.norm(v) for v in vectors]
    scale = max(norms) if norms else 0.0
    for v in vectors:
        u = np.asarray(v, dtype=complex).copy()
        for _ in range(2):  # re-orthogonalize once for stability
            for q in basis:
                u -= q * np.vdot(q, u)
        nrm = np.linalg.norm(u)
        if nrm > rank_tol * scale:
            basis.append(u / nrm)
    p = np.eye(n, dtype=complex)
    for q in basis:
        p -= np.outer(q, q.conj())
    return 0.5 * (p + p.conj().T)

"""Dense linear algebra with explicit numerical-rank decisions.

SVD-based Moore-Penrose pseudo-inverse, least-norm symmetric solves, and
Schur-complement block inversion used by the rest of the package. All
routines are pure functions of float64 arrays: no global state, no hidden
randomness, so results are bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import NumericalError, RankDeficiencyError, ValidationError

# Gram matrices arrive symmetric only up to rounding; anything worse than
# this relative asymmetry is treated as a caller error.
SYMMETRY_RTOL = 1e-9


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Coerce to a 2-d float64 array, rejecting empty or non-finite input."""
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValidationError(
            f"{name} must be a 2-d array with at least one row and column, "
            f"got shape {a.shape}"
        )
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} contains NaN or infinite entries")
    return a


def default_rank_tolerance(shape: tuple[int, int]) -> float:
    """Relative singular-value cutoff: max(rows, cols) * machine epsilon."""
    return max(shape) * np.finfo(float).eps


@dataclass(frozen=True)
class PseudoInverseResult:
    """Pseudo-inverse together with the rank decision that produced it.

    ``numerical_rank`` counts the singular values strictly above ``cutoff``
    (an absolute threshold, ``rank_tolerance * sigma_max``); ``pinv`` has the
    transposed shape of the input.
    """

    pinv: np.ndarray
    numerical_rank: int
    singular_values: np.ndarray
    cutoff: float


def pseudo_inverse(m, rank_tolerance: float | None = None) -> PseudoInverseResult:
    """Moore-Penrose pseudo-inverse via SVD with an explicit rank cutoff.

    Parameters
    ----------
    m : array_like
        Matrix with finite entries.
    rank_tolerance : float, optional
        Relative cutoff: singular values at or below
        ``rank_tolerance * sigma_max`` are treated as exact zeros. Defaults
        to ``max(rows, cols) * machine epsilon``.

    Returns
    -------
    PseudoInverseResult
        Satisfies the four Penrose conditions; for a full-rank square input
        the result equals the ordinary inverse.
    """
    a = as_matrix(m)
    try:
        u, s, vt = np.linalg.svd(a, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"SVD did not converge on a {a.shape[0]}x{a.shape[1]} matrix "
            f"(max |entry| = {np.max(np.abs(a)):.3e}): {exc}"
        ) from exc
    tol = default_rank_tolerance(a.shape) if rank_tolerance is None else float(rank_tolerance)
    if tol < 0:
        raise ValidationError(f"rank_tolerance must be nonnegative, got {tol}")
    cutoff = tol * float(s[0])
    rank = int(np.sum(s > cutoff))
    pinv = (vt[:rank].T / s[:rank]) @ u[:, :rank].T
    return PseudoInverseResult(
        pinv=pinv, numerical_rank=rank, singular_values=s, cutoff=cutoff
    )


def block_inverse(a, b, c, d) -> np.ndarray:
    """Invert the block matrix [[a, b], [c, d]] via the Schur complement of a.

    ``a`` must be square and invertible and the Schur complement
    ``d - c a^-1 b`` invertible; rank deficiency in either raises
    :class:`RankDeficiencyError` naming the offending block. The assembled
    result is verified to multiply back to the identity.
    """
    a_ = as_matrix(a, "a")
    b_ = as_matrix(b, "b")
    c_ = as_matrix(c, "c")
    d_ = as_matrix(d, "d")
    p = a_.shape[0]
    q = d_.shape[0]
    if a_.shape != (p, p) or d_.shape != (q, q):
        raise ValidationError("diagonal blocks a and d must be square")
    if b_.shape != (p, q) or c_.shape != (q, p):
        raise ValidationError(
            f"off-diagonal blocks must have shapes {(p, q)} and {(q, p)}, "
            f"got {b_.shape} and {c_.shape}"
        )

    ra = pseudo_inverse(a_)
    if ra.numerical_rank < p:
        raise RankDeficiencyError(
            f"block a is numerically singular (rank {ra.numerical_rank} < {p})"
        )
    a_inv = ra.pinv
    schur = d_ - c_ @ a_inv @ b_
    rs = pseudo_inverse(schur)
    if rs.numerical_rank < q:
        raise RankDeficiencyError(
            f"Schur complement d - c a^-1 b is numerically singular "
            f"(rank {rs.numerical_rank} < {q})"
        )
    s_inv = rs.pinv

    top_left = a_inv + a_inv @ b_ @ s_inv @ c_ @ a_inv
    top_right = -a_inv @ b_ @ s_inv
    bottom_left = -s_inv @ c_ @ a_inv
    inv = np.block([[top_left, top_right], [bottom_left, s_inv]])

    full = np.block([[a_, b_], [c_, d_]])
    residual = np.max(np.abs(full @ inv - np.eye(p + q)))
    # Backward-error bound scaled by the conditioning actually encountered.
    limit = 100 * (p + q) * np.finfo(float).eps * max(
        1.0, np.max(np.abs(full)) * np.max(np.abs(inv))
    )
    if residual > limit:
        raise NumericalError(
            f"block inverse failed verification: |M M^-1 - I| = {residual:.3e} "
            f"exceeds {limit:.3e}"
        )
    return inv


def solve_symmetric_psd(m, rhs) -> np.ndarray:
    """Least-norm solution of ``m @ x = rhs`` for symmetric PSD ``m``.

    Accepts a vector or matrix right-hand side. Asymmetry beyond
    ``SYMMETRY_RTOL`` (relative to the largest entry) is rejected; the
    matrix is exactly symmetrized before solving so rounding asymmetry
    cannot leak into the result.
    """
    a = as_matrix(m, "m")
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValidationError(f"m must be square, got shape {a.shape}")
    scale = np.max(np.abs(a))
    if scale > 0 and np.max(np.abs(a - a.T)) > SYMMETRY_RTOL * scale:
        raise ValidationError(
            "m is asymmetric beyond tolerance "
            f"(max |m - m^T| = {np.max(np.abs(a - a.T)):.3e}, "
            f"allowed {SYMMETRY_RTOL * scale:.3e})"
        )
    a = 0.5 * (a + a.T)

    r = np.asarray(rhs, dtype=float)
    if r.ndim not in (1, 2) or r.shape[0] != n:
        raise ValidationError(
            f"rhs must have {n} rows to match m, got shape {r.shape}"
        )
    if not np.all(np.isfinite(r)):
        raise ValidationError("rhs contains NaN or infinite entries")

    x, *_ = np.linalg.lstsq(a, r, rcond=None)
    return x

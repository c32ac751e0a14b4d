"""Dense complex linear-algebra kernel.

Hermitian eigendecomposition, SVD, nearest-unitary projection, seeded random
unitary generation, and extraction of common subspace directions through
canonical correlation analysis. Everything here is a pure function of its
inputs; LAPACK does the factorization work and the contracts are stated as
residual bounds.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .validation import as_complex_matrix, check_square


class NumericalError(RuntimeError):
    """A dense solver failed to converge or produced unusable output."""


@dataclass(frozen=True)
class Tolerances:
    """Fixed numerical tolerances used across the library.

    reconstruction: relative residual allowed for eigen/SVD factorizations.
    unitarity: Frobenius defect allowed for matrices claimed unitary.
    rank_rel: singular values below rank_rel * sigma_max count as zero.
    gram_defect: threshold above which a degenerate eigenvector block is
        re-orthonormalized.
    """

    reconstruction: float = 1e-10
    unitarity: float = 1e-12
    rank_rel: float = 1e-14
    gram_defect: float = 1e-8


TOLERANCES = Tolerances()


@dataclass
class EigenPair:
    """Eigenvalues and matching eigenvector columns of a Hermitian matrix."""

    values: np.ndarray
    vectors: np.ndarray


def hermitian_eig(a):
    """Eigendecompose a Hermitian matrix.

    Args:
        a: square Hermitian matrix (relative asymmetry at most 1e-12; inputs
            coming from noisy estimates must be preprocessed first).

    Returns:
        EigenPair with real eigenvalues and unit-norm eigenvector columns.
        Column k pairs with values[k]; the ordering is whatever the solver
        produced and carries no meaning at this layer.
    """
    a = check_square(a, "input")
    scale = np.linalg.norm(a)
    if scale > 0 and np.linalg.norm(a - a.conj().T) > 1e-12 * scale:
        raise ValueError("input is not Hermitian within 1e-12 relative asymmetry")
    try:
        values, vectors = scipy.linalg.eigh(a)
    except scipy.linalg.LinAlgError as exc:
        cond = float(np.linalg.cond(a)) if a.size else float("nan")
        raise NumericalError(
            f"eigendecomposition failed for d={a.shape[0]}, "
            f"||A||_F={scale:.3e}, cond~{cond:.3e}: {exc}"
        ) from exc
    norms = np.linalg.norm(vectors, axis=0)
    vectors = vectors / norms
    return EigenPair(values=values, vectors=np.ascontiguousarray(vectors, dtype=complex))


def svd(a):
    """Singular value decomposition A = V diag(sigma) W^H.

    Returns (V, sigma, W) with sigma nonincreasing and nonnegative and with
    V, W unitary. Note the third factor is returned directly, not its
    conjugate transpose.
    """
    a = as_complex_matrix(a, "input")
    try:
        v, sigma, wh = scipy.linalg.svd(a)
    except scipy.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD failed for shape {a.shape}: {exc}") from exc
    return v, sigma, wh.conj().T


def nearest_unitary(a):
    """Best least-squares unitary approximation of a square matrix.

    Computed as V W^H from the SVD A = V diag(sigma) W^H. A rank-deficient
    input triggers a warning (the projection is then not unique) but the
    returned matrix is still unitary.
    """
    a = check_square(a, "input")
    v, sigma, w = svd(a)
    if sigma[0] > 0 and sigma[-1] <= TOLERANCES.rank_rel * sigma[0]:
        warnings.warn(
            "nearest_unitary: input is numerically rank-deficient; "
            "the unitary factor is not unique",
            RuntimeWarning,
            stacklevel=2,
        )
    return v @ w.conj().T


def random_unitary(d, seed, complex_entries=False):
    """Seeded random unitary of dimension d.

    Default construction: QR factorization of a d x d real matrix with
    i.i.d. entries uniform on [0, 1); the returned Q factor is real
    orthogonal (stored as complex). With complex_entries=True a complex
    Ginibre matrix is factored instead and the Q columns are phase-fixed,
    giving Haar-distributed complex unitaries; this mode is an extension
    used only when explicitly requested.

    Deterministic: a given (d, seed) pair always returns bitwise-identical
    output (PCG64 generator).
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    rng = np.random.default_rng(seed)
    if complex_entries:
        m = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        q, r = scipy.linalg.qr(m)
        diag = np.diag(r)
        q = q * (diag / np.abs(diag))
        return np.ascontiguousarray(q, dtype=complex)
    m = rng.random((d, d))
    q, _ = scipy.linalg.qr(m)
    return np.ascontiguousarray(q, dtype=complex)


def _orthonormal_basis(b, name):
    b = as_complex_matrix(b, name)
    if b.shape[1] == 0:
        raise ValueError(f"{name} has no columns")
    q, r = scipy.linalg.qr(b, mode="economic")
    diag = np.abs(np.diag(r))
    if diag.size and diag.min() <= TOLERANCES.rank_rel * max(diag.max(), 1.0):
        raise NumericalError(
            f"{name} is rank-deficient after orthonormalization "
            f"(smallest |R_kk| = {diag.min():.3e})"
        )
    return q

def _fix_phase(v):
    # deterministic output convention only; any unit-modulus factor is valid
    idx = np.flatnonzero(np.abs(v) > 1e-12)
    if idx.size:
        v = v * (np.abs(v[idx[0]]) / v[idx[0]])
    return v


def _cca_core(q1, q2, count):
    # q1, q2 must already have orthonormal columns
    if q1.shape[0] != q2.shape[0]:
        raise ValueError("bases live in different ambient dimensions")
    if count < 1 or count > q1.shape[1]:
        raise ValueError(
            f"requested {count} directions from a {q1.shape[1]}-dimensional basis"
        )
    overlap = q1.conj().T @ q2
    u, _, _ = svd(overlap)
    out = q1 @ u[:, :count]
    out = out / np.linalg.norm(out, axis=0)
    for k in range(count):
        out[:, k] = _fix_phase(out[:, k])
    return out


def cca_directions(b1, b2, count):
    """First `count` canonical directions shared by span(b1) and span(b2).

    Each basis is orthonormalized by QR, the overlap M = Q1^H Q2 is formed,
    and the directions returned are Q1 @ u_k for the top left singular
    vectors u_k of M, expressed on the first basis's side. Columns are unit
    norm with the leading nonzero component made real-positive so repeated
    runs agree exactly.
    """
    q1 = _orthonormal_basis(b1, "first basis")
    q2 = _orthonormal_basis(b2, "second basis")
    return _cca_core(q1, q2, count)


def cca_principal_direction(b1, b2):
    """Unit vector maximally correlated between span(b1) and span(b2).

    The top canonical direction; defined up to a unit-modulus factor, pinned
    here by the real-positive leading-component convention of cca_directions.
    """
    return cca_directions(b1, b2, 1)[:, 0]

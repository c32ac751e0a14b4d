"""Input validation helpers shared by the estimators and the functional API."""

import numpy as np


def as_complex_matrix(a, name="matrix"):
    """Coerce input to a 2-D complex ndarray, rejecting non-finite entries."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")
    return a


def as_ket(v, name="ket"):
    v = np.asarray(v, dtype=complex).ravel()
    if v.size < 1:
        raise ValueError(f"{name} must have at least one component")
    if not np.all(np.isfinite(v)):
        raise ValueError(f"{name} contains non-finite entries")
    return v


def check_square(a, name="matrix"):
    a = as_complex_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"{name} must be square, got shape {a.shape}")
    return a


def check_hermitian(a, tol=1e-12, name="matrix"):
    """Require relative asymmetry ||A - A^H||_F <= tol * ||A||_F."""
    a = check_square(a, name)
    scale = np.linalg.norm(a)
    if scale == 0.0:
        return a
    if np.linalg.norm(a - a.conj().T) > tol * scale:
        raise ValueError(f"{name} is not Hermitian within relative tolerance {tol}")
    return a


def check_unitary(a, tol=1e-10, name="matrix"):
    a = check_square(a, name)
    d = a.shape[0]
    defect = np.linalg.norm(a.conj().T @ a - np.eye(d))
    if defect > tol * np.sqrt(d):
        raise ValueError(
            f"{name} is not unitary: ||A^H A - I||_F = {defect:.3e} "
            f"exceeds {tol:.1e} * sqrt({d})"
        )
    return a


def check_same_dim(a, b, name_a="first operand", name_b="second operand"):
    if a.shape[0] != b.shape[0]:
        raise ValueError(
            f"dimension mismatch: {name_a} has dimension {a.shape[0]}, "
            f"{name_b} has dimension {b.shape[0]}"
        )


def unitarity_defect(a):
    """||A^H A - I||_F, the standard departure-from-unitarity measure."""
    a = np.asarray(a)
    return float(np.linalg.norm(a.conj().T @ a - np.eye(a.shape[0])))

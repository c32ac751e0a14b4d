"""Constructors for the structured input states and process propagation.

All constructed density matrices are diagonal with strictly positive entries
and unit trace. The diagonal patterns encode which estimator stage a state
feeds, and that wiring information travels with the matrix as metadata.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .validation import as_ket, check_same_dim, check_square, check_unitary

SINGLE_STAGE = "single-stage"
TWO_STAGE_FIRST = "two-stage-first"
TWO_STAGE_SECOND = "two-stage-second"
MULTI_STAGE = "multi-stage"
EXTERNAL = "external"


@dataclass
class DensityMatrix:
    """Hermitian unit-trace matrix plus stage-layout metadata.

    layout describes what the matrix itself is (a constructed diagonal
    pattern, or external data). origin remembers which constructed pattern
    a matrix descends from once propagation and preprocessing have turned
    its layout into "external"; estimators use it to catch wiring mistakes.
    level is the recursion depth for multi-stage patterns, None otherwise.
    """

    matrix: np.ndarray
    layout: str = EXTERNAL
    level: int | None = None
    origin: str | None = field(default=None)

    def __post_init__(self):
        self.matrix = check_square(self.matrix, "density matrix")
        if self.origin is None and self.layout != EXTERNAL:
            # multi-stage tags carry the level so provenance survives the
            # noise/preprocess round trip, which returns plain matrices
            if self.layout == MULTI_STAGE:
                self.origin = f"{MULTI_STAGE}-L{self.level}"
            else:
                self.origin = self.layout

    @property
    def dim(self):
        return self.matrix.shape[0]


def _diag_density(values, layout, level=None):
    m = np.diag(values.astype(complex))
    return DensityMatrix(matrix=m, layout=layout, level=level)


def single_stage_density(d):
    """Diagonal input state with d strictly decreasing eigenvalues.

    Entry k (1-based) is 2(d-k+1)/(d(d+1)); the entries sum to one and are
    equispaced, which maximizes the worst-case eigenvalue gap available to
    the sorting step.
    """
    if d < 2:
        raise ValueError(f"single_stage_density needs d >= 2, got {d}")
    k = np.arange(1, d + 1)
    r = 2.0 * (d - k + 1) / (d * (d + 1))
    return _diag_density(r, SINGLE_STAGE)


def two_stage_densities(m1, n2):
    """The pair of block-structured inputs used by the two-stage estimators.

    With r_k = 2(n2-k+1)/(d(n2+1)) and d = m1*n2:
      first  = diag(r) ⊗ I_{m1}   (each value repeated m1 times, contiguous)
      second = I_{m1} ⊗ diag(r)   (the values cycling with period n2)

    Args:
        m1: multiplicity of each distinct value.
        n2: number of distinct values.

    Returns:
        (first, second) DensityMatrix pair, layouts two-stage-first/second.
    """
    if m1 < 1:
        raise ValueError(f"m1 must be >= 1, got {m1}")
    if n2 < 2:
        raise ValueError(f"n2 must be >= 2, got {n2}")
    if m1 > n2:
        # estimators using the shared-column pairing require m1 <= n2;
        # the multi-stage construction deliberately violates it
        warnings.warn(
            f"m1={m1} exceeds n2={n2}; the two-stage pairing argument "
            "does not cover this layout",
            RuntimeWarning,
            stacklevel=2,
        )
    d = m1 * n2
    k = np.arange(1, n2 + 1)
    r = 2.0 * (n2 - k + 1) / (d * (n2 + 1))
    first = np.kron(np.diag(r), np.eye(m1))
    second = np.kron(np.eye(m1), np.diag(r))
    return (
        DensityMatrix(matrix=first.astype(complex), layout=TWO_STAGE_FIRST),
        DensityMatrix(matrix=second.astype(complex), layout=TWO_STAGE_SECOND),
    )


def multi_stage_density(d, level):
    """Dichotomic recursion input state for a given level.

    Two distinct values gamma_1 = 4/(3d) and gamma_2 = 2/(3d), each with
    total multiplicity d/2, arranged as I_{n_b} ⊗ diag(g1, g2) ⊗ I_{b_s}
    with n_b = 2^level blocks of size b_s = (d/2)/n_b. Level 0 is the
    two-contiguous-halves pattern; the deepest level alternates the two
    values entry by entry.
    """
    if d < 8 or d & (d - 1):
        raise ValueError(f"multi_stage_density needs d a power of 2, d >= 8, got {d}")
    m1 = d // 2
    max_level = int(np.log2(m1))
    if not 0 <= level <= max_level:
        raise ValueError(
            f"level must be in [0, {max_level}] for d={d}, got {level}"
        )
    n_b = 2**level
    b_s = m1 // n_b
    gammas = np.array([4.0 / (3.0 * d), 2.0 / (3.0 * d)])
    diag = np.kron(np.kron(np.eye(n_b), np.diag(gammas)), np.eye(b_s))
    return DensityMatrix(matrix=diag.astype(complex), layout=MULTI_STAGE, level=level)


def probe_ket(d):
    """The flat probe: every component 1/sqrt(d).

    All components share the largest modulus a unit ket allows, keeping the
    later element-wise division by this ket maximally well conditioned.
    """
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return np.full(d, 1.0 / np.sqrt(d), dtype=complex)


def apply_process_density(u, rho):
    """Propagate a mixed state through a unitary process: U rho U^H.

    The result's layout is external (it is generally no longer a
    constructed diagonal pattern) but the origin tag is preserved.
    """
    u = check_unitary(u, 1e-10, "process matrix")
    check_same_dim(u, rho.matrix, "process matrix", "density matrix")
    out = u @ rho.matrix @ u.conj().T
    return DensityMatrix(
        matrix=out, layout=EXTERNAL, level=rho.level, origin=rho.origin
    )


def apply_process_ket(u, psi):
    """Propagate a pure state through a unitary process: U psi."""
    u = check_unitary(u, 1e-10, "process matrix")
    psi = as_ket(psi)
    check_same_dim(u, psi.reshape(-1, 1), "process matrix", "ket")
    return u @ psi

"""Unitary-process estimators built on eigenstructure of propagated states.

The family shares one skeleton. A structured mixed state is sent through the
unknown unitary U; eigendecomposing the (preprocessed) output and sorting by
eigenvalue recovers U's columns up to one phase factor each, with column
order pinned by the known input spectrum. A flat pure probe then fixes the
per-column phases, leaving a single physically irrelevant global phase.

Estimators differ in how they defeat eigenvalue degeneracy:

- eqpt1: all d input eigenvalues distinct; one stage.
- eqpt_two_stage (eqpt2/3/4): n2 distinct values of multiplicity m1 in two
  complementary block layouts; matching eigensubspaces from the two stages
  intersect in single columns, extracted by canonical correlation. The two
  unitarized modes differ only in where the SVD projection is applied.
- eqpt5: only two distinct values per stage, log2(d/2)+1 stages; a binary
  recursion narrows subspace intersections until single columns remain.

Variants swap one half of the skeleton: a known non-diagonal input density
(its eigenbasis is divided out at the end) or a mixed second input whose
first row carries the phase information a pure probe would.
"""

import time
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .linalg import (
    TOLERANCES,
    NumericalError,
    _cca_core,
    _orthonormal_basis,
    hermitian_eig,
    nearest_unitary,
)
from .states import (
    MULTI_STAGE,
    SINGLE_STAGE,
    TWO_STAGE_FIRST,
    TWO_STAGE_SECOND,
    DensityMatrix,
    probe_ket,
)
from .validation import as_ket, check_square, unitarity_defect

MODE_NONE = "none"
MODE_UNITARIZE_BEFORE_PHASE = "unitarize-before-phase"
MODE_UNITARIZE_AFTER_PHASE = "unitarize-after-phase"
TWO_STAGE_MODES = (MODE_NONE, MODE_UNITARIZE_BEFORE_PHASE, MODE_UNITARIZE_AFTER_PHASE)

_MODE_METHOD = {
    MODE_NONE: "eqpt2",
    MODE_UNITARIZE_BEFORE_PHASE: "eqpt3",
    MODE_UNITARIZE_AFTER_PHASE: "eqpt4",
}


@dataclass
class SortedEig:
    """Eigenpairs sorted by nonincreasing eigenvalue, columns unit norm."""

    values: np.ndarray
    vectors: np.ndarray
    notes: list = field(default_factory=list)


@dataclass
class Diagnostics:
    """Per-run health record.

    eigen_gaps: minimal consecutive gap of each stage's sorted spectrum
        (near zero whenever the stage has designed degeneracy).
    unitarity_defect: ||U_hat^H U_hat - I||_F of the returned estimate.
    stage_seconds: wall time per pipeline stage, phase step last.
    notes: irregular events (degenerate-block re-orthonormalization, ...).
    """

    eigen_gaps: list = field(default_factory=list)
    unitarity_defect: float = 0.0
    stage_seconds: list = field(default_factory=list)
    notes: list = field(default_factory=list)


@dataclass
class ProcessEstimate:
    """An estimated process matrix plus how it was obtained."""

    matrix: np.ndarray
    method: str
    diagnostics: Diagnostics


def _matrix_of(rho):
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def _check_origin(rho, allowed, what):
    # origin is best-effort provenance; user-supplied data (origin None) passes
    if isinstance(rho, DensityMatrix) and rho.origin is not None:
        if rho.origin not in allowed:
            raise ValueError(
                f"{what} was built as '{rho.origin}' but this estimator "
                f"expects one of {sorted(allowed)}"
            )


def _min_gap(values):
    if len(values) < 2:
        return float("inf")
    return float(np.min(np.abs(np.diff(values))))


def sorted_eigendecomposition(rho):
    """Eigendecompose and order by nonincreasing eigenvalue.

    The permutation is applied jointly to eigenvalues and eigenvector
    columns; the sort is stable so ties keep the solver's order. Columns
    are renormalized unconditionally. Within a numerically degenerate
    eigenvalue block the solver's basis is trusted unless its Gram matrix
    departs from identity by more than 1e-8, in which case the block is
    re-orthonormalized by QR and the event is noted.
    """
    m = _matrix_of(rho)
    tr = float(np.trace(m).real)
    if abs(tr - 1.0) > 1e-6:
        raise ValueError(
            f"expected a preprocessed unit-trace matrix, got trace {tr:.6f}"
        )
    pair = hermitian_eig(m)
    order = np.argsort(-pair.values, kind="stable")
    values = pair.values[order]
    vectors = pair.vectors[:, order]
    vectors = vectors / np.linalg.norm(vectors, axis=0)

    notes = []
    d = len(values)
    tie_tol = 1e-12
    start = 0
    for k in range(1, d + 1):
        if k == d or values[k - 1] - values[k] > tie_tol:
            if k - start > 1:
                block = vectors[:, start:k]
                gram = block.conj().T @ block
                defect = np.linalg.norm(gram - np.eye(k - start))
                if defect > TOLERANCES.gram_defect:
                    q, _ = scipy.linalg.qr(block, mode="economic")
                    vectors[:, start:k] = q
                    notes.append(
                        f"re-orthonormalized eigenvalue block [{start}:{k}] "
                        f"(Gram defect {defect:.2e})"
                    )
            start = k
    return SortedEig(values=values, vectors=vectors, notes=notes)


def resolve_phases_pure(u2, psi1, phi2_hat):
    """Fix per-column phases using a pure probe with nonzero components.

    Given u2 whose columns equal the true process columns up to phases,
    the probe psi1 sent through the true process, and the normalized
    estimate phi2_hat of that output: forms psi3 = u2^H phi2_hat and
    returns u2 scaled column-wise by psi3 / psi1 (element-wise). With
    exact inputs the result is the true process times one global phase.
    """
    u2 = check_square(u2, "column estimate")
    psi1 = as_ket(psi1, "probe ket")
    phi2_hat = as_ket(phi2_hat, "output ket estimate")
    if np.any(np.abs(psi1) < 1e-12):
        raise ValueError(
            "probe ket has a (near-)zero component; element-wise division undefined"
        )
    psi3 = u2.conj().T @ phi2_hat
    return u2 * (psi3 / psi1)[np.newaxis, :]


def resolve_phases_mixed(u2, rho5, rho8_pre):
    """Fix per-column phases using a known mixed second input instead.

    rho5 is the known second input density; rho8_pre the preprocessed
    estimate of its output. Conjugating rho8 into u2's column frame leaves
    rho5 with its off-diagonal entries rotated by exactly the unknown
    phase differences, so dividing the first rows element-wise reads them
    off: returns u2 * diag(conj(row1(u2^H rho8 u2) / row1(rho5))).

    A diagonal rho5 is rejected: every phase factor then cancels and the
    first-row ratios carry no information.
    """
    u2 = check_square(u2, "column estimate")
    r5 = _matrix_of(rho5)
    r8 = _matrix_of(rho8_pre)
    off = r5 - np.diag(np.diag(r5))
    if np.linalg.norm(off) <= 1e-14 * max(1.0, np.linalg.norm(r5)):
        raise ValueError(
            "second input density is diagonal; it carries no phase information"
        )
    first_row = r5[0, :]
    if np.any(np.abs(first_row) < 1e-12):
        raise ValueError(
            "every first-row entry of the second input density must be nonzero"
        )
    rho9 = u2.conj().T @ r8 @ u2
    ratios = rho9[0, :] / first_row
    return u2 * np.conj(ratios)[np.newaxis, :]


def eqpt1(rho2_pre, phi2_hat, d=None):
    """One-stage estimator: all input eigenvalues distinct.

    Args:
        rho2_pre: preprocessed output density for the single-stage input
            (d strictly decreasing eigenvalues).
        phi2_hat: normalized output-ket estimate for the flat probe.
        d: optional dimension cross-check.

    Returns:
        ProcessEstimate with method "eqpt1".
    """
    _check_origin(rho2_pre, {SINGLE_STAGE}, "stage input")
    m = _matrix_of(rho2_pre)
    phi2_hat = as_ket(phi2_hat)
    dim = m.shape[0]
    if d is not None and d != dim:
        raise ValueError(f"declared dimension {d} does not match input {dim}")
    if phi2_hat.size != dim:
        raise ValueError("probe output and density dimensions differ")

    t0 = time.perf_counter()
    se = sorted_eigendecomposition(m)
    t1 = time.perf_counter()
    u3 = resolve_phases_pure(se.vectors, probe_ket(dim), phi2_hat)
    t2 = time.perf_counter()

    diag = Diagnostics(
        eigen_gaps=[_min_gap(se.values)],
        unitarity_defect=unitarity_defect(u3),
        stage_seconds=[t1 - t0, t2 - t1],
        notes=list(se.notes),
    )
    return ProcessEstimate(matrix=u3, method="eqpt1", diagnostics=diag)


def eqpt_two_stage(rho2_pre, rho6_pre, phi2_hat, m1, n2, mode=MODE_NONE):
    """Two-stage estimator for inputs with m1-fold degenerate eigenvalues.

    Stage one uses the contiguous-blocks layout, stage two the cycling
    layout. Sorted eigensubspace i of stage one spans process columns
    (i-1)m1+1 .. i*m1; subspace j of stage two spans the columns congruent
    to j modulo n2. Each target column is the canonical-correlation
    principal direction of its pair of subspace bases.

    mode selects the estimator flavor:
        "none": raw assembly (method eqpt2).
        "unitarize-before-phase": SVD-project the assembled matrix to the
            nearest unitary, then fix phases; the phase factors are
            projected to unit modulus so the output stays unitary
            (method eqpt3).
        "unitarize-after-phase": fix phases first, project the final
            matrix (method eqpt4).

    Requires m1 <= n2: a block of m1 consecutive columns meets each
    residue class modulo n2 at most once, so the pairing is unambiguous.
    """
    if mode not in TWO_STAGE_MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {TWO_STAGE_MODES}")
    if m1 < 1 or n2 < 2:
        raise ValueError(f"need m1 >= 1 and n2 >= 2, got m1={m1}, n2={n2}")
    if m1 > n2:
        raise ValueError(
            f"m1={m1} exceeds n2={n2}; shared-column pairing needs m1 <= n2"
        )
    _check_origin(rho2_pre, {TWO_STAGE_FIRST}, "first stage input")
    _check_origin(rho6_pre, {TWO_STAGE_SECOND}, "second stage input")
    ma = _matrix_of(rho2_pre)
    mb = _matrix_of(rho6_pre)
    phi2_hat = as_ket(phi2_hat)
    d = m1 * n2
    if ma.shape[0] != d or mb.shape[0] != d or phi2_hat.size != d:
        raise ValueError(
            f"inputs must all have dimension m1*n2 = {d}; got "
            f"{ma.shape[0]}, {mb.shape[0]}, {phi2_hat.size}"
        )

    t0 = time.perf_counter()
    stage1 = sorted_eigendecomposition(ma)
    t1 = time.perf_counter()
    stage2 = sorted_eigendecomposition(mb)
    t2 = time.perf_counter()

    # orthonormalize each m1-wide eigensubspace block once, not once per column
    blocks1 = [
        _orthonormal_basis(stage1.vectors[:, i * m1 : (i + 1) * m1], "first basis")
        for i in range(n2)
    ]
    blocks2 = [
        _orthonormal_basis(stage2.vectors[:, j * m1 : (j + 1) * m1], "second basis")
        for j in range(n2)
    ]
    u4 = np.empty((d, d), dtype=complex)
    for c in range(d):
        col = _cca_core(blocks1[c // m1], blocks2[c % n2], 1)[:, 0]
        u4[:, c] = col / np.linalg.norm(col)
    t3 = time.perf_counter()

    psi1 = probe_ket(d)
    if mode == MODE_UNITARIZE_BEFORE_PHASE:
        u4u = nearest_unitary(u4)
        psi3 = u4u.conj().T @ phi2_hat
        ratios = psi3 / psi1
        moduli = np.abs(ratios)
        if np.any(moduli < 1e-12):
            raise NumericalError("a phase-factor estimate has vanishing modulus")
        # keep only the phases; the unitarized columns already have unit norm
        u3 = u4u * (ratios / moduli)[np.newaxis, :]
    elif mode == MODE_UNITARIZE_AFTER_PHASE:
        u3 = nearest_unitary(resolve_phases_pure(u4, psi1, phi2_hat))
    else:
        u3 = resolve_phases_pure(u4, psi1, phi2_hat)
    t4 = time.perf_counter()

    diag = Diagnostics(
        eigen_gaps=[_min_gap(stage1.values), _min_gap(stage2.values)],
        unitarity_defect=unitarity_defect(u3),
        stage_seconds=[t1 - t0, t2 - t1, t3 - t2, t4 - t3],
        notes=list(stage1.notes) + list(stage2.notes),
    )
    return ProcessEstimate(matrix=u3, method=_MODE_METHOD[mode], diagnostics=diag)


def _require_dichotomic_dim(d):
    if d < 8 or d & (d - 1):
        raise ValueError(f"need d a power of 2 with d >= 8, got {d}")


def multi_stage_column_sets(d):
    """Structural bookkeeping of the dichotomic recursion.

    Returns, for each level, the pair of 1-based process-column index sets
    its two sorted eigensubspaces span. At level l the split is by bit
    log2(d/2) - l of the 0-based column index (first subset: bit 0). The
    intersection across all levels of one subset per level is a single
    column, and visiting the subsets in binary counting order yields the
    columns in increasing order.
    """
    _require_dichotomic_dim(d)
    lmax = int(np.log2(d // 2))
    sets = []
    for level in range(lmax + 1):
        bit = lmax - level
        s1 = [c + 1 for c in range(d) if not (c >> bit) & 1]
        s2 = [c + 1 for c in range(d) if (c >> bit) & 1]
        sets.append((s1, s2))
    return sets


def eqpt5(rho_stages, phi2_hat, d):
    """Multi-stage dichotomic estimator.

    Args:
        rho_stages: preprocessed output densities, one per level
            0 .. log2(d/2), in level order.
        phi2_hat: normalized output-ket estimate for the flat probe.
        d: dimension, a power of 2, at least 8.

    Each level's sorted eigendecomposition splits into a first-half and a
    second-half column block. The recursion walks a binary tree: at the
    root the running subspace is a whole half; deeper levels intersect it
    with each of the current level's halves, keeping the top (d/2)/2^level
    canonical directions (expressed on the running subspace's side); at
    the deepest level single columns remain. Left-before-right concatenation
    makes leaf k the estimate of process column k.
    """
    _require_dichotomic_dim(d)
    m1 = d // 2
    lmax = int(np.log2(m1))
    if len(rho_stages) != lmax + 1:
        raise ValueError(
            f"need one output density per level 0..{lmax}, got {len(rho_stages)}"
        )
    phi2_hat = as_ket(phi2_hat)
    if phi2_hat.size != d:
        raise ValueError("probe output dimension does not match d")
    for level, rho in enumerate(rho_stages):
        _check_origin(rho, {f"{MULTI_STAGE}-L{level}"}, f"level-{level} input")
        if _matrix_of(rho).shape[0] != d:
            raise ValueError(f"level-{level} input has wrong dimension")

    times = []
    gaps = []
    notes = []
    halves = []
    for level in range(lmax + 1):
        t0 = time.perf_counter()
        se = sorted_eigendecomposition(_matrix_of(rho_stages[level]))
        times.append(time.perf_counter() - t0)
        gaps.append(_min_gap(se.values))
        notes.extend(se.notes)
        # orthonormalize each half once; every subtree at this level reuses it
        halves.append(
            (
                _orthonormal_basis(se.vectors[:, :m1], "first basis"),
                _orthonormal_basis(se.vectors[:, m1:], "second basis"),
            )
        )

    def descend(level, basis):
        left, right = halves[level]
        if level == 0:
            s1, s2 = left, right
        else:
            keep = m1 >> level
            q = _orthonormal_basis(basis, "first basis")
            s1 = _cca_core(q, left, keep)
            s2 = _cca_core(q, right, keep)
        if level < lmax:
            return np.hstack([descend(level + 1, s1), descend(level + 1, s2)])
        c1 = s1[:, 0] / np.linalg.norm(s1[:, 0])
        c2 = s2[:, 0] / np.linalg.norm(s2[:, 0])
        return np.column_stack([c1, c2])

    t0 = time.perf_counter()
    u2 = descend(0, None)
    times.append(time.perf_counter() - t0)

    t0 = time.perf_counter()
    u3 = resolve_phases_pure(u2, probe_ket(d), phi2_hat)
    times.append(time.perf_counter() - t0)

    diag = Diagnostics(
        eigen_gaps=gaps,
        unitarity_defect=unitarity_defect(u3),
        stage_seconds=times,
        notes=notes,
    )
    return ProcessEstimate(matrix=u3, method="eqpt5", diagnostics=diag)


def eqpt1_general_input(rho1_known, rho2_pre, phi2_hat):
    """One-stage estimator for a known non-diagonal input density.

    The known input is eigendecomposed (sorted, unit columns) into u_i1;
    the ordinary one-stage pipeline then recovers the product of the true
    process with u_i1 up to column phases, the probe division is taken
    against psi4 = u_i1^H psi1 instead of psi1, and u_i1 is divided out
    on the right. All eigenvalues of the known input must be distinct.
    """
    r1 = _matrix_of(rho1_known)
    phi2_hat = as_ket(phi2_hat)
    dim = r1.shape[0]

    t0 = time.perf_counter()
    se1 = sorted_eigendecomposition(r1)
    gap1 = _min_gap(se1.values)
    if gap1 < 1e-10:
        raise ValueError(
            f"known input density has (near-)repeated eigenvalues "
            f"(min gap {gap1:.2e}); column order would be ambiguous"
        )
    u_i1 = se1.vectors
    t1 = time.perf_counter()
    se2 = sorted_eigendecomposition(_matrix_of(rho2_pre))
    t2 = time.perf_counter()

    psi1 = probe_ket(dim)
    psi4 = u_i1.conj().T @ psi1
    if np.any(np.abs(psi4) < 1e-12):
        raise ValueError(
            "probe ket has a vanishing component in the known input's "
            "eigenbasis; phases cannot be resolved"
        )
    psi3 = se2.vectors.conj().T @ phi2_hat
    u3 = (se2.vectors * (psi3 / psi4)[np.newaxis, :]) @ u_i1.conj().T
    t3 = time.perf_counter()

    diag = Diagnostics(
        eigen_gaps=[gap1, _min_gap(se2.values)],
        unitarity_defect=unitarity_defect(u3),
        stage_seconds=[t1 - t0, t2 - t1, t3 - t2],
        notes=list(se1.notes) + list(se2.notes),
    )
    return ProcessEstimate(matrix=u3, method="variant-g", diagnostics=diag)


def eqpt1_mixed_probe(rho2_pre, rho5, rho8_pre):
    """One-stage estimator with the phase step driven by a mixed input.

    The eigen stage is identical to eqpt1; the probe ket is replaced by a
    known non-diagonal second input density rho5 whose preprocessed output
    estimate rho8_pre supplies the phase differences (resolve_phases_mixed).
    """
    _check_origin(rho2_pre, {SINGLE_STAGE}, "stage input")
    t0 = time.perf_counter()
    se = sorted_eigendecomposition(_matrix_of(rho2_pre))
    t1 = time.perf_counter()
    u3 = resolve_phases_mixed(se.vectors, rho5, rho8_pre)
    t2 = time.perf_counter()

    diag = Diagnostics(
        eigen_gaps=[_min_gap(se.values)],
        unitarity_defect=unitarity_defect(u3),
        stage_seconds=[t1 - t0, t2 - t1],
        notes=list(se.notes),
    )
    return ProcessEstimate(matrix=u3, method="variant-h", diagnostics=diag)

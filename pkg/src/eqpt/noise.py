"""State-estimation error models and the preprocessing that undoes their damage.

Real tomography is replaced by a parametric fluctuation model: estimated
quantities are the true ones plus uniform perturbations of tunable width w.
Raw noisy outputs deliberately violate the structure the true objects have
(unit norm, Hermitian symmetry, unit trace); `normalize_ket` and
`hermitian_unit_trace` are the repair steps every estimator input goes
through.

Randomness comes from numpy's counter-based Philox generator keyed by the
seed. Entries are perturbed in row-major order and entry k always consumes
stream positions 2k and 2k+1, so each entry's perturbation is a pure
function of (seed, entry index): results are reproducible bit-for-bit on
any platform and independent of evaluation order.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import NumericalError
from .states import EXTERNAL, DensityMatrix
from .validation import as_complex_matrix, as_ket


@dataclass(frozen=True)
class NoiseSpec:
    """Uniform fluctuation width and the seed of the Philox stream."""

    width: float
    seed: int

    def __post_init__(self):
        if self.width < 0:
            raise ValueError(f"noise width must be >= 0, got {self.width}")


def _entry_noise(spec, n):
    """n pairs (real, imag) of independent uniforms on [-w/2, w/2]."""
    rng = np.random.Generator(np.random.Philox(key=spec.seed))
    half = spec.width / 2.0
    draws = rng.uniform(-half, half, size=(n, 2))
    return draws[:, 0], draws[:, 1]


def noisy_ket(psi, noise):
    """Add an independent complex perturbation to every ket component.

    Real and imaginary parts are each uniform on [-w/2, w/2] (variance
    w^2/12). The output is NOT renormalized; that is left to preprocessing.
    """
    psi = as_ket(psi)
    if noise.width == 0.0:
        return psi.copy()
    re, im = _entry_noise(noise, psi.size)
    return psi + re + 1j * im


def noisy_density(rho, noise):
    """Fluctuation model for an estimated density matrix.

    Per entry, with independent eps_R, eps_I uniform on [-w/2, w/2]:

        rho_hat_kl = rho_kl + 2 sqrt(|rho_kl|) eps_R + eps_R^2
                     + i (2 sqrt(|rho_kl|) eps_I + eps_I^2)

    which mimics squaring a perturbed amplitude. The (k,l) and (l,k)
    entries are perturbed independently, so the output is generally
    neither Hermitian nor unit trace; preprocessing restores both.

    Returns a plain complex matrix, not a DensityMatrix.
    """
    m = rho.matrix if isinstance(rho, DensityMatrix) else as_complex_matrix(rho)
    if noise.width == 0.0:
        return m.copy()
    re, im = _entry_noise(noise, m.size)
    eps_r = re.reshape(m.shape)
    eps_i = im.reshape(m.shape)
    root = np.sqrt(np.abs(m))
    return m + 2.0 * root * eps_r + eps_r**2 + 1j * (2.0 * root * eps_i + eps_i**2)


def hermitian_unit_trace(rho_hat, origin=None):
    """Project a raw estimate onto Hermitian unit-trace form.

    Returns ((A + A^H)/2) / tr((A + A^H)/2). Idempotent. A near-zero trace
    means the estimate is too corrupted to carry state information and
    raises a numerical error.

    Args:
        rho_hat: raw complex matrix (e.g. a noisy_density output).
        origin: optional provenance tag re-attached to the result so
            estimators can keep validating stage wiring.
    """
    if isinstance(rho_hat, DensityMatrix):
        origin = origin or rho_hat.origin
        rho_hat = rho_hat.matrix
    a = as_complex_matrix(rho_hat, "density estimate")
    if a.shape[0] != a.shape[1]:
        raise ValueError(f"density estimate must be square, got {a.shape}")
    herm = (a + a.conj().T) / 2.0
    tr = float(np.trace(herm).real)
    if abs(tr) <= 1e-12:
        raise NumericalError(
            f"trace of Hermitian part is {tr:.3e}; estimate carries no usable signal"
        )
    return DensityMatrix(matrix=herm / tr, layout=EXTERNAL, origin=origin)


def normalize_ket(psi_hat):
    """Divide a ket estimate by its norm."""
    psi_hat = as_ket(psi_hat)
    norm = np.linalg.norm(psi_hat)
    if norm <= 1e-12:
        raise NumericalError(f"ket norm {norm:.3e} is too small to normalize")
    return psi_hat / norm

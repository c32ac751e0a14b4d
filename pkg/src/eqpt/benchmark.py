"""Monte-Carlo benchmarking of the estimator family.

Reproducibility contract: every random draw inside a trial is generated
from a counter-based stream keyed by a hash of (caller seed, purpose
label), so a trial is a pure function of its arguments. Two trials with
the same seed but different methods share the same true process and the
same probe noise, which makes cross-method comparisons paired. Sweep
results are therefore independent of execution order and worker count.
"""

import hashlib
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import algorithms
from .linalg import random_unitary
from .noise import NoiseSpec, hermitian_unit_trace, noisy_density, noisy_ket, normalize_ket
from .states import (
    DensityMatrix,
    apply_process_density,
    apply_process_ket,
    multi_stage_density,
    probe_ket,
    single_stage_density,
    two_stage_densities,
)
from .validation import check_same_dim, check_square

METHODS = ("eqpt1", "eqpt2", "eqpt3", "eqpt4", "eqpt5", "variant-g", "variant-h")

DEFAULT_WIDTHS = (1e-4, 1e-3, 1e-2)


def nmse(u, u_hat):
    """Squared distance between processes, minimized over a global phase.

    Equals min over theta of ||u - exp(i theta) u_hat||_F^2 / (2 d),
    whose closed form is
    (||u||_F^2 + ||u_hat||_F^2 - 2 |tr(u^H u_hat)|) / (2 d).
    The minimizing phase is the argument of t = tr(u^H u_hat), so the
    value is evaluated as the norm of the phase-aligned difference
    u - (conj(t)/|t|) u_hat; subtracting near-equal O(d) norms instead
    would bury everything below machine epsilon times 2d, and exact
    recovery would look like an error of sqrt(eps). For unitary
    arguments the value lies in [0, 2]; it is 0 exactly when the two
    matrices agree up to a global phase.
    """
    u = check_square(u, "reference process")
    u_hat = check_square(u_hat, "estimated process")
    check_same_dim(u, u_hat)
    d = u.shape[0]
    t = np.trace(u.conj().T @ u_hat)
    z = np.conj(t) / abs(t) if abs(t) > 0 else 1.0
    val = np.linalg.norm(u - z * u_hat) ** 2 / (2.0 * d)
    return float(val)


def nrmse(u, u_hat):
    return math.sqrt(nmse(u, u_hat))


def derive_seed(*parts):
    """Deterministic 63-bit child seed from a tuple of labels and ints."""
    text = "|".join(str(p) for p in parts)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "big") & (2**63 - 1)


def mixed_phase_probe_density(d):
    """Known mixed input whose first row is dense: (ones(d,d) + I) / (2d)."""
    if d < 2:
        raise ValueError(f"need dimension >= 2, got {d}")
    return (np.ones((d, d)) + np.eye(d)) / (2.0 * d)


@dataclass
class TrialRecord:
    """One simulated estimation run.

    estimator_seconds times the estimator call alone; total_seconds also
    covers data generation (state propagation, noise, preprocessing).
    """

    method: str
    qubits: int
    dimension: int
    width: float
    seed: int
    nrmse: float
    estimator_seconds: float
    total_seconds: float
    diagnostics: algorithms.Diagnostics


def _noisy_probe_output(u, d, width, seed):
    phi2 = apply_process_ket(u, probe_ket(d))
    phi2_hat = noisy_ket(phi2, NoiseSpec(width, derive_seed(seed, "noise-probe")))
    return normalize_ket(phi2_hat)


def _noisy_stage_output(u, rho, width, seed, label):
    out = apply_process_density(u, rho)
    hat = noisy_density(out, NoiseSpec(width, derive_seed(seed, label)))
    return hermitian_unit_trace(hat, origin=out.origin)


def run_trial(method, qubits, width, seed):
    """Simulate one estimation task end to end and score the estimate.

    The true process is drawn from the seed alone, independent of method
    and width, so trials with equal seeds are paired across methods.
    """
    if qubits < 1:
        raise ValueError(f"need at least one qubit, got {qubits}")
    d = 2**qubits
    u = random_unitary(d, derive_seed(seed, "process"))
    return run_trial_with_process(u, method, qubits, width, seed)


def run_trial_with_process(u, method, qubits, width, seed):
    """run_trial against a caller-supplied true process matrix."""
    return estimate_process(u, method, qubits, width, seed)[1]


def estimate_process(u, method, qubits, width, seed):
    """Simulate data for a known process and estimate it.

    Returns (ProcessEstimate, TrialRecord); run_trial keeps only the
    record, the command-line front end also needs the matrix.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    if qubits < 1 or 2**qubits != u.shape[0]:
        raise ValueError(f"process dimension {u.shape[0]} is not 2^{qubits}")
    if width < 0:
        raise ValueError(f"noise width must be nonnegative, got {width}")
    d = 2**qubits
    t_start = time.perf_counter()

    if method == "eqpt1":
        rho2_pre = _noisy_stage_output(
            u, single_stage_density(d), width, seed, "noise-stage-0"
        )
        phi2_hat = _noisy_probe_output(u, d, width, seed)
        t0 = time.perf_counter()
        est = algorithms.eqpt1(rho2_pre, phi2_hat)
        elapsed = time.perf_counter() - t0
    elif method in ("eqpt2", "eqpt3", "eqpt4"):
        if qubits % 2:
            raise ValueError(
                f"method {method} needs an even qubit count (square layout), got {qubits}"
            )
        m1 = n2 = 2 ** (qubits // 2)
        rho_a, rho_b = two_stage_densities(m1, n2)
        pre_a = _noisy_stage_output(u, rho_a, width, seed, "noise-stage-0")
        pre_b = _noisy_stage_output(u, rho_b, width, seed, "noise-stage-1")
        phi2_hat = _noisy_probe_output(u, d, width, seed)
        mode = {
            "eqpt2": algorithms.MODE_NONE,
            "eqpt3": algorithms.MODE_UNITARIZE_BEFORE_PHASE,
            "eqpt4": algorithms.MODE_UNITARIZE_AFTER_PHASE,
        }[method]
        t0 = time.perf_counter()
        est = algorithms.eqpt_two_stage(pre_a, pre_b, phi2_hat, m1, n2, mode=mode)
        elapsed = time.perf_counter() - t0
    elif method == "eqpt5":
        if qubits < 3:
            raise ValueError(f"method eqpt5 needs at least 3 qubits, got {qubits}")
        levels = int(np.log2(d // 2))
        pres = [
            _noisy_stage_output(
                u, multi_stage_density(d, level), width, seed, f"noise-stage-{level}"
            )
            for level in range(levels + 1)
        ]
        phi2_hat = _noisy_probe_output(u, d, width, seed)
        t0 = time.perf_counter()
        est = algorithms.eqpt5(pres, phi2_hat, d)
        elapsed = time.perf_counter() - t0
    elif method == "variant-g":
        basis = random_unitary(d, derive_seed(seed, "input-basis"))
        spectrum = single_stage_density(d).matrix
        rho1 = DensityMatrix(basis @ spectrum @ basis.conj().T)
        out = apply_process_density(u, rho1)
        hat = noisy_density(out, NoiseSpec(width, derive_seed(seed, "noise-stage-0")))
        rho2_pre = hermitian_unit_trace(hat)
        phi2_hat = _noisy_probe_output(u, d, width, seed)
        t0 = time.perf_counter()
        est = algorithms.eqpt1_general_input(rho1, rho2_pre, phi2_hat)
        elapsed = time.perf_counter() - t0
    else:
        rho2_pre = _noisy_stage_output(
            u, single_stage_density(d), width, seed, "noise-stage-0"
        )
        rho5 = DensityMatrix(mixed_phase_probe_density(d))
        out8 = apply_process_density(u, rho5)
        hat8 = noisy_density(out8, NoiseSpec(width, derive_seed(seed, "noise-phase")))
        rho8_pre = hermitian_unit_trace(hat8)
        t0 = time.perf_counter()
        est = algorithms.eqpt1_mixed_probe(rho2_pre, rho5, rho8_pre)
        elapsed = time.perf_counter() - t0

    record = TrialRecord(
        method=method,
        qubits=qubits,
        dimension=d,
        width=float(width),
        seed=seed,
        nrmse=nrmse(u, est.matrix),
        estimator_seconds=elapsed,
        total_seconds=time.perf_counter() - t_start,
        diagnostics=est.diagnostics,
    )
    return est, record


@dataclass(frozen=True)
class SweepConfig:
    """Grid of benchmark cells: methods x qubit counts x noise widths."""

    methods: tuple
    qubits: tuple
    widths: tuple = DEFAULT_WIDTHS
    trials: int = 20
    base_seed: int = 0
    jobs: int = 1

    def __post_init__(self):
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")
        if self.trials < 1:
            raise ValueError("need at least one trial per cell")
        if self.jobs < 1:
            raise ValueError("need at least one worker")


@dataclass
class CellSummary:
    method: str
    qubits: int
    dimension: int
    width: float
    trials: int
    mean_nrmse: float
    std_nrmse: float
    mean_time_s: float
    p90_time_s: float


def cell_seed(base_seed, method, qubits, width_index, trial_index):
    """Seed of one trial in a sweep; hashes the width's index, not its value."""
    return derive_seed(base_seed, method, qubits, width_index, trial_index)


def sweep(config):
    """Run the full grid and return (records, summaries).

    Trials are dispatched to a thread pool but collected by position, so
    the output is identical for any worker count.
    """
    tasks = []
    for method in config.methods:
        for q in config.qubits:
            for wi, w in enumerate(config.widths):
                for t in range(config.trials):
                    seed = cell_seed(config.base_seed, method, q, wi, t)
                    tasks.append((method, q, w, seed))

    if config.jobs == 1:
        records = [run_trial(*task) for task in tasks]
    else:
        with ThreadPoolExecutor(max_workers=config.jobs) as pool:
            records = list(pool.map(lambda task: run_trial(*task), tasks))

    summaries = []
    idx = 0
    for method in config.methods:
        for q in config.qubits:
            for w in config.widths:
                chunk = records[idx : idx + config.trials]
                idx += config.trials
                errs = np.array([r.nrmse for r in chunk])
                times = np.array([r.estimator_seconds for r in chunk])
                summaries.append(
                    CellSummary(
                        method=method,
                        qubits=q,
                        dimension=2**q,
                        width=float(w),
                        trials=config.trials,
                        mean_nrmse=float(errs.mean()),
                        std_nrmse=float(errs.std(ddof=1)) if len(errs) > 1 else 0.0,
                        mean_time_s=float(times.mean()),
                        p90_time_s=float(np.percentile(times, 90)),
                    )
                )
    return records, summaries


def paired_sign_test(larger, smaller):
    """One-sided exact sign test that `larger` tends to exceed `smaller`.

    Ties are dropped. Returns (wins, effective_n, p_value) where wins
    counts pairs with larger[i] > smaller[i] and p_value is the exact
    binomial tail P[X >= wins] under the fair-coin null.
    """
    if len(larger) != len(smaller):
        raise ValueError("paired samples must have equal length")
    wins = 0
    n_eff = 0
    for a, b in zip(larger, smaller):
        if a == b:
            continue
        n_eff += 1
        if a > b:
            wins += 1
    if n_eff == 0:
        return 0, 0, 1.0
    tail = sum(math.comb(n_eff, k) for k in range(wins, n_eff + 1))
    return wins, n_eff, tail / 2.0**n_eff


def noise_response_inversions(widths, means):
    """Find where mean error fails to grow with noise width.

    Returns a list of (index, relative_drop) for each adjacent pair,
    sorted by width, whose mean decreases; relative_drop is the decrease
    divided by the earlier mean.
    """
    if len(widths) != len(means):
        raise ValueError("widths and means must have equal length")
    order = np.argsort(widths)
    ws = np.asarray(widths, dtype=float)[order]
    ms = np.asarray(means, dtype=float)[order]
    if len(set(ws.tolist())) != len(ws):
        raise ValueError("widths must be distinct")
    out = []
    for k in range(1, len(ms)):
        if ms[k] < ms[k - 1]:
            drop = (ms[k - 1] - ms[k]) / ms[k - 1] if ms[k - 1] > 0 else 0.0
            out.append((k, float(drop)))
    return out

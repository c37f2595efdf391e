"""Random density matrices, partial transpose, and log negativity.

A constrained spectrum from the sampler is dressed with Haar-random
eigenvectors, rho = U diag(lam) U+; the partial transpose acts on the second
tensor factor of an n1 x n2 split, and the entanglement between the factors
is quantified by the log negativity ln(trace norm of the partial transpose),
in nats.  A variance-matched shifted GUE matrix reproduces the spectral
statistics of the partial transpose at large dimension.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .params import BarrierSpec, Bipartition, EnsembleParams
from .sampler import ChainConfig, Spectrum, collect_spectra

__all__ = ["haar_unitary", "assemble_density", "partial_transpose",
           "hermitian_spectrum", "log_negativity", "gue_model_sample",
           "average_negativity", "NegativityStats",
           "save_matrix_dump", "load_matrix_dump"]


def haar_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Ginibre matrix with the R
    diagonal rephased to unit modulus (plain QR alone is not Haar)."""
    if n < 1:
        raise ValueError("dimension must be positive")
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def assemble_density(spectrum, unitary: np.ndarray) -> np.ndarray:
    """rho = U diag(lam) U+, symmetrized to kill Hermiticity roundoff."""
    lam = spectrum.values if isinstance(spectrum, Spectrum) else np.asarray(spectrum, float)
    if unitary.shape != (len(lam), len(lam)):
        raise ValueError(f"unitary shape {unitary.shape} does not match spectrum size {len(lam)}")
    rho = (unitary * lam) @ unitary.conj().T
    return 0.5 * (rho + rho.conj().T)


def partial_transpose(rho: np.ndarray, parts: Bipartition) -> np.ndarray:
    """Transpose on the second factor: out[(i,b),(j,a)] = rho[(i,a),(j,b)].

    An involution that preserves trace and Hermiticity but not positivity;
    its spectrum is independent of which factor is transposed.
    """
    n1, n2 = parts.n1, parts.n2
    if rho.shape != (n1 * n2, n1 * n2):
        raise ValueError(f"matrix of shape {rho.shape} does not factor as {n1}x{n2}")
    t = rho.reshape(n1, n2, n1, n2)
    return np.transpose(t, (0, 3, 2, 1)).reshape(n1 * n2, n1 * n2)


def hermitian_spectrum(mat: np.ndarray, atol: float = 1e-10) -> np.ndarray:
    """Ascending real eigenvalues of a Hermitian matrix; rejects inputs whose
    anti-Hermitian part exceeds atol."""
    if np.max(np.abs(mat - mat.conj().T)) > atol:
        raise ValueError("matrix is not Hermitian within tolerance")
    return np.linalg.eigvalsh(mat)


def log_negativity(pt_spectrum: np.ndarray) -> float:
    """ln sum_i |mu_i| over the partial-transpose spectrum; exactly zero when
    no eigenvalue is negative (the PPT case)."""
    mu = np.asarray(pt_spectrum, dtype=float)
    if not np.any(mu < 0):
        return 0.0
    return float(np.log(np.sum(np.abs(mu))))


def gue_model_sample(n: int, purity: float, rng: np.random.Generator) -> np.ndarray:
    """Spectrum of Y = X + I/n with X GUE, entry variance matched so that
    <tr X^2> = purity - 1/n; the rescaled (x n) spectrum converges to the
    semicircle of radius 2*sqrt(n*purity - 1) centred at 1.

    Valid purity range is [1/n, 1]; at the lower end X vanishes and every
    eigenvalue is 1/n.
    """
    if not 1.0 / n - 1e-12 <= purity <= 1.0 + 1e-12:
        raise ValueError(f"purity {purity} outside [1/n, 1]")
    sigma2 = max(purity / n - 1.0 / n ** 2, 0.0) / n
    sigma = math.sqrt(sigma2)
    diag = sigma * rng.standard_normal(n)
    off = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) * (sigma / math.sqrt(2.0))
    x = np.zeros((n, n), dtype=complex)
    iu = np.triu_indices(n, 1)
    x[iu] = off[iu]
    x = x + x.conj().T
    x[np.diag_indices(n)] = diag
    return np.linalg.eigvalsh(x) + 1.0 / n


@dataclass(frozen=True)
class NegativityStats:
    mean: float
    stderr: float
    n_matrices: int
    npt_fraction: float


def average_negativity(params: EnsembleParams, parts: Bipartition,
                       barrier: BarrierSpec, n_matrices: int, cfg: ChainConfig,
                       collect_pt: bool = False
                       ) -> tuple[NegativityStats, Optional[np.ndarray]]:
    """Mean log negativity between the two factors over independently dressed
    constrained spectra.

    Pipeline per matrix: one decorrelated chain spectrum, an independent Haar
    unitary, partial transpose, eigenvalues, log negativity.  The chain runs
    open-ended with cfg's burn-in/width/thin/seed until n_matrices spectra are
    kept (cfg.steps is not a cap here).  Unitaries draw from a stream derived
    from cfg.seed, so the whole pipeline is reproducible.  With
    collect_pt=True the raw partial-transpose spectra are returned as well.
    """
    if parts.dim != params.n:
        raise ValueError(f"bipartition {parts.n1}x{parts.n2} does not match n={params.n}")
    spectra, _ = collect_spectra(params, barrier, n_matrices, seed=cfg.seed,
                                 burn_in=cfg.burn_in, step_width=cfg.step_width,
                                 thin=cfg.thin)
    rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, 0x9E3779B9)))
    elns = np.empty(n_matrices)
    pt_all = np.empty((n_matrices, params.n)) if collect_pt else None
    for k in range(n_matrices):
        u = haar_unitary(params.n, rng)
        rho = assemble_density(spectra[k], u)
        mu = hermitian_spectrum(partial_transpose(rho, parts))
        elns[k] = log_negativity(mu)
        if collect_pt:
            pt_all[k] = mu
    stats = NegativityStats(
        mean=float(elns.mean()),
        stderr=float(elns.std(ddof=1) / math.sqrt(n_matrices)) if n_matrices > 1 else 0.0,
        n_matrices=n_matrices,
        npt_fraction=float(np.mean(elns > 0)),
    )
    return stats, pt_all


# ---------------------------------------------------------------------------
# binary matrix dumps (debug interchange)
# ---------------------------------------------------------------------------

_MAGIC = b"SLDM"


def save_matrix_dump(path, mat: np.ndarray) -> None:
    """Write a complex matrix as: magic 'SLDM', endianness tag byte (b'L'),
    two little-endian uint32 dims, then row-major interleaved re/im float64."""
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2:
        raise ValueError("can only dump 2-d matrices")
    rows, cols = mat.shape
    inter = np.empty((rows, cols, 2))
    inter[..., 0] = mat.real
    inter[..., 1] = mat.imag
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(b"L")
        fh.write(struct.pack("<II", rows, cols))
        fh.write(inter.astype("<f8").tobytes(order="C"))


def load_matrix_dump(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError(f"not a matrix dump (magic {magic!r})")
        tag = fh.read(1)
        if tag != b"L":
            raise ValueError(f"unsupported endianness tag {tag!r}")
        rows, cols = struct.unpack("<II", fh.read(8))
        data = np.frombuffer(fh.read(rows * cols * 16), dtype="<f8")
    inter = data.reshape(rows, cols, 2)
    return inter[..., 0] + 1j * inter[..., 1]

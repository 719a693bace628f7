"""Quantum Fisher information, squeezing, and Husimi distributions.

For a state with spectral weights {p_n} and eigenvectors {|psi_n>} the QFI
with respect to a phase generated by G is

    F = 4 sum_n p_n (dG)_n^2  -  sum_{m!=n} 8 p_m p_n / (p_m + p_n) |G_mn|^2,

where (dG)_n^2 is the variance of G in |psi_n> evaluated with the full
truncated-space G.  An algebraically equivalent symmetric-logarithmic-
derivative form over the complete eigenbasis is provided as an independent
oracle for testing.

The atomic QFI is evaluated directly with G = Jx: the Ramsey sequence
(pi/2 pulse about Jy, then phase accumulation under Jz) conjugates the
generator into Jx, and the QFI is invariant under that fixed unitary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import gammaln

from .model import HermitianOperator, build_boson_ops, build_spin_ops
from .states import DensityMatrix, SpectralDecomposition, spectral_decompose

#: points per axis of the default Husimi grids
FIELD_GRID_POINTS = 201
ATOM_GRID_POINTS = 181


@dataclass(frozen=True)
class QfiResult:
    """QFI value, its classical-limit ratio, and the two terms of the sum."""

    value: float
    scaled: float
    generator_label: str
    variance_term: float
    correction_term: float


@dataclass(frozen=True)
class SqueezingResult:
    """Minimized variance over the two candidate angles plus the raw moments."""

    variance_min: float
    optimal_angle: float
    xi2: float
    raw_moments: tuple[complex, complex, complex]


def _generator_matrix(generator) -> np.ndarray:
    if isinstance(generator, HermitianOperator):
        return generator.matrix
    return np.asarray(generator)


def number_operator(dim: int) -> HermitianOperator:
    """b'b on a Fock space of the given dimension."""
    _, number = build_boson_ops(dim - 1)
    return number


def jx_operator(n_atoms: int) -> HermitianOperator:
    """Jx for j = N/2."""
    return HermitianOperator(build_spin_ops(n_atoms).jx, "spin")


def quadrature_operator(dim: int, sigma: float) -> HermitianOperator:
    """X_sigma = (b e^{-i sigma} + b' e^{i sigma}) / 2 on the truncated space."""
    annihilate, _ = build_boson_ops(dim - 1)
    x = (annihilate * np.exp(-1j * sigma) + annihilate.conj().T * np.exp(1j * sigma)) / 2
    return HermitianOperator(x, "boson")


def qfi_mixed(
    decomp: SpectralDecomposition, generator, label: str = "custom"
) -> QfiResult:
    """Mixed-state QFI from a spectral decomposition.

    Both sums run over the retained weights; the per-eigenvector variances
    use the full truncated-space generator, so matrix elements reaching
    discarded eigenvectors enter the first term automatically.
    """
    g = _generator_matrix(generator)
    if g.shape[0] != decomp.dim:
        raise ValueError("generator dimension does not match the decomposition")
    p = decomp.weights
    vecs = decomp.vectors
    gv = g @ vecs
    overlap = vecs.conj().T @ gv  # overlap[m, n] = <psi_m|G|psi_n>
    second_moment = np.sum(np.abs(gv) ** 2, axis=0)
    first_moment = np.real(np.diag(overlap))
    variances = second_moment - first_moment**2
    variance_term = float(4.0 * np.sum(p * variances))

    pm = p[:, None] + p[None, :]
    pair_weight = np.where(pm > 0, 8.0 * p[:, None] * p[None, :] / np.where(pm > 0, pm, 1.0), 0.0)
    np.fill_diagonal(pair_weight, 0.0)
    correction_term = float(np.sum(pair_weight * np.abs(overlap) ** 2))

    value = variance_term - correction_term
    if value < 0 and -value < 1e-10 * max(1.0, variance_term):
        value = 0.0
    return QfiResult(
        value=value,
        scaled=math.nan,
        generator_label=label,
        variance_term=variance_term,
        correction_term=correction_term,
    )


def sld_qfi_oracle(decomp: SpectralDecomposition, generator) -> float:
    """Independent QFI evaluation in symmetric-logarithmic-derivative form.

    The retained decomposition is reassembled into a density matrix, which is
    re-diagonalized over the complete basis (zero-weight complement included).
    Then

        F = sum_{m,n: p_m + p_n > floor} 2 (p_m - p_n)^2 / (p_m + p_n) |G_mn|^2.

    Equal to the pair-sum form whenever the dropped mass is zero.
    """
    g = _generator_matrix(generator)
    if g.shape[0] != decomp.dim:
        raise ValueError("generator dimension does not match the decomposition")
    rho = (decomp.vectors * decomp.weights) @ decomp.vectors.conj().T
    evals, evecs = scipy.linalg.eigh(rho)
    gu = g @ evecs
    overlap = evecs.conj().T @ gu
    pm_sum = evals[:, None] + evals[None, :]
    pm_diff = evals[:, None] - evals[None, :]
    mask = pm_sum > decomp.weight_floor
    terms = np.zeros_like(pm_sum)
    np.divide(2.0 * pm_diff**2, pm_sum, out=terms, where=mask)
    return float(np.sum(terms * np.abs(overlap) ** 2, where=mask))


def qfi_field(rho_b: DensityMatrix) -> QfiResult:
    """QFI of the field state for the phase generator b'b, scaled by 4*nbar.

    With nbar = 0 (decoupled vacuum) the scaled ratio is undefined and
    reported as NaN.
    """
    if rho_b.space != "boson":
        raise ValueError("qfi_field expects a boson-space density matrix")
    number = number_operator(rho_b.dim)
    nbar = float(np.trace(rho_b.matrix @ number.matrix).real)
    decomp = spectral_decompose(rho_b)
    result = qfi_mixed(decomp, number, label="field(b'b)")
    scaled = result.value / (4.0 * nbar) if nbar > 0 else math.nan
    return QfiResult(result.value, scaled, result.generator_label,
                     result.variance_term, result.correction_term)


def qfi_atoms(rho_a: DensityMatrix) -> QfiResult:
    """QFI of the atomic state for the Ramsey generator Jx, scaled by N."""
    if rho_a.space != "spin":
        raise ValueError("qfi_atoms expects a spin-space density matrix")
    n_atoms = rho_a.dim - 1
    decomp = spectral_decompose(rho_a)
    result = qfi_mixed(decomp, jx_operator(n_atoms), label="atoms(Jx)")
    return QfiResult(result.value, result.value / n_atoms, result.generator_label,
                     result.variance_term, result.correction_term)


def _moments_field(rho_b: DensityMatrix) -> tuple[complex, complex, complex]:
    annihilate, number = build_boson_ops(rho_b.dim - 1)
    mat = rho_b.matrix
    b1 = complex(np.trace(mat @ annihilate))
    b2 = complex(np.trace(mat @ (annihilate @ annihilate)))
    nb = complex(np.trace(mat @ number.matrix))
    return b1, b2, nb


def quadrature_variance(rho_b: DensityMatrix, sigma: float) -> float:
    """Variance of X_sigma, computed as <X^2> - <X>^2 on the truncated space."""
    if rho_b.space != "boson":
        raise ValueError("quadrature_variance expects a boson-space density matrix")
    x = quadrature_operator(rho_b.dim, sigma).matrix
    mean = np.trace(rho_b.matrix @ x).real
    mean_sq = np.trace(rho_b.matrix @ (x @ x)).real
    return float(mean_sq - mean**2)


def optimal_quadrature(rho_b: DensityMatrix) -> SqueezingResult:
    """Minimize the quadrature variance over the two candidates sigma = 0, pi/2.

    Ties (isotropic states) break to pi/2 so sweep outputs stay continuous
    through the decoupled limit.  xi2 reports 4*(dX_{pi/2})^2 regardless of
    which angle wins.
    """
    v0 = quadrature_variance(rho_b, 0.0)
    v90 = quadrature_variance(rho_b, math.pi / 2)
    if v0 < v90 - 1e-12 * max(1.0, abs(v90)):
        angle, vmin = 0.0, v0
    else:
        angle, vmin = math.pi / 2, v90
    return SqueezingResult(
        variance_min=vmin,
        optimal_angle=angle,
        xi2=4.0 * v90,
        raw_moments=_moments_field(rho_b),
    )


def spin_variance(rho_a: DensityMatrix, phi: float) -> float:
    """Variance of J_phi = Jx cos(phi) + Jy sin(phi)."""
    if rho_a.space != "spin":
        raise ValueError("spin_variance expects a spin-space density matrix")
    spin = build_spin_ops(rho_a.dim - 1)
    j_phi = spin.jx * math.cos(phi) + spin.jy * math.sin(phi)
    mean = np.trace(rho_a.matrix @ j_phi).real
    mean_sq = np.trace(rho_a.matrix @ (j_phi @ j_phi)).real
    return float(mean_sq - mean**2)


def spin_squeezing_xi2(rho_a: DensityMatrix) -> SqueezingResult:
    """Spin squeezing parameter xi^2 = 4*(dJy)^2 / N with the optimal angle.

    The candidate squeezing angles are phi = 0 and pi/2 (the variance is
    harmonic in 2*phi); ties break to pi/2.
    """
    n_atoms = rho_a.dim - 1
    v0 = spin_variance(rho_a, 0.0)
    v90 = spin_variance(rho_a, math.pi / 2)
    if v0 < v90 - 1e-12 * max(1.0, abs(v90)):
        angle, vmin = 0.0, v0
    else:
        angle, vmin = math.pi / 2, v90
    spin = build_spin_ops(n_atoms)
    mat = rho_a.matrix
    jy2 = complex(np.trace(mat @ (spin.jy @ spin.jy)))
    jp2 = complex(np.trace(mat @ (spin.jplus @ spin.jplus)))
    jperp = complex(np.trace(mat @ (spin.jx @ spin.jx + spin.jy @ spin.jy)))
    return SqueezingResult(
        variance_min=vmin,
        optimal_angle=angle,
        xi2=4.0 * v90 / n_atoms,
        raw_moments=(jy2, jp2, jperp),
    )


def coherent_amplitudes(alpha: np.ndarray, dim: int) -> np.ndarray:
    """Fock amplitudes <n|alpha> = e^{-|a|^2/2} a^n / sqrt(n!) for each grid point.

    Factorials are evaluated in log space, so the expansion stays finite well
    past n ~ 170.
    """
    flat = np.asarray(alpha, dtype=complex).ravel()
    n = np.arange(dim)
    mag = np.abs(flat)
    origin = mag == 0
    log_mag = np.log(np.where(origin, 1.0, mag))
    log_amp = (
        -0.5 * mag[:, None] ** 2
        + n[None, :] * log_mag[:, None]
        - 0.5 * gammaln(n + 1)[None, :]
    )
    phase = np.exp(1j * n[None, :] * np.angle(flat)[:, None])
    amps = np.exp(log_amp) * phase
    if np.any(origin):
        amps[origin, :] = 0.0
        amps[origin, 0] = 1.0  # |alpha=0> is the vacuum
    return amps


def husimi_field(rho_b: DensityMatrix, alpha: np.ndarray) -> np.ndarray:
    """Q_B(alpha) = <alpha|rho_B|alpha> evaluated on a grid of amplitudes.

    The grid should satisfy |alpha|^2 << n_cutoff for the truncated coherent
    states to be faithful.
    """
    if rho_b.space != "boson":
        raise ValueError("husimi_field expects a boson-space density matrix")
    alpha = np.asarray(alpha, dtype=complex)
    out = np.empty(alpha.size)
    mat = rho_b.matrix
    chunk = 4096
    flat = alpha.ravel()
    for start in range(0, flat.size, chunk):
        block = coherent_amplitudes(flat[start : start + chunk], rho_b.dim)
        out[start : start + chunk] = np.einsum(
            "pn,nm,pm->p", block.conj(), mat, block, optimize=True
        ).real
    return out.reshape(alpha.shape)


def default_field_grid(
    nbar: float, points: int = FIELD_GRID_POINTS
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Square alpha-grid of half-width 1.5*(sqrt(nbar) + 2) centered on the origin."""
    if points < 2:
        raise ValueError("grid needs at least 2 points per axis")
    half = 1.5 * (math.sqrt(max(nbar, 0.0)) + 2.0)
    axis = np.linspace(-half, half, points)
    re, im = np.meshgrid(axis, axis, indexing="ij")
    return axis, axis, re + 1j * im


def spin_coherent_amplitudes(theta: np.ndarray, phi: np.ndarray, n_atoms: int) -> np.ndarray:
    """Overlaps <j,m|theta,phi> on the (theta, phi) product grid.

    <j,m|theta,phi> = binom(2j, j+m)^{1/2} cos(theta/2)^{j-m} sin(theta/2)^{j+m}
                      * exp(-i (j+m) phi).
    Returned shape is (len(theta), len(phi), N+1).
    """
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    k = np.arange(n_atoms + 1)
    half = theta / 2
    root_binom = np.exp(
        0.5 * (gammaln(n_atoms + 1) - gammaln(k + 1) - gammaln(n_atoms - k + 1))
    )
    # np.power gives 0^0 = 1, so the poles theta = 0, pi come out exact
    cos_pow = np.power(np.cos(half)[:, None], (n_atoms - k)[None, :])
    sin_pow = np.power(np.sin(half)[:, None], k[None, :])
    amp_theta = root_binom[None, :] * cos_pow * sin_pow
    phase = np.exp(-1j * k[None, :] * phi[:, None])
    return amp_theta[:, None, :] * phase[None, :, :]


def husimi_atoms(rho_a: DensityMatrix, theta: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """Q_A(theta, phi) = <theta,phi|rho_A|theta,phi> on a product grid."""
    if rho_a.space != "spin":
        raise ValueError("husimi_atoms expects a spin-space density matrix")
    amps = spin_coherent_amplitudes(theta, phi, rho_a.dim - 1)
    return np.einsum("tpk,kl,tpl->tp", amps.conj(), rho_a.matrix, amps, optimize=True).real


def default_atom_grid(points: int = ATOM_GRID_POINTS) -> tuple[np.ndarray, np.ndarray]:
    """Default (theta, phi) axes covering the full sphere."""
    if points < 2:
        raise ValueError("grid needs at least 2 points per axis")
    theta = np.linspace(0.0, math.pi, points)
    phi = np.linspace(0.0, 2 * math.pi, points, endpoint=False)
    return theta, phi

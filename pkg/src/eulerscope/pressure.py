"""Pressure, its Hessian, and the sup norms feeding the blow-up criteria.

The pressure solves lap(p) = -d_k u_m d_m u_k on the periodic box, so the
Hessian components are the diagonal Fourier multipliers -k_i k_j / |k|^2
applied to the quadratic source.  Two independent evaluation paths (direct
multiplier and repeated spectral derivative of p) are cross-checked on
every call.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigurationError, ConsistencyError, EmptyBallError, GaugeError
from .solver import velocity_gradient_physical
from .spectral import (
    SCALAR,
    TENSOR6,
    TWO_PI,
    VECTOR,
    GridSpec,
    RealField,
    SpectralField,
    curl,
    dealias,
    derivative,
    forward,
    gradient,
    inverse,
    inverse_laplacian,
    require_same_grid,
)

#: (i, j) pairs backing the 6-component symmetric storage
TENSOR6_PAIRS = ((0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2))

DEGENERACY_THRESHOLD = 1e-8


@dataclass(frozen=True)
class BallSpec:
    """Periodic ball: nodes within Euclidean periodic distance < radius."""

    center: tuple
    radius: float

    def __post_init__(self):
        if len(self.center) != 3:
            raise ConfigurationError("ball center needs three coordinates")
        object.__setattr__(self, "center", tuple(float(c) % TWO_PI for c in self.center))
        if not 0.0 < self.radius < np.pi:
            raise ConfigurationError(
                f"ball radius must lie in (0, pi), got {self.radius}")


@lru_cache(maxsize=32)
def ball_node_mask(ball: BallSpec, grid: GridSpec) -> np.ndarray:
    """Boolean (n, n, n) mask of nodes inside the ball."""
    coords = grid.axis_coords()
    d2 = []
    for c in ball.center:
        d = np.abs(coords - c)
        d = np.minimum(d, TWO_PI - d)
        d2.append(d * d)
    dist2 = d2[0][:, None, None] + d2[1][None, :, None] + d2[2][None, None, :]
    mask = dist2 < ball.radius ** 2
    if not mask.any():
        raise EmptyBallError(f"ball at {ball.center} with radius {ball.radius} "
                             f"contains no grid node at n={grid.n}")
    return mask


@dataclass
class PressurePack:
    """Pressure p (mean-zero gauge), grad p, and the 6-component Hessian.

    Spectral duals are kept alongside the samples so trajectory code can
    evaluate the same fields off-grid.
    """

    p: RealField
    grad: RealField
    hess: RealField
    p_hat: SpectralField
    grad_hat: SpectralField
    hess_hat: SpectralField
    source: RealField  # Q = d_k u_m d_m u_k, dealiased


def quadratic_source(u_hat: SpectralField) -> SpectralField:
    """Q = d_k u_m d_m u_k formed pseudospectrally and dealiased."""
    if u_hat.ncomp != VECTOR:
        raise ConfigurationError("quadratic_source expects a velocity field")
    du = velocity_gradient_physical(u_hat)  # du[i, j] = d u_i / d x_j
    q = np.einsum("kmxyz,mkxyz->xyz", du, du)
    return dealias(forward(RealField.scalar(u_hat.grid, q)))


def pressure_pack(u_hat: SpectralField) -> PressurePack:
    """Pressure, gradient and Hessian of a divergence-free velocity."""
    grid = u_hat.grid
    q_hat = quadratic_source(u_hat)
    q_scale = np.abs(q_hat.data[0]).max()
    mean = abs(q_hat.data[0, 0, 0, 0])
    if mean > 1e-10 * max(q_scale, 1e-300):
        raise GaugeError(f"quadratic pressure source has mean {mean:.3e}; "
                         "the velocity is not divergence-free")
    q_hat.data[0, 0, 0, 0] = 0.0
    p_hat = inverse_laplacian(q_hat)

    # path 1: direct multiplier -k_i k_j / |k|^2 on the source
    ik = grid.ik
    hess_mult = np.stack([ik[i] * ik[j] * grid.inv_k2 * q_hat.data[0]
                          for i, j in TENSOR6_PAIRS])
    # path 2: repeated spectral derivative of the solved pressure
    hess_deriv = np.stack([derivative(derivative(p_hat, i), j).data[0]
                           for i, j in TENSOR6_PAIRS])
    scale = max(np.abs(hess_mult).max(), 1e-300)
    gap = np.abs(hess_mult - hess_deriv).max()
    if gap > 1e-12 * scale:
        raise ConsistencyError(
            f"hessian multiplier and derivative paths differ by {gap:.3e}")
    hess_hat = SpectralField(grid, hess_deriv)
    grad_hat = gradient(p_hat)

    pack = PressurePack(
        p=inverse(p_hat),
        grad=inverse(grad_hat),
        hess=inverse(hess_hat),
        p_hat=p_hat,
        grad_hat=grad_hat,
        hess_hat=hess_hat,
        source=inverse(q_hat),
    )
    _check_poisson_residual(pack)
    return pack


def _check_poisson_residual(pack: PressurePack):
    # trace of the Hessian must cancel the source pointwise
    trace = pack.hess.data[0] + pack.hess.data[3] + pack.hess.data[5]
    resid = np.abs(trace + pack.source.data[0]).max()
    scale = max(np.abs(pack.source.data[0]).max(), 1e-300)
    if resid > 1e-10 * scale:
        raise ConsistencyError(f"Poisson residual {resid:.3e} exceeds 1e-10 relative")


def symmetric_eigenvalues(t6: np.ndarray) -> np.ndarray:
    """Eigenvalues of symmetric 3x3 matrices in 6-component storage.

    Vectorized trigonometric closed form; ``t6`` has shape (6, ...) and
    the result (3, ...) is unordered.
    """
    a11, a12, a13, a22, a23, a33 = (np.asarray(t6[i], dtype=np.float64) for i in range(6))
    q = (a11 + a22 + a33) / 3.0
    p1 = a12 ** 2 + a13 ** 2 + a23 ** 2
    p2 = (a11 - q) ** 2 + (a22 - q) ** 2 + (a33 - q) ** 2 + 2.0 * p1
    p = np.sqrt(np.maximum(p2, 0.0) / 6.0)
    psafe = np.where(p > 0.0, p, 1.0)
    b11 = (a11 - q) / psafe
    b22 = (a22 - q) / psafe
    b33 = (a33 - q) / psafe
    b12 = a12 / psafe
    b13 = a13 / psafe
    b23 = a23 / psafe
    detb = (b11 * (b22 * b33 - b23 * b23)
            - b12 * (b12 * b33 - b23 * b13)
            + b13 * (b12 * b23 - b22 * b13))
    r = np.clip(detb / 2.0, -1.0, 1.0)
    phi = np.arccos(r) / 3.0
    e1 = q + 2.0 * p * np.cos(phi)
    e3 = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    e2 = 3.0 * q - e1 - e3
    return np.stack([e1, e2, e3])


def tensor_operator_norm(t6: np.ndarray) -> np.ndarray:
    """Pointwise spectral (operator 2-) norm of a symmetric tensor field."""
    return np.abs(symmetric_eigenvalues(t6)).max(axis=0)


def matrix_operator_norm(m33: np.ndarray) -> np.ndarray:
    """Operator norm of general 3x3 matrices, shape (3, 3, ...)."""
    # largest singular value via the symmetric product M^T M
    g = np.einsum("ki...,kj...->ij...", m33, m33)
    t6 = np.stack([g[i, j] for i, j in TENSOR6_PAIRS])
    eigs = symmetric_eigenvalues(t6)
    return np.sqrt(np.maximum(eigs.max(axis=0), 0.0))


def tensor_apply(t6: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Apply symmetric tensors to vectors: (6, ...) x (3, ...) -> (3, ...)."""
    return np.stack([
        t6[0] * v[0] + t6[1] * v[1] + t6[2] * v[2],
        t6[1] * v[0] + t6[3] * v[1] + t6[4] * v[2],
        t6[2] * v[0] + t6[4] * v[1] + t6[5] * v[2],
    ])


def mu_field(u_hat: SpectralField, pack: PressurePack):
    """Alignment-projected pressure Hessian.

    At each node: xi is the vorticity direction, zeta the normalized
    strain response S xi / |S xi|, and mu = zeta . (H xi) with H the
    pressure Hessian.  Nodes where the vorticity or the strain response
    degenerates are masked out of all sup norms.

    Returns (mu: scalar RealField, valid mask, degenerate flag).
    """
    require_same_grid(u_hat, pack.hess)
    grid = u_hat.grid
    w = inverse(curl(u_hat)).data
    du = velocity_gradient_physical(u_hat)
    s6 = np.stack([0.5 * (du[i, j] + du[j, i]) for i, j in TENSOR6_PAIRS])

    wmag = np.sqrt((w ** 2).sum(axis=0))
    s_opnorm_sup = tensor_operator_norm(s6).max()
    valid = wmag > DEGENERACY_THRESHOLD * max(wmag.max(), 1e-300)

    xi = np.where(valid, w / np.where(wmag > 0, wmag, 1.0), 0.0)
    sxi = tensor_apply(s6, xi)
    sximag = np.sqrt((sxi ** 2).sum(axis=0))
    valid &= sximag > DEGENERACY_THRESHOLD * max(s_opnorm_sup, 1e-300)

    zeta = np.where(valid, sxi / np.where(sximag > 0, sximag, 1.0), 0.0)
    mu = np.where(valid, (zeta * tensor_apply(pack.hess.data, xi)).sum(axis=0), 0.0)
    degenerate = not bool(valid.any())
    return RealField.scalar(grid, mu), valid, degenerate


def sup_norm(field: RealField, ball: BallSpec | None = None,
             valid: np.ndarray | None = None) -> float:
    """Grid sup of the pointwise magnitude, optionally ball-restricted.

    Scalars use |f|, vectors the Euclidean magnitude, symmetric tensors
    the operator 2-norm.  ``valid`` excludes masked nodes (degenerate
    alignment points).
    """
    if field.ncomp == SCALAR:
        mag = np.abs(field.data[0])
    elif field.ncomp == VECTOR:
        mag = np.sqrt((field.data ** 2).sum(axis=0))
    elif field.ncomp == TENSOR6:
        mag = tensor_operator_norm(field.data)
    else:  # pragma: no cover - constructor forbids other counts
        raise ConfigurationError(f"unsupported component count {field.ncomp}")
    select = np.ones(field.grid.real_shape, dtype=bool)
    if ball is not None:
        select &= ball_node_mask(ball, field.grid)
    if valid is not None:
        select &= valid
    if not select.any():
        return 0.0
    return float(mag[select].max())


def gradient_sup(u_hat: SpectralField, ball: BallSpec | None = None) -> float:
    """Sup of the operator norm of the velocity gradient."""
    du = velocity_gradient_physical(u_hat)
    mag = matrix_operator_norm(du)
    if ball is not None:
        mag = mag[ball_node_mask(ball, u_hat.grid)]
    return float(mag.max())


def stretching_field(u_hat: SpectralField) -> RealField:
    """(omega . grad) u at the nodes; the initial-data norm of the bound."""
    w = inverse(curl(u_hat)).data
    du = velocity_gradient_physical(u_hat)
    return RealField(u_hat.grid, np.einsum("ijxyz,jxyz->ixyz", du, w))

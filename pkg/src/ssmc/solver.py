"""Group-sparse self-representation solver and affinity construction.

Solves, over coefficient tensors ``c`` with zero diagonal tubes,

    min  ||c||_F1 + lambda_h ||c||_FF1 + lambda_g ||y - y * c||_F^2

(optionally subject to the affine constraint that every column's tube-sum is
the unit tube) by ADMM carried out in the Fourier domain, where the tensor
product splits into independent per-frequency matrix products.

Splitting: consensus ``c = a1 = a2`` with ``a1`` absorbing the tube group
norm and ``a2`` the row group norm; the ``c`` update is a per-face ridge
solve (Cholesky-factored once), the ``a`` updates are group shrinkages, and
the duals are scaled.  The zero-diagonal constraint lives inside both
shrinkage proxes (zero the diagonal, then shrink: the exact prox of the sum
with the indicator).  The affine constraint lives inside the ``c`` update as
an exact KKT correction of each ridge solution, using the precomputed
solve of the ridge system against the all-ones vector.

Only the ``d // 2 + 1`` non-redundant DFT faces of real tensors are stored;
``_FACE_WEIGHTS`` carries the conjugate-symmetry multiplicities so that all
norms below equal their spatial-domain counterparts.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .t_algebra import _as_tensor3

__all__ = [
    "SolverConfig",
    "SolverReport",
    "group_shrink_tube",
    "group_shrink_row",
    "solve_self_representation",
    "affinity_from_tensor",
]


@dataclass(frozen=True)
class SolverConfig:
    """Solver weights and ADMM controls.

    ``lambda_g`` weighs fidelity, ``lambda_h`` the row group norm,
    ``affine`` switches the affine-submodule constraint on,
    ``normalize_columns`` divides each lateral slice by its Frobenius norm
    before solving (zero slices are left alone).
    """

    lambda_g: float
    lambda_h: float = 0.0
    affine: bool = False
    rho: float = 1.0
    max_iters: int = 1000
    tol_abs: float = 1e-6
    tol_rel: float = 1e-4
    normalize_columns: bool = False

    def __post_init__(self):
        if not self.lambda_g > 0:
            raise ValueError(f"lambda_g must be positive, got {self.lambda_g}")
        if self.lambda_h < 0:
            raise ValueError(f"lambda_h must be nonnegative, got {self.lambda_h}")
        if not self.rho > 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.tol_abs < 0 or self.tol_rel < 0:
            raise ValueError("tolerances must be nonnegative")


@dataclass
class SolverReport:
    iterations: int
    primal_residual: float
    dual_residual: float
    objective: float
    converged: bool
    objective_history: list = field(default_factory=list)


def group_shrink_tube(v, tau):
    """Shrink one full-spectrum tube: ``max(0, 1 - tau/||v||_scaled) v``.

    The scaled norm is ``d**-0.5 ||v||_2``, the Frobenius norm of the
    spatial tube the spectrum came from.  Zero when the norm is at or
    below ``tau``.
    """
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    v = np.asarray(v, dtype=np.complex128)
    nrm = np.linalg.norm(v.ravel()) / np.sqrt(v.shape[-1])
    if nrm <= tau:
        return np.zeros_like(v)
    return v * (1.0 - tau / nrm)


def group_shrink_row(v, tau):
    """Shrink one full-spectrum row of tubes, shape ``(n, d)``, as one group."""
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    v = np.asarray(v, dtype=np.complex128)
    if v.ndim != 2:
        raise ValueError(f"row must have shape (n, d), got {v.shape}")
    nrm = np.linalg.norm(v.ravel()) / np.sqrt(v.shape[1])
    if nrm <= tau:
        return np.zeros_like(v)
    return v * (1.0 - tau / nrm)


def _face_weights(d):
    dh = d // 2 + 1
    w = np.ones(dh, dtype=np.float64)
    if d > 1:
        w[1:] = 2.0
        if d % 2 == 0:
            w[-1] = 1.0
    return w


def _snorm2(x, w, inv_d):
    """Squared spatial Frobenius norm of a half-spectrum face stack."""
    return float(np.tensordot(w, (x.real**2 + x.imag**2).sum(axis=(1, 2)), axes=1) * inv_d)


def _feasible(c, diag, affine, n):
    """Zero the diagonal and, if affine, rebalance each column's face sums to 1."""
    cf = c.copy()
    cf[:, diag, diag] = 0.0
    if affine:
        deficit = 1.0 - cf.sum(axis=1)
        cf += deficit[:, None, :] / (n - 1)
        cf[:, diag, diag] = 0.0
    return cf


class _Objective:
    """Evaluates the primal objective of a half-spectrum coefficient stack."""

    def __init__(self, yf, w, inv_d, lambda_g, lambda_h):
        self.yf = yf
        self.w = w
        self.inv_d = inv_d
        self.lambda_g = lambda_g
        self.lambda_h = lambda_h

    def __call__(self, c):
        sq = (c.real**2 + c.imag**2) * self.inv_d
        grp = np.tensordot(self.w, sq, axes=(0, 0))
        f1 = float(np.sqrt(grp).sum())
        ff1 = float(np.sqrt(grp.sum(axis=1)).sum())
        resid = self.yf - np.einsum("fhl,flj->fhj", self.yf, c)
        fid = _snorm2(resid, self.w, self.inv_d)
        return f1 + self.lambda_h * ff1 + self.lambda_g * fid


def solve_self_representation(y, cfg):
    """Solve the self-representation program for ``y`` of shape ``(h, n, d)``.

    Returns ``(w, report)``: ``w`` is the ``(n, n, d)`` coefficient tensor
    with exactly zero diagonal tubes (and, under ``cfg.affine``, column
    tube-sums equal to the unit tube), ``report`` the ADMM run record.
    Hitting ``max_iters`` is not an error; it is reported as
    ``converged=False``.
    """
    y = _as_tensor3(y, "input tensor")
    if not np.isfinite(y).all():
        raise ValueError("input tensor contains non-finite values")
    h, n, d = y.shape
    if n < 2:
        raise ValueError("need at least two samples")
    if not y.any():
        raise ValueError("input tensor is identically zero")
    if cfg.normalize_columns:
        scale = np.sqrt((y * y).sum(axis=(0, 2)))
        y = y / np.where(scale > 0, scale, 1.0)[None, :, None]

    lam_g, lam_h, rho = cfg.lambda_g, cfg.lambda_h, cfg.rho
    inv_d = 1.0 / d
    w_freq = _face_weights(d)
    dh = w_freq.shape[0]
    yf = np.ascontiguousarray(np.transpose(np.fft.rfft(y, axis=2), (2, 0, 1)))

    gram = np.einsum("fhi,fhj->fij", np.conj(yf), yf)
    ridge = 2.0 * lam_g * gram + 2.0 * rho * np.eye(n)[None, :, :]
    chol = np.linalg.cholesky(ridge)
    rhs0 = 2.0 * lam_g * gram
    if cfg.affine:
        ones = np.ones((dh, n, 1), dtype=np.complex128)
        z = kernels.cho_solve_batched(chol, ones)[:, :, 0]
        z_sum = z.sum(axis=1)

    shape = (dh, n, n)
    a1 = np.zeros(shape, dtype=np.complex128)
    a2 = np.zeros(shape, dtype=np.complex128)
    u1 = np.zeros(shape, dtype=np.complex128)
    u2 = np.zeros(shape, dtype=np.complex128)
    diag = np.arange(n)
    objective = _Objective(yf, w_freq, inv_d, lam_g, lam_h)

    history = []
    converged = False
    r_norm = s_norm = float("nan")
    iterations = 0
    c_feas = np.zeros(shape, dtype=np.complex128)
    for iterations in range(1, cfg.max_iters + 1):
        rhs = rhs0 + rho * (a1 - u1) + rho * (a2 - u2)
        c = kernels.cho_solve_batched(chol, rhs)
        if cfg.affine:
            coef = (1.0 - c.sum(axis=1)) / z_sum[:, None]
            c += z[:, :, None] * coef[:, None, :]

        v1 = c + u1
        v1[:, diag, diag] = 0.0
        a1_new = kernels.scale_tubes(v1, w_freq, inv_d, 1.0 / rho)
        v2 = c + u2
        v2[:, diag, diag] = 0.0
        if lam_h > 0:
            a2_new = kernels.scale_rows(v2, w_freq, inv_d, lam_h / rho)
        else:
            a2_new = v2
        u1 += c - a1_new
        u2 += c - a2_new

        r_norm = np.sqrt(
            _snorm2(c - a1_new, w_freq, inv_d) + _snorm2(c - a2_new, w_freq, inv_d)
        )
        s_norm = rho * np.sqrt(_snorm2((a1_new - a1) + (a2_new - a2), w_freq, inv_d))
        a1, a2 = a1_new, a2_new

        c_feas = _feasible(c, diag, cfg.affine, n)
        history.append(objective(c_feas))

        count = n * n * d
        eps_pri = np.sqrt(2.0 * count) * cfg.tol_abs + cfg.tol_rel * max(
            np.sqrt(2.0 * _snorm2(c, w_freq, inv_d)),
            np.sqrt(_snorm2(a1, w_freq, inv_d) + _snorm2(a2, w_freq, inv_d)),
        )
        eps_dual = np.sqrt(count) * cfg.tol_abs + cfg.tol_rel * rho * np.sqrt(
            _snorm2(u1 + u2, w_freq, inv_d)
        )
        if r_norm <= eps_pri and s_norm <= eps_dual:
            converged = True
            break

    w = np.fft.irfft(np.transpose(c_feas, (1, 2, 0)), n=d, axis=2)
    w = np.ascontiguousarray(w)
    report = SolverReport(
        iterations=iterations,
        primal_residual=float(r_norm),
        dual_residual=float(s_norm),
        objective=history[-1],
        converged=converged,
        objective_history=history,
    )
    return w, report


def affinity_from_tensor(w):
    """Collapse a coefficient tensor to the symmetric affinity matrix.

    ``m[i, j] = ||w(j, i, :)||_F + ||w(i, j, :)||_F`` with a forced zero
    diagonal.
    """
    w = _as_tensor3(w, "coefficient tensor")
    if w.shape[0] != w.shape[1]:
        raise ValueError(f"coefficient tensor must be square, got {w.shape}")
    tube_norms = np.sqrt((w * w).sum(axis=2))
    m = tube_norms + tube_norms.T
    np.fill_diagonal(m, 0.0)
    return m

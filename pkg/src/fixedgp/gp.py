"""Sampling designs, Gaussian log-likelihoods, per-alpha profile statistics,
and the O(n) Ornstein-Uhlenbeck fast path (nu = 1/2, d = 1).

The log-likelihood convention throughout drops the -(n/2) log(2 pi) constant:

    L_n(sigma2, alpha) = -(n/2) log sigma2 - (1/2) log|R_alpha|
                         - (1/(2 sigma2)) x' R_alpha^{-1} x

``ou_loglik_fast`` subtracts the same constant so cross-checks against the
dense path are exact rather than up to a constant.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack, solve_triangular

from .kernels import MaternSpec, matern_correlation

__all__ = [
    "Design",
    "GpDataset",
    "CovFactorization",
    "ProfileStats",
    "OuStats",
    "NotPositiveDefiniteError",
    "DegenerateDataError",
    "build_correlation_matrix",
    "factorize",
    "log_likelihood",
    "profile_stats",
    "ou_stats",
    "ou_profile_loglik",
    "ou_loglik_fast",
    "ou_profile_stats",
    "load_dataset",
    "save_dataset",
]


class NotPositiveDefiniteError(Exception):
    """Cholesky failure; ``pivot`` is the 1-based index of the failing minor."""

    def __init__(self, pivot: int):
        self.pivot = pivot
        super().__init__(f"matrix not positive definite at pivot {pivot}")


class DegenerateDataError(Exception):
    """Quadratic form of the data collapsed to a non-positive value."""


@dataclass(frozen=True)
class Design:
    """Distinct sampling points in [0, T]^d, d in {1, 2, 3}.

    Points are stored as an (n, d) array.  For d = 1 they are sorted
    ascending, which the OU fast path requires.
    """

    points: np.ndarray
    T: float = 1.0

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[1] not in (1, 2, 3):
            raise ValueError(f"points must be (n, d) with d in {{1,2,3}}, got {pts.shape}")
        if not self.T > 0:
            raise ValueError(f"domain size T must be positive, got {self.T}")
        if np.any(pts < 0) or np.any(pts > self.T):
            raise ValueError("all coordinates must lie in [0, T]")
        if pts.shape[1] == 1:
            pts = pts[np.argsort(pts[:, 0])]
            if np.any(np.diff(pts[:, 0]) <= 0):
                raise ValueError("design points must be pairwise distinct")
        else:
            diff = pts[:, None, :] - pts[None, :, :]
            dist2 = np.einsum("ijk,ijk->ij", diff, diff)
            np.fill_diagonal(dist2, np.inf)
            if dist2.min() <= 0.0:
                raise ValueError("design points must be pairwise distinct")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def coords_1d(self) -> np.ndarray:
        """Sorted coordinate vector; only defined for d = 1."""
        if self.d != 1:
            raise ValueError(f"coords_1d requires d = 1, design has d = {self.d}")
        return self.points[:, 0]

    def distance_matrix(self) -> np.ndarray:
        diff = self.points[:, None, :] - self.points[None, :, :]
        return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


@dataclass(frozen=True)
class GpDataset:
    """A design together with the observed vector on it."""

    design: Design
    x: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1 or x.shape[0] != self.design.n:
            raise ValueError(
                f"x must be a length-{self.design.n} vector, got shape {x.shape}"
            )
        object.__setattr__(self, "x", x)

    @property
    def n(self) -> int:
        return self.design.n


@dataclass
class CovFactorization:
    """Cholesky factorization of sigma2 * R with derived solves.

    ``corr_chol`` is the lower factor of the correlation matrix R; the scale
    sigma2 is carried separately so theta-moves can reuse the factor.
    """

    corr_chol: np.ndarray
    sigma2: float
    log_det: float = field(init=False)

    def __post_init__(self):
        n = self.corr_chol.shape[0]
        self.log_det = n * np.log(self.sigma2) + 2.0 * np.sum(
            np.log(np.diag(self.corr_chol))
        )

    @property
    def n(self) -> int:
        return self.corr_chol.shape[0]

    @property
    def chol(self) -> np.ndarray:
        """Lower Cholesky factor of the full covariance sigma2 * R."""
        return np.sqrt(self.sigma2) * self.corr_chol

    def half_solve(self, b: np.ndarray) -> np.ndarray:
        """L^{-1} b for the correlation factor L (whitening up to scale)."""
        return solve_triangular(self.corr_chol, b, lower=True)

    def solve(self, b: np.ndarray) -> np.ndarray:
        """(sigma2 R)^{-1} b."""
        y = solve_triangular(self.corr_chol, b, lower=True)
        z = solve_triangular(self.corr_chol.T, y, lower=False)
        return z / self.sigma2

    def quad_form(self, v: np.ndarray, w: np.ndarray | None = None) -> float:
        """v' (sigma2 R)^{-1} w (w defaults to v)."""
        yv = solve_triangular(self.corr_chol, v, lower=True)
        if w is None:
            return float(yv @ yv) / self.sigma2
        yw = solve_triangular(self.corr_chol, w, lower=True)
        return float(yv @ yw) / self.sigma2


@dataclass(frozen=True)
class ProfileStats:
    """Per-alpha profile quantities: the variance and microergodic maximizers
    and the profiled log-likelihood."""

    alpha: float
    nu: float
    sigma2_tilde: float
    theta_tilde: float
    profile_loglik: float


@dataclass(frozen=True)
class OuStats:
    """Quadratic statistics of a 1-d observation vector.

    a1 sums interior squares, a2 the lag-1 cross products, a3 all squares;
    a1 + a3 - 2 a2 is a sum of squared increments and hence nonnegative.
    """

    a1: float
    a2: float
    a3: float

    def __post_init__(self):
        if self.a1 + self.a3 - 2.0 * self.a2 < -1e-12 * max(self.a3, 1.0):
            raise ValueError("invalid OU statistics: a1 + a3 - 2 a2 < 0")


def build_correlation_matrix(design: Design, alpha: float, nu: float) -> np.ndarray:
    """Matern correlation matrix of a design; unit diagonal, symmetric."""
    dist = design.distance_matrix()
    r = matern_correlation(alpha, nu, dist)
    np.fill_diagonal(r, 1.0)
    return r


def factorize(cov: np.ndarray, sigma2: float, jitter: float = 0.0) -> CovFactorization:
    """Cholesky-factorize sigma2 * cov.

    Parameters
    ----------
    cov : ndarray
        Symmetric positive-definite matrix (typically a correlation matrix).
    sigma2 : float
        Positive scale.
    jitter : float
        Optional diagonal jitter (<= 1e-10) for exploratory use only; the
        default is no jitter so failures surface instead of being masked.

    Raises
    ------
    NotPositiveDefiniteError
        With the 1-based failing pivot index.
    """
    if not sigma2 > 0:
        raise ValueError(f"sigma2 must be positive, got {sigma2}")
    if jitter < 0 or jitter > 1e-10:
        raise ValueError(f"jitter must be in [0, 1e-10], got {jitter}")
    a = np.array(cov, dtype=float)
    if jitter:
        a[np.diag_indices_from(a)] += jitter
    c, info = lapack.dpotrf(a, lower=1, clean=1, overwrite_a=1)
    if info > 0:
        raise NotPositiveDefiniteError(int(info))
    if info < 0:
        raise ValueError(f"invalid argument {-info} to dpotrf")
    return CovFactorization(corr_chol=c, sigma2=float(sigma2))


def log_likelihood(data: GpDataset, spec: MaternSpec) -> float:
    """Exact Gaussian log-likelihood (2 pi constant dropped).

    With the factorization of sigma2 * R in hand this is just
    -(1/2) log|sigma2 R| - (1/2) x' (sigma2 R)^{-1} x, which equals the
    -(n/2) log sigma2 - (1/2) log|R| - (1/(2 sigma2)) x' R^{-1} x form.
    """
    r = build_correlation_matrix(data.design, spec.alpha, spec.nu)
    fac = factorize(r, spec.sigma2)
    return -0.5 * fac.log_det - 0.5 * fac.quad_form(data.x)


def profile_stats(data: GpDataset, alpha: float, nu: float) -> ProfileStats:
    """Profile out the variance at fixed alpha.

    sigma2_tilde = x' R^{-1} x / n,  theta_tilde = sigma2_tilde alpha^{2 nu},
    profile_loglik = -(n/2) log(x' R^{-1} x / n) - (1/2) log|R|.
    """
    r = build_correlation_matrix(data.design, alpha, nu)
    fac = factorize(r, 1.0)
    n = data.n
    qf = fac.quad_form(data.x)
    if qf <= 0.0:
        raise DegenerateDataError(f"x' R^{{-1}} x = {qf} is not positive")
    sigma2_tilde = qf / n
    return ProfileStats(
        alpha=float(alpha),
        nu=float(nu),
        sigma2_tilde=sigma2_tilde,
        theta_tilde=sigma2_tilde * alpha ** (2.0 * nu),
        profile_loglik=-0.5 * n * np.log(sigma2_tilde) - 0.5 * fac.log_det,
    )


def ou_stats(data: GpDataset) -> OuStats:
    """Interior, cross, and total quadratic statistics of a 1-d dataset."""
    if data.design.d != 1:
        raise ValueError(f"ou_stats requires d = 1, design has d = {data.design.d}")
    x = data.x
    return OuStats(
        a1=float(x[1:-1] @ x[1:-1]),
        a2=float(x[:-1] @ x[1:]),
        a3=float(x @ x),
    )


def ou_profile_loglik(stats: OuStats, n: int, alpha: float) -> float:
    """Closed-form profile log-likelihood for the equispaced grid s_i = i/n.

    Equals the dense profile log-likelihood minus the alpha-independent
    constant (n/2) log n.
    """
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    q = np.exp(-alpha / n)
    arg = stats.a1 * q * q - 2.0 * stats.a2 * q + stats.a3
    if arg <= 0.0:
        raise DegenerateDataError(f"quadratic-form argument {arg} is not positive")
    return -0.5 * n * np.log(arg) + 0.5 * np.log1p(-q * q)


def _ou_gap_terms(data: GpDataset, alpha: float):
    """Per-gap correlations and the Markov residual decomposition."""
    s = data.design.coords_1d
    gaps = np.diff(s)
    if np.any(gaps <= 0):
        raise ValueError("OU fast path requires strictly increasing points")
    rho = np.exp(-alpha * gaps)
    one_minus_rho2 = -np.expm1(-2.0 * alpha * gaps)
    x = data.x
    resid = x[1:] - rho * x[:-1]
    qf = x[0] ** 2 + float(np.sum(resid**2 / one_minus_rho2))
    log_det = float(np.sum(np.log(one_minus_rho2)))
    return qf, log_det


def ou_loglik_fast(data: GpDataset, sigma2: float, alpha: float) -> float:
    """Exact OU (nu = 1/2, d = 1) log-likelihood in O(n).

    Uses the Markov factorization with per-gap correlations
    rho_i = exp(-alpha (s_{i+1} - s_i)), valid for any strictly increasing
    1-d design.  Matches :func:`log_likelihood` exactly (same constant
    convention).
    """
    if data.design.d != 1:
        raise ValueError("ou_loglik_fast requires d = 1")
    if not (sigma2 > 0 and alpha > 0):
        raise ValueError(f"sigma2 and alpha must be positive, got {sigma2}, {alpha}")
    n = data.n
    if n == 1:
        return -0.5 * np.log(sigma2) - data.x[0] ** 2 / (2.0 * sigma2)
    qf, log_det = _ou_gap_terms(data, alpha)
    return -0.5 * n * np.log(sigma2) - 0.5 * log_det - qf / (2.0 * sigma2)


def ou_profile_stats(data: GpDataset, alpha: float) -> ProfileStats:
    """O(n) version of :func:`profile_stats` for nu = 1/2, d = 1 designs."""
    if not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    n = data.n
    if n == 1:
        qf, log_det = data.x[0] ** 2, 0.0
    else:
        qf, log_det = _ou_gap_terms(data, alpha)
    if qf <= 0.0:
        raise DegenerateDataError(f"x' R^{{-1}} x = {qf} is not positive")
    sigma2_tilde = qf / n
    return ProfileStats(
        alpha=float(alpha),
        nu=0.5,
        sigma2_tilde=sigma2_tilde,
        theta_tilde=sigma2_tilde * alpha,
        profile_loglik=-0.5 * n * np.log(sigma2_tilde) - 0.5 * log_det,
    )


def load_dataset(path, T: float = 1.0) -> GpDataset:
    """Read a dataset CSV with header ``s1[,s2[,s3]],x``.

    Validates coordinate bounds and pairwise distinctness through
    :class:`Design`; 1-d rows are sorted jointly with their observations.
    """
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(v) for v in row] for row in reader if row]
    expected = [f"s{i + 1}" for i in range(len(header) - 1)] + ["x"]
    if [h.strip() for h in header] != expected:
        raise ValueError(f"bad dataset header {header}, expected {expected}")
    arr = np.asarray(rows, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != len(header):
        raise ValueError("malformed dataset rows")
    pts, x = arr[:, :-1], arr[:, -1]
    if pts.shape[1] == 1:
        order = np.argsort(pts[:, 0])
        pts, x = pts[order], x[order]
    return GpDataset(design=Design(points=pts, T=T), x=x)


def save_dataset(data: GpDataset, path) -> None:
    """Write the ``s1[,s2[,s3]],x`` CSV for :func:`load_dataset`."""
    d = data.design.d
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"s{i + 1}" for i in range(d)] + ["x"])
        for row, xi in zip(data.design.points, data.x):
            writer.writerow([f"{v:.17g}" for v in row] + [f"{xi:.17g}"])

"""Game Hessian assembly and the spectra that predict dynamics behavior.

The Hessian H(x) is the d x d block matrix whose (i, j) block is the second
derivative of player i's payoff, first in x_i then in x_j.  Off-diagonal
blocks always satisfy H_ij = -H_ji' when payoffs sum to zero; for bilinear
games the diagonal blocks vanish, so the whole matrix is antisymmetric and
its spectrum purely imaginary.

Everything downstream (divergence of plain gradient ascent, convergence of
the optimistic variant, prescribed step sizes) is read off a handful of
spectral quantities: omega (smallest nonzero eigenvalue modulus), rho
(largest modulus), and the update-rule Jacobian spectra derived from them.
"""

from __future__ import annotations

import tempfile
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, EigensolverError, PreconditionError
from .games import BILINEAR, LIPSCHITZ_SC, QUADRATIC_SC, GameGraph


@dataclass(frozen=True)
class GameHessian:
    matrix: np.ndarray
    point: np.ndarray
    dims: tuple[int, ...]

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate(([0], np.cumsum(self.dims))).astype(np.int64)


def assemble_hessian(game: GameGraph, x) -> GameHessian:
    """Assemble H(x) from the analytic per-edge second derivatives."""
    x = game.as_vector(x)
    h = np.zeros((game.d, game.d))
    for e in game.edges:
        si, sj = game.slice_of(e.i), game.slice_of(e.j)
        xi, xj = x[si], x[sj]
        h[si, sj] += e.forward.hess_other_own(xi, xj)
        h[sj, si] += e.backward.hess_other_own(xj, xi)
        h[si, si] += e.forward.hess_own_own(xi, xj)
        h[sj, sj] += e.backward.hess_own_own(xj, xi)
    return GameHessian(h, x.copy(), tuple(game.dims))


def cross_antisymmetry_gap(h: GameHessian) -> float:
    """max_{i != j} |H_ij + H_ji'|_inf, relative to |H|_inf.

    This is the structural identity that holds for every zero-sum game; the
    diagonal blocks carry each player's own curvature and are excluded.
    """
    off = h.offsets
    n = len(h.dims)
    scale = max(np.abs(h.matrix).max(), 1e-300)
    worst = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            bij = h.matrix[off[i]:off[i + 1], off[j]:off[j + 1]]
            bji = h.matrix[off[j]:off[j + 1], off[i]:off[i + 1]]
            worst = max(worst, np.abs(bij + bji.T).max())
    return worst / scale


def full_antisymmetry_gap(h: GameHessian) -> float:
    """|H + H'|_inf relative to |H|_inf (zero for bilinear games)."""
    scale = max(np.abs(h.matrix).max(), 1e-300)
    return float(np.abs(h.matrix + h.matrix.T).max() / scale)


@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: np.ndarray          # complex, length d
    omega: float | None              # smallest nonzero modulus, None if all zero
    rho: float                       # largest modulus
    eta: float
    ga_spectrum: np.ndarray          # 1 + eta * lambda
    oga_spectrum: np.ndarray         # 2d roots of the lifted-update quadratic
    eigvec_condition: float          # diagonalizability diagnostic
    max_abs_real: float
    nonzero_tol: float
    flags: tuple[str, ...] = field(default=())

    @property
    def thm_divergence_factor(self) -> float | None:
        """Per-step lower growth factor of dist^2 under plain ascent."""
        if self.omega is None:
            return None
        return 1.0 + self.eta ** 2 * self.omega ** 2

    @property
    def thm_contraction_factor(self) -> float | None:
        """Per-step dist^2 bound factor for the optimistic rule at eta=1/(2 rho)."""
        if self.omega is None or self.rho == 0:
            return None
        ratio = min(self.omega / self.rho, 1.0)
        return 0.5 + 0.5 * np.sqrt(max(0.0, 1.0 - ratio ** 2))

    def to_json_dict(self) -> dict:
        return {
            "eigenvalues_re": self.eigenvalues.real.tolist(),
            "eigenvalues_im": self.eigenvalues.imag.tolist(),
            "omega": self.omega,
            "rho": self.rho,
            "eta": self.eta,
            "ga_spectrum_re": self.ga_spectrum.real.tolist(),
            "ga_spectrum_im": self.ga_spectrum.imag.tolist(),
            "oga_spectrum_re": self.oga_spectrum.real.tolist(),
            "oga_spectrum_im": self.oga_spectrum.imag.tolist(),
            "eigvec_condition": self.eigvec_condition,
            "max_abs_real": self.max_abs_real,
            "nonzero_tol": self.nonzero_tol,
            "divergence_factor": self.thm_divergence_factor,
            "contraction_factor": self.thm_contraction_factor,
            "flags": list(self.flags),
        }


def _eig_or_dump(matrix: np.ndarray, want_vectors: bool):
    try:
        if want_vectors:
            return np.linalg.eig(matrix)
        return np.linalg.eigvals(matrix), None
    except np.linalg.LinAlgError as exc:  # pragma: no cover - hard to trigger
        with tempfile.NamedTemporaryFile(
                mode="w", suffix=".txt", prefix="nzsg_eig_dump_",
                delete=False) as fh:
            np.savetxt(fh, matrix)
            path = fh.name
        raise EigensolverError(
            f"eigensolver failed: {exc}; matrix dumped to {path}", path) from exc


def spectrum(h: GameHessian | np.ndarray, eta: float,
             nonzero_tol: float = 1e-8) -> SpectralReport:
    """Eigenvalues of H plus the update-rule spectra derived from them.

    ``omega`` excludes moduli below ``nonzero_tol * rho`` (round-off kernel
    classification).  Diagonalizability is reported as the condition number
    of the eigenvector matrix rather than a boolean.
    """
    if eta <= 0:
        raise ConfigurationError("eta must be positive")
    matrix = h.matrix if isinstance(h, GameHessian) else np.asarray(h, float)
    eigvals, eigvecs = _eig_or_dump(matrix, want_vectors=True)
    mods = np.abs(eigvals)
    rho = float(mods.max()) if mods.size else 0.0
    flags = []
    nonzero = mods > nonzero_tol * max(rho, 1e-300)
    if nonzero.any():
        omega = float(mods[nonzero].min())
    else:
        omega = None
        flags.append("no nonzero eigenvalues")
    try:
        cond = float(np.linalg.cond(eigvecs))
    except np.linalg.LinAlgError:  # pragma: no cover
        cond = float("inf")
    return SpectralReport(
        eigenvalues=eigvals,
        omega=omega,
        rho=rho,
        eta=float(eta),
        ga_spectrum=1.0 + eta * eigvals,
        oga_spectrum=oga_jacobian_spectrum(matrix, eta, _eigvals=eigvals),
        eigvec_condition=cond,
        max_abs_real=float(np.abs(eigvals.real).max()) if eigvals.size else 0.0,
        nonzero_tol=float(nonzero_tol),
        flags=tuple(flags),
    )


def oga_jacobian_spectrum(h, eta: float, _eigvals=None) -> np.ndarray:
    """Eigenvalues of the lifted optimistic update, two per eigenvalue of H.

    For each mu in the spectrum of the plain-ascent Jacobian I + eta H, the
    lifted 2d x 2d map contributes the two roots of

        lam^2 - (2 mu - 1) lam + (mu - 1) = 0.
    """
    matrix = h.matrix if isinstance(h, GameHessian) else np.asarray(h, float)
    if _eigvals is None:
        _eigvals, _ = _eig_or_dump(matrix, want_vectors=False)
    mu = 1.0 + eta * _eigvals
    b = 2.0 * mu - 1.0
    disc = np.sqrt(b * b - 4.0 * (mu - 1.0) + 0j)
    return np.concatenate(((b + disc) / 2.0, (b - disc) / 2.0))


def oga_augmented_jacobian(h, eta: float) -> np.ndarray:
    """Explicit 2d x 2d one-step matrix of the optimistic rule on (x^t, x^{t-1})."""
    matrix = h.matrix if isinstance(h, GameHessian) else np.asarray(h, float)
    d = matrix.shape[0]
    eye = np.eye(d)
    return np.block([[eye + 2.0 * eta * matrix, -eta * matrix],
                     [eye, np.zeros((d, d))]])


def finite_difference_hessian_block(game: GameGraph, x, i: int, j: int,
                                    step: float = 1e-4) -> np.ndarray:
    """Central-difference d/dx_j of grad_i p_i; independent oracle for tests."""
    x = game.as_vector(x).copy()
    sj = game.slice_of(j)
    block = np.zeros((game.dims[i], game.dims[j]))
    for k in range(game.dims[j]):
        idx = sj.start + k
        orig = x[idx]
        x[idx] = orig + step
        up = game.gradient(x, i)
        x[idx] = orig - step
        down = game.gradient(x, i)
        x[idx] = orig
        block[:, k] = (up - down) / (2 * step)
    return block


# ---------------------------------------------------------------------------
# determinants and kernels
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SchurReport:
    det_direct: float
    det_schur: float
    gap: float
    rel_gap: float

    def passed(self, tol: float = 1e-8) -> bool:
        return self.rel_gap <= tol


def schur_determinant_check(m1, m2, m3, m4,
                            cond_limit: float = 1e12) -> SchurReport:
    """Compare det([[M1,M2],[M3,M4]]) against det(M1 - M2 M4^-1 M3) det(M4)."""
    m1, m2, m3, m4 = (np.asarray(m, dtype=np.float64) for m in (m1, m2, m3, m4))
    cond = np.linalg.cond(m4)
    if not np.isfinite(cond) or cond > cond_limit:
        raise PreconditionError(
            f"lower-right block condition number {cond:.3e} exceeds {cond_limit:.1e}")
    full = np.block([[m1, m2], [m3, m4]])
    det_direct = float(np.linalg.det(full))
    comp = m1 - m2 @ np.linalg.solve(m4, m3)
    det_schur = float(np.linalg.det(comp) * np.linalg.det(m4))
    gap = abs(det_direct - det_schur)
    scale = max(abs(det_direct), abs(det_schur), 1e-300)
    return SchurReport(det_direct, det_schur, gap, gap / scale)


def null_space_basis(matrix: np.ndarray, null_tol: float = 1e-9) -> np.ndarray:
    """Orthonormal basis (d x k) of the numerical kernel via SVD thresholding."""
    matrix = np.asarray(matrix, dtype=np.float64)
    _, svals, vt = np.linalg.svd(matrix)
    if svals.size == 0 or svals[0] == 0.0:
        return np.eye(matrix.shape[1])
    mask = svals <= null_tol * svals[0]
    return np.ascontiguousarray(vt[mask].T)


def nash_set_distance_linear(h: GameHessian | np.ndarray, x,
                             null_tol: float = 1e-9) -> float:
    """Euclidean distance from x to {z : Hz = 0}, the Nash set of a linear game."""
    matrix = h.matrix if isinstance(h, GameHessian) else np.asarray(h, float)
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    basis = null_space_basis(matrix, null_tol)
    if basis.shape[1] == 0:
        return float(np.linalg.norm(x))
    return float(np.linalg.norm(x - basis @ (basis.T @ x)))


# ---------------------------------------------------------------------------
# theorem-rate predictions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RatePrediction:
    theorem: str
    per_step_factor: float
    prescribed_eta: float | None
    curve: np.ndarray | None  # bound on dist^2 over t = 0..horizon


def _require(value, name: str):
    if value is None:
        raise ConfigurationError(f"missing modulus '{name}' for this prediction")
    return value


def predict_rates(game: GameGraph, report: SpectralReport, rule: str,
                  r: float | None = None, horizon: int | None = None,
                  etas: np.ndarray | None = None) -> dict[str, RatePrediction]:
    """Per-step bound factors and bound curves for the applicable theorems.

    ``r`` is the initial per-player (linear families: joint) distance bound
    used to seed the curves; curves are omitted when ``r`` or ``horizon`` is
    missing.  Raises ConfigurationError when a needed modulus is absent.
    """
    rule = rule.lower()
    out: dict[str, RatePrediction] = {}
    n = game.n
    ts = np.arange(horizon + 1) if horizon is not None else None

    if game.kind == BILINEAR:
        if rule == "ga":
            omega = _require(report.omega, "omega")
            factor = 1.0 + report.eta ** 2 * omega ** 2
            curve = None
            if r is not None and ts is not None:
                curve = factor ** ts * r ** 2
            out["linear-ga-divergence"] = RatePrediction(
                "linear-ga-divergence", factor, None, curve)
        else:
            omega = _require(report.omega, "omega")
            factor = float(report.thm_contraction_factor)
            curve = None
            if r is not None and ts is not None:
                curve = factor ** ts * r ** 2
            out["linear-oga-contraction"] = RatePrediction(
                "linear-oga-contraction", factor, 1.0 / (2.0 * report.rho), curve)
    elif game.kind == QUADRATIC_SC:
        alpha = _require(game.alpha(), "alpha")
        beta = _require(game.beta(), "beta")
        if rule == "ga":
            factor = 1.0 - alpha ** 2 / (4.0 * n * beta ** 2)
            eta = alpha / (2.0 * n * beta ** 2)
            curve = None
            if r is not None and ts is not None:
                curve = factor ** ts * n * r ** 2
            out["smooth-ga-contraction"] = RatePrediction(
                "smooth-ga-contraction", factor, eta, curve)
        else:
            factor = 1.0 - alpha / (4.0 * n * beta)
            eta = 1.0 / (2.0 * n * beta)
            curve = None
            if r is not None and ts is not None:
                # bound indexes dist^2 at t+1 by factor^t; shift accordingly
                curve = factor ** np.maximum(ts - 1, 0) * (n + 1) * 2.0 * r ** 2
            out["smooth-oga-contraction"] = RatePrediction(
                "smooth-oga-contraction", factor, eta, curve)
    elif game.kind == LIPSCHITZ_SC:
        alpha = _require(game.alpha(), "alpha")
        lip = _require(game.lip(), "L")
        if etas is None or r is None:
            raise ConfigurationError(
                "lipschitz predictions need the step schedule and radius r")
        if rule == "ga":
            curve = lipschitz_ga_bound(etas, n, lip, alpha, r)
            out["lipschitz-ga"] = RatePrediction("lipschitz-ga",
                                                 float("nan"), None, curve)
        else:
            curve = lipschitz_oga_bound(etas, n, lip, alpha, r)
            out["lipschitz-oga"] = RatePrediction("lipschitz-oga",
                                                  float("nan"), None, curve)
    return out


def lipschitz_ga_bound(etas: np.ndarray, n: int, lip: float, alpha: float,
                       r: float) -> np.ndarray:
    """dist^2 bound L^2 n sum eta_s^2 + n r^2 prod (1 - eta_s alpha), t = 0..T."""
    etas = np.asarray(etas, dtype=np.float64)
    s_cum = np.concatenate(([0.0], np.cumsum(etas ** 2)))
    p_cum = np.concatenate(([1.0], np.cumprod(1.0 - etas * alpha)))
    return lip ** 2 * n * s_cum + n * r ** 2 * p_cum


def lipschitz_oga_bound(etas: np.ndarray, n: int, lip: float, alpha: float,
                        r: float) -> np.ndarray:
    """dist^2 bound 4 n L^2 sum eta_s eta_{s-1} + n r^2 prod (1-(eta_s+eta_{s-1}) alpha).

    The step before the first reuses the first (the bootstrap convention of
    the optimistic rule).
    """
    etas = np.asarray(etas, dtype=np.float64)
    prev = np.concatenate(([etas[0]], etas[:-1])) if etas.size else etas
    s_cum = np.concatenate(([0.0], np.cumsum(etas * prev)))
    p_cum = np.concatenate(([1.0], np.cumprod(1.0 - (etas + prev) * alpha)))
    return 4.0 * n * lip ** 2 * s_cum + n * r ** 2 * p_cum

"""Hot inner loops for trajectory simulation.

Every kernel here is plain numpy code that is JIT-compiled with numba when
available.  Setting the environment variable ``NZSG_NUMBA=0`` (or ``false``,
``off``, ``no``) before import selects the pure-numpy fallback; the two paths
run the same source and produce the same trajectories.  ``benchmarks/
bench_kernels.py`` times one against the other.

Two payoff families are supported natively:

* ``FAMILY_DENSE``   -- the stacked payoff gradient is a constant matrix H,
  so one step is a dense matvec (bilinear and quadratic games).
* ``FAMILY_CLIPPED`` -- quadratic game whose per-player fields are radially
  saturated outside a ball, bounding every gradient norm.

Rules: ``RULE_GA`` is plain simultaneous gradient ascent; ``RULE_OGA`` adds
the one-step optimistic correction with per-step coefficients
``(eta_s + eta_prev, -eta_prev)``.
"""

import math
import os

import numpy as np


def _jit_requested() -> bool:
    return os.environ.get("NZSG_NUMBA", "1").strip().lower() not in (
        "0", "false", "off", "no",
    )


NUMBA_ENABLED = False
if _jit_requested():
    try:
        from numba import njit as _njit

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        NUMBA_ENABLED = False


def _jit(func):
    if NUMBA_ENABLED:
        return _njit(cache=True, nogil=True)(func)
    return func


def jit_mode() -> str:
    """Which implementation the kernels run on: ``"numba"`` or ``"numpy"``."""
    return "numba" if NUMBA_ENABLED else "numpy"


FAMILY_DENSE = 0
FAMILY_CLIPPED = 1

RULE_GA = 0
RULE_OGA = 1

# dist^2 beyond this is treated as numeric blow-up; the run is truncated
# and flagged instead of raising (divergent GA runs are expected).
OVERFLOW_LIMIT = 1e100

STATUS_HIT = 0
STATUS_CENSORED = 1
STATUS_OVERFLOW = 2


@_jit
def _clip_sigma(r, delta, kappa):
    # radial saturation profile: identity inside the ball, tanh cap outside
    if r <= delta:
        return r
    return delta + kappa * math.tanh((r - delta) / kappa)


@_jit
def _clipped_gradient(coupling, offsets, degree, delta, kappa, x):
    """Stacked payoff gradient of the clipped-quadratic game.

    g_i = -degree_i * phi(x_i) + Jphi(x_i) @ (sum_j C_ij phi(x_j)), with
    phi the radially saturated identity and Jphi its (symmetric) Jacobian.
    """
    d = x.shape[0]
    n = offsets.shape[0] - 1
    phi = np.empty(d)
    for i in range(n):
        lo, hi = offsets[i], offsets[i + 1]
        r = 0.0
        for k in range(lo, hi):
            r += x[k] * x[k]
        r = math.sqrt(r)
        if r <= delta:
            for k in range(lo, hi):
                phi[k] = x[k]
        else:
            a = _clip_sigma(r, delta, kappa) / r
            for k in range(lo, hi):
                phi[k] = a * x[k]
    m = coupling @ phi
    g = np.empty(d)
    for i in range(n):
        lo, hi = offsets[i], offsets[i + 1]
        r = 0.0
        for k in range(lo, hi):
            r += x[k] * x[k]
        r = math.sqrt(r)
        if r <= delta:
            for k in range(lo, hi):
                g[k] = -degree[i] * phi[k] + m[k]
        else:
            a = _clip_sigma(r, delta, kappa) / r
            th = math.tanh((r - delta) / kappa)
            sp = 1.0 - th * th
            dot = 0.0
            for k in range(lo, hi):
                dot += x[k] * m[k]
            c = (sp - a) / (r * r) * dot
            for k in range(lo, hi):
                g[k] = -degree[i] * phi[k] + a * m[k] + c * x[k]
    return g


@_jit
def _gradient(family, matrix, offsets, degree, delta, kappa, x):
    if family == FAMILY_DENSE:
        return matrix @ x
    return _clipped_gradient(matrix, offsets, degree, delta, kappa, x)


@_jit
def _residual(x, null_basis, x_star):
    # distance target: projection residual onto the Nash (kernel) subspace
    # when a basis is supplied, otherwise offset from a fixed Nash point
    if null_basis.shape[1] > 0:
        return x - null_basis @ (null_basis.T @ x)
    return x - x_star


@_jit
def _fill_player_sq(resid, offsets, out_row):
    total = 0.0
    n = offsets.shape[0] - 1
    for i in range(n):
        s = 0.0
        for k in range(offsets[i], offsets[i + 1]):
            s += resid[k] * resid[k]
        out_row[i] = s
        total += s
    return total


@_jit
def _total_sq(resid):
    s = 0.0
    for k in range(resid.shape[0]):
        s += resid[k] * resid[k]
    return s


@_jit
def run_path(family, matrix, offsets, degree, delta, kappa,
             rule, x_init, g_prev_init, etas, eta_prev_init,
             null_basis, x_star, record_every, t_start, avg_sum_init,
             first_row_eta, rec_t, rec_total, rec_player, rec_avg, rec_eta,
             store_paths, path_x, path_avg):
    """Simulate one trajectory, recording metrics every ``record_every`` steps.

    Returns ``(rows_written, last_t, overflow_flag)``.  On numeric blow-up the
    run stops after the last finite iterate (already recorded) and the flag is
    set; nothing non-finite is written.
    """
    x = x_init.copy()
    g_prev = g_prev_init.copy()
    eta_prev = eta_prev_init
    avg_sum = avg_sum_init.copy()
    t = t_start
    t_final = t_start + etas.shape[0]
    k = 0
    overflow = 0

    # initial row
    rec_t[k] = t
    rec_total[k] = _fill_player_sq(_residual(x, null_basis, x_star), offsets,
                                   rec_player[k])
    if t > 0:
        rec_avg[k] = _total_sq(_residual(avg_sum / t, null_basis, x_star))
    else:
        rec_avg[k] = rec_total[k]
    rec_eta[k] = first_row_eta
    if store_paths == 1:
        path_x[k] = x
        if t > 0:
            path_avg[k] = avg_sum / t
        else:
            path_avg[k] = x
    k += 1

    for s in range(etas.shape[0]):
        g = _gradient(family, matrix, offsets, degree, delta, kappa, x)
        if rule == RULE_GA:
            x = x + etas[s] * g
        else:
            x = x + (etas[s] + eta_prev) * g - eta_prev * g_prev
            g_prev = g
            eta_prev = etas[s]
        t += 1
        tot = 0.0
        for j in range(x.shape[0]):
            tot += x[j] * x[j]
        if not math.isfinite(tot) or tot > OVERFLOW_LIMIT:
            overflow = 1
            t -= 1
            break
        avg_sum += x
        if t % record_every == 0 or t == t_final:
            rec_t[k] = t
            rec_total[k] = _fill_player_sq(
                _residual(x, null_basis, x_star), offsets, rec_player[k])
            rec_avg[k] = _total_sq(_residual(avg_sum / t, null_basis, x_star))
            rec_eta[k] = etas[s]
            if store_paths == 1:
                path_x[k] = x
                path_avg[k] = avg_sum / t
            k += 1
    return k, t, overflow


@_jit
def iterations_to_threshold(family, matrix, offsets, degree, delta, kappa,
                            rule, x_init, eta, threshold, t_max):
    """First step t with ||x^t||^2 < threshold, or a censoring/overflow status.

    Returns ``(t, status)`` with status HIT, CENSORED (t_max reached) or
    OVERFLOW (trajectory blew up first).
    """
    x = x_init.copy()
    g_prev = _gradient(family, matrix, offsets, degree, delta, kappa, x)
    for t in range(1, t_max + 1):
        g = _gradient(family, matrix, offsets, degree, delta, kappa, x)
        if rule == RULE_GA:
            x = x + eta * g
        else:
            x = x + 2.0 * eta * g - eta * g_prev
            g_prev = g
        tot = 0.0
        for j in range(x.shape[0]):
            tot += x[j] * x[j]
        if not math.isfinite(tot) or tot > OVERFLOW_LIMIT:
            return t, STATUS_OVERFLOW
        if tot < threshold:
            return t, STATUS_HIT
    return t_max, STATUS_CENSORED

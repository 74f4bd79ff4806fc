"""Hot numeric kernels with optional numba acceleration.

The functions below are written in numba-compatible numpy so the same
source serves both paths.  Set MTSM_DISABLE_NUMBA=1 to force the pure
numpy implementations (also used automatically when numba is absent).
"""

import os

import numpy as np


def _sym_expm(S):
    w, U = np.linalg.eigh(S)
    return (U * np.exp(w)) @ U.T


def _sym_logm(S):
    w, U = np.linalg.eigh(S)
    return (U * np.log(w)) @ U.T


def _spd_exp(P, V):
    # Exp_P(V) = C exp(C^-1 V C^-T) C^T with C the Cholesky factor of P.
    C = np.linalg.cholesky(P)
    Ci = np.linalg.inv(C)
    S = Ci @ V @ Ci.T
    S = 0.5 * (S + S.T)
    w, U = np.linalg.eigh(S)
    E = (U * np.exp(w)) @ U.T
    out = C @ E @ C.T
    return 0.5 * (out + out.T)


def _spd_log(P, Q):
    C = np.linalg.cholesky(P)
    Ci = np.linalg.inv(C)
    S = Ci @ Q @ Ci.T
    S = 0.5 * (S + S.T)
    w, U = np.linalg.eigh(S)
    M = (U * np.log(w)) @ U.T
    out = C @ M @ C.T
    return 0.5 * (out + out.T)


def _spd_dist(P, Q):
    C = np.linalg.cholesky(P)
    Ci = np.linalg.inv(C)
    S = Ci @ Q @ Ci.T
    S = 0.5 * (S + S.T)
    w = np.linalg.eigvalsh(S)
    lw = np.log(w)
    return np.sqrt(np.sum(lw * lw))


def _spd_inner(P, U, V):
    # trace(P^-1 U P^-1 V)
    Pi = np.linalg.inv(P)
    return np.trace(Pi @ U @ Pi @ V)


def _sphere_exp(p, v):
    nv = np.sqrt(np.sum(v * v))
    if nv < 1e-300:
        return p.copy()
    q = np.cos(nv) * p + np.sin(nv) * (v / nv)
    return q / np.sqrt(np.sum(q * q))


def _sphere_log(p, q):
    # atan2(sin, cos) form: arccos alone cannot resolve angles below
    # sqrt(machine eps), which stalls gradient iterations near a point.
    c = np.sum(p * q)
    if c > 1.0:
        c = 1.0
    elif c < -1.0:
        c = -1.0
    w = q - c * p
    nw = np.sqrt(np.sum(w * w))
    if nw < 1e-300:
        return np.zeros_like(p)
    theta = np.arctan2(nw, c)
    return (theta / nw) * w


def _sphere_dist(p, q):
    c = np.sum(p * q)
    if c > 1.0:
        c = 1.0
    elif c < -1.0:
        c = -1.0
    w = q - c * p
    s = np.sqrt(np.sum(w * w))
    return np.arctan2(s, c)


def _multiquadric_eval(x, nodes, coeffs, eps):
    # sum_i c_i sqrt(|x - x_i|^2 + eps^2), vector-valued coefficients
    n = nodes.shape[0]
    m = coeffs.shape[1]
    out = np.zeros(m)
    for i in range(n):
        r2 = eps * eps
        for k in range(x.shape[0]):
            d = x[k] - nodes[i, k]
            r2 += d * d
        phi = np.sqrt(r2)
        for j in range(m):
            out[j] += phi * coeffs[i, j]
    return out


_PURE = {
    "sym_expm": _sym_expm,
    "sym_logm": _sym_logm,
    "spd_exp": _spd_exp,
    "spd_log": _spd_log,
    "spd_dist": _spd_dist,
    "spd_inner": _spd_inner,
    "sphere_exp": _sphere_exp,
    "sphere_log": _sphere_log,
    "sphere_dist": _sphere_dist,
    "multiquadric_eval": _multiquadric_eval,
}

USING_NUMBA = False

if not os.environ.get("MTSM_DISABLE_NUMBA"):
    try:
        from numba import njit

        _JITTED = {name: njit(cache=True)(fn) for name, fn in _PURE.items()}
        USING_NUMBA = True
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _JITTED = _PURE
else:
    _JITTED = _PURE

_ACTIVE = _JITTED if USING_NUMBA else _PURE

sym_expm = _ACTIVE["sym_expm"]
sym_logm = _ACTIVE["sym_logm"]
spd_exp = _ACTIVE["spd_exp"]
spd_log = _ACTIVE["spd_log"]
spd_dist = _ACTIVE["spd_dist"]
spd_inner = _ACTIVE["spd_inner"]
sphere_exp = _ACTIVE["sphere_exp"]
sphere_log = _ACTIVE["sphere_log"]
sphere_dist = _ACTIVE["sphere_dist"]
multiquadric_eval = _ACTIVE["multiquadric_eval"]


def pure_numpy_kernels():
    """The uncompiled implementations, used by the kernel benchmark."""
    return dict(_PURE)

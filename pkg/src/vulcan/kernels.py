"""Hot numeric kernels: fused LSTM sequence forward/backward.

Each kernel is written once as a plain numpy function and optionally
JIT-compiled with numba. The backend is chosen at import time from the
VULCAN_BACKEND environment variable:

    VULCAN_BACKEND=numba   force numba (error if numba is unavailable)
    VULCAN_BACKEND=numpy   force the pure-numpy fallback
    unset                  numba when importable, numpy otherwise

Gate columns are ordered [input | forget | cell | output]. Both backends run
the same statements in the same order, so they agree to rounding of the
underlying BLAS.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None
    NUMBA_AVAILABLE = False


def _sigmoid(z):
    # exp of a non-positive argument only: never overflows.
    e = np.exp(-np.abs(z))
    return np.where(z >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))


def _lstm_seq_forward_impl(x, w, b):
    """Run an LSTM over x [T, d_in] with fused weights w [d_in+h, 4h], b [4h].

    Returns (hs [T,h], cs [T,h], gates [T,4h] post-activation, xh [T,d_in+h]);
    everything after hs is cache for the backward pass. Initial h and c are 0.
    """
    T = x.shape[0]
    d = x.shape[1]
    h = w.shape[1] // 4
    xh = np.zeros((T, d + h))
    gates = np.zeros((T, 4 * h))
    hs = np.zeros((T, h))
    cs = np.zeros((T, h))
    h_prev = np.zeros(h)
    c_prev = np.zeros(h)
    for t in range(T):
        xh[t, :d] = x[t]
        xh[t, d:] = h_prev
        z = np.dot(xh[t], w) + b
        e = np.exp(-np.abs(z))
        sig = np.where(z >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))
        i_g = sig[:h]
        f_g = sig[h : 2 * h]
        g_g = np.tanh(z[2 * h : 3 * h])
        o_g = sig[3 * h :]
        c_t = f_g * c_prev + i_g * g_g
        h_t = o_g * np.tanh(c_t)
        gates[t, :h] = i_g
        gates[t, h : 2 * h] = f_g
        gates[t, 2 * h : 3 * h] = g_g
        gates[t, 3 * h :] = o_g
        cs[t] = c_t
        hs[t] = h_t
        h_prev = h_t
        c_prev = c_t
    return hs, cs, gates, xh


def _lstm_seq_backward_impl(d_hs, w, xh, gates, cs):
    """Backward pass for _lstm_seq_forward_impl given d_hs [T, h].

    Returns (dx [T, d_in], dw, db)."""
    T = d_hs.shape[0]
    h = d_hs.shape[1]
    d = xh.shape[1] - h
    dx = np.zeros((T, d))
    dw = np.zeros_like(w)
    db = np.zeros(4 * h)
    dh = np.zeros(h)
    dc = np.zeros(h)
    dz = np.zeros(4 * h)
    for t in range(T - 1, -1, -1):
        dh_total = d_hs[t] + dh
        i_g = gates[t, :h]
        f_g = gates[t, h : 2 * h]
        g_g = gates[t, 2 * h : 3 * h]
        o_g = gates[t, 3 * h :]
        tc = np.tanh(cs[t])
        dc_total = dc + dh_total * o_g * (1.0 - tc * tc)
        if t > 0:
            c_prev = cs[t - 1]
        else:
            c_prev = np.zeros(h)
        dz[:h] = dc_total * g_g * i_g * (1.0 - i_g)
        dz[h : 2 * h] = dc_total * c_prev * f_g * (1.0 - f_g)
        dz[2 * h : 3 * h] = dc_total * i_g * (1.0 - g_g * g_g)
        dz[3 * h :] = dh_total * tc * o_g * (1.0 - o_g)
        dw += np.outer(xh[t], dz)
        db += dz
        dxh = np.dot(w, dz)
        dx[t] = dxh[:d]
        dh = dxh[d:]
        dc = dc_total * f_g
    return dx, dw, db


def _resolve_backend():
    requested = os.environ.get("VULCAN_BACKEND", "").strip().lower()
    if requested not in ("", "numba", "numpy"):
        raise ValueError(f"VULCAN_BACKEND must be 'numba' or 'numpy', got {requested!r}")
    if requested == "numba" and not NUMBA_AVAILABLE:
        raise RuntimeError("VULCAN_BACKEND=numba but numba is not importable")
    if requested == "":
        return "numba" if NUMBA_AVAILABLE else "numpy"
    return requested


BACKEND = _resolve_backend()

if NUMBA_AVAILABLE:
    lstm_seq_forward_numba = njit(cache=True)(_lstm_seq_forward_impl)
    lstm_seq_backward_numba = njit(cache=True)(_lstm_seq_backward_impl)
else:  # pragma: no cover
    lstm_seq_forward_numba = None
    lstm_seq_backward_numba = None

lstm_seq_forward_numpy = _lstm_seq_forward_impl
lstm_seq_backward_numpy = _lstm_seq_backward_impl

if BACKEND == "numba":
    lstm_seq_forward = lstm_seq_forward_numba
    lstm_seq_backward = lstm_seq_backward_numba
else:
    lstm_seq_forward = lstm_seq_forward_numpy
    lstm_seq_backward = lstm_seq_backward_numpy


def backend_name() -> str:
    return BACKEND


def get_kernels(use_numba: bool):
    """Explicit kernel pair for benchmarking one backend against the other."""
    if use_numba:
        if not NUMBA_AVAILABLE:
            raise RuntimeError("numba is not importable")
        return lstm_seq_forward_numba, lstm_seq_backward_numba
    return lstm_seq_forward_numpy, lstm_seq_backward_numpy

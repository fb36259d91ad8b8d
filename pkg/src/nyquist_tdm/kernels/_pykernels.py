"""Reference implementations of the hot loops (numpy / plain Python).

Used when the compiled extension is unavailable, and as the oracle the
compiled kernels are tested against.
"""

import math

import numpy as np


def lfsr_fill(state, mask, count):
    """Galois LFSR: emit ``count`` output bits (LSB first), return (bits, state)."""
    out = np.empty(count, dtype=np.uint8)
    s = int(state)
    m = int(mask)
    for i in range(count):
        b = s & 1
        out[i] = b
        s >>= 1
        if b:
            s ^= m
    return out, s


def frac_integral_uniform(f, h, beta):
    """Product-trapezoid fractional integral of order ``beta`` at every node.

    ``f`` is treated as piecewise linear on the uniform grid starting at the
    integral's lower limit. Result[0] is 0.
    """
    f = np.asarray(f, dtype=np.float64)
    n_pts = f.shape[0]
    out = np.zeros(n_pts)
    if n_pts < 2:
        return out
    b1 = beta + 1.0
    k = np.arange(n_pts + 1, dtype=np.float64)
    kp = k**b1
    # a[d] weights the node d steps behind the evaluation point, 1 <= d <= n-1
    a = np.empty(n_pts)
    a[0] = 1.0
    a[1:] = kp[2:] - 2.0 * kp[1:-1] + kp[:-2]
    scale = h**beta / math.gamma(beta + 2.0)
    for n in range(1, n_pts):
        w0 = kp[n - 1] - (n - 1.0 - beta) * k[n] ** beta
        acc = w0 * f[0]
        # nodes j = 1..n, distance d = n - j = n-1..0
        acc += np.dot(a[n - 1 :: -1][:n], f[1 : n + 1])
        out[n] = scale * acc
    return out


def frame_statistics(bits, templates, noise, weights):
    """Decision statistics for a batch of frames.

    rx[f] = sum_k bits[f, k] * templates[k] + noise[f]
    stats[f, k] = sum_s rx[f, s] * weights[k, s]
    """
    rx = np.asarray(bits, dtype=np.float64) @ templates
    rx += noise
    return rx @ np.asarray(weights).T

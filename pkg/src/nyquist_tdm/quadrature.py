"""Adaptive Simpson quadrature."""

import math


def adaptive_simpson(f, a, b, tol=1e-9, max_depth=48, n_init=16):
    """Integrate scalar ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    Classic recursive Simpson with Richardson correction, run on an explicit
    stack over ``n_init`` starting panels (guards against a coarse first
    estimate agreeing by accident on periodic integrands).  Raises
    ``RuntimeError`` if a panel needs more than ``max_depth`` bisections.
    """
    if a == b:
        return 0.0
    edges = [a + (b - a) * k / n_init for k in range(n_init + 1)]
    edges[-1] = b
    fe = [f(x) for x in edges]
    total = 0.0
    stack = []
    for k in range(n_init):
        lo, hi = edges[k], edges[k + 1]
        mid = 0.5 * (lo + hi)
        fmid = f(mid)
        s = (hi - lo) / 6.0 * (fe[k] + 4.0 * fmid + fe[k + 1])
        stack.append((lo, hi, fe[k], fmid, fe[k + 1], s, tol / n_init, 0))
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        lm, rm = 0.5 * (lo + mid), 0.5 * (mid + hi)
        flm, frm = f(lm), f(rm)
        left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid)
        right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi)
        delta = left + right - s
        if abs(delta) <= 15.0 * eps or (depth >= 3 and hi - lo < 1e-15 * max(1.0, abs(lo))):
            total += left + right + delta / 15.0
            continue
        if depth >= max_depth:
            raise RuntimeError(f"adaptive_simpson: no convergence on [{lo}, {hi}]")
        if not math.isfinite(delta):
            raise ValueError("integrand is not finite")
        stack.append((lo, mid, flo, flm, fmid, left, eps / 2.0, depth + 1))
        stack.append((mid, hi, fmid, frm, fhi, right, eps / 2.0, depth + 1))
    return total

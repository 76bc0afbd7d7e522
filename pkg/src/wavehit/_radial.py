"""Radial quadrature engine for the spectral covariance integrals.

Every second moment of the field reduces to a one-dimensional integral

    I = int_0^inf rho^(beta-1) h(rho) d rho

with ``h`` smooth and bounded (the 1/rho^2 of the wave kernel is folded into
``h``).  The integral is split at a cutoff ``R``:

* ``[0, R]``: a Gauss-Jacobi panel absorbs the rho^(beta-1) weight near the
  origin, followed by Gauss-Legendre panels aligned to half-periods of the
  fastest oscillation.  A second, lower-order rule on the same panels gives
  the error estimate.
* ``[R, inf)``: the integrand is expanded exactly (k = 1, 3) or through the
  Hankel expansion of J0 (k = 2) into terms ``c rho^p cos(w rho + phi)``,
  each integrated in closed form / by a short auxiliary quadrature.

All routines are vectorized over rows of (m, M, r) = (min time, max time,
spatial distance).
"""

from math import factorial, pi

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .errors import DimensionUnsupportedError, QuadratureAccuracyError

SPHERE_AREA = {1: 2.0, 2: 2.0 * pi, 3: 4.0 * pi}

# cutoff below which oscillatory tail terms need the auxiliary quadrature
_ASYM_X = 40.0
# J0: power series below, Hankel expansion above
_J0_SWITCH = 12.0
# minimum r*R before the Hankel expansion is used for the k=2 tail
_HANKEL_MIN_ARG = 25.0
_R_BASE = 64.0
_JACOBI_ORDER = 24
_HI_ORDER = 16
_LO_ORDER = 10
_CHUNK = 2_000_000

_GL_HI = roots_legendre(_HI_ORDER)
_GL_LO = roots_legendre(_LO_ORDER)
_GL_MID = roots_legendre(10)

_CHI_COEF = np.array([(-1) ** (n + 1) / factorial(2 * n + 1) for n in range(1, 14)])
_PSI_COEF = np.array([(-1) ** n * 2 * n / factorial(2 * n + 1) for n in range(1, 14)])


def _poly_y2(coef, y):
    y2 = y * y
    out = np.zeros_like(y2)
    for c in coef[::-1]:
        out = out * y2 + c
    return out


def sinc(y):
    """sin(y)/y with the value 1 at 0."""
    return np.sinc(np.asarray(y, dtype=float) / pi)


def chi(y):
    """(y - sin y) / y^3, stable near 0 (limit 1/6)."""
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < 1.0
    ys = np.where(small, 1.0, y)
    direct = (ys - np.sin(ys)) / ys**3
    return np.where(small, _poly_y2(_CHI_COEF, np.where(small, y, 0.0)), direct)


def psi(y):
    """(y cos y - sin y) / y^3, stable near 0 (limit -1/3)."""
    y = np.asarray(y, dtype=float)
    small = np.abs(y) < 1.0
    ys = np.where(small, 1.0, y)
    direct = (ys * np.cos(ys) - np.sin(ys)) / ys**3
    return np.where(small, _poly_y2(_PSI_COEF, np.where(small, y, 0.0)), direct)


# ---------------------------------------------------------------- Bessel J0

def _j0_series(x):
    q = 0.25 * x * x
    term = np.ones_like(x)
    out = np.ones_like(x)
    for n in range(1, 60):
        term = -term * q / (n * n)
        out = out + term
    return out


def _hankel_coefficients(n_terms):
    b = [1.0]
    for n in range(1, n_terms):
        b.append(b[-1] * (2 * n - 1) ** 2 / (8.0 * n))
    return np.array(b)


_HANKEL_B = _hankel_coefficients(40)


def _j0_asymptotic(x):
    out = np.zeros_like(x)
    prev = np.full_like(x, np.inf)
    active = np.ones(x.shape, dtype=bool)
    for n, bn in enumerate(_HANKEL_B):
        mag = bn / x**n
        active &= mag < prev
        if not active.any():
            break
        out = out + np.where(active, mag * np.cos(x - pi / 4 - n * pi / 2), 0.0)
        prev = mag
        active &= mag > 1e-17
    return np.sqrt(2.0 / (pi * x)) * out


def bessel_j0(x):
    """Bessel function J0: power series for small x, Hankel expansion above."""
    x = np.abs(np.asarray(x, dtype=float))
    small = x < _J0_SWITCH
    out = np.empty_like(x)
    if small.any():
        out[small] = _j0_series(x[small])
    if (~small).any():
        out[~small] = _j0_asymptotic(x[~small])
    return out


def one_minus_j0(x):
    x = np.abs(np.asarray(x, dtype=float))
    small = x < 1.0
    out = 1.0 - bessel_j0(x)
    if small.any():
        q = 0.25 * x[small] ** 2
        term = np.ones_like(q)
        acc = np.zeros_like(q)
        for n in range(1, 20):
            term = -term * q / (n * n)
            acc = acc - term
        out[small] = acc
    return out


def angular(k, x):
    """Spherical average of exp(i xi.z) over |xi| = rho, |z| = r; x = rho*r."""
    if k == 1:
        return np.cos(x)
    if k == 2:
        return bessel_j0(x)
    if k == 3:
        return sinc(x)
    raise DimensionUnsupportedError(f"spatial dimension k={k} not in {{1, 2, 3}}")


def one_minus_angular(k, x):
    if k == 1:
        return 2.0 * np.sin(0.5 * x) ** 2
    if k == 2:
        return one_minus_j0(x)
    if k == 3:
        return x * x * chi(x)
    raise DimensionUnsupportedError(f"spatial dimension k={k} not in {{1, 2, 3}}")


# ------------------------------------------------------- integrand kernels

def t_over_rho2(m, M, rho):
    """int_0^m sin((M-u) rho) sin((m-u) rho) du / rho^2 for m <= M."""
    return 0.5 * (np.cos(M * rho) * m**3 * psi(m * rho) + m * m * M * sinc(M * rho) * sinc(m * rho))


def time_increment_over_rho2(m, M, rho):
    """[T(M,M) + T(m,m) - 2 T(m,M)] / rho^2, the pure time-increment part."""
    a = M - m
    s1 = 0.5 * a * a * sinc(0.5 * a * rho) ** 2 * m * (1.0 + np.cos(M * rho) * sinc(m * rho))
    s2 = 2.0 * a**3 * chi(2.0 * a * rho)
    return s1 + s2


def _h(kind, k, m, M, r, rho):
    if kind == "cov":
        return angular(k, r * rho) * t_over_rho2(m, M, rho)
    return time_increment_over_rho2(m, M, rho) + 2.0 * one_minus_angular(k, r * rho) * t_over_rho2(m, M, rho)


# ------------------------------------------------------------ tail series
# A series is a tuple (coef, power, freq, phase) of arrays with shape
# (rows, terms) denoting sum c rho^p cos(w rho + phi).

def _series(rows, *terms):
    return tuple(np.stack([np.broadcast_to(np.asarray(t[j], dtype=float), (rows,)) for t in terms], axis=1)
                 for j in range(4))


def _t_series(m, M):
    a, b = M - m, M + m
    n = m.shape[0]
    return _series(n, (0.5 * m, 0.0, a, 0.0), (-0.25, -1.0, b, -pi / 2), (0.25, -1.0, a, -pi / 2))


def _angular_series(k, r, n_hankel):
    n = r.shape[0]
    zero = r == 0
    rs = np.where(zero, 1.0, r)
    if k == 1:
        return _series(n, (1.0, 0.0, r, 0.0))
    if k == 3:
        return _series(n, (np.where(zero, 1.0, 1.0 / rs), np.where(zero, 0.0, -1.0),
                           r, np.where(zero, 0.0, -pi / 2)))
    terms = []
    for j in range(n_hankel):
        c = np.sqrt(2.0 / pi) * _HANKEL_B[j] * rs ** (-0.5 - j)
        if j == 0:
            terms.append((np.where(zero, 1.0, c), np.where(zero, 0.0, -0.5), r,
                          np.where(zero, 0.0, -pi / 4)))
        else:
            terms.append((np.where(zero, 0.0, c), -0.5 - j, r, -pi / 4 - j * pi / 2))
    return _series(n, *terms)


def _product(s1, s2):
    """Product-to-sum of two series; frequencies are folded to w >= 0."""
    c1, p1, w1, f1 = (x[:, :, None] for x in s1)
    c2, p2, w2, f2 = (x[:, None, :] for x in s2)
    n = c1.shape[0]
    c = (0.5 * c1 * c2).reshape(n, -1)
    p = (p1 + p2).reshape(n, -1)
    out = []
    for w, f in ((w1 + w2, f1 + f2), (w1 - w2, f1 - f2)):
        w = np.broadcast_to(w, c1.shape[:2] + (c2.shape[2],)).reshape(n, -1)
        f = np.broadcast_to(f, c1.shape[:2] + (c2.shape[2],)).reshape(n, -1)
        out.append((c, p, np.abs(w), np.where(w < 0, -f, f)))
    return _concat(*out)


def _concat(*series_list):
    return tuple(np.concatenate([s[j] for s in series_list], axis=1) for j in range(4))


def _scale(s, factor):
    return (s[0] * factor,) + tuple(s[1:])


def _tail_series(kind, k, m, M, r, n_hankel):
    ang = _angular_series(k, r, n_hankel)
    cross = _product(_t_series(m, M), ang)
    if kind == "cov":
        return cross
    return _concat(_t_series(M, M), _t_series(m, m), _scale(cross, -2.0))


def _asymptotic_sum(p, X):
    """sum_n p(p-1)...(p-n+1) (i/X)^n and the size of the last term used."""
    term = np.ones(p.shape, dtype=complex)
    out = term.copy()
    active = np.ones(p.shape, dtype=bool)
    last = np.zeros(p.shape)
    for n in range(80):
        nxt = term * (p - n) * 1j / X
        grow = np.abs(nxt) >= np.abs(term)
        active &= ~grow
        if not active.any():
            break
        out = out + np.where(active, nxt, 0.0)
        last = np.where(active, np.abs(nxt), last)
        term = nxt
        active &= np.abs(nxt) > 1e-18
    return out, last + 1e-16


def _gl_segment(p, lo, hi):
    """int_lo^hi w^p e^{iw} dw with 40 Gauss-Legendre panels."""
    x, w = _GL_MID
    n_pan = 40
    h = (hi - lo) / n_pan
    total = np.zeros(p.shape, dtype=complex)
    for j in range(n_pan):
        a = lo + j * h
        nodes = a[:, None] + 0.5 * h[:, None] * (x[None, :] + 1.0)
        vals = nodes ** p[:, None] * np.exp(1j * nodes)
        total += 0.5 * h * (vals @ w)
    return total


def _scaled_upper(p, X):
    """X^(-p-1) int_X^inf w^p e^{iw} dw, finite as X -> 0 (value 1/(-p-1))."""
    out = np.zeros(p.shape, dtype=complex)
    err = np.zeros(p.shape)
    zero = X <= 0.0
    out[zero] = 1.0 / (-p[zero] - 1.0)
    Xs = np.where(zero, 1.0, X)
    far = (Xs >= _ASYM_X) & ~zero
    if far.any():
        s, last = _asymptotic_sum(p[far], Xs[far])
        out[far] = 1j * np.exp(1j * Xs[far]) * s / Xs[far]
        err[far] = last / Xs[far]
    near = ~far & ~zero
    if near.any():
        pn, Xn = p[near], Xs[near]
        x40 = np.full_like(Xn, _ASYM_X)
        s, last = _asymptotic_sum(pn, x40)
        upper = 1j * np.exp(1j * x40) * x40**pn * s
        lo = np.maximum(Xn, 1.0)
        upper = upper + _gl_segment(pn, lo, x40)
        val = Xn ** (-pn - 1.0) * upper
        low = Xn < 1.0
        if low.any():
            pl, Xl = pn[low], Xn[low]
            lnx = np.log(Xl)
            acc = np.zeros(pl.shape, dtype=complex)
            base = Xl ** (-pl - 1.0)
            for n in range(26):
                e = pl + n + 1.0
                el = -e * lnx
                es = np.where(e == 0.0, 1.0, e)
                with np.errstate(over="ignore", invalid="ignore"):
                    g = np.where(np.abs(el) < 1.0, Xl**n * np.expm1(np.minimum(el, 1.0)) / es, (base - Xl**n) / es)
                g = np.where(e == 0.0, -lnx * Xl**n, g)
                acc += (1j**n / factorial(n)) * g
            val[low] += acc
        out[near] = val
        err[near] = np.abs(Xn ** (-pn - 1.0)) * last * x40**pn + 1e-15 * np.abs(val)
    return out, err


def _tail_integral(series, beta, R):
    """Row sums of int_R^inf c rho^(p+beta-3) cos(w rho + phi) d rho."""
    c, p, w, f = series
    p = p + beta - 3.0
    shape = c.shape
    c, p, w, f, Rb = (np.broadcast_to(v, shape).ravel() for v in (c, p, w, f, R[:, None]))
    keep = c != 0.0
    val = np.zeros(c.shape)
    err = np.zeros(c.shape)
    if keep.any():
        ck, pk, wk, fk, Rk = c[keep], p[keep], w[keep], f[keep], Rb[keep]
        J, Je = _scaled_upper(pk, wk * Rk)
        scale = ck * Rk ** (pk + 1.0)
        val[keep] = scale * np.real(np.exp(1j * fk) * J)
        err[keep] = np.abs(scale) * Je
    return val.reshape(shape).sum(axis=1), err.reshape(shape).sum(axis=1)


# ---------------------------------------------------------------- driver

def _panel_sums(kind, k, beta, m, M, r, R, width):
    """Quadrature of rho^(beta-1) h over [0, R]; high- and low-order estimates."""
    p0 = np.minimum(width, R)
    xj, wj = roots_jacobi(_JACOBI_ORDER, 0.0, beta - 1.0)
    n_rows = m.shape[0]
    hi = np.zeros(n_rows)
    lo = np.zeros(n_rows)
    # Gauss-Jacobi panel at the origin; exact for the rho^(beta-1) weight
    rho = 0.5 * p0[:, None] * (1.0 + xj[None, :])
    vals = _h(kind, k, m[:, None], M[:, None], r[:, None], rho)
    gj = (vals @ wj) * (0.5 * p0) ** beta
    hi += gj
    lo += gj
    n_pan = np.ceil((R - p0) / width).astype(int)
    n_pan = np.maximum(n_pan, 0)
    max_pan = int(n_pan.max()) if n_rows else 0
    if max_pan == 0:
        return hi, lo
    h = np.where(n_pan > 0, (R - p0) / np.maximum(n_pan, 1), 0.0)
    per_block = max(1, _CHUNK // max(1, n_rows * (_HI_ORDER + _LO_ORDER)))
    for (x, w), acc in ((_GL_HI, hi), (_GL_LO, lo)):
        for start in range(0, max_pan, per_block):
            j = np.arange(start, min(start + per_block, max_pan))
            a = p0[:, None] + j[None, :] * h[:, None]
            rho = a[:, :, None] + 0.5 * h[:, None, None] * (x[None, None, :] + 1.0)
            live = (j[None, :] < n_pan[:, None])[:, :, None]
            vals = _h(kind, k, m[:, None, None], M[:, None, None], r[:, None, None], rho)
            vals = np.where(live, vals * rho ** (beta - 1.0), 0.0)
            acc += 0.5 * h * np.einsum("ijk,k->i", vals, w)
    return hi, lo


def _cutoff(k, r, quad):
    if quad is not None and quad.tail_cutoff_policy != "auto":
        return np.full(r.shape, float(quad.rho_max))
    R = np.full(r.shape, _R_BASE)
    if k == 2:
        with np.errstate(divide="ignore"):
            need = np.where(r > 0, _HANKEL_MIN_ARG / np.where(r > 0, r, 1.0), 0.0)
        R = np.maximum(R, need)
        R = _R_BASE * 2.0 ** np.ceil(np.log2(R / _R_BASE) - 1e-12)
    return R


def _hankel_terms(k, r, R):
    if k != 2:
        return 0
    x = np.min(np.where(r > 0, r * R, np.inf))
    if not np.isfinite(x):
        return 1
    n = 1
    while n < len(_HANKEL_B) - 1 and _HANKEL_B[n] / x**n > 1e-17 and _HANKEL_B[n + 1] / x ** (n + 1) < _HANKEL_B[n] / x**n:
        n += 1
    return n + 1


def radial_integral(kind, k, beta, m, M, r, quad):
    """Vectorized spectral integral; returns (value, error_estimate).

    kind "cov": covariance of u(M, x) and u(m, y) with |x - y| = r.
    kind "dsq": E (u(M, x) - u(m, y))^2, computed from its own integrand so
    that no cancellation between variances and covariance occurs.
    """
    if k not in SPHERE_AREA:
        raise DimensionUnsupportedError(f"spatial dimension k={k} not in {{1, 2, 3}}")
    m = np.asarray(m, dtype=float).ravel()
    M = np.asarray(M, dtype=float).ravel()
    r = np.asarray(r, dtype=float).ravel()
    value = np.zeros(m.shape)
    error = np.zeros(m.shape)
    if m.size == 0:
        return value, error
    if kind == "cov":
        live = (m > 0) & (M > 0)
        fmax = m + M + r
    else:
        live = (M > 0) & ((M - m) + r > 0)
        fmax = 2.0 * M + r
    R_all = _cutoff(k, r, quad)
    rel_tol = quad.rel_tol if quad is not None else 1e-10
    abs_tol = quad.abs_tol if quad is not None else 1e-14
    max_panels = quad.max_panels if quad is not None else 400_000
    for R_val in np.unique(R_all[live]):
        idx = np.where(live & (R_all == R_val))[0]
        mm, MM, rr = m[idx], M[idx], r[idx]
        R = np.full(idx.shape, R_val)
        n_h = _hankel_terms(k, rr, R_val)
        tail, tail_err = _tail_integral(_tail_series(kind, k, mm, MM, rr, n_h), beta, R)
        if k == 2:
            x = np.where(rr > 0, rr * R_val, np.inf)
            with np.errstate(divide="ignore", over="ignore"):
                tail_err = tail_err + np.where(rr > 0, _HANKEL_B[n_h] / x**n_h, 0.0) * R_val ** (beta - 2.5)
        width = np.full(idx.shape, pi / max(float(fmax[idx].max()), 1e-300))
        todo = np.arange(idx.size)
        while todo.size:
            hi, lo = _panel_sums(kind, k, beta, mm[todo], MM[todo], rr[todo], R[todo], width[todo])
            val = hi + tail[todo]
            err = np.abs(hi - lo) + tail_err[todo]
            value[idx[todo]] = val
            error[idx[todo]] = err
            bad = err > np.maximum(abs_tol, rel_tol * np.abs(val))
            if not bad.any():
                break
            todo = todo[bad]
            width[todo] *= 0.5
            if np.any(R_val / width[todo] > max_panels):
                j = idx[todo[0]]
                raise QuadratureAccuracyError(
                    f"radial quadrature did not converge within {max_panels} panels",
                    estimate=SPHERE_AREA[k] * value[j], error_bound=SPHERE_AREA[k] * error[j])
    return SPHERE_AREA[k] * value, SPHERE_AREA[k] * error

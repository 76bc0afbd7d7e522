"""Experiment battery: each check returns a deterministic Report.

Conventions
-----------
* A ratio is "bounded" on a schedule when max/min <= ``RATIO_BOUND`` (50).
* Pair families are log-spaced over separations in [1e-3, 1]; below that
  the quadrature error of the increment dominates.
* Lower-bound constants are minima of observed ratios, upper-bound constants
  maxima; the check fails when a lower constant is not positive or an upper
  constant is not finite.
"""

import json
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import quad as scipy_quad

from . import capacity as cap
from . import hausdorff as haus
from .errors import ParameterError
from .field_sampler import GridBox, assemble_cov, build_grid, sample_replicates
from .hitting_mc import cell_enlargement, min_distances, estimate_from_hits
from .spectral_core import ModelParams, covariance_array, metric_sq_array, variance_array
from .targets import Ball

RATIO_BOUND = 50.0


@dataclass
class FittedConstant:
    name: str
    value: float
    context: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)


@dataclass
class Report:
    name: str
    passed: bool
    constants: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        return _plain(asdict(self))

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if np.isfinite(v) else ("inf" if v > 0 else ("-inf" if v < 0 else "nan"))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    return obj


def _context(model):
    return {"k": model.k, "beta": model.beta, "d": model.d, "t0": model.t0, "T": model.T}


def _slope(x, y):
    x, y = np.log(np.asarray(x, dtype=float)), np.log(np.asarray(y, dtype=float))
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    ss = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss if ss > 0 else 1.0
    return float(coef[0]), float(coef[1]), float(r2), float(np.max(np.abs(resid)))


def bounded(ratios, bound=RATIO_BOUND):
    r = np.asarray(ratios, dtype=float)
    return bool(np.all(np.isfinite(r)) and r.min() > 0 and r.max() / r.min() <= bound)


# ---------------------------------------------------------------- exponents

def hitting_exponents(k, beta):
    """Critical dimensions 2(k+1)/(2-beta), 2k/(2-beta), 2/(2-beta).

    These govern the full parameter box, fixed-time slices and fixed-space
    slices.  Exact rationals when ``beta`` is a short decimal.
    """
    b = Fraction(str(beta)).limit_denominator(10**6)
    return {"full": Fraction(2 * (k + 1)) / (2 - b),
            "fixed_time": Fraction(2 * k) / (2 - b),
            "fixed_space": Fraction(2) / (2 - b)}


def hitting_index(k, beta, d, kind="full"):
    """Capacity / Hausdorff index d - critical dimension."""
    return d - float(hitting_exponents(k, beta)[kind])


def check_exponents(cases=((1, 0.5), (3, 1.0))):
    table = {f"{k},{b}": {key: str(v) for key, v in hitting_exponents(k, b).items()} for k, b in cases}
    expected = {"1,0.5": ("8/3", "4/3", "4/3"), "3,1.0": ("8", "6", "2")}
    ok = all(tuple(table[c][key] for key in ("full", "fixed_time", "fixed_space")) == v
             for c, v in expected.items() if c in table)
    return Report("exponents", ok, diagnostics={"table": table})


# ----------------------------------------------------------- metric scaling

def metric_pairs(model, n_pairs, lo=1e-3, hi=1.0):
    """Pure-time, pure-space and mixed pairs with log-spaced separations."""
    hi = min(hi, model.T - model.t0)
    n = max(2, n_pairs // 3)
    h = np.geomspace(lo, hi, n)
    t1, x1, t2, x2, fam = [], [], [], [], []
    for name in ("time", "space", "mixed"):
        a = np.full(n, model.t0)
        x = np.zeros((n, model.k))
        y = np.zeros((n, model.k))
        if name == "time":
            b = a + h
        elif name == "space":
            b = a.copy()
            y[:, 0] = h
        else:
            b = a + 0.5 * h
            y[:, 0] = 0.5 * h
        t1.append(a)
        x1.append(x)
        t2.append(b)
        x2.append(y)
        fam += [name] * n
    return (np.concatenate(t1), np.concatenate(x1), np.concatenate(t2), np.concatenate(x2),
            np.tile(h, 3), np.array(fam))


def check_metric_scaling(model, n_pairs=75, tol=0.05, quad=None):
    """Pooled log-log slope of the increment variance against separation."""
    t1, x1, t2, x2, sep, fam = metric_pairs(model, n_pairs)
    dsq, err = metric_sq_array(t1, x1, t2, x2, model, quad)
    target = 2.0 - model.beta
    slope, _, r2, resid = _slope(sep, dsq)
    ratio = dsq / sep**target
    per_family = {f: _slope(sep[fam == f], dsq[fam == f])[0] for f in ("time", "space", "mixed")}
    lower, upper = float(ratio.min()), float(ratio.max())
    ok = abs(slope - target) <= tol and lower > 0 and np.isfinite(upper)
    ctx = _context(model)
    consts = [FittedConstant("metric-lower", lower, ctx), FittedConstant("metric-upper", upper, ctx)]
    return Report("metric_scaling", bool(ok), consts,
                  {"slope": slope, "target": target, "r2": r2, "resid_max": resid,
                   "family_slopes": per_family, "max_quad_error": float(err.max()),
                   "ratio_spread": upper / lower})


# ---------------------------------------------------------- variance bounds

def check_variance_bounds(model, t_lo=0.1, t_hi=2.0, n=50, quad=None):
    t = np.linspace(t_lo, t_hi, n)
    big = ModelParams(model.k, model.beta, model.d, model.t0, max(model.T, t_hi))
    var, _ = variance_array(t, big, quad)
    lower = var / np.minimum(t, t**3)
    upper = var / (t + t**3)
    lip = np.abs(np.diff(var)) / np.diff(t)
    ok = bounded(lower) and bounded(upper) and np.all(np.isfinite(lip))
    ctx = _context(model)
    consts = [FittedConstant("var-lower-min", float(lower.min()), ctx),
              FittedConstant("var-lower-max", float(lower.max()), ctx),
              FittedConstant("var-upper-min", float(upper.min()), ctx),
              FittedConstant("var-upper-max", float(upper.max()), ctx),
              FittedConstant("var-lipschitz", float(lip.max()), ctx)]
    return Report("variance_bounds", bool(ok), consts,
                  {"lower_spread": float(lower.max() / lower.min()),
                   "upper_spread": float(upper.max() / upper.min())})


# ------------------------------------------------------ regression quantities

@dataclass
class RegressionPair:
    sigma_s: float
    sigma_t: float
    sigma_st: float
    tau: float
    m_coeff: float
    rho_corr: float
    delta: float


def random_pairs(model, n_pairs, seed=0, space_half_width=1.0, lo=1e-3, hi=1.0):
    """Random pairs in the window with log-uniform separations in [lo, hi]."""
    rng = np.random.default_rng(seed)
    hi = min(hi, model.T - model.t0)
    sep = np.exp(rng.uniform(np.log(lo), np.log(hi), n_pairs))
    frac = rng.uniform(0.0, 1.0, n_pairs)
    dt = frac * sep
    direction = rng.normal(size=(n_pairs, model.k))
    direction /= np.linalg.norm(direction, axis=1, keepdims=True)
    dx = (1.0 - frac)[:, None] * sep[:, None] * direction
    t1 = rng.uniform(model.t0, model.T - dt)
    x1 = rng.uniform(-space_half_width, space_half_width, (n_pairs, model.k))
    return t1, x1, t1 + dt, x1 + dx, sep


def regression_pairs(model, t1, x1, t2, x2, quad=None):
    """Second moments and regression quantities, (s, y) = point 1, (t, x) = point 2."""
    vs, _ = variance_array(t1, model, quad)
    vt, _ = variance_array(t2, model, quad)
    cst, _ = covariance_array(t1, x1, t2, x2, model, quad)
    dsq, _ = metric_sq_array(t1, x1, t2, x2, model, quad)
    rho = cst / np.sqrt(vs * vt)
    tau = np.sqrt(np.maximum(vt * (1.0 - rho**2), 0.0))
    m = cst / vs
    return vs, vt, cst, dsq, rho, tau, m


def check_regression_coeffs(model, n_pairs=1000, seed=0, quad=None):
    t1, x1, t2, x2, sep = random_pairs(model, n_pairs, seed)
    vs, vt, cst, dsq, rho, tau, m = regression_pairs(model, t1, x1, t2, x2, quad)
    delta = np.sqrt(dsq)
    r_tau = tau / delta
    r_m = np.abs(1.0 - m) / delta
    # tau^2 = sigma_t^2 (1 - rho^2) computed the other way round
    tau_alt2 = vt - cst**2 / vs
    ident_tau = np.max(np.abs(tau**2 - tau_alt2) / vt)
    # sigma_t^2 sigma_s^2 - sigma_st^2 against the product form in delta
    ss, st = np.sqrt(vs), np.sqrt(vt)
    lhs = vt * vs - cst**2
    rhs = 0.25 * (dsq - (st - ss) ** 2) * ((st + ss) ** 2 - dsq)
    ident = np.max(np.abs(lhs - rhs) / (vs * vt))
    # variance regularity with exponent 1 + beta / (2 - beta)
    eta = model.beta / (2.0 - model.beta)
    r_c = np.abs(vt - vs) / delta ** (1.0 + eta)
    small = sep <= np.median(sep)
    med = np.median(r_tau)
    ok_tau = r_tau.min() > 0.01 * med and np.isfinite(r_tau.max())
    # an upper bound is credible when the ratio does not grow as pairs shrink
    ok_m = np.isfinite(r_m.max()) and r_m[small].max() <= 2.0 * r_m[~small].max()
    ok_c = np.isfinite(r_c.max()) and r_c[small].max() <= 2.0 * r_c[~small].max()
    ok = ok_tau and ok_m and ok_c and ident <= 1e-10 and ident_tau <= 1e-12
    ctx = _context(model)
    consts = [FittedConstant("regression-lower", float(r_tau.min()), ctx),
              FittedConstant("regression-upper", float(max(r_tau.max(), r_m.max())), ctx),
              FittedConstant("variance-regularity", float(r_c.max()), ctx, {"eta": eta})]
    return Report("regression_coeffs", bool(ok), consts,
                  {"tau_over_delta": [float(r_tau.min()), float(med), float(r_tau.max())],
                   "one_minus_m_over_delta_max": float(r_m.max()),
                   "identity_max_rel_error": float(ident), "tau_identity_max_error": float(ident_tau),
                   "strict_correlation_margin": float(np.min(1.0 - rho**2)),
                   "condition_c_ratio_max": float(r_c.max()), "n_pairs": int(n_pairs)})


# ------------------------------------------------------------- density bound

def bivariate_density(vs, vt, cst, z1, z2):
    """Joint density of (u(t,x), u(s,y)) at (z1, z2); product over components."""
    det = vt * vs - cst**2
    q = (vs * np.sum(z1**2, -1) - 2 * cst * np.sum(z1 * z2, -1) + vt * np.sum(z2**2, -1)) / det
    d = z1.shape[-1]
    return (2.0 * np.pi) ** (-d) * det ** (-d / 2.0) * np.exp(-0.5 * q)


def density_configs(model, N, n_z):
    """z2 on a deterministic low-discrepancy set in [-N, N]^d; z1 = z2 + scaled offset."""
    d = model.d
    primes = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29][:d]
    j = np.arange(1, n_z + 1)
    z2 = np.stack([_van_der_corput(j, p) for p in primes], axis=1) * 2 * N - N
    direction = np.stack([_van_der_corput(j, p) for p in primes[::-1]], axis=1) - 0.5
    direction /= np.maximum(np.linalg.norm(direction, axis=1, keepdims=True), 1e-12)
    w = np.linspace(0.0, 2.0, n_z)
    return z2, direction, w


def _van_der_corput(j, base):
    out = np.zeros(j.shape)
    f = 1.0 / base
    j = j.copy()
    while np.any(j > 0):
        out += f * (j % base)
        j //= base
        f /= base
    return out


def check_density_bound(model, n_pairs=20, n_z=20, N=1.0, quad=None):
    """Fit C and c in p <= C D^(-d(2-beta)/2) exp(-c |z1-z2|^2 / D^(2-beta))."""
    lo = 1e-2
    hi = min(1.0, model.T - model.t0)
    sep = np.geomspace(lo, hi, n_pairs)
    t1 = np.full(n_pairs, model.t0)
    x1 = np.zeros((n_pairs, model.k))
    t2 = t1 + 0.5 * sep
    x2 = x1.copy()
    x2[:, 0] = 0.5 * sep
    vs, _ = variance_array(t1, model, quad)
    vt, _ = variance_array(t2, model, quad)
    cst, _ = covariance_array(t1, x1, t2, x2, model, quad)
    z2, direction, w = density_configs(model, N, n_z)
    a = 2.0 - model.beta
    P, X, Dp = [], [], []
    for i in range(n_pairs):
        z1 = np.clip(z2 + (w * sep[i] ** (a / 2))[:, None] * direction, -N, N)
        p = bivariate_density(vs[i], vt[i], cst[i], z1, z2)
        P.append(p)
        X.append(np.sum((z1 - z2) ** 2, axis=1) / sep[i] ** a)
        Dp.append(np.full(n_z, sep[i] ** (-model.d * a / 2)))
    P, X, Dp = map(np.concatenate, (P, X, Dp))
    y = np.log(P / Dp)
    A = np.stack([np.ones_like(X), -X], axis=1)
    (logC, c), *_ = np.linalg.lstsq(A, y, rcond=None)
    ratio = P / (Dp * np.exp(-c * X))
    C = float(ratio.max())
    spread = float(ratio.max() / ratio.min())
    # marginal bounds over the time window and the z box
    tt = np.linspace(model.t0, model.T, 20)
    var, _ = variance_array(tt, model, quad)
    zz = np.stack([_van_der_corput(np.arange(1, 21), p) for p in [2, 3, 5, 7, 11, 13, 17, 19][:model.d]],
                  axis=1) * 2 * N - N
    marg = (2 * np.pi * var[:, None]) ** (-model.d / 2) * np.exp(-np.sum(zz**2, 1)[None, :] / (2 * var[:, None]))
    corner = (2 * np.pi * var) ** (-model.d / 2) * np.exp(-model.d * N**2 / (2 * var))
    lower = float(min(marg.min(), corner.min()))
    upper = float(((2 * np.pi * var.min()) ** (-model.d / 2)))
    ok = c > 0 and np.isfinite(C) and spread <= RATIO_BOUND and lower > 0 and np.isfinite(upper)
    ctx = _context(model)
    consts = [FittedConstant("density-prefactor", C, ctx), FittedConstant("density-decay", float(c), ctx),
              FittedConstant("marginal-lower", lower, ctx), FittedConstant("marginal-upper", upper, ctx)]
    return Report("density_bound", bool(ok), consts,
                  {"ratio_spread": spread, "fit_logC": float(logC), "grid": [n_pairs, n_z],
                   "marginal_max_on_grid": float(marg.max())})


# ------------------------------------------------------ kernel bound

def kernel_integral(a, alpha, gamma, m_dim=1):
    """int_I int_I |x-y|^-gamma exp(-a^2/|x-y|^alpha) over I = [0, 1]^m, m in {1, 2}."""
    if m_dim == 1:
        # difference density 2(1 - u) on [0, 1]
        f = lambda u: 2.0 * (1.0 - u) * u**-gamma * np.exp(-(a * a) / u**alpha)
        return scipy_quad(f, 0.0, 1.0, points=[min(a, 0.5)], limit=200, epsabs=0, epsrel=1e-10)[0]
    if m_dim == 2:
        # polar form over the difference square with density (1-|z1|)(1-|z2|)
        def radial(r):
            def ang(th):
                c, s = r * np.cos(th), r * np.sin(th)
                return max(0.0, 1 - c) * max(0.0, 1 - s)
            # kinks where r cos(th) or r sin(th) reaches 1
            lo, hi = (np.arccos(1 / r), np.arcsin(1 / r)) if r > 1 else (0.0, np.pi / 2)
            a_int = scipy_quad(ang, lo, hi, limit=200)[0] * 4 if hi > lo else 0.0
            return r ** (1 - gamma) * np.exp(-(a * a) / r**alpha) * a_int
        return scipy_quad(radial, 0.0, np.sqrt(2.0), points=[1.0], limit=200, epsrel=1e-9)[0]
    raise ParameterError("kernel integral implemented for m in {1, 2}")


def check_kernel_bound(alpha, gamma, m_dim=1, a_schedule=(0.4, 0.2, 0.1, 0.05), N=1.0):
    index = (2.0 / alpha) * (gamma - m_dim)
    spec = cap.RieszKernelSpec(gamma=index, log_constant_c=4.0 * N, domain_diameter=N)
    a = np.asarray(a_schedule, dtype=float)
    lhs = np.array([kernel_integral(v, alpha, gamma, m_dim) for v in a])
    K = cap.kernel(spec, a)
    ratio = lhs / K
    ok = bounded(ratio)
    regime = "negative" if index < 0 else ("zero" if index == 0 else "positive")
    return Report(f"kernel_bound[{regime}]", ok,
                  [FittedConstant("kernel-bound", float(ratio.max()), {"alpha": alpha, "gamma": gamma, "m": m_dim})],
                  {"a": a, "lhs": lhs, "kernel": K, "ratio": ratio, "index": index,
                   "spread": float(ratio.max() / ratio.min())})


# ------------------------------------------------------- sup increments

def check_sup_increments(model, eps_schedule=None, q_list=(1, 2), replicates=4000, seed=0,
                         refine=8, anchor_t=None, tol=0.15):
    """E sup over a box of side eps^(1/holder) of |v - v(corner)|^q against eps^q.

    holder = (2 - beta)/2.  The sup is a max over a (refine+1)^(k+1) sub-lattice,
    a lower bound of the continuum sup.
    """
    holder = model.holder_exponent
    eps = np.geomspace(0.02, 0.2, 5) if eps_schedule is None else np.asarray(eps_schedule, dtype=float)
    t_a = model.t0 + 0.5 * (model.T - model.t0) if anchor_t is None else anchor_t
    moments = {q: [] for q in q_list}
    for e in eps:
        side = e ** (1.0 / holder)
        g = build_grid(GridBox(t_a, t_a + side, [0.0] * model.k, [side] * model.k), refine + 1, refine + 1)
        cov = assemble_cov(g, model)
        u = sample_replicates(cov, model.d, seed, np.arange(replicates))
        inc = np.linalg.norm(u - u[:, :1, :], axis=2).max(axis=1)
        for q in q_list:
            moments[q].append(float(np.mean(inc**q)))
    slopes = {q: _slope(eps, moments[q])[0] for q in q_list}
    ok = all(abs(slopes[q] - q) <= tol for q in q_list)
    return Report("sup_increments", ok, [],
                  {"eps": eps, "moments": {str(q): v for q, v in moments.items()},
                   "slopes": {str(q): s for q, s in slopes.items()}, "refine": refine,
                   "replicates": replicates})


def check_holder(model, replicates=2000, seed=0, n=65, tol=0.05):
    """Hoelder exponent from mean-square lattice increments on refining lags."""
    g = build_grid(GridBox(model.t0, model.t0 + 0.5, [0.0] * model.k, [0.0] * model.k), n, 1)
    cov = assemble_cov(g, model)
    u = sample_replicates(cov, 1, seed, np.arange(replicates))[:, :, 0]
    lags = np.array([1, 2, 4, 8, 16])
    ms = [np.mean((u[:, lag:] - u[:, :-lag]) ** 2) for lag in lags]
    step = g.spacing()[0]
    slope = _slope(lags * step, ms)[0]
    est = slope / 2
    return Report("holder", abs(est - model.holder_exponent) <= tol, [],
                  {"estimate": est, "target": model.holder_exponent})


# ---------------------------------------------------------------- sandwich

def default_box(model):
    return GridBox(model.t0, model.T, [0.0] * model.k, [1.0] * model.k)


def check_sandwich(model, radii=(0.05, 0.1, 0.2, 0.4), replicates=10000, seed=0, box=None,
                   n_t=32, n_x=32, kappa=1.0, n_atoms=300, tol=0.3):
    """Capacity, Monte Carlo and Hausdorff log-log series over ball targets."""
    gamma = hitting_index(model.k, model.beta, model.d)
    if not 0 < gamma < model.d:
        raise ParameterError(f"index {gamma:.4g} outside (0, d) for the slope check")
    radii = np.asarray(radii, dtype=float)
    grid = build_grid(box or default_box(model), n_t, n_x)
    eta = cell_enlargement(grid, model, kappa)
    cov = assemble_cov(grid, model)
    targets = [Ball([0.0] * model.d, r) for r in radii]
    dist = min_distances(model, grid, targets, replicates, seed, cov=cov)
    raw = [estimate_from_hits(np.count_nonzero(dj <= 0.0), replicates, 0.0) for dj in dist]
    comp = [estimate_from_hits(np.count_nonzero(dj <= eta), replicates, eta) for dj in dist]
    caps = []
    for A in targets:
        caps.append(cap.estimate_capacity(A, cap.RieszKernelSpec.for_set(gamma, A), n_atoms=n_atoms).value)
    eps = np.geomspace(radii.max(), radii.min() / 2, 5)
    hs = [haus.estimate_hausdorff(A, gamma, eps).value for A in targets]
    p = np.array([e.p_hat for e in comp])
    caps, hs = np.array(caps), np.array(hs)
    if np.any(p <= 0):
        return Report("sandwich", False, [], {"reason": "no hits at some radius", "p_hat": p, "eta": eta})
    s_mc, s_cap, s_h = _slope(radii, p)[0], _slope(radii, caps)[0], _slope(radii, hs)[0]
    slopes = {"mc": s_mc, "capacity": s_cap, "hausdorff": s_h}
    pair = max(abs(s_mc - s_cap), abs(s_mc - s_h), abs(s_cap - s_h))
    lower = float(np.min(p / caps))
    upper = float(np.max(p / hs))
    between = bool(np.all(lower * caps <= p * (1 + 1e-12)) and np.all(p <= upper * hs * (1 + 1e-12)))
    ok = (pair <= tol and all(abs(s - gamma) <= tol for s in slopes.values())
          and lower > 0 and np.isfinite(upper) and between
          and bounded(p / caps) and bounded(p / hs))
    ctx = _context(model)
    consts = [FittedConstant("sandwich-lower", lower, ctx), FittedConstant("sandwich-upper", upper, ctx)]
    return Report("sandwich", bool(ok), consts,
                  {"index": gamma, "radii": radii, "eta": eta, "slopes": slopes, "max_pair_diff": pair,
                   "p_hat": p, "ci": [[e.ci_low, e.ci_high] for e in comp],
                   "hits": [e.hits for e in comp], "p_hat_eta0": [e.p_hat for e in raw],
                   "capacity": caps, "hausdorff": hs, "grid_points": grid.n,
                   "jitter": cov.jitter_applied})


def check_polarity(model, radii=(0.04, 0.02, 0.01), replicates=10000, seed=0, box=None,
                   n_t=32, n_x=32, kappa=1.0, floor=0.05, polar_max=0.01, cov=None):
    """Small-ball hitting: stays away from 0 below the critical dimension, vanishes above it."""
    crit = float(hitting_exponents(model.k, model.beta)["full"])
    radii = np.sort(np.asarray(radii, dtype=float))[::-1]
    grid = build_grid(box or default_box(model), n_t, n_x)
    eta = cell_enlargement(grid, model, kappa)
    cov = cov or assemble_cov(grid, model)
    targets = [Ball([0.0] * model.d, r) for r in radii]
    dist = min_distances(model, grid, targets, replicates, seed, cov=cov)
    comp = [estimate_from_hits(np.count_nonzero(dj <= eta), replicates, eta) for dj in dist]
    raw = [estimate_from_hits(np.count_nonzero(dj <= 0.0), replicates, 0.0) for dj in dist]
    p = np.array([e.p_hat for e in comp])
    if model.d < crit:
        regime = "not_polar"
        ok = bool(p.min() >= floor and p[-1] >= 0.5 * p[0])
    elif model.d > crit:
        regime = "polar"
        ok = bool(p[-1] < polar_max)
    else:
        regime = "critical"
        ok = True
    return Report(f"polarity[d={model.d}]", ok, [],
                  {"regime": regime, "critical_dimension": crit, "radii": radii, "eta": eta,
                   "p_hat": p, "p_hat_eta0": [e.p_hat for e in raw],
                   "ci": [[e.ci_low, e.ci_high] for e in comp], "floor": floor})


# ---------------------------------------------------------------- battery

CHECKS = {
    "exponents": lambda seed: [check_exponents()],
    "metric": lambda seed: [check_metric_scaling(ModelParams(k, b, 1, 0.5, 2.0))
                            for k, b in ((1, 0.5), (2, 0.5), (3, 1.0))],
    "variance": lambda seed: [check_variance_bounds(ModelParams(1, 0.5, 1, 0.1, 2.0))],
    "regression": lambda seed: [check_regression_coeffs(ModelParams(1, 0.5, 1, 0.5, 2.0), seed=seed)],
    "density": lambda seed: [check_density_bound(ModelParams(1, 0.5, 2, 0.5, 2.0))],
    "kernel_bound": lambda seed: [check_kernel_bound(1.0, g) for g in (0.5, 1.0, 1.5)],
    "sup_increments": lambda seed: [check_sup_increments(ModelParams(1, 0.5, 1, 0.5, 2.0), seed=seed)],
    "sandwich": lambda seed: [check_sandwich(ModelParams(1, 0.5, 4, 1.0, 2.0), seed=seed)],
    "polarity": lambda seed: [check_polarity(ModelParams(1, 0.5, d, 1.0, 2.0), seed=seed) for d in (2, 8)],
}


def run_battery(names=None, seed=0):
    names = list(CHECKS) if not names else names
    reports = []
    for name in names:
        if name not in CHECKS:
            raise ParameterError(f"unknown check {name!r}; choose from {', '.join(CHECKS)}")
        reports += CHECKS[name](seed)
    return reports

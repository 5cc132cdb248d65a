"""Cone-restricted invertibility factors of a quadratic form.

All quantities here are infima of scale-invariant ratios over the
restricted cone: the compatibility constant, the l2 restricted
eigenvalue, the simple invertibility factor F0 for the seminorms
phi_q(b) = |b|_q / |S|^{1/q} and phi_{1,S}(b) = |b_S|_1 / |S|, the
two-norm factor F2, and the curvature lower bounds for GLM losses.

Strategy. At desk scale (p <= enumeration_cap) the cone is split by
the sign pattern of b_S. Fixing the pattern and normalizing
|b_S|_1 = 1 makes the feasible set a compact convex polytope (the
off-support block enters only through its weighted l1 norm, so its
signs never need enumerating). The compatibility-type programs are
then convex QPs, solved to optimizer precision; the ratio-type
objectives (restricted eigenvalue, F2, phi_q) are minimized per
pattern by sequential quadratic programming from several structured
starts. phi_1 makes the denominator piecewise linear, so for q == 1
the full sign vector is enumerated instead. Beyond the cap, a
multistart projected search on the sphere is used and the result is
flagged as a non-certified upper bound on the infimum.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from ..exceptions import DomainError
from ..families import Dataset, GlmFamily, hessian_matrix
from .cones import ConeSpec

__all__ = [
    "InvertibilityReport",
    "compatibility_constant",
    "restricted_eigenvalue",
    "simple_gif",
    "f2_factor",
    "glm_gif_lower_bounds",
    "invertibility_report",
]

_PATTERN_CAP = 512  # max sign patterns enumerated before falling back to search


def _check_sigma(sigma: np.ndarray) -> np.ndarray:
    sigma = np.asarray(sigma, dtype=float)
    if sigma.ndim != 2 or sigma.shape[0] != sigma.shape[1]:
        raise DomainError("sigma must be a square matrix")
    if not np.allclose(sigma, sigma.T, atol=1e-10, rtol=1e-10):
        raise DomainError("sigma must be symmetric")
    return 0.5 * (sigma + sigma.T)


# ---------------------------------------------------------------------------
# sign-pattern enumeration
# ---------------------------------------------------------------------------


def _sign_patterns(k: int):
    """All sign vectors in {-1,+1}^k with the first entry fixed to +1."""
    if k == 1:
        yield np.array([1.0])
        return
    for mask in range(2 ** (k - 1)):
        sgn = np.ones(k)
        for i in range(k - 1):
            if (mask >> i) & 1:
                sgn[i + 1] = -1.0
        yield sgn


def _pattern_map(p, support, comp, sgn):
    """Matrix M with b = M @ (a, u, v): b_S = sgn*a, b_{S^c} = u - v."""
    ns, nc = support.size, comp.size
    m = np.zeros((p, ns + 2 * nc))
    m[support, np.arange(ns)] = sgn
    if nc:
        m[comp, ns + np.arange(nc)] = 1.0
        m[comp, ns + nc + np.arange(nc)] = -1.0
    return m


def _pattern_constraints(ns, nc, xi, w_comp):
    eq_jac = np.concatenate([np.ones(ns), np.zeros(2 * nc)])
    cons = [
        {
            "type": "eq",
            "fun": lambda x: float(np.sum(x[:ns]) - 1.0),
            "jac": lambda x: eq_jac,
        }
    ]
    if nc:
        ineq_jac = np.concatenate([np.zeros(ns), -w_comp, -w_comp])
        cons.append(
            {
                "type": "ineq",
                "fun": lambda x: float(xi - w_comp @ (x[ns : ns + nc] + x[ns + nc :])),
                "jac": lambda x: ineq_jac,
            }
        )
    return cons


def _sanitize_pattern_point(x, ns, nc, xi, w_comp):
    """Clip a solver iterate back into the polytope (keeps values honest)."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, None)
    total = float(np.sum(x[:ns]))
    if total <= 0.0:
        return None
    x[:ns] /= total
    if nc:
        used = float(w_comp @ (x[ns : ns + nc] + x[ns + nc :]))
        if used > xi and used > 0:
            x[ns:] *= xi / used
    return x


def _pattern_starts(ns, nc, xi, rng, n_random, qp_point=None, eigen_dir=None, sgn=None):
    starts = []
    base = np.zeros(ns + 2 * nc)
    base[:ns] = 1.0 / ns
    starts.append(base)
    for i in range(ns):
        v = np.zeros(ns + 2 * nc)
        v[i] = 1.0
        starts.append(v)
    if qp_point is not None:
        starts.append(qp_point)
    if eigen_dir is not None and sgn is not None:
        es = np.where(sgn * eigen_dir[:ns] > 0, sgn * eigen_dir[:ns], 0.0)
        tot = float(np.sum(es))
        if tot > 1e-12:
            v = np.zeros(ns + 2 * nc)
            v[:ns] = es / tot
            if nc:
                bc = eigen_dir[ns:] / tot
                budget = float(np.sum(np.abs(bc)))
                if budget > xi:
                    bc *= xi / max(budget, 1e-300)
                v[ns : ns + nc] = np.maximum(bc, 0.0)
                v[ns + nc :] = np.maximum(-bc, 0.0)
            starts.append(v)
    for _ in range(n_random):
        v = np.zeros(ns + 2 * nc)
        v[:ns] = rng.dirichlet(np.ones(ns))
        if nc:
            direction = rng.standard_normal(nc)
            used = float(np.sum(np.abs(direction)))
            if used > 0:
                bc = direction * (rng.uniform(0.0, 1.0) * xi / used)
                v[ns : ns + nc] = np.maximum(bc, 0.0)
                v[ns + nc :] = np.maximum(-bc, 0.0)
        starts.append(v)
    return starts


def _minimize_pattern(fun, jac, x0, cons, dim):
    bounds = [(0.0, None)] * dim
    return minimize(
        fun,
        x0,
        jac=jac,
        method="SLSQP",
        bounds=bounds,
        constraints=cons,
        options={"maxiter": 200, "ftol": 1e-14},
    )


def _enumerate_min(sigma, cone, ratio, n_random=4, seed=0):
    """Min over sign patterns of b_S of the normalized objective.

    ``ratio`` maps b (with |b_S|_1 = 1 in-pattern) to the objective; the
    quadratic numerator is handled through the pattern Gram matrix. For
    ratio=None the plain QP value min b' Sigma b is returned.
    """
    p = sigma.shape[0]
    support, comp = cone.indices(p)
    w = cone.resolved_w(p)
    w_comp = w[comp]
    ns, nc = support.size, comp.size
    rng = np.random.Generator(np.random.Philox(key=seed))

    eigvals, eigvecs = np.linalg.eigh(sigma)
    emin = eigvecs[:, 0]
    eigen_dir = np.concatenate([emin[support], emin[comp]])

    best = math.inf
    cons = _pattern_constraints(ns, nc, cone.xi, w_comp)
    for sgn in _sign_patterns(ns):
        m = _pattern_map(p, support, comp, sgn)
        q_tilde = m.T @ sigma @ m
        dim = q_tilde.shape[0]

        def quad(x):
            return float(x @ q_tilde @ x)

        def quad_jac(x):
            return 2.0 * (q_tilde @ x)

        # convex QP for the compatibility-type value; also seeds the ratios
        qp_best = math.inf
        qp_point = None
        for x0 in _pattern_starts(ns, nc, cone.xi, rng, 2, eigen_dir=eigen_dir, sgn=sgn):
            res = _minimize_pattern(quad, quad_jac, x0, cons, dim)
            x = _sanitize_pattern_point(res.x, ns, nc, cone.xi, w_comp)
            if x is None:
                continue
            val = quad(x)
            if val < qp_best:
                qp_best, qp_point = val, x

        if ratio is None:
            best = min(best, qp_best)
            continue

        def fun(x):
            return ratio(m @ x)[0]

        def jac(x):
            return m.T @ ratio(m @ x)[1]

        for x0 in _pattern_starts(
            ns, nc, cone.xi, rng, n_random, qp_point=qp_point,
            eigen_dir=eigen_dir, sgn=sgn,
        ):
            res = _minimize_pattern(fun, jac, x0, cons, dim)
            x = _sanitize_pattern_point(res.x, ns, nc, cone.xi, w_comp)
            if x is None:
                continue
            best = min(best, fun(x))
    return best


def _enumerate_min_full_signs(sigma, cone, ratio_linear_den, seed=0):
    """q = 1 route: enumerate the full sign vector so the denominator is linear."""
    p = sigma.shape[0]
    support, comp = cone.indices(p)
    w = cone.resolved_w(p)
    w_comp = w[comp]
    ns, nc = support.size, comp.size
    rng = np.random.Generator(np.random.Philox(key=seed))

    best = math.inf
    cons_dim = ns + nc
    for sgn_all in _sign_patterns(p):
        sgn_s = sgn_all[:ns]
        sgn_c = sgn_all[ns:]
        # b_S = sgn_s * a, b_{S^c} = sgn_c * c with a, c >= 0
        m = np.zeros((p, cons_dim))
        m[support, np.arange(ns)] = sgn_s
        if nc:
            m[comp, ns + np.arange(nc)] = sgn_c
        q_tilde = m.T @ sigma @ m
        eq_jac = np.concatenate([np.ones(ns), np.zeros(nc)])
        cons = [
            {"type": "eq", "fun": lambda x: float(np.sum(x[:ns]) - 1.0),
             "jac": lambda x: eq_jac},
        ]
        if nc:
            ineq_jac = np.concatenate([np.zeros(ns), -w_comp])
            cons.append(
                {"type": "ineq",
                 "fun": lambda x: float(cone.xi - w_comp @ x[ns:]),
                 "jac": lambda x: ineq_jac}
            )

        def fun(x):
            return ratio_linear_den(m @ x, q_tilde, x)[0]

        def jac(x):
            gb, gx = ratio_linear_den(m @ x, q_tilde, x)[1:]
            return m.T @ gb + gx

        starts = []
        base = np.zeros(cons_dim)
        base[:ns] = 1.0 / ns
        starts.append(base)
        for i in range(ns):
            v = np.zeros(cons_dim)
            v[i] = 1.0
            starts.append(v)
        for _ in range(2):
            v = np.zeros(cons_dim)
            v[:ns] = rng.dirichlet(np.ones(ns))
            if nc:
                c = rng.random(nc)
                used = float(w_comp @ c)
                if used > 0:
                    v[ns:] = c * (rng.uniform(0.0, 1.0) * cone.xi / used)
            starts.append(v)

        for x0 in starts:
            res = minimize(
                fun, x0, jac=jac, method="SLSQP",
                bounds=[(0.0, None)] * cons_dim, constraints=cons,
                options={"maxiter": 200, "ftol": 1e-14},
            )
            x = np.clip(res.x, 0.0, None)
            tot = float(np.sum(x[:ns]))
            if tot <= 0:
                continue
            x[:ns] /= tot
            if nc:
                used = float(w_comp @ x[ns:])
                if used > cone.xi and used > 0:
                    x[ns:] *= cone.xi / used
            best = min(best, fun(x))
    return best


# ---------------------------------------------------------------------------
# multistart projected search (beyond the enumeration cap)
# ---------------------------------------------------------------------------


def _retract(b, support, comp, xi, w):
    b = np.asarray(b, dtype=float).copy()
    s1 = float(np.sum(np.abs(b[support])))
    if s1 < 1e-14 * max(1.0, float(np.linalg.norm(b))):
        b[support] = 1.0 / support.size
        s1 = 1.0
    if comp.size:
        used = float(np.sum(w[comp] * np.abs(b[comp])))
        if used > xi * s1 and used > 0:
            b[comp] *= xi * s1 / used
    nrm = float(np.linalg.norm(b))
    return b / nrm if nrm > 0 else b


def cone_search_min(fun_grad, p, cone: ConeSpec, restarts=64, iters=300, seed=0,
                    extra_starts=()):
    """Multistart projected descent over the cone; returns an upper bound.

    ``fun_grad(b)`` must return (value, euclidean gradient); iterates are
    retracted to the cone and renormalized after every step, so the
    objective only ever needs to be meaningful on the unit sphere.
    """
    support, comp = cone.indices(p)
    w = cone.resolved_w(p)
    rng = np.random.Generator(np.random.Philox(key=seed))
    best = math.inf
    starts = [np.asarray(s, dtype=float) for s in extra_starts]
    while len(starts) < restarts:
        starts.append(rng.standard_normal(p))
    for b0 in starts:
        b = _retract(b0, support, comp, cone.xi, w)
        val, grad = fun_grad(b)
        step = 0.2
        for _ in range(iters):
            tangent = grad - float(grad @ b) * b
            gn = float(np.linalg.norm(tangent))
            if not math.isfinite(val):
                break
            if gn < 1e-14:
                break
            cand = _retract(b - step * tangent / gn, support, comp, cone.xi, w)
            cval, cgrad = fun_grad(cand)
            if cval < val - 1e-14 * (1.0 + abs(val)):
                b, val, grad = cand, cval, cgrad
                step = min(step * 1.4, 1.0)
            else:
                step *= 0.5
                if step < 1e-10:
                    break
        if val < best:
            best = val
    return best


# ---------------------------------------------------------------------------
# ratio objectives
# ---------------------------------------------------------------------------


def _make_ratio(sigma, support, kind, q=None, s_size=None):
    """Objective b -> (value, gradient) with |b_S|_1 treated exactly.

    Used both per-pattern (where |b_S|_1 = 1) and in search mode (where
    the ratio must be fully scale-invariant), so every denominator is
    written out in b.
    """
    s_mask = np.zeros(sigma.shape[0], dtype=bool)
    s_mask[support] = True

    def value_grad(b):
        sb = sigma @ b
        num = float(b @ sb)
        gnum = 2.0 * sb
        if kind == "re_sq":
            den = float(b @ b)
            gden = 2.0 * b
        elif kind == "f2":
            ns2 = float(np.linalg.norm(b[s_mask]))
            n2 = float(np.linalg.norm(b))
            den = ns2 * n2
            gden = np.where(s_mask, b * (n2 / max(ns2, 1e-300)), 0.0) + b * (
                ns2 / max(n2, 1e-300)
            )
        elif kind == "kappa_sq":
            s1 = float(np.sum(np.abs(b[s_mask])))
            den = s1 * s1 / s_size
            gden = np.where(s_mask, np.sign(b), 0.0) * (2.0 * s1 / s_size)
        elif kind == "f0_q":
            s1 = float(np.sum(np.abs(b[s_mask])))
            nq = float(np.sum(np.abs(b) ** q) ** (1.0 / q))
            den = s1 * nq / s_size ** (1.0 / q)
            dq = np.sign(b) * np.abs(b) ** (q - 1.0) * nq ** (1.0 - q)
            gden = (
                np.where(s_mask, np.sign(b), 0.0) * nq + s1 * dq
            ) / s_size ** (1.0 / q)
        else:
            raise DomainError(f"unknown ratio kind {kind!r}")
        if den <= 0:
            return math.inf, np.zeros_like(b)
        val = num / den
        grad = gnum / den - val * gden / den
        return val, grad

    return value_grad


def _factor_infimum(sigma, cone, kind, q=None, enumeration_cap=12, restarts=64, seed=0):
    """Shared driver returning (infimum value, certified flag)."""
    sigma = _check_sigma(sigma)
    p = sigma.shape[0]
    support, _ = cone.indices(p)
    ns = support.size
    s_size = ns

    enumerate_ok = p <= enumeration_cap and 2 ** (ns - 1) <= _PATTERN_CAP
    if kind == "f0_q" and q == 1:
        enumerate_ok = enumerate_ok and 2 ** (p - 1) <= 2 * _PATTERN_CAP

    if enumerate_ok:
        if kind == "kappa_sq":
            qp = _enumerate_min(sigma, cone, ratio=None, seed=seed)
            return s_size * qp, True
        if kind == "f0_q" and q == 1:
            def ratio_lin(b, q_tilde, x):
                num = float(b @ (sigma @ b))
                gb = 2.0 * (sigma @ b)
                den = float(np.sum(np.abs(b))) / s_size  # |b_S|_1 = 1 in-pattern
                gden_b = np.sign(b) / s_size
                val = num / den
                return val, gb / den - val * gden_b / den, np.zeros_like(x)

            return _enumerate_min_full_signs(sigma, cone, ratio_lin, seed=seed), True
        ratio = _make_ratio(sigma, support, kind, q=q, s_size=s_size)
        val = _enumerate_min(sigma, cone, ratio=ratio, seed=seed)
        return val, True

    ratio = _make_ratio(sigma, support, kind, q=q, s_size=s_size)
    val = cone_search_min(ratio, p, cone, restarts=restarts, seed=seed)
    return val, False


def compatibility_constant(sigma, cone: ConeSpec, enumeration_cap=12, restarts=64,
                           seed=0) -> tuple[float, bool]:
    """kappa_*(xi, S) = inf sqrt(|S| b'Sigma b) / |b_S|_1 over the cone."""
    val_sq, certified = _factor_infimum(
        sigma, cone, "kappa_sq", enumeration_cap=enumeration_cap,
        restarts=restarts, seed=seed,
    )
    return math.sqrt(max(val_sq, 0.0)), certified


def restricted_eigenvalue(sigma, cone: ConeSpec, enumeration_cap=12, restarts=64,
                          seed=0) -> tuple[float, bool]:
    """RE_2(xi, S) = inf sqrt(b'Sigma b) / |b|_2 over the cone."""
    val_sq, certified = _factor_infimum(
        sigma, cone, "re_sq", enumeration_cap=enumeration_cap,
        restarts=restarts, seed=seed,
    )
    return math.sqrt(max(val_sq, 0.0)), certified


def f2_factor(sigma, cone: ConeSpec, enumeration_cap=12, restarts=64,
              seed=0) -> tuple[float, bool]:
    """F2(xi, S) = inf b'Sigma b / (|b_S|_2 |b|_2) over the cone."""
    return _factor_infimum(
        sigma, cone, "f2", enumeration_cap=enumeration_cap, restarts=restarts, seed=seed
    )


def simple_gif(sigma, cone: ConeSpec, phi, enumeration_cap=12, restarts=64,
               seed=0) -> tuple[float, bool]:
    """F0(xi, S; phi) = inf b'Sigma b / (|b_S|_1 phi(b)) over the cone.

    ``phi`` is ('phi_q', q) with q >= 1 for |b|_q / |S|^{1/q}, or
    ('phi_1S',) for |b_S|_1 / |S|; the latter equals the squared
    compatibility constant and shares its computation.
    """
    if phi[0] == "phi_1S":
        val_sq, certified = _factor_infimum(
            sigma, cone, "kappa_sq", enumeration_cap=enumeration_cap,
            restarts=restarts, seed=seed,
        )
        return val_sq, certified
    if phi[0] != "phi_q":
        raise DomainError(f"unknown phi descriptor {phi!r}")
    q = float(phi[1])
    if q < 1:
        raise DomainError("phi_q requires q >= 1")
    return _factor_infimum(
        sigma, cone, "f0_q", q=q, enumeration_cap=enumeration_cap,
        restarts=restarts, seed=seed,
    )


# ---------------------------------------------------------------------------
# GLM curvature lower bounds
# ---------------------------------------------------------------------------


def glm_gif_lower_bounds(data: Dataset, family: GlmFamily, beta_star, cone: ConeSpec,
                         m2: float, restarts=64, iters=300,
                         seed=0) -> tuple[float, float, float]:
    """Curvature lower bounds for the GLM loss around beta_star.

    Returns (f_star, f_lower, m3): the clipped-quadratic factor on the
    unit sphere, the cubic-ratio factor, and the cone-wide bound
    m3 = m1 (max|X_S| + xi max|X_{S^c} W^{-1}|) on the sup-norm modulus.
    Both infima come from multistart projected search and are upper
    bounds on the truth, never certified. For the quadratic loss
    (m1 = 0) the clipping disappears and f_lower is infinite.
    """
    if not m2 > 0:
        raise DomainError("m2 must be positive")
    beta_star = np.asarray(beta_star, dtype=float).ravel()
    p = data.p
    n = data.n
    support, comp = cone.indices(p)
    w = cone.resolved_w(p)
    theta = data.x @ beta_star
    curv = family.psi0_ddot(theta)
    m1 = family.m1
    x = data.x
    s_mask = np.zeros(p, dtype=bool)
    s_mask[support] = True

    thresh = math.inf if m1 == 0 else m2 / m1

    def f_star_fun(b):
        t = x @ b
        s1 = float(np.sum(np.abs(b[s_mask])))
        if s1 <= 0:
            return math.inf, np.zeros(p)
        at = np.abs(t)
        clipped = at >= thresh
        terms = np.where(clipped, (m2 / m1) * at if m1 > 0 else 0.0, t * t)
        num = float(curv @ terms)
        dterms = np.where(clipped, (m2 / m1) * np.sign(t) if m1 > 0 else 0.0, 2.0 * t)
        gnum = x.T @ (curv * dterms)
        den = n * s1 * m2
        gden = n * m2 * np.where(s_mask, np.sign(b), 0.0)
        val = num / den
        return val, gnum / den - val * gden / den

    sigma_star = hessian_matrix(data, family, beta_star)
    eigvecs = np.linalg.eigh(sigma_star)[1]
    uniform = np.zeros(p)
    uniform[support] = 1.0
    extra = [eigvecs[:, 0], uniform]

    f_star = cone_search_min(
        f_star_fun, p, cone, restarts=restarts, iters=iters, seed=seed,
        extra_starts=extra,
    )

    if m1 == 0:
        f_lower = math.inf
    else:
        def f_lower_fun(b):
            t = x @ b
            s1 = float(np.sum(np.abs(b[s_mask])))
            quad = float(b @ (sigma_star @ b))
            cube = float(curv @ (np.abs(t) ** 3))
            if s1 <= 0 or cube <= 0:
                return math.inf, np.zeros(p)
            num = n * quad * quad
            den = m1 * s1 * cube
            gnum = n * 4.0 * quad * (sigma_star @ b)
            gden = m1 * (
                np.where(s_mask, np.sign(b), 0.0) * cube
                + s1 * (x.T @ (curv * 3.0 * t * np.abs(t)))
            )
            val = num / den
            return val, gnum / den - val * gden / den

        f_lower = cone_search_min(
            f_lower_fun, p, cone, restarts=restarts, iters=iters, seed=seed + 1,
            extra_starts=extra,
        )

    xs_inf = float(np.max(np.abs(x[:, support]))) if support.size else 0.0
    if comp.size:
        xc_inf = float(np.max(np.abs(x[:, comp]) / w[comp][None, :]))
    else:
        xc_inf = 0.0
    m3 = m1 * (xs_inf + cone.xi * xc_inf)
    return f_star, f_lower, m3


# ---------------------------------------------------------------------------
# aggregate report
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class InvertibilityReport:
    """All cone factors for one (Sigma, xi, S) triple."""

    kappa_star: float
    re2: float
    f2: float
    f0_by_phi: dict
    method: str
    certified_lower_bound: bool
    f_star_glm: float | None = None
    f_lower_glm: float | None = None
    m3: float | None = None


def invertibility_report(sigma, cone: ConeSpec, qs=(2.0,), enumeration_cap=12,
                         restarts=64, seed=0, glm=None) -> InvertibilityReport:
    """Compute every factor on a shared configuration.

    ``glm`` is an optional ``(data, family, beta_star, m2)`` tuple that
    adds the GLM curvature bounds to the report.
    """
    kappa, cert = compatibility_constant(
        sigma, cone, enumeration_cap=enumeration_cap, restarts=restarts, seed=seed
    )
    re2, _ = restricted_eigenvalue(
        sigma, cone, enumeration_cap=enumeration_cap, restarts=restarts, seed=seed
    )
    f2, _ = f2_factor(
        sigma, cone, enumeration_cap=enumeration_cap, restarts=restarts, seed=seed
    )
    f0 = {"phi_1S": simple_gif(sigma, cone, ("phi_1S",),
                               enumeration_cap=enumeration_cap,
                               restarts=restarts, seed=seed)[0]}
    for q in qs:
        f0[f"phi_q:{q:g}"] = simple_gif(
            sigma, cone, ("phi_q", q), enumeration_cap=enumeration_cap,
            restarts=restarts, seed=seed,
        )[0]
    f_star = f_lower = m3 = None
    if glm is not None:
        data, family, beta_star, m2 = glm
        f_star, f_lower, m3 = glm_gif_lower_bounds(
            data, family, beta_star, cone, m2, restarts=restarts, seed=seed
        )
    return InvertibilityReport(
        kappa_star=kappa,
        re2=re2,
        f2=f2,
        f0_by_phi=f0,
        method="exact_enumeration" if cert else "multistart_search",
        certified_lower_bound=cert,
        f_star_glm=f_star,
        f_lower_glm=f_lower,
        m3=m3,
    )

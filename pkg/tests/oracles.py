"""Independent reference implementations used only by the tests.

None of these call into the package's solver or factor machinery; they
recompute objectives and minimizers from scratch so agreement is a real
cross-check.
"""

import itertools

import numpy as np
from scipy.special import expit


def objective(x, y, kind, beta, lam, w):
    """Penalized objective computed directly from the family definition."""
    beta = np.asarray(beta, dtype=float)
    theta = x @ beta
    n = x.shape[0]
    if kind == "linear":
        smooth = float(np.sum(0.5 * theta**2)) / n
    elif kind == "logistic":
        smooth = float(np.sum(np.logaddexp(0.0, theta))) / n
    elif kind == "poisson":
        smooth = float(np.sum(np.exp(theta))) / n
    else:
        raise ValueError(kind)
    smooth -= float((x.T @ y / n) @ beta)
    return smooth + lam * float(np.sum(w * np.abs(beta)))


def mean_function(kind, theta):
    if kind == "linear":
        return theta
    if kind == "logistic":
        return expit(theta)
    return np.exp(theta)


def smooth_gradient(x, y, kind, beta):
    n = x.shape[0]
    return x.T @ (mean_function(kind, x @ beta) - y) / n


def ista(x, y, kind, lam, w, beta0, iters=12000, tol=1e-12):
    """Accelerated proximal gradient with backtracking and restarts.

    Independent of the package solver (full-gradient steps, momentum).
    """
    beta = np.asarray(beta0, dtype=float).copy()
    point = beta.copy()
    t_mom = 1.0
    step = 1.0
    n = x.shape[0]

    def smooth_value(b):
        theta = x @ b
        if kind == "linear":
            v = float(np.sum(0.5 * theta**2)) / n
        elif kind == "logistic":
            v = float(np.sum(np.logaddexp(0.0, theta))) / n
        else:
            v = float(np.sum(np.exp(theta))) / n
        return v - float((x.T @ y / n) @ b)

    for _ in range(iters):
        g = smooth_gradient(x, y, kind, point)
        fp = smooth_value(point)
        while True:
            cand = point - step * g
            cand = np.sign(cand) * np.maximum(np.abs(cand) - step * lam * w, 0.0)
            diff = cand - point
            fc = smooth_value(cand)
            quad = fp + float(g @ diff) + float(diff @ diff) / (2.0 * step)
            if fc <= quad + 1e-15:
                break
            step *= 0.5
            if step < 1e-18:
                return beta
        moved = float(np.max(np.abs(cand - beta)))
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_mom**2))
        momentum = (t_mom - 1.0) / t_next
        if float((point - cand) @ (cand - beta)) > 0:
            # restart when momentum points uphill
            point = cand.copy()
            t_next = 1.0
        else:
            point = cand + momentum * (cand - beta)
        beta = cand
        t_mom = t_next
        step = min(step * 1.2, 1e6)
        if moved < tol:
            break
    return beta


def grid_then_refine(x, y, kind, lam, w, bound, points=9):
    """Dense-grid seed followed by proximal-gradient refinement (p <= 3)."""
    p = x.shape[1]
    axes = [np.linspace(-bound, bound, points)] * p
    best = None
    best_val = np.inf
    for combo in itertools.product(*axes):
        beta = np.asarray(combo)
        val = objective(x, y, kind, beta, lam, w)
        if val < best_val:
            best_val = val
            best = beta
    return ista(x, y, kind, lam, w, best)


def symmetrized_kl_logistic(x, beta, beta_star):
    """Per-observation symmetrized KL sum for the Bernoulli model."""
    p1 = expit(x @ np.asarray(beta, dtype=float))
    p2 = expit(x @ np.asarray(beta_star, dtype=float))

    def kl(a, b):
        return a * np.log(a / b) + (1.0 - a) * np.log((1.0 - a) / (1.0 - b))

    return float(np.sum(kl(p2, p1) + kl(p1, p2))) / x.shape[0]


def cone_samples(p, support, xi, w, rng, count):
    """Random feasible unit vectors in the cone (for grid-style infima)."""
    support = np.asarray(support, dtype=int)
    mask = np.zeros(p, dtype=bool)
    mask[support] = True
    comp = np.flatnonzero(~mask)
    out = []
    for _ in range(count):
        b = rng.standard_normal(p)
        s1 = float(np.sum(np.abs(b[support])))
        if s1 <= 0:
            continue
        if comp.size:
            used = float(np.sum(w[comp] * np.abs(b[comp])))
            budget = rng.uniform(0.0, 1.0) * xi * s1
            if used > 0:
                b[comp] *= budget / used
        b /= np.linalg.norm(b)
        out.append(b)
    # support-only corners and mixed extremes sharpen the sample set
    for signs in itertools.product((-1.0, 1.0), repeat=min(len(support), 6)):
        b = np.zeros(p)
        b[support[: len(signs)]] = signs
        b /= np.linalg.norm(b)
        out.append(b)
    return out

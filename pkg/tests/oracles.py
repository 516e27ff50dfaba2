"""Independent reference implementations used to check the library."""
import math

import mpmath
import numpy as np
from scipy import integrate, stats
from scipy.optimize import linprog


def lp_extreme(values, p_hat, eps, direction="max"):
    """Optimise over {p in simplex, |p - p_hat|_1 <= eps} with an LP in
    variables (p, t), |p - p_hat| <= t, sum t <= eps."""
    m = len(values)
    sign = -1.0 if direction == "max" else 1.0
    c = np.concatenate([sign * np.asarray(values), np.zeros(m)])
    eye = np.eye(m)
    A_ub = np.block([[eye, -eye], [-eye, -eye], [np.zeros((1, m)), np.ones((1, m))]])
    b_ub = np.concatenate([p_hat, -np.asarray(p_hat), [eps]])
    A_eq = np.concatenate([np.ones(m), np.zeros(m)])[None, :]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0],
                  bounds=[(0, None)] * (2 * m), method="highs")
    assert res.status == 0
    return float(np.dot(res.x[:m], values))


def erfinv_oracle(x: float) -> float:
    """Newton iteration on math.erf (math.erfc in the tails, where it is
    better conditioned)."""
    if x == 0.0:
        return 0.0
    sign = math.copysign(1.0, x)
    a = abs(x)
    y = math.sqrt(-math.log((1.0 - a) * (1.0 + a))) if a > 0.5 else a
    for _ in range(100):
        if a > 0.5:
            err = -(math.erfc(y) - (1.0 - a))
        else:
            err = math.erf(y) - a
        deriv = 2.0 / math.sqrt(math.pi) * math.exp(-y * y)
        step = err / deriv
        y -= step
        if abs(step) < 1e-15 * max(1.0, y):
            break
    return sign * y


def quad_truncated_mean(spec) -> float:
    """Numerically integrate the mixture density over [lo, hi]."""
    def pdf(x):
        return sum(w * stats.norm.pdf(x, mu, sd) for w, mu, sd in spec.components)
    pts = [mu for _, mu, _ in spec.components if spec.lo < mu < spec.hi]
    mass = integrate.quad(pdf, spec.lo, spec.hi, points=pts, limit=200)[0]
    first = integrate.quad(lambda x: x * pdf(x), spec.lo, spec.hi, points=pts, limit=200)[0]
    return first / mass


def full_radius_oracle(L, n, delta):
    return mpmath.sqrt(mpmath.mpf(L) ** 2 * mpmath.log(2 / mpmath.mpf(delta)) / (2 * max(1, n)))


def subspace_radius_oracle(lengths, delta):
    n = len(lengths)
    total = mpmath.fsum(mpmath.mpf(x) ** 2 for x in lengths)
    return mpmath.sqrt(total * mpmath.log(2 / mpmath.mpf(delta)) / (2 * max(1, n) ** 2))


def transition_oracle(m, n, delta):
    val = mpmath.sqrt(2 * mpmath.log((mpmath.mpf(2) ** m - 2) / mpmath.mpf(delta)) / max(1, n))
    return min(val, 2)

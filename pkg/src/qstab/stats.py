"""Small statistics helpers: Wilson intervals and chi-square tests."""

from __future__ import annotations

import math


def wilson_interval(failures: int, trials: int, z: float = 1.959964) -> tuple[float, float]:
    """Wilson 95% score interval for a binomial proportion."""
    if trials <= 0:
        raise ValueError("trials must be positive")
    p = failures / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = (z / denom) * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials))
    return max(0.0, center - half), min(1.0, center + half)


def _gammp(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x)."""
    if x < 0 or a <= 0:
        raise ValueError("bad arguments")
    if x == 0:
        return 0.0
    if x < a + 1.0:
        # series expansion
        ap = a
        term = total = 1.0 / a
        for _ in range(500):
            ap += 1.0
            term *= x / ap
            total += term
            if abs(term) < abs(total) * 1e-15:
                break
        return total * math.exp(-x + a * math.log(x) - math.lgamma(a))
    # continued fraction for Q(a, x)
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 500):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    q = math.exp(-x + a * math.log(x) - math.lgamma(a)) * h
    return 1.0 - q


def chi2_sf(stat: float, df: int) -> float:
    """Survival function of the chi-square distribution."""
    if df <= 0:
        raise ValueError("df must be positive")
    if stat <= 0:
        return 1.0
    return max(0.0, 1.0 - _gammp(df / 2.0, stat / 2.0))


def two_sample_chisquare(counts1: dict, counts2: dict,
                         min_expected: float = 10.0) -> tuple[float, int, float]:
    """Homogeneity chi-square between two outcome histograms.

    Bins with small pooled counts are merged (rarest first) so expected
    counts stay above min_expected.  Returns (statistic, dof, p_value).
    """
    keys = sorted(set(counts1) | set(counts2))
    n1 = [float(counts1.get(k, 0)) for k in keys]
    n2 = [float(counts2.get(k, 0)) for k in keys]
    paired = sorted(zip(n1, n2), key=lambda ab: -(ab[0] + ab[1]))
    n1 = [a for a, _ in paired]
    n2 = [b for _, b in paired]
    while len(n1) > 2 and (n1[-1] + n2[-1]) < min_expected:
        n1[-2] += n1[-1]
        n2[-2] += n2[-1]
        n1.pop()
        n2.pop()
    t1, t2 = sum(n1), sum(n2)
    total = t1 + t2
    stat = 0.0
    for a, b in zip(n1, n2):
        p = (a + b) / total
        e1, e2 = t1 * p, t2 * p
        if e1 > 0:
            stat += (a - e1) ** 2 / e1
        if e2 > 0:
            stat += (b - e2) ** 2 / e2
    df = max(1, len(n1) - 1)
    return stat, df, chi2_sf(stat, df)


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    if len(xs) != len(ys) or len(xs) < 2:
        raise ValueError("need at least two points")
    lx = [math.log(x) for x in xs]
    ly = [math.log(y) for y in ys]
    mx = sum(lx) / len(lx)
    my = sum(ly) / len(ly)
    num = sum((a - mx) * (b - my) for a, b in zip(lx, ly))
    den = sum((a - mx) ** 2 for a in lx)
    return num / den

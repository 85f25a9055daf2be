"""Closed-form failure model: per-cycle syndrome error rate, majority
failure, error accumulation, and the resulting per-step failure curves.

Two P1 conventions are exposed: the literal tail sum over alpha^i and the
exact binomial tail with (1-alpha) factors.  Curves use the literal form.
Sums run smallest-term-first with exact integer binomials, so values are
dependable down to the 1e-12 scale the curves reach.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

TERM_CUTOFF = 1e-30


@dataclass(frozen=True)
class AnalysisPoint:
    gamma: float
    epsilon: float
    r: int
    alpha: float
    p1: float
    p2: float
    p: float

    def __post_init__(self):
        for name in ("gamma", "epsilon", "alpha", "p1", "p2", "p"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name}={v} outside [0, 1]")


@dataclass
class CurveConfig:
    n: int
    t: int
    gamma_min: float = 1e-6
    gamma_max: float = 1e-2
    points: int = 60
    step_gate_constant: int = 1      # the O(1) term in N = n(4r + c)
    r_max: int = 15
    epsilon_rule: str = "gamma/10n"  # or "fixed"
    epsilon_fixed: float = 0.0

    def __post_init__(self):
        if self.gamma_min <= 0 or self.gamma_max < self.gamma_min:
            raise ValueError("gamma grid must be positive and ascending")
        if self.step_gate_constant < 0:
            raise ValueError("step-gate constant must be nonnegative")
        if self.r_max < 3:
            raise ValueError("r_max must be at least 3")

    def epsilon_for(self, gamma: float) -> float:
        if self.epsilon_rule == "gamma/10n":
            return gamma / (10 * self.n)
        if self.epsilon_rule == "fixed":
            return self.epsilon_fixed
        raise ValueError(f"unknown epsilon rule {self.epsilon_rule!r}")

    def gammas(self) -> list[float]:
        lo, hi = math.log(self.gamma_min), math.log(self.gamma_max)
        if self.points == 1:
            return [self.gamma_min]
        return [
            math.exp(lo + (hi - lo) * i / (self.points - 1))
            for i in range(self.points)
        ]


def alpha(n: int, gamma: float, epsilon: float) -> float:
    """Per-cycle wrong-syndrome probability, exact product form:
    1 - [(1-gamma)(1-epsilon)^n]^(3n)."""
    if not (0 <= gamma <= 1 and 0 <= epsilon <= 1):
        raise ValueError("probabilities must lie in [0, 1]")
    good = (1.0 - gamma) * (1.0 - epsilon) ** n
    return 1.0 - good ** (3 * n)


def alpha_approx(n: int, gamma: float, epsilon: float) -> float:
    """Small-parameter form 3 n (gamma + n epsilon)."""
    return 3 * n * (gamma + n * epsilon)


def p1(r: int, a: float, exact: bool = False) -> float:
    """Probability that more than half of r syndromes are wrong.

    Literal form: sum_{i=(r+1)/2}^{r} C(r,i) a^i.  With exact=True the
    (1-a)^(r-i) binomial factors are included.
    """
    if r < 1 or r % 2 == 0:
        raise ValueError("r must be odd and positive")
    if not 0.0 <= a <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    total = 0.0
    for i in range((r + 1) // 2, r + 1):
        term = math.comb(r, i) * a**i
        if exact:
            term *= (1.0 - a) ** (r - i)
        total += term
    return min(total, 1.0)


def p2(n: int, t: int, r: int, c: int, q: float) -> float:
    """Probability that more than t errors accumulate over the step:
    sum_{i=t+1}^{N} C(N,i) q^i with N = n(4r + c) error opportunities."""
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    big_n = n * (4 * r + c)
    if t + 1 > big_n:
        return 0.0
    total = 0.0
    for i in range(t + 1, big_n + 1):
        term = math.comb(big_n, i) * q**i
        total += term
        if term < TERM_CUTOFF * total:
            break
    return min(total, 1.0)


def step_failure(n: int, t: int, r: int, c: int, gamma: float,
                 epsilon: float) -> tuple[float, float, float, float]:
    """(alpha, P1, P2, p) for one stabilized two-block step."""
    a = alpha(n, gamma, epsilon)
    q = gamma + n * epsilon
    v1 = p1(r, a)
    v2 = p2(n, t, r, c, min(q, 1.0))
    return a, v1, v2, min(4.0 * (v1 + v2), 1.0)


def choose_r(n: int, t: int, c: int, gamma: float, epsilon: float,
             r_max: int = 15) -> tuple[int, bool]:
    """Smallest odd r in [3, r_max] with P1 < P2; (r_max, True) if none."""
    if r_max < 3:
        raise ValueError("r_max must be at least 3")
    a = alpha(n, gamma, epsilon)
    q = min(gamma + n * epsilon, 1.0)
    for r in range(3, r_max + 1, 2):
        v1 = p1(r, a)
        if v1 < p2(n, t, r, c, q) or v1 == 0.0:
            return r, False
    return r_max if r_max % 2 else r_max - 1, True


def curve(config: CurveConfig) -> list[AnalysisPoint]:
    """One AnalysisPoint per gamma grid value; r chosen per point."""
    points = []
    for gamma in config.gammas():
        epsilon = config.epsilon_for(gamma)
        r, _ = choose_r(config.n, config.t, config.step_gate_constant,
                        gamma, epsilon, config.r_max)
        a, v1, v2, p = step_failure(config.n, config.t, r,
                                    config.step_gate_constant, gamma, epsilon)
        points.append(AnalysisPoint(gamma, epsilon, r, a, v1, v2, p))
    return points


def break_even(config: CurveConfig) -> float | None:
    """gamma* with p(gamma*) = gamma*, bisected to three significant
    figures; None if p - gamma does not change sign on the grid."""

    def excess(gamma: float) -> float:
        epsilon = config.epsilon_for(gamma)
        r, _ = choose_r(config.n, config.t, config.step_gate_constant,
                        gamma, epsilon, config.r_max)
        _, _, _, p = step_failure(config.n, config.t, r,
                                  config.step_gate_constant, gamma, epsilon)
        return p - gamma

    gammas = config.gammas()
    lo = hi = None
    prev_g, prev_e = gammas[0], excess(gammas[0])
    for g in gammas[1:]:
        e = excess(g)
        if prev_e == 0.0:
            return prev_g
        if (prev_e < 0) != (e < 0):
            lo, hi = prev_g, g
            break
        prev_g, prev_e = g, e
    if lo is None:
        return None
    while hi / lo > 1.0005:
        mid = math.sqrt(lo * hi)
        if (excess(lo) < 0) == (excess(mid) < 0):
            lo = mid
        else:
            hi = mid
    g = math.sqrt(lo * hi)
    digits = -int(math.floor(math.log10(abs(g)))) + 2
    return round(g, digits)


def steps_supported(p: float):
    """Longest computation (steps S with p < 1/S) a failure rate allows."""
    if p == 0:
        return None  # unbounded
    if not 0 < p <= 1:
        raise ValueError("p must lie in (0, 1]")
    return math.floor(1.0 / p)


def error_opportunities(circuit) -> int:
    """Per-cycle error-opportunity count of a synthesized schedule: one
    per gate or measurement, matching the serial time accounting."""
    return circuit.num_steps()


def opportunity_report(circuit, n: int, live_qubits: int) -> dict:
    """Contrast a schedule's actual exposure with the 3n analytic count."""
    steps = circuit.num_steps()
    return {
        "schedule_gates": steps,
        "idle_slots": steps * max(live_qubits - 2, 0),
        "analytic_gate_opportunities": 3 * n,
        "analytic_idle_opportunities": 3 * n * n,
    }


def curve_csv(points: list[AnalysisPoint], code_name: str) -> str:
    """CSV with 6-significant-digit decimal columns."""
    lines = ["code,gamma,epsilon,r,alpha,p1,p2,p"]
    for pt in points:
        lines.append(
            f"{code_name},{pt.gamma:.6g},{pt.epsilon:.6g},{pt.r},"
            f"{pt.alpha:.6g},{pt.p1:.6g},{pt.p2:.6g},{pt.p:.6g}"
        )
    return "\n".join(lines) + "\n"

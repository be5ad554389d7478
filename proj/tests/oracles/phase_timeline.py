"""Independent phase-timeline values for the S1/S2 desk scenarios.

Run: python3 tests/oracles/phase_timeline.py
The printed numbers are frozen in tests/test_predictor.cpp.
"""
import math

from scipy.integrate import solve_ivp
from scipy.optimize import brentq


def beta(drive, gamma, ds):
    x = 2.0 * drive / gamma
    return x + math.sqrt(x * x + ds * ds)


def two_robot(d_init, dg1, dg2, k1, k2, gamma, ds):
    off = dg1 + dg2 - d_init
    nominal = lambda t: dg1 * math.exp(-k1 * t) + dg2 * math.exp(-k2 * t) - off
    b1 = lambda t: beta(dg1 * k1 * math.exp(-k1 * t), gamma, ds)
    b2 = lambda t: beta(dg2 * k2 * math.exp(-k2 * t), gamma, ds)
    c1 = brentq(lambda t: nominal(t) - b1(t), 0.0, 50.0, xtol=1e-15, rtol=1e-15)
    c2 = brentq(lambda t: nominal(t) - b2(t), 0.0, 50.0, xtol=1e-15, rtol=1e-15)
    t1, lead = (c1, 1) if c1 <= c2 else (c2, 2)
    kf, gf = (k2, dg2) if lead == 1 else (k1, dg1)
    bl = b1 if lead == 1 else b2
    bf = b2 if lead == 1 else b1

    def rhs(t, y):
        d = y[0]
        return [-gamma * (d * d - ds * ds) / (4.0 * d) - kf * gf * math.exp(-kf * t)]

    def gap(t, y):
        return y[0] - bf(t)

    gap.terminal = True
    gap.direction = -1
    sol = solve_ivp(rhs, (t1, t1 + 50.0), [bl(t1)], method="DOP853", rtol=1e-13, atol=1e-15,
                    events=gap, dense_output=True)
    t2 = sol.t_events[0][0]
    d2 = sol.sol(t2)[0]
    return t1, lead, nominal(t1), t2, d2


def three_robot(d_init, dg, k, gamma, ds):
    s3 = math.sqrt(3.0)
    nominal = lambda t: (d_init - s3 * dg) + s3 * dg * math.exp(-k * t)
    b = lambda t: beta(0.5 * s3 * dg * k * math.exp(-k * t), gamma, ds)
    t1 = brentq(lambda t: nominal(t) - b(t), 0.0, 50.0, xtol=1e-15, rtol=1e-15)
    return t1, nominal(t1)


if __name__ == "__main__":
    t1, lead, d1, t2, d2 = two_robot(2.0, 3.0, 4.0, 0.25, 0.375, 5.0, 0.5)
    print(f"S1 t1={t1:.15g} lead={lead} D(t1)={d1:.15g} t2={t2:.15g} D(t2)={d2:.15g}")
    t1e, leade, d1e, t2e, d2e = two_robot(2.0, 3.0, 4.0, 0.25, 0.25, 5.0, 0.5)
    print(f"S1eq t1={t1e:.15g} lead={leade} D(t1)={d1e:.15g} t2={t2e:.15g} D(t2)={d2e:.15g}")
    t1s, d1s = three_robot(3.0, 3.0, 1.0, 5.0, 0.5)
    print(f"S2 t1={t1s:.15g} D(t1)={d1s:.15g}")

"""Regenerate ``frozen.json`` from high-precision reference evaluations.

Everything here is written directly from the closed-form copula
expressions in mpmath, independently of the compiled package code.
Run ``python3 tests/oracles/build_oracles.py`` to rebuild.
"""

import json
import pathlib

import mpmath as mp

mp.mp.dps = 40
OUT = pathlib.Path(__file__).with_name("frozen.json")


def frank_cdf(u, v, th):
    num = mp.expm1(-th * u) * mp.expm1(-th * v)
    return -mp.log(1 + num / mp.expm1(-th)) / th


def frank_logpdf(th, u, v):
    e = mp.exp
    den = (e(-th) - 1 + (e(-th * u) - 1) * (e(-th * v) - 1)) ** 2
    return mp.log(th * (1 - e(-th)) * e(-th * (u + v)) / den)


def clayton_logpdf(t, u, v):
    th = mp.exp(t)
    s = u ** -th + v ** -th - 1
    return mp.log(1 + th) - (1 + th) * (mp.log(u) + mp.log(v)) - (2 + 1 / th) * mp.log(s)


def frank_h(th, u, v):
    return mp.diff(lambda a: frank_cdf(a, v, th), u)


def clayton_h(th, u, v):
    return u ** (-th - 1) * (u ** -th + v ** -th - 1) ** (-1 / th - 1)


def derivs(f, t, u, v):
    return [f(t, u, v), mp.diff(lambda s: f(s, u, v), t),
            mp.diff(lambda s: f(s, u, v), t, 2)]


def build():
    out = {}
    # CDF at the reference point, by the closed form and by integrating
    # the density over [0, 0.4] x [0, 0.7]
    direct = frank_cdf(mp.mpf("0.4"), mp.mpf("0.7"), 8)
    with mp.workdps(20):
        integ = mp.quad(lambda a, b: mp.exp(frank_logpdf(8, a, b)),
                        [0, 0.4], [0, 0.7])
    out["frank_cdf_0.4_0.7_8"] = {"direct": float(direct), "integrated": float(integ)}

    pts = [(0.4, 0.7), (0.05, 0.93), (0.5, 0.5), (0.999, 0.002), (0.2, 0.25)]
    frank_thetas = [-35.0, -8.0, -0.5, -0.003, 0.004, 0.7, 8.0, 40.0]
    clayton_ts = [-3.0, -0.5, 0.0, 1.2, 2.5]
    rows = []
    for u, v in pts:
        uu, vv = mp.mpf(u), mp.mpf(v)
        for th in frank_thetas:
            rows.append(["frank", th, u, v] + [float(x) for x in derivs(frank_logpdf, mp.mpf(th), uu, vv)])
        for t in clayton_ts:
            rows.append(["clayton", t, u, v] + [float(x) for x in derivs(clayton_logpdf, mp.mpf(t), uu, vv)])
    out["ell"] = rows

    hrows = []
    for u, v in pts:
        for th in (-8.0, 0.5, 8.0, 40.0):
            hrows.append(["frank", th, u, v, float(frank_h(mp.mpf(th), mp.mpf(u), mp.mpf(v)))])
        for th in (0.3, 2.0, 12.0):
            hrows.append(["clayton", th, u, v, float(clayton_h(mp.mpf(th), mp.mpf(u), mp.mpf(v)))])
    out["conditional_cdf"] = hrows

    # Kendall's tau of Frank(8) from tau = 1 + 4 (D1(theta) - 1) / theta
    th = mp.mpf(8)
    d1 = mp.quad(lambda s: s / mp.expm1(s), [0, th]) / th
    out["frank_tau_8"] = float(1 + 4 * (d1 - 1) / th)

    # Kernel constants from the equivalent kernels written out by hand:
    # Epanechnikov p=0,1: K; p=2,3: (15/8)(1 - 7/3 t^2) K; Uniform p=0: 1/2
    def epa(t):
        return mp.mpf(3) / 4 * (1 - t * t) if abs(t) <= 1 else mp.mpf(0)

    def epa2(t):
        return mp.mpf(15) / 8 * (1 - mp.mpf(7) / 3 * t * t) * epa(t)

    def uni(t):
        return mp.mpf(1) / 2 if abs(t) <= 1 else mp.mpf(0)

    def constants(k):
        with mp.workdps(25):
            conv = lambda t: mp.quad(lambda s: k(s) * k(t - s),
                                     [max(-1, t - 1), min(1, t + 1)])
            ck = k(0) - mp.quad(lambda t: k(t) ** 2, [-1, 0, 1]) / 2
            nu = mp.quad(lambda t: (k(t) - conv(t) / 2) ** 2, [-2, -1, 0, 1, 2])
        return {"c_K": float(ck), "nu_integral": float(nu), "r_K": float(ck / nu)}

    out["kernel_constants"] = {
        "epanechnikov_0": constants(epa),
        "epanechnikov_2": constants(epa2),
        "uniform_0": constants(uni),
    }

    chis = []
    for x, dof in [(0.5, 0.3), (1.9247, 2.66), (13.58 * 2.115274, 3.92),
                   (40.0, 2.5), (3.0, 7.3), (0.01, 12.0), (150.0, 90.5)]:
        chis.append([x, dof, float(mp.gammainc(mp.mpf(dof) / 2, mp.mpf(x) / 2,
                                               mp.inf, regularized=True))])
    out["chisq_upper"] = chis
    return out


if __name__ == "__main__":
    OUT.write_text(json.dumps(build(), indent=1) + "\n")
    print(f"wrote {OUT}")

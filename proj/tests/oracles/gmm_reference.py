"""Independent reference values for the truncated-GMM experiment.

Route: tail expectation E[X | X > VaR] integrated against the density with
adaptive quadrature, which is independent of the quantile-integral path the
library uses. Run: python3 tests/oracles/gmm_reference.py
"""
import numpy as np
from scipy import integrate, optimize, stats

MEANS = np.array([0.2, -0.2, -0.5, 0.5, 0.0])
VARS = np.array([0.5, 0.2, 0.1, 0.1, 0.3])
W = np.array([0.6, 0.4, 0.1, 0.1, 0.8])
W = W / W.sum()
A, B = -1.0, 1.0
SD = np.sqrt(VARS)


def mix_cdf_raw(x):
    return float(np.sum(W * stats.norm.cdf((x - MEANS) / SD)))


def mix_pdf_raw(x):
    return float(np.sum(W * stats.norm.pdf((x - MEANS) / SD) / SD))


Z = mix_cdf_raw(B) - mix_cdf_raw(A)


def gmm_cdf(x):
    if x <= A:
        return 0.0
    if x >= B:
        return 1.0
    return (mix_cdf_raw(x) - mix_cdf_raw(A)) / Z


mu = float(np.sum(W * MEANS))
var = float(np.sum(W * (VARS + MEANS ** 2)) - mu ** 2)
nsd = np.sqrt(var)
nz = stats.norm.cdf((B - mu) / nsd) - stats.norm.cdf((A - mu) / nsd)


def norm_cdf(x):
    if x <= A:
        return 0.0
    if x >= B:
        return 1.0
    return (stats.norm.cdf((x - mu) / nsd) - stats.norm.cdf((A - mu) / nsd)) / nz


def tail_cvar(cdf, pdf, alpha):
    q = optimize.brentq(lambda x: cdf(x) - (1 - alpha), A, B, xtol=1e-15)
    val, _ = integrate.quad(lambda x: x * pdf(x), q, B, epsabs=1e-14, epsrel=1e-13, limit=200)
    return val / alpha


alpha = 0.2
print("moment-matched mu", repr(mu), "sigma2", repr(var))
print("gmm true cvar(0.2)", repr(tail_cvar(gmm_cdf, lambda x: mix_pdf_raw(x) / Z, alpha)))
npdf = lambda x: stats.norm.pdf((x - mu) / nsd) / nsd / nz
print("normal true cvar(0.2)", repr(tail_cvar(norm_cdf, npdf, alpha)))
# truncated N(0, 0.09) on [-1,1]
s = 0.3
tz = stats.norm.cdf(1 / s) - stats.norm.cdf(-1 / s)
tcdf = lambda x: 0.0 if x <= -1 else 1.0 if x >= 1 else (stats.norm.cdf(x / s) - stats.norm.cdf(-1 / s)) / tz
tpdf = lambda x: stats.norm.pdf(x / s) / s / tz
print("truncnorm(0,.09) cvar(0.2)", repr(tail_cvar(tcdf, tpdf, alpha)))

edges = np.linspace(A, B, 10001)
binned = max(abs(gmm_cdf(e) - norm_cdf(e)) for e in edges)
dense = np.linspace(A, B, 1_000_001)
Fg = (np.sum(W[:, None] * stats.norm.cdf((dense[None, :] - MEANS[:, None]) / SD[:, None]), axis=0) - mix_cdf_raw(A)) / Z
Fn = (stats.norm.cdf((dense - mu) / nsd) - stats.norm.cdf((A - mu) / nsd)) / nz
print("binned eps (1e4 bins)", repr(binned))
print("dense-scan eps (1e6 pts)", repr(float(np.max(np.abs(Fg - Fn)))))

# N(0,1) vs N(0.5,1) truncated to [-1,1]
z0 = stats.norm.cdf(1) - stats.norm.cdf(-1)
z1 = stats.norm.cdf(0.5) - stats.norm.cdf(-1.5)
F0 = (stats.norm.cdf(dense) - stats.norm.cdf(-1)) / z0
F1 = (stats.norm.cdf(dense - 0.5) - stats.norm.cdf(-1.5)) / z1
print("tn(0,1) vs tn(.5,1) dense eps", repr(float(np.max(np.abs(F0 - F1)))))

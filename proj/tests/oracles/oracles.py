"""Independent reference values for the C++ test suites.

Everything here is computed with scipy quadrature, brentq and dense grid
scans so that it shares no code path with the library. Run it to
regenerate the numbers frozen into tests/*.cpp.
"""
import numpy as np
from scipy import integrate, optimize

np.set_printoptions(precision=12)


def grid_max(f, lo, hi, n=200001):
    xs = np.linspace(lo, hi, n)
    vals = np.array([f(x) for x in xs])
    i = int(np.argmax(vals))
    a, b = xs[max(i - 1, 0)], xs[min(i + 1, n - 1)]
    r = optimize.minimize_scalar(lambda s: -f(s), bounds=(a, b), method="bounded",
                                 options={"xatol": 1e-13})
    return -r.fun, r.x


# --- M/D/1, lambda = 0.5: gamma = 0.5 (e^gamma - 1)
gw_md1 = optimize.brentq(lambda g: 0.5 * (np.exp(g) - 1) - g, 0.1, 5, xtol=1e-15)
print("M/D/1 gamma_w", repr(gw_md1))
print("M/D/1 gamma_p", repr(np.log(2) - 0.5))

# --- M/M/1 truncated busy period, lambda=0.5, y=1, by quadrature of the truncated MGF
def phi_trunc_exp(s, y, rate=1.0):
    body = integrate.quad(lambda x: np.exp(s * x) * rate * np.exp(-rate * x), 0, y,
                          epsabs=1e-15, epsrel=1e-14)[0]
    return body + np.exp(-rate * y)

def gp_trunc(lam, y):
    f = lambda s: s - lam * (phi_trunc_exp(s, y) - 1)
    # f is concave; coarse scan for a bracket then bounded refine
    hi = 1.0
    while f(2 * hi) > f(hi):
        hi *= 2
    return grid_max(f, 0, 2 * hi, 20001)

print("M/M/1 gamma_p^y, y=1", gp_trunc(0.5, 1.0))
print("M/M/1 gamma_p^y, y=2", gp_trunc(0.5, 2.0))
print("mean B*1(B<1)", 1 - 2 * np.exp(-1))

# --- atom model: A ~ Exp(1), B = U(0,0.5) w.p. 0.5, delta_1 w.p. 0.5
def phi_u(s, lo, hi):
    if abs(s) < 1e-12:
        return 1.0
    return (np.exp(s * hi) - np.exp(s * lo)) / (s * (hi - lo))

def phi_atom(s):
    return 0.5 * phi_u(s, 0, 0.5) + 0.5 * np.exp(s)

gw_atom = optimize.brentq(lambda g: (phi_atom(g) - 1) - g, 0.1, 5, xtol=1e-15)
lam1 = 0.5
f1 = lambda s: s - lam1 * (phi_u(s, 0, 0.5) - 1)
s1 = optimize.brentq(lambda s: 1 - lam1 * integrate.quad(lambda x: 2 * x * np.exp(s * x), 0, 0.5)[0], 0.01, 50)
gw2_atom = f1(gw_atom)
print("atom gamma_w", repr(gw_atom), " class-1 unconstrained opt", s1)
print("atom gamma_w2 (boundary)", repr(gw2_atom), " lambda2 formula", 0.5 * (np.exp(gw_atom) - 1))
dphi_b1 = integrate.quad(lambda x: 2 * x * np.exp(gw_atom * x), 0, 0.5)[0]
print("atom guard lambda1 Phi'_B1(gw)", dphi_b1 * lam1)
psi_atom = lambda s: phi_atom(s) - 1
gp_atom = grid_max(lambda s: s - psi_atom(s), 0, 5)
print("atom gamma_p", gp_atom)
print("atom a = 1 - Psi1'(gw)", 1 - lam1 * dphi_b1)

# --- Poisson example lambda=0.5, B = delta_0.5 / delta_1 half-half
phi2 = lambda s: 0.5 * np.exp(0.5 * s) + 0.5 * np.exp(s)
gw_2 = optimize.brentq(lambda g: 0.5 * (phi2(g) - 1) - g, 0.1, 10, xtol=1e-15)
print("two-atom gamma_w", repr(gw_2), " guard", 0.25 * 0.5 * np.exp(0.5 * gw_2),
      " gamma_v", repr(0.25 * (np.exp(gw_2) - 1)))

# --- thinned arrival MGF example
print("thinned D(1),p=.5,s=-1", 0.5 * np.exp(-1) / (1 - 0.5 * np.exp(-1)))

# --- y* for M/M/1 by bisection on quadrature-based gamma_p^y
def gw_mm1(lam):
    return 1 - lam

def ystar(lam):
    g = gw_mm1(lam)
    lo, hi = 0.05, 1.0
    while gp_trunc_fast(lam, hi) >= g:
        hi *= 2
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if gp_trunc_fast(lam, mid) >= g:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)

def phi_trunc_closed(s, y):
    # closed form used only as a faster check of the quadrature value below
    th = 1 - s
    if abs(th) < 1e-12:
        return y + np.exp(-y)
    return (1 - np.exp(-th * y)) / th + np.exp(-y)

def gp_trunc_fast(lam, y):
    f = lambda s: s - lam * (phi_trunc_closed(s, y) - 1)
    hi = 1.0
    while f(2 * hi) > f(hi):
        hi *= 2
    r = optimize.minimize_scalar(lambda s: -f(s), bounds=(0, 2 * hi), method="bounded",
                                 options={"xatol": 1e-12})
    return -r.fun

assert abs(gp_trunc_fast(0.5, 1.0) - gp_trunc(0.5, 1.0)[0]) < 1e-9
ys = ystar(0.5)
print("M/M/1 rho=0.5 y*", repr(ys), " P(B>y*)", np.exp(-ys))
curve = []
for rho in np.arange(0.05, 0.951, 0.05):
    y = ystar(rho)
    curve.append((rho, y, np.exp(-y)))
for r in curve:
    print("  fig1 rho=%.2f y*=%.6f P=%.6f" % r)
print("  fig1 max P", max(c[2] for c in curve))
for rho in (0.01, 0.005, 0.002):
    print("  small rho", rho, ystar(rho))

# --- heavy traffic family: A~Exp(1), p=0.5, B1=U(0,0.5), B2=delta_c
print("heavy traffic family")
for rho in (0.9, 0.99, 0.999):
    c = 2 * (rho - 0.125)
    phiB = lambda s: 0.5 * phi_u(s, 0, 0.5) + 0.5 * np.exp(c * s)
    g = optimize.brentq(lambda x: (phiB(x) - 1) / x - 1, 1e-7, 10, xtol=1e-16)
    f1v = g - 0.5 * (phi_u(g, 0, 0.5) - 1)
    varB = 0.5 * (0.25 ** 2 / 3 * 4 + 0) + 0.5 * c * c - rho ** 2  # E[B^2]-E[B]^2
    eb2 = 0.5 * (0.5 ** 2 / 3) + 0.5 * c * c
    varB = eb2 - rho ** 2
    K = 2 / (1 + varB)
    print("  rho", rho, "gw", g, "ratio_w", g / (K * (1 - rho)),
          "gw2", f1v, "ratio_w2", f1v / (K * (1 - 0.125) * (1 - rho)))
for lam in (0.9, 0.99, 0.999):
    K = 2 / (1 / lam ** 2 + 1)
    print("  M/M/1 lam", lam, "ratio", (1 - lam) / (K * (1 - lam)))

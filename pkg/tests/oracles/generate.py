"""Independent reference values frozen into the unit tests.

Run with ``python tests/oracles/generate.py``. Nothing here imports the
package: every value comes from direct summation in mpmath (50 digits) or
from SciPy quadrature.
"""
import cmath
import math

import mpmath as mp
from scipy import integrate

mp.mp.dps = 50

# sigmoid and its derivative at 0.7
s = 1 / (1 + mp.e ** (-mp.mpf("0.7")))
print("sigmoid(0.7) =", mp.nstr(s, 20), " derivative =", mp.nstr(s * (1 - s), 20))

# width-3 sine ZeNN, alpha = 1.1
ZENN3 = [(0.3, -0.2, 1.5, 0.1), (-1.2, 0.4, -0.7, 0.25), (0.8, 1.1, 0.9, -0.6)]
for x in ("0.37", "-1.3", "2.5"):
    xv = mp.mpf(x)
    total = mp.mpf(0)
    for j, (w1, b1, w2, b2) in enumerate(ZENN3, start=1):
        total += mp.mpf(j) ** mp.mpf("-1.1") * (mp.mpf(w2) * mp.sin(mp.mpf(w1) * j * xv + mp.mpf(b1)) + mp.mpf(b2))
    print(f"zenn3({x}) =", mp.nstr(total, 20))

# width-3 sine MLP, beta = 0.5, same neurons
for x in ("0.37", "-1.3"):
    xv = mp.mpf(x)
    total = sum(mp.mpf(w2) * mp.sin(mp.mpf(w1) * xv + mp.mpf(b1)) + mp.mpf(b2) for w1, b1, w2, b2 in ZENN3)
    print(f"mlp3({x}) =", mp.nstr(total / mp.sqrt(3), 20))

# Fourier features with B = [[0.5, -1.0], [2.0, 0.25]] at x = (0.3, 0.8)
B = [[mp.mpf("0.5"), mp.mpf("-1.0")], [mp.mpf("2.0"), mp.mpf("0.25")]]
xv = [mp.mpf("0.3"), mp.mpf("0.8")]
phase = [2 * mp.pi * (r[0] * xv[0] + r[1] * xv[1]) for r in B]
print("fourier =", [mp.nstr(mp.sin(p), 20) for p in phase] + [mp.nstr(mp.cos(p), 20) for p in phase])

# half sum of squares for a fixed prediction/target pair
pred = [0.1, -0.4, 2.2, 0.75]
truth = [0.3, -0.1, 1.9, 1.0]
print("half_sse =", mp.nstr(sum((mp.mpf(a) - mp.mpf(b)) ** 2 for a, b in zip(pred, truth)) / 2, 20))
err = sum((mp.mpf(a) - mp.mpf(b)) ** 2 for a, b in zip(pred, truth)) / 4
print("mse =", mp.nstr(err, 20), " psnr =", mp.nstr(10 * mp.log10(1 / err), 20))

# eigenvalues of [[2.5, -0.7], [-0.7, 1.1]] via the quadratic formula
a, b, d = mp.mpf("2.5"), mp.mpf("-0.7"), mp.mpf("1.1")
disc = mp.sqrt(((a - d) / 2) ** 2 + b * b)
print("eig2 =", mp.nstr((a + d) / 2 - disc, 20), mp.nstr((a + d) / 2 + disc, 20))

# characteristic function of sum_j relu(j W x + b) / j**alpha, W ~ U(-L, L), b ~ U(-B, B):
# each factor by 2-D quadrature of exp(i t relu(j w x + b) / j**alpha) over the uniform square.
def factor(j, x, t, L, Bb, alpha):
    # inner integral over b is split at the kink b = -j w x; the outer one at the
    # weights where the kink leaves the bias interval
    s_ = t / j ** alpha

    def inner(w, fn):
        kink = min(max(-j * w * x, -Bb), Bb)
        flat = (kink + Bb) * fn(0.0)
        ramp = integrate.quad(lambda b_: fn(s_ * (j * w * x + b_)), kink, Bb, epsabs=1e-15, epsrel=1e-14)[0]
        return flat + ramp

    cuts = sorted({-L, L, *[c for c in (-Bb / (j * x), Bb / (j * x)) if -L < c < L]})

    def outer(fn):
        return sum(integrate.quad(lambda w: inner(w, fn), a, b, epsabs=1e-15, epsrel=1e-14, limit=200)[0]
                   for a, b in zip(cuts, cuts[1:])) / (4 * L * Bb)

    return complex(outer(math.cos), outer(math.sin))


for (x, t, L, Bb, alpha, n) in [(0.5, 1.0, 1.0, 1.0, 1.0, 4), (0.25, -2.0, 1.0, 1.0, 1.0, 4),
                                (1.0, 0.5, 1.0, 1.0, 1.0, 4), (1.0, 3.0, 1.0, 1.0, 1.0, 4),
                                (0.3, 1.7, 2.0, 0.5, 1.5, 6)]:
    val = 1
    for j in range(1, n + 1):
        val *= factor(j, x, t, L, Bb, alpha)
    print(f"charfn{(x, t, L, Bb, alpha, n)} =", repr(val.real), repr(val.imag))

# finite-width and limiting excess kurtosis of the sine ZeNN at x = 0 with
# W2 ~ N(0,1), b1 = 0, b2 ~ U(-1,1), alpha = 1: the perceptron is b2 alone.
k2, k4 = mp.mpf(1) / 3, mp.mpf(-2) / 15
for n in (64,):
    s2 = sum(mp.mpf(j) ** -2 for j in range(1, n + 1))
    s4 = sum(mp.mpf(j) ** -4 for j in range(1, n + 1))
    print(f"excess_kurtosis(N={n}) =", mp.nstr(k4 * s4 / (k2 * s2) ** 2, 20))
print("excess_kurtosis(inf) =", mp.nstr(k4 * mp.zeta(4) / (k2 * mp.zeta(2)) ** 2, 20))

"""Independent reference values for the C++ tests.

Plain numpy, no code shared with the library. Run it and paste the printed
numbers into the tests when a reference changes:

    python3 tests/oracles/generate_oracles.py
"""
import math

import numpy as np


def tuning(angle, lo, hi, neurons, sigma):
    pref = np.linspace(lo, hi, neurons)
    return np.exp(-((angle - pref) ** 2) / (2 * sigma * sigma))


def quantize(rate, n):
    level = int(math.floor(rate * (2**n - 1)))
    return [1 if (level >> (n - 1 - k)) & 1 else -1 for k in range(n)]


def izhikevich_count(current, dt, total_ms=1000.0, a=0.02, b=0.2, c=-50.0, d=0.5, v_th=30.0):
    qb = 5 - b
    v = (-qb - math.sqrt(qb * qb - 4 * 0.04 * 140)) / 0.08
    u = b * v
    count = 0
    for _ in range(int(round(total_ms / dt))):
        v, u = v + (0.04 * v * v + 5 * v + 140 - u + current) * dt, u + a * (b * v - u) * dt
        if v >= v_th:
            v, u, count = c, u + d, count + 1
    return count


def hadamard(i, j):
    return -1.0 if bin(i & j).count("1") % 2 else 1.0


def main():
    print("tuning_response(N_n=10, [0, pi], sigma=0.3, angle=1.0):")
    print("  ", [repr(float(x)) for x in tuning(1.0, 0.0, math.pi, 10, 0.3)])

    print("quantize(0.60653, 4):", quantize(0.60653, 4))

    # N_J=1, N_n=2, n=1, angle at the first preferred angle, sigma 0.1 on [0, 1].
    r = tuning(0.0, 0.0, 1.0, 2, 0.1)
    print("encode_joints small case:", [b for x in r for b in quantize(x, 1)], "rates", r.tolist())

    qb = 5 - 0.2
    v = (-qb - math.sqrt(qb * qb - 4 * 0.04 * 140)) / 0.08
    print("resting point:", v, 0.2 * v)
    print("spike count I=10, 1000 ms, dt=0.1:", izhikevich_count(10, 0.1))
    print("spike counts dt=0.5, I=0..12:", [izhikevich_count(i, 0.5) for i in range(13)])
    print("omega_1 for d=3:", repr(10 ** (-1 / 3)))

    # Top-N flip: one joint on [0, pi], N_n=10, sigma = 1.5 * spacing, angle 1.0, rho 0.5.
    rates = tuning(1.0, 0.0, math.pi, 10, 1.5 * math.pi / 9)
    order = sorted(range(10), key=lambda i: (-rates[i], i))
    print("top-5 flipped neurons:", sorted(order[:5]))

    # Recall: M columns are Hadamard columns 1..5 over rows 0..119, S column j = (0.1j, -0.2j, 0.05j).
    m = np.array([[hadamard(i, j) for j in range(1, 6)] for i in range(120)])
    s = np.array([[0.1 * j, -0.2 * j, 0.05 * j] for j in range(5)]).T
    q = m[:, 2]
    logits = 32 * (m.T @ q)
    w = np.exp(logits - logits.max())
    w /= w.sum()
    print("recall target for q = column 2, beta 32:", [repr(float(x)) for x in s @ w])
    print("  inner products:", (m.T @ q).tolist())

    # Four waypoints over three joints, 5 ticks per segment.
    wps = np.array([[0.0, -1.0, 0.0], [0.5, -1.5, 0.2], [0.1, -0.5, 1.0], [-0.4, -0.2, 0.6]])
    states = []
    for k in range(3):
        for t in range(5):
            states.append(wps[k] + (wps[k + 1] - wps[k]) * t / 5)
    states.append(wps[-1])
    print("interpolated states 6 and 12:", states[6].tolist(), states[12].tolist())

    # Sweep velocities for touch {2, 4, 8} N with gain 0.05 rad/s per N.
    print("sweep plateau velocities:", [0.05 * m for m in (2, 4, 8)])


if __name__ == "__main__":
    main()

"""Regenerates formulas.csv: 50-digit evaluations of the model formulas at random grid points.

    python3 gen_formulas.py > formulas.csv
"""
import random
import sys

from mpmath import mp, mpf, exp, log, sqrt, nstr

mp.dps = 50

COEFFS = [
    ["-60", "-0.03109", "96.98", "0.0006553", "-120", "-0.8355"],
    ["-48", "-0.03", "98.5", "0.001", "-97", "-0.5"],
    ["-40", "-0.04", "97", "0.002", "-110", "-0.6"],
    ["-38", "-0.04", "95", "0.0015", "-100", "-0.64"],
]
PHI, C_PSI, C_LAMBDA = mpf(350000), mpf("0.2"), mpf("0.02")
DATASET, BATCH = mpf(245921), mpf(10000)

L_GRID = ["20", "25", "50", "55", "80", "100"]
M_GRID = list(range(2, 11))
PSI_GRID = ["1.5", "1.8", "2.2"]
LAMBDA_GRID = ["1", "2", "3"]
ALPHA_GRID = ["0.5", "1", "1.5", "2", "3"]


def accuracy(i, l, m):
    g = [mpf(c) for c in COEFFS[i]]
    return (g[0] * exp(g[1] * l) + g[2] * exp(g[3] * m) + g[4] * exp(g[5] * m)) / 100


def clamp(q):
    return min(max(q, mpf(0)), mpf(1))


def fmt(x):
    return nstr(x, 20, strip_zeros=False, min_fixed=-30, max_fixed=30)


def main():
    rng = random.Random(20240917)
    cols = ["model", "l", "m", "psi", "lambda"]
    cols += [f"l_{k}" for k in range(1, 5)] + [f"m_{k}" for k in range(1, 5)]
    cols += [f"alpha_{k}" for k in range(1, 5)]
    cols += ["arms", "horizon", "eta"]
    cols += ["accuracy", "comm_delay", "proc_delay", "latency", "cost", "performance", "loss", "eta_op", "bound"]
    out = sys.stdout
    out.write(",".join(cols) + "\n")
    for _ in range(1000):
        i = rng.randrange(4)
        l, m = rng.choice(L_GRID), rng.choice(M_GRID)
        psi, lam = rng.choice(PSI_GRID), rng.choice(LAMBDA_GRID)
        ls = [rng.choice(L_GRID) for _ in range(4)]
        ms = [rng.choice(M_GRID) for _ in range(4)]
        alphas = [rng.choice(ALPHA_GRID) for _ in range(4)]
        arms = rng.randrange(2, 2_000_001)
        horizon = rng.randrange(1, 100_001)
        eta = f"{rng.uniform(1e-5, 0.9):.12g}"

        L = mpf(l) / 100 * DATASET
        comm = L / BATCH / mpf(lam) / 60
        proc = m * PHI * L / (mpf(psi) * mpf(10) ** 9) / 60
        cost = C_PSI * mpf(psi) + C_LAMBDA * mpf(lam)
        weighted = sum(mpf(a) * clamp(accuracy(k, mpf(lk), mk)) for k, (a, lk, mk) in enumerate(zip(alphas, ls, ms)))
        perf = weighted / sum(mpf(a) for a in alphas)
        J, T = mpf(arms), mpf(horizon)
        eta_op = sqrt(log(J) / (J * T))
        bound = log(J) / mpf(eta) + mpf(eta) * J * T

        row = [str(i + 1), l, str(m), psi, lam] + ls + [str(x) for x in ms] + alphas
        row += [str(arms), str(horizon), eta]
        row += [fmt(v) for v in (accuracy(i, mpf(l), m), comm, proc, comm + proc, cost, perf, 1 - perf, eta_op, bound)]
        out.write(",".join(row) + "\n")


if __name__ == "__main__":
    main()

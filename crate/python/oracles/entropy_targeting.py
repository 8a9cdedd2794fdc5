"""Monte Carlo oracle for the entropy-targeting tolerance.

Independent of the Rust implementation: stationary distributions come from a
dense eigen-solve (scipy), not power iteration. Draws a pool of candidate
chains per Dirichlet concentration, then bootstraps the distance between the
best-of-K candidate and the target entropy rate.

    python3 python/oracles/entropy_targeting.py
"""
import numpy as np
import scipy.linalg as sla

M = 128
TARGET = 1.0
POOL = 2000
REPS = 20000


def stationary(p):
    w, v = sla.eig(p.T)
    k = np.argmin(np.abs(w - 1.0))
    pi = np.real(v[:, k])
    pi = np.abs(pi) / np.abs(pi).sum()
    return pi


def entropy_rate(p, pi):
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(p), 0.0)
    return float(-(pi * terms.sum(axis=1)).sum())


def main():
    rng = np.random.default_rng(20240601)
    for alpha in (0.003, 0.005, 0.01):
        h = np.empty(POOL)
        for i in range(POOL):
            p = rng.dirichlet([alpha] * M, size=M)
            h[i] = entropy_rate(p, stationary(p))
        dist = np.abs(h - TARGET)
        print(f"alpha={alpha}: H mean={h.mean():.4f} sd={h.std():.4f} "
              f"min={h.min():.4f} max={h.max():.4f}")
        for k in (50, 200, 1000):
            idx = rng.integers(0, POOL, size=(REPS, k))
            best = dist[idx].min(axis=1)
            q = np.quantile(best, [0.5, 0.99, 0.999])
            print(f"  K={k:5d}: best |H-1| median={q[0]:.2e} "
                  f"q99={q[1]:.2e} q99.9={q[2]:.2e} max={best.max():.2e}")


if __name__ == "__main__":
    main()

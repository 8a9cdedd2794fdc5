"""Monte Carlo oracle for typical-set occupancy of ground-truth samples.

Selects chains the same way the library does (best of K Dirichlet candidates
against a 1 bit/token target), then measures the fraction of stationary
length-n samples whose conditional average NLL lies within [H-eps, H+eps].

    python3 python/oracles/aep_occupancy.py
"""
import numpy as np
import scipy.linalg as sla

M = 128
ALPHA = 0.005
K = 200
EPS = 0.2
SAMPLES = 10_000
LENGTHS = (32, 64, 128, 256)
CHAINS = 12


def stationary(p):
    w, v = sla.eig(p.T)
    k = np.argmin(np.abs(w - 1.0))
    pi = np.abs(np.real(v[:, k]))
    return pi / pi.sum()


def entropy_rate(p, pi):
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(p > 0, p * np.log2(p), 0.0)
    return float(-(pi * terms.sum(axis=1)).sum())


def select(rng):
    best = None
    for _ in range(K):
        p = rng.dirichlet([ALPHA] * M, size=M)
        pi = stationary(p)
        h = entropy_rate(p, pi)
        if best is None or abs(h - 1.0) < abs(best[2] - 1.0):
            best = (p, pi, h)
    return best


def sample(p, pi, n, count, rng):
    cum = np.cumsum(p, axis=1)
    x = np.empty((count, n), dtype=np.int64)
    x[:, 0] = np.minimum(np.searchsorted(np.cumsum(pi), rng.random(count), side="right"), M - 1)
    for t in range(1, n):
        u = rng.random(count)
        x[:, t] = np.minimum((u[:, None] >= cum[x[:, t - 1]]).sum(axis=1), M - 1)
    return x


def occupancy(p, h, x):
    with np.errstate(divide="ignore"):
        lp = np.log2(p[x[:, :-1], x[:, 1:]])
    nll = -lp.sum(axis=1) / (x.shape[1] - 1)
    return float(((nll >= h - EPS) & (nll <= h + EPS)).mean())


def main():
    rng = np.random.default_rng(7)
    rows = []
    for c in range(CHAINS):
        p, pi, h = select(rng)
        occ = [occupancy(p, h, sample(p, pi, n, SAMPLES, rng)) for n in LENGTHS]
        # seed-to-seed spread at n=128
        rep = [occupancy(p, h, sample(p, pi, 128, SAMPLES, rng)) for _ in range(4)]
        rows.append(occ)
        print(f"chain {c}: H={h:.4f} occ={['%.4f' % o for o in occ]} "
              f"n128 reps spread={max(rep) - min(rep):.4f}")
    rows = np.array(rows)
    print("min occupancy per n:", dict(zip(LENGTHS, rows.min(axis=0).round(4))))
    diffs = np.diff(rows, axis=1)
    print("worst consecutive drop:", diffs.min().round(4))


if __name__ == "__main__":
    main()

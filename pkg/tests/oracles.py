"""Brute-force reference classifiers in plain Python (no numpy)."""

import math
import random


def _column_stats(X):
    n = len(X)
    stats = []
    for j in range(len(X[0])):
        col = [row[j] for row in X]
        mean = math.fsum(col) / n
        var = math.fsum((v - mean) ** 2 for v in col) / n
        stats.append((mean, var))
    return stats


def knn_oracle(X, y, k, x):
    """Exhaustive scan: z-score with population std, rank by (distance, index)."""
    stats = _column_stats(X)
    scale = [(m, max(math.sqrt(v), 1e-9)) for m, v in stats]

    def z(row):
        return [(row[j] - m) / s for j, (m, s) in enumerate(scale)]

    zx = z(x)
    scored = []
    for i, row in enumerate(X):
        zr = z(row)
        scored.append((sum((a - b) ** 2 for a, b in zip(zr, zx)), i))
    scored.sort()
    votes = sum(y[i] for _, i in scored[:k])
    return 2 * votes > k


def _normal_pdf(x, mean, var):
    return math.exp(-((x - mean) ** 2) / (2 * var)) / math.sqrt(2 * math.pi * var)


def gnb_oracle(X, y, x):
    """Prior times the product of per-feature normal densities, class by class."""
    pooled = _column_stats(X)
    floor = 1e-9 * max(max(v for _, v in pooled), 1e-12)
    post = {}
    for cls in (True, False):
        rows = [row for row, lab in zip(X, y) if lab == cls]
        density = len(rows) / len(X)
        for j, (m, v) in enumerate(_column_stats(rows)):
            density *= _normal_pdf(x[j], m, max(v, floor))
        post[cls] = density
    return post[True] >= post[False]


def random_instance(seed):
    """n <= 50 training points in 3 features, both classes with >= 2 members."""
    rnd = random.Random(seed)
    n = rnd.randint(6, 50)
    centers = {True: [rnd.uniform(0, 3) for _ in range(3)], False: [rnd.uniform(0, 3) for _ in range(3)]}
    spread = [rnd.uniform(0.2, 2.0) for _ in range(3)]
    y = [rnd.random() < 0.5 for _ in range(n)]
    y[0], y[1], y[2], y[3] = True, True, False, False
    X = [[rnd.gauss(centers[lab][j], spread[j]) for j in range(3)] for lab in y]
    tests = [[rnd.gauss(centers[rnd.random() < 0.5][j], spread[j]) for j in range(3)] for _ in range(20)]
    tests.append(list(X[rnd.randrange(n)]))
    return X, y, tests

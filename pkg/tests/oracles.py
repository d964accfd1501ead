"""Independent brute-force oracles.

Each function works straight from the probability tables with plain loops
and shares no code with the package beyond reading model attributes.
"""

from __future__ import annotations

from fractions import Fraction


def observed(y, bits):
    return tuple(v for v, b in zip(y, bits) if b)


def g(mm, phi, bits, yi):
    for m, col in mm.kernels[phi].items():
        if m.bits == tuple(bits):
            return col[yi]
    return Fraction(0)


def all_bits(n):
    return [tuple((k >> (n - 1 - j)) & 1 for j in range(n)) for k in range(2 ** n)]


def realised_mar(mm, y, bits):
    pts = mm.space.points
    yi = pts.index(tuple(y))
    o = observed(y, bits)
    for phi in mm.phi_grid:
        for j, ys in enumerate(pts):
            if observed(ys, bits) == o and g(mm, phi, bits, j) != g(mm, phi, bits, yi):
                return False
    return True


def everywhere_mar(mm):
    pts = mm.space.points
    for phi in mm.phi_grid:
        for bits in all_bits(mm.space.n_coords):
            for i, a in enumerate(pts):
                for j, b in enumerate(pts):
                    if observed(a, bits) == observed(b, bits) and g(mm, phi, bits, i) != g(mm, phi, bits, j):
                        return False
    return True


def realised_mcar(mm, y, bits):
    yi = mm.space.points.index(tuple(y))
    return all(
        g(mm, phi, bits, j) == g(mm, phi, bits, yi)
        for phi in mm.phi_grid
        for j in range(mm.space.size)
    )


def everywhere_mcar(mm):
    n = mm.space.size
    return all(
        g(mm, phi, bits, j) == g(mm, phi, bits, 0)
        for phi in mm.phi_grid
        for bits in all_bits(mm.space.n_coords)
        for j in range(n)
    )


def l1(dm, mm, y, bits, theta, phi):
    o = observed(y, bits)
    f = dm.tables[theta]
    return sum(
        (f[j] * g(mm, phi, bits, j) for j, ys in enumerate(dm.space.points) if observed(ys, bits) == o),
        Fraction(0),
    )


def l2(dm, y, bits, theta):
    o = observed(y, bits)
    f = dm.tables[theta]
    return sum((f[j] for j, ys in enumerate(dm.space.points) if observed(ys, bits) == o), Fraction(0))


def normalise(d):
    total = sum(d.values(), Fraction(0))
    return {k: v / total for k, v in d.items()}


def joint_theta_posterior(dm, mm, y, bits, prior):
    post = {t: Fraction(0) for t in dm.theta_grid}
    for t in dm.theta_grid:
        for p in mm.phi_grid:
            post[t] += prior.get((t, p), 0) * l1(dm, mm, y, bits, t, p)
    return normalise(post)


def ignoring_posterior(dm, y, bits, p_theta):
    return normalise({t: p_theta[t] * l2(dm, y, bits, t) for t in dm.theta_grid})


def law_of_statistic(dm, weights, bits, stat):
    """Law of stat(observed(Y)) under P(Y = y) proportional to weights[y]."""
    total = sum(weights, Fraction(0))
    out = {}
    for ys, w in zip(dm.space.points, weights):
        if w:
            k = stat(observed(ys, bits))
            out[k] = out.get(k, Fraction(0)) + w / total
    return out


def tv(p, q):
    keys = set(p) | set(q)
    return sum((abs(p.get(k, 0) - q.get(k, 0)) for k in keys), Fraction(0)) / 2


def rank(rows):
    """Rank of a rational matrix by plain Gaussian elimination over Fractions."""
    m = [[Fraction(v) for v in r] for r in rows]
    r = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                factor = m[i][c] / m[r][c]
                m[i] = [a - factor * b for a, b in zip(m[i], m[r])]
        r += 1
    return r

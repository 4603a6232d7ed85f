import numpy as np

from czest.sets import ConstrainedZonotope


def random_cz(rng, n, ng, nc):
    """Random non-empty constrained zonotope (b chosen from an interior xi)."""
    G = rng.normal(size=(n, ng))
    c = rng.normal(size=n)
    if nc == 0:
        return ConstrainedZonotope.zonotope(G, c)
    A = rng.normal(size=(nc, ng))
    b = A @ rng.uniform(-0.5, 0.5, ng)
    return ConstrainedZonotope(G, c, A, b)


def feasible_xi(Z, rng, count):
    """Feasible generator vectors of Z: uniform draws projected onto A xi = b."""
    ng = Z.n_gen
    out = []
    if Z.n_con:
        pinv = np.linalg.pinv(Z.A)
    while len(out) < count:
        xi = rng.uniform(-1.0, 1.0, ng)
        if Z.n_con:
            xi = xi - pinv @ (Z.A @ xi - Z.b)
        if np.max(np.abs(xi), initial=0.0) <= 1.0:
            out.append(xi)
    return np.array(out)

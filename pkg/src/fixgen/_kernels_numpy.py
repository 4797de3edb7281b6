"""Vectorized numpy kernels, used when ``FIXGEN_BACKEND=numpy``.  Same
contracts as ``_kernels_numba``; see ``fixgen.kernels`` for documentation."""
import numpy as np


def ball_slacks(centers, radii, y):
    """Return ``||y - c_i|| - r_i`` for every row ``c_i`` of ``centers``."""
    diff = centers - y
    return np.sqrt((diff * diff).sum(axis=1)) - radii


def _cone_margins(centers, radii, y, s):
    diff = y - centers
    return radii + s - np.sqrt((diff * diff).sum(axis=1))


def _newton_system(centers, radii, y, s, t):
    e = y - centers
    ne = np.sqrt((e * e).sum(axis=1))
    a = radii + s
    q = 2.0 / ((a - ne) * (a + ne))
    eq = e * q[:, None]
    aq = a * q
    d = centers.shape[1]
    g = np.append(eq.sum(axis=0), t - aq.sum())
    H = np.empty((d + 1, d + 1))
    H[:d, :d] = eq.T @ eq + q.sum() * np.eye(d)
    H[:d, d] = H[d, :d] = -(eq * aq[:, None]).sum(axis=0)
    H[d, d] = (aq * aq).sum() - q.sum()
    return H, g


def _dphi(centers, radii, y, s, dz, step, t):
    d = centers.shape[1]
    e = y + step * dz[:d] - centers
    ne = np.sqrt((e * e).sum(axis=1))
    a = radii + s + step * dz[d]
    if (a - ne).min() <= 0.0:
        return np.inf
    return t * dz[d] - ((2.0 * a * dz[d] - 2.0 * (e @ dz[:d])) / ((a - ne) * (a + ne))).sum()


def _feasible_step(centers, radii, y, s, dz):
    d = centers.shape[1]
    step = 1.0
    for _ in range(60):
        if _cone_margins(centers, radii, y + step * dz[:d], s + step * dz[d]).min() > 0.0:
            break
        step *= 0.5
    return step


def _line_search(centers, radii, y, s, dz, t, lam2):
    step = _feasible_step(centers, radii, y, s, dz)
    fhi = _dphi(centers, radii, y, s, dz, step, t)
    if fhi <= 0.0:
        return step
    lo, flo, hi, side = 0.0, -lam2, step, 0
    for _ in range(8):
        mid = (lo * fhi - hi * flo) / (fhi - flo)
        fm = _dphi(centers, radii, y, s, dz, mid, t)
        if fm > 0.0:
            hi, fhi = mid, fm
            if side == 1:
                flo *= 0.5
            side = 1
        else:
            lo, flo = mid, fm
            if side == -1:
                fhi *= 0.5
            side = -1
        if abs(fm) < 0.1 * lam2:
            break
    return lo if lo > 0.0 else 0.5 * hi


def _barrier_minmax(centers, radii, y0, gap_tol):
    # log-barrier on the cones (r_i + s)^2 >= ||y - c_i||^2.  Intermediate
    # centerings are loose; the tangent predictor carries the iterate along
    # the central path, and only the last centering is tight.
    k, d = centers.shape
    if k == 1:
        return centers[0].copy(), -radii[0]
    y = y0.copy()
    scale = max(1.0, radii.max())
    s = ball_slacks(centers, radii, y).max() + 0.5 * scale
    t = 2.0 * k / (s + radii.min())
    mu = 16.0
    # margins are only resolved to ~eps*max(r); target a gap relative to the
    # tightest ball so the Lipschitz ratio of the answer is accurate
    target = gap_tol * max(radii.min(), 1e-6 * scale)
    final = False
    for _outer in range(200):
        final = final or 2.0 * k / t < target
        tol2 = 1e-10 if final else 0.25
        for _it in range(60):
            H, g = _newton_system(centers, radii, y, s, t)
            try:
                dz = np.linalg.solve(H, -g)
            except np.linalg.LinAlgError:
                break
            lam2 = -(g @ dz)
            if not lam2 > tol2:
                break
            step = _line_search(centers, radii, y, s, dz, t, lam2)
            y = y + step * dz[:d]
            s = s + step * dz[d]
            if step * step * lam2 < 1e-20:
                break
        if final:
            break
        t_new = t * mu
        H, _ = _newton_system(centers, radii, y, s, t)
        rhs = np.zeros(d + 1)
        rhs[d] = -(t_new - t)
        try:
            dz = np.linalg.solve(H, rhs)
            step = 0.9 * _feasible_step(centers, radii, y, s, dz)
            y = y + step * dz[:d]
            s = s + step * dz[d]
        except np.linalg.LinAlgError:
            pass
        t = t_new
    return y, s


def minmax_ball_center(centers, radii, y0, gap_tol):
    """Minimize ``max_i ||y - c_i|| - r_i`` over ``y``.

    Constraint generation around a barrier solver: the working set starts
    with the tightest balls and grows by the most violated ones until the
    relaxed optimum satisfies every ball.

    Returns
    -------
    y : ndarray
        The minimizer.
    value : float
        ``max_i ||y - c_i|| - r_i`` evaluated at ``y`` over all balls.
    rounds : int
        Number of working-set rounds used.
    """
    m, d = centers.shape
    if m == 1:
        return centers[0].copy(), -radii[0], 1
    active = np.zeros(m, dtype=np.bool_)
    k0 = min(m, d + 2)
    active[np.argpartition(radii, k0 - 1)[:k0]] = True
    v0 = ball_slacks(centers, radii, y0)
    active[np.argmax(v0)] = True
    y = y0.copy()
    v = v0
    for rnd in range(m + 1):
        idx = np.nonzero(active)[0]
        y, s = _barrier_minmax(centers[idx], radii[idx], y, gap_tol)
        v = ball_slacks(centers, radii, y)
        cand = np.nonzero((v > s) & ~active)[0]
        if cand.shape[0] > d + 1:
            cand = cand[np.argpartition(-v[cand], d)[: d + 1]]
        active[cand] = True
        added = cand.shape[0]
        if added == 0:
            return y, v.max(), rnd + 1
    return y, v.max(), m + 1


def nearest_in_hull(vertices, x, tol):
    """Nearest point to ``x`` in the convex hull of the rows of ``vertices``.

    Wolfe's minimum-norm-point method applied to ``vertices - x``.  Returns
    the point and the barycentric weights (length ``n``).
    """
    n, d = vertices.shape
    P = vertices - x
    norms = (P * P).sum(axis=1)
    scale = max(norms.max(), 1e-300)
    support = np.empty(n + 1, dtype=np.int64)
    lam = np.zeros(n + 1)
    j0 = np.argmin(norms)
    support[0] = j0
    lam[0] = 1.0
    ns = 1
    z = P[j0].copy()
    for _major in range(50 * (n + d) + 50):
        dots = P @ z
        i = np.argmin(dots)
        zz = z @ z
        if zz - dots[i] <= tol * scale:
            break
        present = False
        for k in range(ns):
            if support[k] == i:
                present = True
        if present:
            break
        support[ns] = i
        lam[ns] = 0.0
        ns += 1
        for _minor in range(n + d + 5):
            B = np.empty((ns, d))
            for k in range(ns):
                B[k] = P[support[k]]
            A = B @ B.T + 1.0
            u = np.linalg.lstsq(A, np.ones(ns))[0]
            u = u / u.sum()
            if np.all(u[:ns] > 1e-14):
                lam[:ns] = u
                z = u @ B
                break
            theta = 1.0
            for k in range(ns):
                if u[k] <= 1e-14:
                    denom = lam[k] - u[k]
                    if denom > 0.0:
                        cand = lam[k] / denom
                        if cand < theta:
                            theta = cand
            for k in range(ns):
                lam[k] = theta * u[k] + (1.0 - theta) * lam[k]
            keep = 0
            for k in range(ns):
                if lam[k] > 1e-14:
                    support[keep] = support[k]
                    lam[keep] = lam[k]
                    keep += 1
            ns = keep
            tot = lam[:ns].sum()
            lam[:ns] = lam[:ns] / tot
            z = np.zeros(d)
            for k in range(ns):
                z += lam[k] * P[support[k]]
    weights = np.zeros(n)
    for k in range(ns):
        weights[support[k]] += lam[k]
    return x + z, weights


def dykstra_halfspaces(x, normals, offsets, max_sweeps, tol):
    """Project ``x`` onto ``{z : normals @ z <= offsets}`` by Dykstra's method.

    Returns the projection, the number of sweeps and the final residual
    (largest constraint violation, or the last increment change when that is
    larger).
    """
    m, d = normals.shape
    n2 = (normals * normals).sum(axis=1)
    y = x.copy()
    incr = np.zeros((m, d))
    resid = np.inf
    for sweep in range(max_sweeps):
        change = 0.0
        for i in range(m):
            z = y + incr[i]
            viol = normals[i] @ z - offsets[i]
            if viol > 0.0:
                p = z - (viol / n2[i]) * normals[i]
            else:
                p = z
            delta = (z - p) - incr[i]
            change += delta @ delta
            incr[i] = z - p
            y = p
        maxviol = (normals @ y - offsets).max()
        resid = max(np.sqrt(change), maxviol)
        if resid <= tol:
            return y, sweep + 1, resid
    return y, max_sweeps, resid


def pairwise_ratio_max(xs, ys, min_sep):
    """Largest ``||y_i - y_j|| / ||x_i - x_j||`` over pairs with separation
    at least ``min_sep``; returns ``(ratio, i, j)``."""
    n = xs.shape[0]
    best = 0.0
    bi = -1
    bj = -1
    for i in range(n):
        dx = xs[i + 1:] - xs[i]
        dy = ys[i + 1:] - ys[i]
        nx = np.sqrt((dx * dx).sum(axis=1))
        ny = np.sqrt((dy * dy).sum(axis=1))
        for k in range(nx.shape[0]):
            if nx[k] >= min_sep:
                q = ny[k] / nx[k]
                if q > best:
                    best = q
                    bi = i
                    bj = i + 1 + k
    return best, bi, bj

"""Loop-style kernels compiled with numba.  Same contracts as
``_kernels_numpy``; see ``fixgen.kernels`` for the public wrappers."""
import numba
import numpy as np

njit = numba.njit(cache=True)


@njit
def ball_slacks(centers, radii, y):
    m, d = centers.shape
    out = np.empty(m)
    for i in range(m):
        acc = 0.0
        for j in range(d):
            diff = y[j] - centers[i, j]
            acc += diff * diff
        out[i] = np.sqrt(acc) - radii[i]
    return out


@njit
def _chol_solve(H, b, n):
    # in-place Cholesky of the leading n x n block; returns False if not SPD
    for j in range(n):
        acc = H[j, j]
        for k in range(j):
            acc -= H[j, k] * H[j, k]
        if not acc > 0.0:
            return False
        ljj = np.sqrt(acc)
        H[j, j] = ljj
        for i in range(j + 1, n):
            acc = H[i, j]
            for k in range(j):
                acc -= H[i, k] * H[j, k]
            H[i, j] = acc / ljj
    for i in range(n):
        acc = b[i]
        for k in range(i):
            acc -= H[i, k] * b[k]
        b[i] = acc / H[i, i]
    for i in range(n - 1, -1, -1):
        acc = b[i]
        for k in range(i + 1, n):
            acc -= H[k, i] * b[k]
        b[i] = acc / H[i, i]
    return True


@njit
def _min_margin(centers, radii, idx, k, y, s, dz, step):
    d = centers.shape[1]
    worst = np.inf
    sn = s + step * dz[d]
    for ii in range(k):
        i = idx[ii]
        acc = 0.0
        for j in range(d):
            diff = y[j] + step * dz[j] - centers[i, j]
            acc += diff * diff
        marg = radii[i] + sn - np.sqrt(acc)
        if marg < worst:
            worst = marg
    return worst


@njit
def _dphi(centers, radii, idx, k, y, s, dz, step, t):
    # derivative of the barrier objective along dz at y + step*dz;
    # returns +inf outside the domain
    d = centers.shape[1]
    ds = dz[d]
    sn = s + step * ds
    tot = t * ds
    for ii in range(k):
        i = idx[ii]
        acc = 0.0
        edz = 0.0
        for j in range(d):
            e = y[j] + step * dz[j] - centers[i, j]
            acc += e * e
            edz += e * dz[j]
        a = radii[i] + sn
        ne = np.sqrt(acc)
        if a - ne <= 0.0:
            return np.inf
        w = (a - ne) * (a + ne)
        tot -= (2.0 * a * ds - 2.0 * edz) / w
    return tot


@njit
def _newton_system(centers, radii, idx, k, y, s, t, H, g, e):
    d = centers.shape[1]
    n = d + 1
    for p in range(n):
        g[p] = 0.0
        for q in range(n):
            H[p, q] = 0.0
    qsum = 0.0
    for ii in range(k):
        i = idx[ii]
        acc = 0.0
        for j in range(d):
            e[j] = y[j] - centers[i, j]
            acc += e[j] * e[j]
        ne = np.sqrt(acc)
        a = radii[i] + s
        w = (a - ne) * (a + ne)
        q = 2.0 / w
        aq = a * q
        qsum += q
        for j in range(d):
            eqj = e[j] * q
            g[j] += eqj
            for l in range(j + 1):
                H[j, l] += eqj * e[l] * q
            H[d, j] -= eqj * aq
        g[d] -= aq
        H[d, d] += aq * aq
    g[d] += t
    for j in range(d):
        H[j, j] += qsum
    H[d, d] -= qsum
    for p in range(n):
        for q in range(p + 1, n):
            H[p, q] = H[q, p]


@njit
def _line_search(centers, radii, idx, k, y, s, dz, t, lam2):
    # feasible backtracking, then regula falsi (Illinois) on the directional
    # derivative, which is -lam2 at zero
    step = 1.0
    for _ in range(60):
        if _min_margin(centers, radii, idx, k, y, s, dz, step) > 0.0:
            break
        step *= 0.5
    fhi = _dphi(centers, radii, idx, k, y, s, dz, step, t)
    if fhi <= 0.0:
        return step
    lo = 0.0
    flo = -lam2
    hi = step
    side = 0
    for _ in range(8):
        mid = (lo * fhi - hi * flo) / (fhi - flo)
        fm = _dphi(centers, radii, idx, k, y, s, dz, mid, t)
        if fm > 0.0:
            hi = mid
            fhi = fm
            if side == 1:
                flo *= 0.5
            side = 1
        else:
            lo = mid
            flo = fm
            if side == -1:
                fhi *= 0.5
            side = -1
        if abs(fm) < 0.1 * lam2:
            break
    return lo if lo > 0.0 else 0.5 * hi


@njit
def _barrier_minmax(centers, radii, idx, k, y, gap_tol):
    d = centers.shape[1]
    n = d + 1
    if k == 1:
        i = idx[0]
        for j in range(d):
            y[j] = centers[i, j]
        return -radii[i], 0
    rmin = np.inf
    rmax = 1.0
    worst = -np.inf
    for ii in range(k):
        i = idx[ii]
        rmin = min(rmin, radii[i])
        rmax = max(rmax, radii[i])
        acc = 0.0
        for j in range(d):
            diff = y[j] - centers[i, j]
            acc += diff * diff
        worst = max(worst, np.sqrt(acc) - radii[i])
    s = worst + 0.5 * rmax
    t = 2.0 * k / (s + rmin)
    target = gap_tol * max(rmin, 1e-6 * rmax)
    mu = 16.0
    H = np.empty((n, n))
    Hc = np.empty((n, n))
    g = np.empty(n)
    dz = np.empty(n)
    e = np.empty(d)
    newton = 0
    final = False
    for _outer in range(200):
        if 2.0 * k / t < target:
            final = True
        tol2 = 1e-10 if final else 0.25
        for _it in range(60):
            _newton_system(centers, radii, idx, k, y, s, t, H, g, e)
            for p in range(n):
                dz[p] = -g[p]
                for q in range(n):
                    Hc[p, q] = H[p, q]
            if not _chol_solve(Hc, dz, n):
                break
            lam2 = 0.0
            for p in range(n):
                lam2 -= g[p] * dz[p]
            if not lam2 > tol2:
                break
            newton += 1
            step = _line_search(centers, radii, idx, k, y, s, dz, t, lam2)
            if step * step * lam2 < 1e-20:
                break
            for j in range(d):
                y[j] += step * dz[j]
            s += step * dz[d]
        if final:
            break
        # tangent predictor: the central path moves by -H^{-1} e_s dt
        t_new = t * mu
        _newton_system(centers, radii, idx, k, y, s, t, H, g, e)
        for p in range(n):
            dz[p] = 0.0
            for q in range(n):
                Hc[p, q] = H[p, q]
        dz[d] = -(t_new - t)
        if _chol_solve(Hc, dz, n):
            step = 1.0
            for _ in range(40):
                if _min_margin(centers, radii, idx, k, y, s, dz, step) > 0.0:
                    break
                step *= 0.5
            step *= 0.9
            for j in range(d):
                y[j] += step * dz[j]
            s += step * dz[d]
        t = t_new
    return s, newton


@njit
def _k_extreme(vals, k, largest, threshold, use_threshold):
    # indices of the k smallest (or largest) entries, optionally restricted
    # to entries beyond ``threshold``; O(m k) insertion into a short buffer
    m = vals.shape[0]
    out = np.empty(k, dtype=np.int64)
    key = np.empty(k)
    n = 0
    for i in range(m):
        v = -vals[i] if largest else vals[i]
        if use_threshold and not v < threshold:
            continue
        if n < k:
            j = n
            n += 1
        elif v < key[k - 1]:
            j = k - 1
        else:
            continue
        while j > 0 and key[j - 1] > v:
            key[j] = key[j - 1]
            out[j] = out[j - 1]
            j -= 1
        key[j] = v
        out[j] = i
    return out[:n]


@njit
def minmax_ball_center(centers, radii, y0, gap_tol):
    m, d = centers.shape
    y = y0.copy()
    if m == 1:
        for j in range(d):
            y[j] = centers[0, j]
        return y, -radii[0], 1
    active = np.zeros(m, dtype=np.bool_)
    idx = np.empty(m, dtype=np.int64)
    for i in _k_extreme(radii, min(m, d + 2), False, 0.0, False):
        active[i] = True
    v = ball_slacks(centers, radii, y)
    active[np.argmax(v)] = True
    k = 0
    for i in range(m):
        if active[i]:
            idx[k] = i
            k += 1
    for rnd in range(m + 1):
        s, _ = _barrier_minmax(centers, radii, idx, k, y, gap_tol)
        v = ball_slacks(centers, radii, y)
        added = 0
        # most violated balls outside the working set
        for j in _k_extreme(v, d + 1, True, -s, True):
            if not active[j]:
                active[j] = True
                idx[k] = j
                k += 1
                added += 1
        if added == 0:
            return y, v.max(), rnd + 1
    return y, v.max(), m + 1


@njit
def dykstra_halfspaces(x, normals, offsets, max_sweeps, tol):
    m, d = normals.shape
    n2 = np.empty(m)
    for i in range(m):
        acc = 0.0
        for j in range(d):
            acc += normals[i, j] * normals[i, j]
        n2[i] = acc
    y = x.copy()
    incr = np.zeros((m, d))
    z = np.empty(d)
    resid = np.inf
    for sweep in range(max_sweeps):
        change = 0.0
        for i in range(m):
            viol = -offsets[i]
            for j in range(d):
                z[j] = y[j] + incr[i, j]
                viol += normals[i, j] * z[j]
            coef = viol / n2[i] if viol > 0.0 else 0.0
            for j in range(d):
                p = z[j] - coef * normals[i, j]
                new_incr = z[j] - p
                delta = new_incr - incr[i, j]
                change += delta * delta
                incr[i, j] = new_incr
                y[j] = p
        maxviol = -np.inf
        for i in range(m):
            acc = -offsets[i]
            for j in range(d):
                acc += normals[i, j] * y[j]
            maxviol = max(maxviol, acc)
        resid = max(np.sqrt(change), maxviol)
        if resid <= tol:
            return y, sweep + 1, resid
    return y, max_sweeps, resid


@njit
def nearest_in_hull(vertices, x, tol):
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
            if np.all(u > 1e-14):
                lam[:ns] = u
                z = u @ B
                break
            theta = 1.0
            for k in range(ns):
                if u[k] <= 1e-14:
                    denom = lam[k] - u[k]
                    if denom > 0.0:
                        theta = min(theta, lam[k] / denom)
            for k in range(ns):
                lam[k] = theta * u[k] + (1.0 - theta) * lam[k]
            keep = 0
            for k in range(ns):
                if lam[k] > 1e-14:
                    support[keep] = support[k]
                    lam[keep] = lam[k]
                    keep += 1
            ns = keep
            lam[:ns] = lam[:ns] / lam[:ns].sum()
            z = np.zeros(d)
            for k in range(ns):
                z += lam[k] * P[support[k]]
    weights = np.zeros(n)
    for k in range(ns):
        weights[support[k]] += lam[k]
    return x + z, weights


@njit
def pairwise_ratio_max(xs, ys, min_sep):
    n, d = xs.shape
    dy_dim = ys.shape[1]
    best = 0.0
    bi = -1
    bj = -1
    for i in range(n):
        for k in range(i + 1, n):
            ax = 0.0
            for j in range(d):
                diff = xs[i, j] - xs[k, j]
                ax += diff * diff
            ay = 0.0
            for j in range(dy_dim):
                diff = ys[i, j] - ys[k, j]
                ay += diff * diff
            nx = np.sqrt(ax)
            if nx >= min_sep:
                q = np.sqrt(ay) / nx
                if q > best:
                    best = q
                    bi = i
                    bj = k
    return best, bi, bj

"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``.

The arithmetic is written in the same order as the C loops so that both
backends produce bitwise identical results.
"""
import numpy as np


def extend_cells(a, start, stop, n, f, onset, lag):
    """Fill ``a[start:stop]`` from the reflection and delayed-feedback recursions.

    Every recursion lag is at least ``n`` cells, so blocks of ``n`` cells are
    computed at once.
    """
    k0 = -(1.0 + f) / (1.0 - f) if f != 1.0 else 0.0
    lag = np.asarray(lag, dtype=np.int64)
    i = start
    while i < stop:
        end = min(stop, i + n)
        idx = np.arange(i, end)
        out = -a[idx - n]
        post = idx >= onset
        if post.any():
            ip = idx[post]
            d = lag[ip - start]
            nodelay = d == 0
            dd = d[~nodelay]
            iq = ip[~nodelay]
            vals = np.empty(ip.shape[0])
            vals[~nodelay] = -a[iq - n] + f * a[iq - dd] - f * a[iq - n - dd]
            vals[nodelay] = k0 * a[ip[nodelay] - n]
            out[post] = vals
        a[i:end] = out
        i = end


def leapfrog(u_prev, u_cur, r2, rf, gcoef, dt, onset, lag, ring, vt0, nsteps, rec, out_u, out_vt):
    """March the leapfrog scheme from (u^0, u^1) up to u^nsteps; see ``_kernels.leapfrog``."""
    up = np.array(u_prev, dtype=np.float64)
    u = np.array(u_cur, dtype=np.float64)
    un = np.empty_like(u)
    depth = ring.shape[0]
    rec = list(rec)
    irec = 0
    ring[0] = vt0
    for step in range(1, nsteps):
        un[1:-1] = 2.0 * u[1:-1] - up[1:-1] + r2 * (u[2:] - 2.0 * u[1:-1] + u[:-2])
        un[0] = 0.0
        lg = lag[step]
        if step >= onset and lg == 0.0:
            un[-1] = (2.0 * u[-1] - up[-1] * (1.0 + rf) + 2.0 * r2 * (u[-2] - u[-1])) / (1.0 - rf)
        else:
            g = 0.0
            if step >= onset:
                tau = step - lg
                if tau >= 0.0:
                    k = int(np.floor(tau))
                    w = tau - k
                    if w == 0.0:
                        g = gcoef * ring[k % depth]
                    else:
                        g = gcoef * ((1.0 - w) * ring[k % depth] + w * ring[(k + 1) % depth])
            un[-1] = 2.0 * u[-1] - up[-1] + r2 * (2.0 * u[-2] - 2.0 * u[-1]) + g
        ring[step % depth] = (un[-1] - up[-1]) / (2.0 * dt)
        while irec < len(rec) and rec[irec] == step:
            out_u[irec] = u
            out_vt[irec] = (un - up) / (2.0 * dt)
            irec += 1
        up, u, un = u, un, up

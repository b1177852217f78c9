# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled replica loops for the Monte Carlo estimators.

The random streams are the SplitMix64 construction of ``rng.py``; the
counter layout of each kernel is documented in ``_pycore.py``, which is the
reference implementation.  Both must stay in sync.
"""
from libc.math cimport log, exp, sqrt, cos, sin, pow, INFINITY, M_PI
from libc.stdint cimport uint64_t, int64_t
from libc.stdlib cimport malloc, free

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef uint64_t M1 = 0xBF58476D1CE4E5B9ULL
cdef uint64_t M2 = 0x94D049BB133111EBULL
cdef uint64_t SALT = 0xD1B54A32D192ED03ULL
cdef double INV53 = 1.0 / 9007199254740992.0

cdef enum:
    COV_CONST = 0
    COV_BUMP = 1
    COV_RIESZ = 2


cdef inline uint64_t fmix(uint64_t z) noexcept nogil:
    z = z + GOLDEN
    z = (z ^ (z >> 30)) * M1
    z = (z ^ (z >> 27)) * M2
    return z ^ (z >> 31)


cdef inline uint64_t stream_key(uint64_t seed, uint64_t r) noexcept nogil:
    return fmix(fmix(seed) ^ fmix(r * SALT))


cdef inline double unif(uint64_t key, uint64_t c) noexcept nogil:
    return (<double>(fmix(key + c * GOLDEN) >> 11) + 0.5) * INV53


cdef inline double gauss(uint64_t key, uint64_t c) noexcept nogil:
    # Box-Muller on the uniforms at counters c and c + 1
    cdef double u1 = unif(key, c)
    cdef double u2 = unif(key, c + 1)
    return sqrt(-2.0 * log(u1)) * cos(2.0 * M_PI * u2)


cdef inline double cov(double r2, int kind, double A0, double param, double clip) noexcept nogil:
    cdef double r
    if kind == COV_CONST:
        return A0
    if kind == COV_BUMP:
        return A0 * exp(-r2 / (param * param))
    r = sqrt(r2)
    if r < clip:
        r = clip
    return pow(r, -param)


cdef inline void displace(double* x, int d, int wave, double g, uint64_t key, uint64_t c) noexcept nogil:
    cdef int i
    cdef double u, v, r, z, rho, sg
    if not wave:
        sg = sqrt(g)
        for i in range(d):
            x[i] += sg * gauss(key, c + 2 * i)
        return
    if d == 1:
        x[0] += g * (2.0 * unif(key, c) - 1.0)
    elif d == 2:
        u = unif(key, c)
        v = unif(key, c + 1)
        r = g * sqrt(u * (2.0 - u))
        x[0] += r * cos(2.0 * M_PI * v)
        x[1] += r * sin(2.0 * M_PI * v)
    else:
        z = 2.0 * unif(key, c) - 1.0
        v = unif(key, c + 1)
        rho = sqrt(1.0 - z * z)
        x[0] += g * rho * cos(2.0 * M_PI * v)
        x[1] += g * rho * sin(2.0 * M_PI * v)
        x[2] += g * z


def pair_ensemble(int wave, int n, int d, double t, double H, double[:, ::1] x0,
                  int cov_kind, double A0, double cov_param, double clip,
                  double u0, double v0, uint64_t seed, int64_t rep_start,
                  double[::1] out_log, double[::1] out_sign, int64_t[::1] out_jumps):
    """Fill per-replica ``log|value|``, sign and jump count for the pair ensemble."""
    cdef int64_t R = out_log.shape[0]
    cdef int nu = n * (n - 1) // 2
    cdef double dnu = nu
    cdef uint64_t stride = 2 + 4 * d
    cdef double expo = 2.0 * H - 1.0
    cdef bint need_pos = cov_kind != COV_CONST
    cdef bint weighted = expo != 0.0
    cdef int* pa = <int*>malloc(nu * sizeof(int))
    cdef int* pb = <int*>malloc(nu * sizeof(int))
    cdef double* last = <double*>malloc(n * sizeof(double))
    cdef double* pos = <double*>malloc(n * d * sizeof(double))
    cdef int64_t r, jumps
    cdef uint64_t key, base, j
    cdef int a, b, p, k, i
    cdef double s, acc, ga, gb, fac, r2, diff, w, sgn
    cdef bint zero
    if pa == NULL or pb == NULL or last == NULL or pos == NULL:
        free(pa); free(pb); free(last); free(pos)
        raise MemoryError()
    p = 0
    for a in range(n):
        for b in range(a + 1, n):
            pa[p] = a
            pb[p] = b
            p += 1
    with nogil:
        for r in range(R):
            key = stream_key(seed, <uint64_t>(rep_start + r))
            for k in range(n):
                last[k] = 0.0
                for i in range(d):
                    pos[k * d + i] = x0[k, i]
            s = 0.0
            acc = dnu * t
            zero = False
            j = 0
            while True:
                base = j * stride
                s += -log(unif(key, base)) / dnu
                if s >= t:
                    break
                p = <int>(unif(key, base + 1) * dnu)
                if p >= nu:
                    p = nu - 1
                a = pa[p]
                b = pb[p]
                ga = s - last[a]
                gb = s - last[b]
                if need_pos:
                    displace(pos + a * d, d, wave, ga, key, base + 2)
                    displace(pos + b * d, d, wave, gb, key, base + 2 + 2 * d)
                    r2 = 0.0
                    for i in range(d):
                        diff = pos[a * d + i] - pos[b * d + i]
                        r2 += diff * diff
                    fac = cov(r2, cov_kind, A0, cov_param, clip)
                else:
                    fac = A0
                if weighted:
                    fac = fac * pow(t - s, expo)
                if wave:
                    fac = fac * ga * gb
                if fac > 0.0:
                    acc += log(fac)
                else:
                    zero = True
                last[a] = s
                last[b] = s
                j += 1
            sgn = 1.0
            for k in range(n):
                if wave:
                    w = u0 + (t - last[k]) * v0
                else:
                    w = u0
                if w == 0.0:
                    zero = True
                else:
                    if w < 0.0:
                        sgn = -sgn
                        w = -w
                    acc += log(w)
            out_jumps[r] = <int64_t>j
            if zero:
                out_log[r] = -INFINITY
                out_sign[r] = 0.0
            else:
                out_log[r] = acc
                out_sign[r] = sgn
    free(pa)
    free(pb)
    free(last)
    free(pos)


def fk_exponents(int k, int d, int steps, double dt, double[:, ::1] V,
                 int cov_kind, double A0, double cov_param, double clip,
                 uint64_t seed, int64_t rep_start, double[::1] out):
    """Per-replica pair sum ``sum_{i<j} sum_{p,q} V[p,q] f(B^i_p - B^j_q)``."""
    cdef int64_t R = out.shape[0]
    cdef int npt = steps + 1
    cdef double* path = <double*>malloc(k * npt * d * sizeof(double))
    cdef double sdt = sqrt(dt)
    cdef int64_t r
    cdef uint64_t key, m
    cdef int i, jj, p, q, c
    cdef double S, row, r2, diff
    cdef double* bi
    cdef double* bj
    if path == NULL:
        raise MemoryError()
    with nogil:
        for r in range(R):
            key = stream_key(seed, <uint64_t>(rep_start + r))
            for i in range(k):
                for c in range(d):
                    path[(i * npt) * d + c] = 0.0
                for p in range(steps):
                    for c in range(d):
                        m = (<uint64_t>(i * steps + p) * d + c) * 2
                        path[(i * npt + p + 1) * d + c] = (
                            path[(i * npt + p) * d + c] + sdt * gauss(key, m)
                        )
            S = 0.0
            for i in range(k):
                for jj in range(i + 1, k):
                    for p in range(npt):
                        bi = path + (i * npt + p) * d
                        row = 0.0
                        for q in range(npt):
                            bj = path + (jj * npt + q) * d
                            r2 = 0.0
                            for c in range(d):
                                diff = bi[c] - bj[c]
                                r2 += diff * diff
                            row += V[p, q] * cov(r2, cov_kind, A0, cov_param, clip)
                        S += row
            out[r] = S
    free(path)


def fill_normals(uint64_t seed, int64_t rep_start, uint64_t counter0, double[:, ::1] out):
    """``out[r, i]`` = normal number ``counter0 + i`` of stream ``rep_start + r``."""
    cdef int64_t R = out.shape[0]
    cdef int64_t C = out.shape[1]
    cdef int64_t r, i
    cdef uint64_t key
    with nogil:
        for r in range(R):
            key = stream_key(seed, <uint64_t>(rep_start + r))
            for i in range(C):
                out[r, i] = gauss(key, 2 * (counter0 + <uint64_t>i))

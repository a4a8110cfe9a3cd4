"""Numba kernels behind the hot loops.

Everything here mirrors a pure-python implementation elsewhere in the
package: the RNG mirrors :mod:`errwlab.rng`, the walk kernel mirrors the
python engine in :mod:`errwlab.walk`, and the urn kernels mirror
:mod:`errwlab.urn`.  The test suite asserts bit-identical agreement on
the shared surfaces, which is what lets the fast path stand in for the
readable one.

State is threaded through the RNG helpers explicitly (s0..s3) because
numba keeps scalar uint64 locals in registers; everything stays
allocation-free inside the step loops.
"""

import numpy as np
from numba import njit

U64 = np.uint64

_GOLDEN = U64(0x9E3779B97F4A7C15)
_MIX1 = U64(0xBF58476D1CE4E5B9)
_MIX2 = U64(0x94D049BB133111EB)
_TWO_NEG53 = 2.0 ** -53

# Stop reasons reported by the walk kernel.
STOP_HORIZON = 0
STOP_ESCAPE = 1
STOP_VISITS = 2
STOP_RETURN = 3

# Scheme kind codes (kept in sync with errwlab.schemes).
KIND_POWER = 0
KIND_PERTURBED = 1
KIND_QUADRATIC_ORIGIN = 2


# ---------------------------------------------------------------------------
# RNG (xoshiro256** seeded via splitmix64)
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> U64(30))) * _MIX1
    z = (z ^ (z >> U64(27))) * _MIX2
    return z ^ (z >> U64(31))


@njit(cache=True, inline="always")
def _stream_seed(master_seed, run_index):
    return _mix64(master_seed + _GOLDEN * (run_index + U64(1)))


@njit(cache=True, inline="always")
def _init_state(seed):
    s = seed
    s = s + _GOLDEN
    s0 = _mix64(s)
    s = s + _GOLDEN
    s1 = _mix64(s)
    s = s + _GOLDEN
    s2 = _mix64(s)
    s = s + _GOLDEN
    s3 = _mix64(s)
    if s0 == U64(0) and s1 == U64(0) and s2 == U64(0) and s3 == U64(0):
        s0 = U64(1)
    return s0, s1, s2, s3


@njit(cache=True, inline="always")
def _rotl(x, k):
    return (x << U64(k)) | (x >> U64(64 - k))


@njit(cache=True, inline="always")
def _next_u64(s0, s1, s2, s3):
    result = _rotl(s1 * U64(5), 7) * U64(9)
    t = s1 << U64(17)
    s2 ^= s0
    s3 ^= s1
    s1 ^= s2
    s0 ^= s3
    s2 ^= t
    s3 = _rotl(s3, 45)
    return result, s0, s1, s2, s3


@njit(cache=True, inline="always")
def _uniform(s0, s1, s2, s3):
    r, s0, s1, s2, s3 = _next_u64(s0, s1, s2, s3)
    return np.float64(r >> U64(11)) * _TWO_NEG53, s0, s1, s2, s3


@njit(cache=True, inline="always")
def _exponential(s0, s1, s2, s3):
    u, s0, s1, s2, s3 = _uniform(s0, s1, s2, s3)
    return -np.log1p(-u), s0, s1, s2, s3


@njit(cache=True)
def rng_selftest(seed, count):
    """Dump `count` uint64 draws; used to verify parity with errwlab.rng."""
    out = np.empty(count, np.uint64)
    s0, s1, s2, s3 = _init_state(U64(seed))
    for i in range(count):
        r, s0, s1, s2, s3 = _next_u64(s0, s1, s2, s3)
        out[i] = r
    return out


@njit(cache=True)
def rng_uniform_selftest(seed, count):
    out = np.empty(count, np.float64)
    s0, s1, s2, s3 = _init_state(U64(seed))
    for i in range(count):
        out[i], s0, s1, s2, s3 = _uniform(s0, s1, s2, s3)
    return out


@njit(cache=True)
def stream_seed_selftest(master_seed, run_index):
    return _stream_seed(U64(master_seed), U64(run_index))


# ---------------------------------------------------------------------------
# Weight evaluation
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _weight(kind, alpha, rho, eps, bump_k, phi, x):
    if kind == KIND_QUADRATIC_ORIGIN:
        if x == 0:
            v = np.float64(phi + 1)
            return v * v
        v = np.float64(x)
        return v * v
    d = np.float64(phi // 2 + 1) ** rho
    if kind == KIND_PERTURBED and phi % 2 == 0 and phi // 2 == bump_k:
        d += eps
    return d * np.float64(x + 1) ** alpha


@njit(cache=True, inline="always")
def _log_weight(kind, alpha, rho, eps, bump_k, phi, x):
    if kind == KIND_QUADRATIC_ORIGIN:
        if x == 0:
            return 2.0 * np.log(np.float64(phi + 1))
        return 2.0 * np.log(np.float64(x))
    ld = rho * np.log(np.float64(phi // 2 + 1))
    if kind == KIND_PERTURBED and phi % 2 == 0 and phi // 2 == bump_k:
        ld += np.log1p(eps * np.exp(-ld))
    return ld + alpha * np.log(np.float64(x + 1))


@njit(cache=True, inline="always")
def _edge_weight(kind, rho, eps, bump_k, phi, x, f0x):
    """_weight with the initial profile factored out (cached by caller)."""
    if kind == KIND_QUADRATIC_ORIGIN:
        if x == 0:
            v = np.float64(phi + 1)
            return v * v
        return f0x
    d = np.float64(phi // 2 + 1) ** rho
    if kind == KIND_PERTURBED and phi % 2 == 0 and phi // 2 == bump_k:
        d += eps
    return d * f0x


# ---------------------------------------------------------------------------
# Walk engine
# ---------------------------------------------------------------------------

@njit(cache=True)
def walk_kernel(kind, alpha, rho, eps, bump_k,
                horizon,
                escape_level, visits_vertex, visits_count, stop_on_return,
                window_sizes, checkpoints, s2_tail_start,
                series_stride, pos_stride, drift_every,
                s0, s1, s2, s3):
    """Run one walk; the python engine in errwlab.walk mirrors this loop.

    Returns a flat tuple; see errwlab.walk._from_kernel for field names.
    """
    cap = 1024
    phi = np.zeros(cap, np.int64)
    w = np.zeros(cap, np.float64)
    f0 = np.zeros(cap, np.float64)
    npre = np.zeros(cap, np.int64)
    nall = np.zeros(cap, np.int64)
    w[0] = _weight(kind, alpha, rho, eps, bump_k, 0, 0)
    f0[0] = w[0]
    hi = 0

    pos = 0
    maxpos = 0
    tau = np.int64(-1)
    returns = np.int64(0)
    last_return = np.int64(-1)
    visits = np.int64(0)
    stop_reason = STOP_HORIZON
    steps_done = horizon

    m = 0.0
    mc = 0.0
    s2sum = 0.0
    s2c = 0.0
    corr = 0.0
    corrc = 0.0
    drift_max = 0.0

    nwin = window_sizes.shape[0]
    win_min = np.empty(nwin, np.int64)
    win_max = np.empty(nwin, np.int64)
    for i in range(nwin):
        win_min[i] = np.int64(1) << 62
        win_max[i] = -1

    nck = checkpoints.shape[0]
    ck_m = np.zeros(nck, np.float64)
    ck_theta = np.zeros(nck, np.float64)
    ck_i = 0

    ns_cap = 0
    if series_stride > 0:
        ns_cap = horizon // series_stride + 1
    ser_n = np.zeros(ns_cap, np.int64)
    ser_m = np.zeros(ns_cap, np.float64)
    ser_t = np.zeros(ns_cap, np.float64)
    ser_s2 = np.zeros(ns_cap, np.float64)
    ser_cnt = 0

    np_cap = 0
    if pos_stride > 0:
        np_cap = horizon // pos_stride + 1
    pos_buf = np.zeros(np_cap, np.int64)
    pos_cnt = 0
    if pos_stride > 0:
        pos_buf[0] = 0
        pos_cnt = 1

    s2_at_tail = 0.0

    for n in range(horizon):
        x = pos
        if x == 0:
            right = True
        else:
            r = w[x - 1] / w[x]
            if not np.isfinite(r):
                r = np.exp(_log_weight(kind, alpha, rho, eps, bump_k,
                                       phi[x - 1], x - 1)
                           - _log_weight(kind, alpha, rho, eps, bump_k,
                                         phi[x], x))
            p_right = 1.0 / (1.0 + r)
            u, s0, s1, s2, s3 = _uniform(s0, s1, s2, s3)
            right = u < p_right

        pre_tau = tau < 0
        if right:
            e = x
            phi[e] += 1
            w_old = w[e]
            # the factor index phi//2 is unchanged by an up-crossing, so
            # the weight moves only where it still depends on parity
            if (kind == KIND_PERTURBED and phi[e] // 2 == bump_k) or \
                    (kind == KIND_QUADRATIC_ORIGIN and e == 0):
                w_new = _edge_weight(kind, rho, eps, bump_k, phi[e], e, f0[e])
            else:
                w_new = w_old
            w[e] = w_new
            dm = 1.0 / w_new
            dcorr = 1.0 / w_old - 1.0 / w_new
            pos = x + 1
        else:
            e = x - 1
            phi[e] += 1
            dm = -1.0 / w[e]
            w[e] = _edge_weight(kind, rho, eps, bump_k, phi[e], e, f0[e])
            dcorr = 0.0
            pos = x - 1

        if pre_tau:
            y = dm - mc
            t_ = m + y
            mc = (t_ - m) - y
            m = t_
            d2 = dm * dm
            y = d2 - s2c
            t_ = s2sum + y
            s2c = (t_ - s2sum) - y
            s2sum = t_
            if dcorr != 0.0:
                y = dcorr - corrc
                t_ = corr + y
                corrc = (t_ - corr) - y
                corr = t_
            if not right:
                npre[x] += 1
        if not right:
            nall[x] += 1

        if pos > maxpos:
            maxpos = pos
            if pos + 1 >= cap:
                newcap = cap
                while pos + 1 >= newcap:
                    newcap *= 2
                phi2 = np.zeros(newcap, np.int64)
                w2 = np.zeros(newcap, np.float64)
                f02 = np.zeros(newcap, np.float64)
                npre2 = np.zeros(newcap, np.int64)
                nall2 = np.zeros(newcap, np.int64)
                phi2[:cap] = phi
                w2[:cap] = w
                f02[:cap] = f0
                npre2[:cap] = npre
                nall2[:cap] = nall
                phi = phi2
                w = w2
                f0 = f02
                npre = npre2
                nall = nall2
                cap = newcap
            while hi < pos:
                hi += 1
                f0[hi] = _weight(kind, alpha, rho, eps, bump_k, 0, hi)
                w[hi] = f0[hi]

        stepno = n + 1
        if pos == 0:
            returns += 1
            last_return = stepno
            if tau < 0:
                tau = stepno
                m = 0.0
                mc = 0.0

        if tau < 0 and drift_every > 0 and stepno % drift_every == 0:
            direct = 0.0
            for yv in range(pos):
                direct += 1.0 / w[yv]
            denom = abs(direct)
            if denom < 1.0:
                denom = 1.0
            d = abs(m - direct) / denom
            if d > drift_max:
                drift_max = d
            m = direct
            mc = 0.0

        for i in range(nwin):
            if stepno > horizon - window_sizes[i]:
                if pos < win_min[i]:
                    win_min[i] = pos
                if pos > win_max[i]:
                    win_max[i] = pos

        if ck_i < nck and stepno == checkpoints[ck_i]:
            mm = m if tau < 0 else 0.0
            ck_m[ck_i] = mm
            ck_theta[ck_i] = mm + corr
            ck_i += 1

        if s2_tail_start > 0 and stepno == s2_tail_start:
            s2_at_tail = s2sum

        if series_stride > 0 and stepno % series_stride == 0:
            mm = m if tau < 0 else 0.0
            ser_n[ser_cnt] = stepno
            ser_m[ser_cnt] = mm
            ser_t[ser_cnt] = mm + corr
            ser_s2[ser_cnt] = s2sum
            ser_cnt += 1

        if pos_stride > 0 and stepno % pos_stride == 0:
            pos_buf[pos_cnt] = pos
            pos_cnt += 1

        if escape_level >= 0 and pos >= escape_level:
            stop_reason = STOP_ESCAPE
            steps_done = stepno
            break
        if visits_vertex >= 0 and pos == visits_vertex:
            visits += 1
            if visits >= visits_count:
                stop_reason = STOP_VISITS
                steps_done = stepno
                break
        if stop_on_return and tau == stepno:
            stop_reason = STOP_RETURN
            steps_done = stepno
            break

    for i in range(nwin):
        if win_max[i] < 0:
            win_min[i] = pos
            win_max[i] = pos

    m_final = m if tau < 0 else 0.0
    theta_final = m_final + corr
    s2_tail_fraction = 0.0
    if s2_tail_start > 0 and steps_done >= s2_tail_start and s2sum > 0.0:
        s2_tail_fraction = (s2sum - s2_at_tail) / s2sum

    return (steps_done, stop_reason, pos, maxpos, tau, returns, last_return,
            visits, m_final, theta_final, s2sum, s2_at_tail, s2_tail_fraction,
            drift_max, phi[:maxpos].copy(), npre[:maxpos + 1].copy(),
            nall[:maxpos + 1].copy(), win_min, win_max, ck_m, ck_theta,
            ser_n[:ser_cnt].copy(), ser_m[:ser_cnt].copy(),
            ser_t[:ser_cnt].copy(), ser_s2[:ser_cnt].copy(),
            pos_buf[:pos_cnt].copy())


# ---------------------------------------------------------------------------
# Path sampling (Monte Carlo against the exact enumerators)
# ---------------------------------------------------------------------------

@njit(cache=True)
def sample_walk_paths(kind, alpha, rho, eps, bump_k, depth, n_samples,
                      master_seed, base_index):
    """Sample depth-step walk paths; returns one bit-code per sample.

    Bit j-1 of a code records step j (1 = right); step 0 is the forced
    reflection and is not encoded.
    """
    codes = np.zeros(n_samples, np.uint32)
    phi = np.zeros(depth + 2, np.int64)
    w = np.zeros(depth + 2, np.float64)
    for i in range(n_samples):
        seed = _stream_seed(U64(master_seed), U64(base_index + i))
        s0, s1, s2, s3 = _init_state(seed)
        for j in range(depth + 2):
            phi[j] = 0
            w[j] = _weight(kind, alpha, rho, eps, bump_k, 0, j)
        code = np.uint32(0)
        pos = 0
        for step in range(depth):
            x = pos
            if x == 0:
                right = True
            else:
                r = w[x - 1] / w[x]
                p_right = 1.0 / (1.0 + r)
                u, s0, s1, s2, s3 = _uniform(s0, s1, s2, s3)
                right = u < p_right
            if right:
                e = x
                pos = x + 1
            else:
                e = x - 1
                pos = x - 1
            phi[e] += 1
            w[e] = _weight(kind, alpha, rho, eps, bump_k, phi[e], e)
            if right and step > 0:
                code |= np.uint32(1) << np.uint32(step - 1)
        codes[i] = code
    return codes


@njit(cache=True)
def sample_rubin_paths(alpha, rho, depth, n_samples, master_seed, base_index):
    """Sample depth-step paths from per-vertex urns run on their clocks.

    Each vertex x >= 1 owns a two-colour urn embedded in continuous time:
    colour counts advance when their accumulated exponential clocks fire,
    the black side running a factor gamma_x = ((x+1)/x)**alpha fast.
    Black draws move the walk right, white draws left.  Codes as in
    sample_walk_paths.
    """
    codes = np.zeros(n_samples, np.uint32)
    size = depth + 2
    wnext = np.zeros(size, np.float64)
    bnext = np.zeros(size, np.float64)
    wcnt = np.zeros(size, np.int64)
    bcnt = np.zeros(size, np.int64)
    for i in range(n_samples):
        seed = _stream_seed(U64(master_seed), U64(base_index + i))
        s0, s1, s2, s3 = _init_state(seed)
        for j in range(size):
            wcnt[j] = 0
            bcnt[j] = 0
        code = np.uint32(0)
        pos = 0
        for step in range(depth):
            x = pos
            if x == 0:
                right = True
            else:
                if wcnt[x] == 0:
                    # first visit: load both clocks with their first firing
                    gamma = (np.float64(x + 1) / np.float64(x)) ** alpha
                    e1, s0, s1, s2, s3 = _exponential(s0, s1, s2, s3)
                    e2, s0, s1, s2, s3 = _exponential(s0, s1, s2, s3)
                    wcnt[x] = 1
                    bcnt[x] = 1
                    wnext[x] = e1
                    bnext[x] = e2 / gamma
                right = bnext[x] < wnext[x]
                if right:
                    bcnt[x] += 1
                    gamma = (np.float64(x + 1) / np.float64(x)) ** alpha
                    e, s0, s1, s2, s3 = _exponential(s0, s1, s2, s3)
                    bnext[x] += e / (gamma * np.float64(bcnt[x]) ** rho)
                else:
                    wcnt[x] += 1
                    e, s0, s1, s2, s3 = _exponential(s0, s1, s2, s3)
                    wnext[x] += e / np.float64(wcnt[x]) ** rho
            pos = x + 1 if right else x - 1
            if right and step > 0:
                code |= np.uint32(1) << np.uint32(step - 1)
        codes[i] = code
    return codes


# ---------------------------------------------------------------------------
# Urn kernels
# ---------------------------------------------------------------------------

@njit(cache=True)
def bstar_direct_batch(gamma, rho, n, n_samples, master_seed, base_index,
                       draw_cap):
    """Black count when the white count first reaches n, by direct draws."""
    bstars = np.zeros(n_samples, np.int64)
    draws = np.zeros(n_samples, np.int64)
    censored = np.zeros(n_samples, np.bool_)
    for i in range(n_samples):
        seed = _stream_seed(U64(master_seed), U64(base_index + i))
        s0, s1, s2, s3 = _init_state(seed)
        wc = np.int64(1)
        bc = np.int64(1)
        wpow = 1.0
        bpow = gamma
        d = np.int64(0)
        while wc < n:
            if d >= draw_cap:
                censored[i] = True
                break
            u, s0, s1, s2, s3 = _uniform(s0, s1, s2, s3)
            if u < wpow / (wpow + bpow):
                wc += 1
                wpow = np.float64(wc) ** rho
            else:
                bc += 1
                bpow = gamma * np.float64(bc) ** rho
            d += 1
        bstars[i] = bc
        draws[i] = d
    return bstars, draws, censored


@njit(cache=True)
def bstar_rubin_batch(gamma, rho, n, n_samples, master_seed, base_index,
                      clock_cap):
    """Black count at white count n via the exponential clock race."""
    bstars = np.zeros(n_samples, np.int64)
    draws = np.zeros(n_samples, np.int64)
    censored = np.zeros(n_samples, np.bool_)
    for i in range(n_samples):
        seed = _stream_seed(U64(master_seed), U64(base_index + i))
        s0, s1, s2, s3 = _init_state(seed)
        thr = 0.0
        for k in range(1, n):
            e, s0, s1, s2, s3 = _exponential(s0, s1, s2, s3)
            thr += e / np.float64(k) ** rho
        fired = np.int64(0)
        bt = 0.0
        while True:
            if fired >= clock_cap:
                censored[i] = True
                break
            e, s0, s1, s2, s3 = _exponential(s0, s1, s2, s3)
            bt += e / (gamma * np.float64(fired + 1) ** rho)
            if bt >= thr:
                break
            fired += 1
        bstars[i] = fired + 1
        draws[i] = (n - 1) + fired
    return bstars, draws, censored

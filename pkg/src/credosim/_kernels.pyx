# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled hot loops: matrix-game learning episodes and the Monte-Carlo
stage-game estimator.

Draw-for-draw equivalent to `_kernels_py`; both consume the raw uniform
stream of a PCG64 bit generator in the same order.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t
from libc.math cimport sqrt, INFINITY

import numpy as np
from numpy.random import PCG64

NAME = "compiled"


cdef inline double nd(bitgen_t *rng) noexcept nogil:
    return rng.next_double(rng.state)


def mc_incentive(double psi, double phi, double omega,
                 double b, double c, double nu,
                 double sigma_t, double sigma_o,
                 long samples, object seed):
    """Sample mean and stderr of the cooperate-minus-defect utility gain."""
    bg = PCG64(seed)
    cdef bitgen_t *rng = <bitgen_t *> PyCapsule_GetPointer(bg.capsule, "BitGenerator")
    cdef double total = 0.0
    cdef double total_sq = 0.0
    cdef double u1, u2, coop_prob
    cdef double ri_c, rj_c, ri_d, rj_d, pair_c, pair_d, tr_c, tr_d, gain
    cdef bint teammate, cp_coop
    cdef long s
    with nogil:
        for s in range(samples):
            u1 = nd(rng)
            teammate = u1 < nu
            u2 = nd(rng)
            coop_prob = sigma_t if teammate else sigma_o
            cp_coop = u2 < coop_prob
            if cp_coop:
                ri_c = b - c
                rj_c = b - c
                ri_d = b
                rj_d = -c
            else:
                ri_c = -c
                rj_c = b
                ri_d = 0.0
                rj_d = 0.0
            pair_c = 0.5 * (ri_c + rj_c)
            pair_d = 0.5 * (ri_d + rj_d)
            tr_c = pair_c if teammate else ri_c
            tr_d = pair_d if teammate else ri_d
            gain = (psi * ri_c + phi * tr_c + omega * pair_c) \
                 - (psi * ri_d + phi * tr_d + omega * pair_d)
            total += gain
            total_sq += gain * gain
    cdef double mean = total / samples
    cdef double var, stderr
    if samples > 1:
        var = total_sq - total * total / samples
        if var < 0.0:
            var = 0.0
        var = var / (samples - 1)
        stderr = sqrt(var / samples)
    else:
        stderr = INFINITY
    return mean, stderr


cdef inline long select_action(double q_c, double q_d, double eps, bitgen_t *rng) noexcept nogil:
    cdef double u = nd(rng)
    if u < eps:
        return <long>(nd(rng) * 2.0)
    if q_c > q_d:
        return 0
    if q_d > q_c:
        return 1
    return <long>(nd(rng) * 2.0)


def run_ipd(double[:, :, ::1] q,
            long[::1] agent_team,
            long[:, ::1] teammates,
            long[:, ::1] outsiders,
            double[::1] psi, double[::1] phi, double[::1] omega,
            double b, double c, double nu,
            long episodes, long window,
            double lr, double eps_start, double eps_end, long eps_decay,
            object seed):
    """Sequential teamed-matrix-game learning loop; returns aggregate counters.

    `q` (shape [N, num_teams, 2], actions C=0/D=1) is updated in place and
    holds the final policies.
    """
    bg = PCG64(seed)
    cdef bitgen_t *rng = <bitgen_t *> PyCapsule_GetPointer(bg.capsule, "BitGenerator")

    cdef long n = q.shape[0]
    cdef long num_teams = q.shape[1]
    cdef long nt = teammates.shape[1]
    cdef long no = outsiders.shape[1]

    team_size_arr = np.zeros(num_teams, dtype=np.int64)
    cdef long[::1] team_size = team_size_arr
    cdef long i
    for i in range(n):
        team_size[agent_team[i]] += 1

    cdef long n_windows = episodes // window if window > 0 else 0
    win_in_coop_arr = np.zeros(n_windows, dtype=np.int64)
    win_in_n_arr = np.zeros(n_windows, dtype=np.int64)
    win_out_coop_arr = np.zeros(n_windows, dtype=np.int64)
    win_out_n_arr = np.zeros(n_windows, dtype=np.int64)
    win_credo_sum_arr = np.zeros(n_windows, dtype=np.float64)
    fq_credo_arr = np.zeros(n, dtype=np.float64)
    cdef long[::1] win_in_coop = win_in_coop_arr
    cdef long[::1] win_in_n = win_in_n_arr
    cdef long[::1] win_out_coop = win_out_coop_arr
    cdef long[::1] win_out_n = win_out_n_arr
    cdef double[::1] win_credo_sum = win_credo_sum_arr
    cdef double[::1] fq_credo = fq_credo_arr

    cdef long fq_start = episodes - episodes // 4
    cdef long fq_in_coop = 0, fq_in_n = 0, fq_out_coop = 0, fq_out_n = 0
    cdef long pair_in = 0

    exo_arr = np.zeros(n, dtype=np.float64)
    r_arr = np.zeros(n, dtype=np.float64)
    cp_arr = np.zeros(n, dtype=np.int64)
    obs_f_arr = np.zeros(n, dtype=np.int64)
    obs_c_arr = np.zeros(n, dtype=np.int64)
    act_f_arr = np.zeros(n, dtype=np.int64)
    act_c_arr = np.zeros(n, dtype=np.int64)
    team_sum_arr = np.zeros(num_teams, dtype=np.float64)
    cdef double[::1] exo = exo_arr
    cdef double[::1] r = r_arr
    cdef long[::1] cp = cp_arr
    cdef long[::1] obs_f = obs_f_arr
    cdef long[::1] obs_c = obs_c_arr
    cdef long[::1] act_f = act_f_arr
    cdef long[::1] act_c = act_c_arr
    cdef double[::1] team_sum = team_sum_arr

    cdef long e, k, j, s_f, s_c, a_f, a_c, w, coop
    cdef double eps, u, total, sr, tr, credo_total
    cdef bint in_window, in_fq

    with nogil:
        for e in range(episodes):
            if eps_decay > 0 and e < eps_decay:
                eps = eps_start + (eps_end - eps_start) * (<double>e / <double>eps_decay)
            else:
                eps = eps_end
            for i in range(n):
                exo[i] = 0.0
            for k in range(n):
                u = nd(rng)
                if u < nu:
                    j = teammates[k, <long>(nd(rng) * nt)]
                else:
                    j = outsiders[k, <long>(nd(rng) * no)]
                s_f = agent_team[j]
                s_c = agent_team[k]
                a_f = select_action(q[k, s_f, 0], q[k, s_f, 1], eps, rng)
                a_c = select_action(q[j, s_c, 0], q[j, s_c, 1], eps, rng)
                if a_f == 0 and a_c == 0:
                    exo[k] += b - c
                    exo[j] += b - c
                elif a_f == 0:
                    exo[k] += -c
                    exo[j] += b
                elif a_c == 0:
                    exo[k] += b
                    exo[j] += -c
                cp[k] = j
                obs_f[k] = s_f
                obs_c[k] = s_c
                act_f[k] = a_f
                act_c[k] = a_c

            for i in range(num_teams):
                team_sum[i] = 0.0
            total = 0.0
            for i in range(n):
                team_sum[agent_team[i]] += exo[i]
                total += exo[i]
            sr = total / n
            for i in range(n):
                tr = team_sum[agent_team[i]] / team_size[agent_team[i]]
                r[i] = psi[i] * exo[i] + phi[i] * tr + omega[i] * sr

            for k in range(n):
                j = cp[k]
                q[k, obs_f[k], act_f[k]] += lr * (r[k] - q[k, obs_f[k], act_f[k]])
                q[j, obs_c[k], act_c[k]] += lr * (r[j] - q[j, obs_c[k], act_c[k]])

            w = e // window if window > 0 else -1
            in_window = 0 <= w < n_windows
            in_fq = e >= fq_start
            credo_total = 0.0
            for i in range(n):
                credo_total += r[i]
            for k in range(n):
                coop = (1 if act_f[k] == 0 else 0) + (1 if act_c[k] == 0 else 0)
                if agent_team[k] == agent_team[cp[k]]:
                    pair_in += 1
                    if in_window:
                        win_in_coop[w] += coop
                        win_in_n[w] += 2
                    if in_fq:
                        fq_in_coop += coop
                        fq_in_n += 2
                else:
                    if in_window:
                        win_out_coop[w] += coop
                        win_out_n[w] += 2
                    if in_fq:
                        fq_out_coop += coop
                        fq_out_n += 2
            if in_window:
                win_credo_sum[w] += credo_total
            if in_fq:
                for i in range(n):
                    fq_credo[i] += r[i]

    return {
        "win_in_coop": win_in_coop_arr,
        "win_in_n": win_in_n_arr,
        "win_out_coop": win_out_coop_arr,
        "win_out_n": win_out_n_arr,
        "win_credo_sum": win_credo_sum_arr,
        "fq_credo": fq_credo_arr,
        "fq_in_coop": fq_in_coop,
        "fq_in_n": fq_in_n,
        "fq_out_coop": fq_out_coop,
        "fq_out_n": fq_out_n,
        "pair_in": pair_in,
        "pair_total": episodes * n,
    }

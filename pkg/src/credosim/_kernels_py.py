"""Pure-Python fallbacks for the compiled hot loops.

These mirror `_kernels.pyx` draw for draw: both consume the raw uniform
stream of a PCG64 generator in the same order, so the matrix-game loop is
bit-identical across backends. The Monte-Carlo estimator vectorizes its
outcome arithmetic with numpy (same uniform stream; accumulation order of
the mean differs from the compiled loop only at float rounding level).
"""

from __future__ import annotations

import math

import numpy as np

NAME = "python"

_MC_CHUNK = 1 << 16


def mc_incentive(psi, phi, omega, b, c, nu, sigma_t, sigma_o, samples, seed):
    """Sample mean and stderr of the cooperate-minus-defect utility gain."""
    rng = np.random.Generator(np.random.PCG64(seed))
    total = 0.0
    total_sq = 0.0
    remaining = samples
    while remaining > 0:
        m = min(remaining, _MC_CHUNK)
        u = rng.random((m, 2))
        teammate = u[:, 0] < nu
        coop_prob = np.where(teammate, sigma_t, sigma_o)
        cp_coop = u[:, 1] < coop_prob
        # outcome payoffs (focal, counterpart) if the focal cooperates / defects
        ri_c = np.where(cp_coop, b - c, -c)
        rj_c = np.where(cp_coop, b - c, b)
        ri_d = np.where(cp_coop, b, 0.0)
        rj_d = np.where(cp_coop, -c, 0.0)
        pair_c = 0.5 * (ri_c + rj_c)
        pair_d = 0.5 * (ri_d + rj_d)
        tr_c = np.where(teammate, pair_c, ri_c)
        tr_d = np.where(teammate, pair_d, ri_d)
        util_c = psi * ri_c + phi * tr_c + omega * pair_c
        util_d = psi * ri_d + phi * tr_d + omega * pair_d
        gain = util_c - util_d
        total += float(gain.sum())
        total_sq += float((gain * gain).sum())
        remaining -= m
    mean = total / samples
    if samples > 1:
        var = max(total_sq - total * total / samples, 0.0) / (samples - 1)
        stderr = math.sqrt(var / samples)
    else:
        stderr = math.inf
    return mean, stderr


def _select_action(q_c, q_d, eps, rng):
    u = rng.random()
    if u < eps:
        return int(rng.random() * 2.0)
    if q_c > q_d:
        return 0
    if q_d > q_c:
        return 1
    return int(rng.random() * 2.0)


def run_ipd(
    q,
    agent_team,
    teammates,
    outsiders,
    psi,
    phi,
    omega,
    b,
    c,
    nu,
    episodes,
    window,
    lr,
    eps_start,
    eps_end,
    eps_decay,
    seed,
):
    """Sequential teamed-matrix-game learning loop; returns aggregate counters.

    `q` (shape [N, num_teams, 2], actions C=0/D=1) is updated in place and
    holds the final policies.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    n = q.shape[0]
    num_teams = len(set(int(t) for t in agent_team))
    team_size = [0] * num_teams
    for a in range(n):
        team_size[int(agent_team[a])] += 1
    nt = teammates.shape[1]
    no = outsiders.shape[1]

    n_windows = episodes // window if window > 0 else 0
    win_in_coop = np.zeros(n_windows, dtype=np.int64)
    win_in_n = np.zeros(n_windows, dtype=np.int64)
    win_out_coop = np.zeros(n_windows, dtype=np.int64)
    win_out_n = np.zeros(n_windows, dtype=np.int64)
    win_credo_sum = np.zeros(n_windows, dtype=np.float64)
    fq_credo = np.zeros(n, dtype=np.float64)
    fq_start = episodes - episodes // 4
    fq_in_coop = fq_in_n = fq_out_coop = fq_out_n = 0
    pair_in = 0

    exo = [0.0] * n
    r = [0.0] * n
    cp = [0] * n
    obs_f = [0] * n
    obs_c = [0] * n
    act_f = [0] * n
    act_c = [0] * n

    for e in range(episodes):
        if eps_decay > 0 and e < eps_decay:
            eps = eps_start + (eps_end - eps_start) * (e / eps_decay)
        else:
            eps = eps_end
        for i in range(n):
            exo[i] = 0.0
        for k in range(n):
            u = rng.random()
            if u < nu:
                j = int(teammates[k, int(rng.random() * nt)])
            else:
                j = int(outsiders[k, int(rng.random() * no)])
            s_f = int(agent_team[j])
            s_c = int(agent_team[k])
            a_f = _select_action(q[k, s_f, 0], q[k, s_f, 1], eps, rng)
            a_c = _select_action(q[j, s_c, 0], q[j, s_c, 1], eps, rng)
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

        team_sum = [0.0] * num_teams
        total = 0.0
        for i in range(n):
            team_sum[int(agent_team[i])] += exo[i]
            total += exo[i]
        sr = total / n
        for i in range(n):
            tr = team_sum[int(agent_team[i])] / team_size[int(agent_team[i])]
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
            if int(agent_team[k]) == int(agent_team[cp[k]]):
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
        "win_in_coop": win_in_coop,
        "win_in_n": win_in_n,
        "win_out_coop": win_out_coop,
        "win_out_n": win_out_n,
        "win_credo_sum": win_credo_sum,
        "fq_credo": fq_credo,
        "fq_in_coop": fq_in_coop,
        "fq_in_n": fq_in_n,
        "fq_out_coop": fq_out_coop,
        "fq_out_n": fq_out_n,
        "pair_in": pair_in,
        "pair_total": episodes * n,
    }

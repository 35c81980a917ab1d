"""Compiled inner loops (numba) shared by the game and evolution modules.

Random draw protocol
--------------------
Every stochastic phase consumes uniforms from a single numpy Generator in a
frozen order, so the compiled path and the pure-python operations can be
compared draw for draw:

  per generation:
    1. placement:  one block of N-1 uniforms (Fisher-Yates indices)
    2. games:      one block of N * games * (1+k) uniforms, consumed
                   cell-major, then game-major, then [focal, slot 0..k-1]
    3. selection:  one block of N uniforms
    4. mutation:   per offspring, interleaved scalar draws
                   (p_c flag, p_c value if flagged, p_ac flag, p_ac value)

  single focal game: one block of 1+k uniforms, [focal, slot 0..k-1].

Each slot resolves role and action from ONE uniform u: the slot is an agent
iff u < rho, and the conditional remainders u/rho and (u-rho)/(1-rho) are
again independent Uniform[0,1) variates, reused as the occupant's action
draw.  This keeps the per-game draw count at 1+k regardless of the mask.

Policy codes match the Policy IntEnum: 0 baseline, 1 mandatory cooperation,
2 player controlled, 3 mimic.
"""

import numpy as np
from numba import njit

# Policy dispatch codes (kept in sync with model.Policy by a unit test).
BASELINE = 0
MANDATORY = 1
CONTROLLED = 2
MIMIC = 3


@njit(cache=True)
def game_batch_kernel(n_games, focal_pc, focal_pac, peripheral_pc,
                      policy_id, r, rho, mimic_independent, rng):
    """Play n_games focal games with fixed genomes; return focal payoffs.

    Consumes exactly n_games * (1+k) uniforms, identical to n_games
    sequential single-game calls.
    """
    k = peripheral_pc.shape[0]
    inv_rho = 1.0 / rho if rho > 0.0 else 0.0
    inv_1m = 1.0 / (1.0 - rho) if rho < 1.0 else 0.0
    payoffs = np.empty(n_games)
    u = rng.random(n_games * (1 + k))
    idx = 0
    for g in range(n_games):
        fc = 1.0 if u[idx] < focal_pc else 0.0
        idx += 1
        n_c = 0.0
        for s in range(k):
            us = u[idx]
            idx += 1
            if us < rho:
                if policy_id == MANDATORY:
                    coop = True
                elif policy_id == CONTROLLED:
                    coop = us * inv_rho < focal_pac
                elif policy_id == MIMIC:
                    if mimic_independent:
                        coop = us * inv_rho < focal_pc
                    else:
                        coop = fc == 1.0
                else:
                    coop = False  # unreachable: baseline forces rho == 0
            else:
                coop = (us - rho) * inv_1m < peripheral_pc[s]
            if coop:
                n_c += 1.0
        payoffs[g] = r * (n_c + fc) / (k + 1) - fc
    return payoffs


@njit(cache=True)
def evolve_kernel(pc, pac, nbr_cells, games, policy_id, r, rho, mu,
                  n_gens, mimic_independent, rng, mut_cap):
    """Run the full generational loop in place on pc/pac.

    Returns per-generation statistics, the parent-index matrix, and a
    mutation delta log (generation, index, new p_c, new p_ac per mutated
    offspring).  n_mut counts every mutation event even past mut_cap; the
    caller reruns with a larger capacity if n_mut > mut_cap.
    """
    n = pc.shape[0]
    k = nbr_cells.shape[1]
    inv_rho = 1.0 / rho if rho > 0.0 else 0.0
    inv_1m = 1.0 / (1.0 - rho) if rho < 1.0 else 0.0

    mean_pc = np.empty(n_gens)
    mean_pac = np.empty(n_gens)
    coop_freq = np.empty(n_gens)
    parents = np.empty((n_gens, n), np.int32)
    mut_t = np.empty(mut_cap, np.int32)
    mut_i = np.empty(mut_cap, np.int32)
    mut_pc = np.empty(mut_cap)
    mut_pac = np.empty(mut_cap)
    n_mut = 0

    perm = np.empty(n, np.int64)
    nbr_pc = np.empty((n, k))
    scores = np.empty(n)
    cum = np.empty(n)
    new_pc = np.empty(n)
    new_pac = np.empty(n)

    for t in range(n_gens):
        s_pc = 0.0
        s_pac = 0.0
        for i in range(n):
            s_pc += pc[i]
            s_pac += pac[i]
        mean_pc[t] = s_pc / n
        mean_pac[t] = s_pac / n

        # 1. fresh uniform placement onto the grid: perm[cell] = player
        pb = rng.random(n - 1)
        for i in range(n):
            perm[i] = i
        for i in range(n - 1, 0, -1):
            j = int(pb[n - 1 - i] * (i + 1))
            tmp = perm[i]
            perm[i] = perm[j]
            perm[j] = tmp

        for c in range(n):
            for s in range(k):
                nbr_pc[c, s] = pc[perm[nbr_cells[c, s]]]

        # 2. focal games; only focal payoffs accumulate
        gb = rng.random(n * games * (1 + k))
        for i in range(n):
            scores[i] = 0.0
        n_coop = 0
        idx = 0
        for c in range(n):
            p = perm[c]
            fpc = pc[p]
            fpac = pac[p]
            for g in range(games):
                fci = np.int64(gb[idx] < fpc)
                fc = np.float64(fci)
                idx += 1
                n_c = np.int64(0)
                if policy_id == MIMIC and not mimic_independent:
                    for s in range(k):
                        u = gb[idx]
                        idx += 1
                        a = np.int64(u < rho)
                        pl = np.int64((u - rho) * inv_1m < nbr_pc[c, s])
                        n_c += a * fci + (1 - a) * pl
                elif policy_id == MANDATORY:
                    for s in range(k):
                        u = gb[idx]
                        idx += 1
                        a = np.int64(u < rho)
                        pl = np.int64((u - rho) * inv_1m < nbr_pc[c, s])
                        n_c += a + (1 - a) * pl
                elif policy_id == CONTROLLED:
                    for s in range(k):
                        u = gb[idx]
                        idx += 1
                        a = np.int64(u < rho)
                        ag = np.int64(u * inv_rho < fpac)
                        pl = np.int64((u - rho) * inv_1m < nbr_pc[c, s])
                        n_c += a * ag + (1 - a) * pl
                elif policy_id == MIMIC:  # independent-draw variant
                    for s in range(k):
                        u = gb[idx]
                        idx += 1
                        a = np.int64(u < rho)
                        ag = np.int64(u * inv_rho < fpc)
                        pl = np.int64((u - rho) * inv_1m < nbr_pc[c, s])
                        n_c += a * ag + (1 - a) * pl
                else:  # baseline: rho == 0, every slot is a player
                    for s in range(k):
                        n_c += np.int64(gb[idx] < nbr_pc[c, s])
                        idx += 1
                scores[p] += r * (n_c + fc) / (k + 1) - fc
                n_coop += n_c + fci
        coop_freq[t] = n_coop / (n * games * (k + 1))

        # 3. fitness shift + roulette selection
        tot = 0.0
        for i in range(n):
            tot += scores[i] + games
            cum[i] = tot
        if cum[n - 1] <= 0.0:  # all-zero weights: uniform fallback
            for i in range(n):
                cum[i] = i + 1.0
        sb = rng.random(n)
        for i in range(n):
            u = sb[i] * cum[n - 1]
            lo = 0
            hi = n - 1
            while lo < hi:
                mid = (lo + hi) >> 1
                if cum[mid] <= u:
                    lo = mid + 1
                else:
                    hi = mid
            parents[t, i] = lo

        # 4. mutation, interleaved scalar draws per offspring
        for i in range(n):
            par = parents[t, i]
            vpc = pc[par]
            vpac = pac[par]
            hit = False
            if rng.random() < mu:
                vpc = rng.random()
                hit = True
            if rng.random() < mu:
                vpac = rng.random()
                hit = True
            if hit:
                if n_mut < mut_cap:
                    mut_t[n_mut] = t + 1
                    mut_i[n_mut] = i
                    mut_pc[n_mut] = vpc
                    mut_pac[n_mut] = vpac
                n_mut += 1
            new_pc[i] = vpc
            new_pac[i] = vpac
        for i in range(n):
            pc[i] = new_pc[i]
            pac[i] = new_pac[i]

    return (mean_pc, mean_pac, coop_freq, parents,
            mut_t, mut_i, mut_pc, mut_pac, n_mut)

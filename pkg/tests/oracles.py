"""Independent reference computations used by the tests.

Nothing here imports the code under test.
"""
from __future__ import annotations

import numpy as np


def selfish_revenue_markov(alpha: float, gamma: float, max_lead: int = 400) -> float:
    """Attacker's share of main-chain blocks from the lead Markov chain, solved numerically.

    States: 0 (no fork), 0' (tie race, index 1), and leads 1..max_lead
    (index lead + 1). ``rew_*[i, j]`` is transition probability times the
    attacker/honest blocks that the transition settles into the main chain.
    """
    a, g = alpha, gamma
    n = max_lead + 2
    P = np.zeros((n, n))
    rew_att = np.zeros((n, n))
    rew_hon = np.zeros((n, n))

    def idx(lead):
        return lead + 1

    # state 0
    P[0, idx(1)] += a
    P[0, 0] += 1 - a
    rew_hon[0, 0] += 1 - a
    # tie race 0'
    P[1, 0] += a                      # attacker extends its branch: 2 attacker blocks
    rew_att[1, 0] += a * 2
    P[1, 0] += g * (1 - a)            # honest builds on attacker block: 1 + 1
    rew_att[1, 0] += g * (1 - a) * 1
    rew_hon[1, 0] += g * (1 - a) * 1
    P[1, 0] += (1 - g) * (1 - a)      # honest builds on honest block: 2 honest
    rew_hon[1, 0] += (1 - g) * (1 - a) * 2
    # lead 1
    P[idx(1), idx(2)] += a
    P[idx(1), 1] += 1 - a
    # lead 2
    P[idx(2), idx(3)] += a
    P[idx(2), 0] += 1 - a
    rew_att[idx(2), 0] += (1 - a) * 2
    # lead >= 3
    for lead in range(3, max_lead + 1):
        up = idx(min(lead + 1, max_lead))
        P[idx(lead), up] += a
        P[idx(lead), idx(lead - 1)] += 1 - a
        rew_att[idx(lead), idx(lead - 1)] += 1 - a

    A = np.vstack([P.T - np.eye(n), np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1
    pi = np.linalg.lstsq(A, b, rcond=None)[0]
    att = float(pi @ rew_att.sum(axis=1))
    hon = float(pi @ rew_hon.sum(axis=1))
    return att / (att + hon)


def binomial_bounds(n: int, p: float, z: float = 3.0) -> tuple[float, float]:
    mean = n * p
    sd = (n * p * (1 - p)) ** 0.5
    return mean - z * sd, mean + z * sd

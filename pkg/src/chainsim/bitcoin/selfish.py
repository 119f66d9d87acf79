"""Expected revenue of the lead-based selfish mining strategy."""
from __future__ import annotations


def selfish_relative_revenue(alpha: float, gamma: float) -> float:
    """Attacker's long-run share of main-chain blocks.

    ``alpha`` is the attacker's share of hash power, ``gamma`` the share of
    honest power that mines on the attacker's block during a tie.
    Closed form of the stationary reward rate of the lead Markov chain.
    """
    if not 0 <= alpha < 0.5:
        raise ValueError("alpha must be in [0, 0.5)")
    if not 0 <= gamma <= 1:
        raise ValueError("gamma must be in [0, 1]")
    a, g = alpha, gamma
    num = a * (1 - a) ** 2 * (4 * a + g * (1 - 2 * a)) - a**3
    den = 1 - a * (1 + (2 - a) * a)
    return num / den


def profitability_threshold(gamma: float) -> float:
    """Smallest alpha for which selfish mining beats honest mining."""
    return (1 - gamma) / (3 - 2 * gamma)

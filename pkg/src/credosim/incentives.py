"""Stage-game cooperation incentives across the credo simplex.

`cooperation_incentive` evaluates the closed-form incentive condition for
the teamed one-shot game: positive means cooperating dominates, negative
means defecting, zero means indifference. `monte_carlo_incentive_sign`
estimates the same decision quantity by simulating the ex-ante stage game
under an explicit pairwise reward-sharing model, as an independent check
on the closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import _backend
from .credo import CredoVector
from .errors import DomainError, ValidationError


@dataclass(frozen=True)
class StageGameParams:
    """One-shot game environment: benefit b, cost c, teammate-pairing odds nu."""

    b: float
    c: float
    nu: float
    num_teams: int = 5

    def __post_init__(self):
        if not (self.b > self.c > 0):
            raise DomainError(f"need b > c > 0, got b={self.b}, c={self.c}")
        if not (0.0 <= self.nu <= 1.0):
            raise ValidationError(f"nu={self.nu} outside [0, 1]")
        if self.num_teams < 1:
            raise ValidationError("num_teams must be positive")


@dataclass(frozen=True)
class StrategyProfile:
    """Counterpart cooperation probabilities, split by team relation."""

    sigma_teammate: float
    sigma_other: float

    def __post_init__(self):
        for name, p in (("sigma_teammate", self.sigma_teammate), ("sigma_other", self.sigma_other)):
            if not (0.0 <= p <= 1.0):
                raise ValidationError(f"{name}={p} outside [0, 1]")


@dataclass(frozen=True)
class IncentiveGrid:
    increment: float
    entries: tuple[tuple[CredoVector, float], ...]


def cooperation_incentive(credo: CredoVector, params: StageGameParams) -> float:
    """Closed-form incentive to cooperate; sign gives the dominant action.

    phi * (nu - 2c/(b+c)) + omega * (b-c)/2 - psi * c
    """
    b, c, nu = params.b, params.c, params.nu
    return (
        credo.phi * (nu - 2.0 * c / (b + c))
        + credo.omega * (b - c) / 2.0
        - credo.psi * c
    )


def simplex_lattice(increment: float) -> list[CredoVector]:
    """All credo vectors on the step lattice of the unit simplex.

    The increment must divide 1 within 1e-9; an increment of 1/k yields
    (k+1)(k+2)/2 points.
    """
    if increment <= 0:
        raise ValidationError(f"increment {increment} must be positive")
    k = round(1.0 / increment)
    if k < 1 or abs(k * increment - 1.0) > 1e-9:
        raise ValidationError(f"increment {increment} does not divide 1")
    points = []
    for i in range(k + 1):  # psi steps
        for j in range(k + 1 - i):  # phi steps
            points.append(CredoVector(i / k, j / k, (k - i - j) / k))
    return points


def incentive_grid(params: StageGameParams, increment: float) -> IncentiveGrid:
    """Evaluate the closed-form incentive at every simplex lattice point."""
    entries = tuple(
        (credo, cooperation_incentive(credo, params))
        for credo in simplex_lattice(increment)
    )
    return IncentiveGrid(increment=increment, entries=entries)


def stage_game_expected_gain(credo: CredoVector, params: StageGameParams) -> float:
    """Exact expected credo-utility gain of cooperating in the shared stage game.

    Enumerates the four stage-game outcomes under the pairwise sharing model
    (teammate counterpart: pair rewards split over an effective team of two;
    non-teammate: own reward carries the team component; the pair mean always
    carries the system component). The counterpart's strategy cancels from the
    difference, so no profile argument is needed. This is the quantity
    `monte_carlo_incentive_sign` estimates, in closed form.
    """
    b, c, nu = params.b, params.c, params.nu
    psi, phi, omega = credo.as_tuple()
    # Cooperate-minus-defect utility gain, conditioned on counterpart relation.
    gain_teammate = -psi * c + (phi + omega) * (b - c) / 2.0
    gain_outsider = -(psi + phi) * c + omega * (b - c) / 2.0
    return nu * gain_teammate + (1.0 - nu) * gain_outsider


def monte_carlo_incentive_sign(
    credo: CredoVector,
    params: StageGameParams,
    profile: StrategyProfile,
    samples: int,
    seed: int,
    with_stderr: bool = False,
):
    """Unbiased estimate of E[utility | cooperate] - E[utility | defect].

    Each sample draws the counterpart relation (teammate with probability nu)
    and the counterpart's action from the profile, evaluates the focal agent's
    credo utility under both of its own actions on that common outcome, and
    averages the differences. Converges to `stage_game_expected_gain`.
    """
    if samples < 1:
        raise ValidationError("samples must be >= 1")
    est, stderr = _backend.get().mc_incentive(
        credo.psi,
        credo.phi,
        credo.omega,
        params.b,
        params.c,
        params.nu,
        profile.sigma_teammate,
        profile.sigma_other,
        samples,
        seed,
    )
    if with_stderr:
        return est, stderr
    return est

"""
Forward-backward APP recursions with SIC priors.

The trellis runs over serial positions kappa = 1..n. Its state holds the
unknown symbols (stages s..S) among the last `width` positions, oldest first,
where width is the working memory padded up to a multiple of S so that every
state has the same number of unknown digits. Symbols of stages 1..s-1 are
taken from the genie and never enter the state.

Two step types occur:
  * unknown position: the oldest unknown digit is shifted out and a new one
    shifted in; the branch weight is the slot likelihood fI.
  * known position: the state is unchanged and the metric is scaled by the
    slot likelihood of the known symbol, fII.
For s = 1 there are no known positions and the recursion is the classic FBA.
Positions <= 0 are guard zeros; their state digits are ignored.

Metrics are linear and sum-normalized after every step. The same recursions
run on log-metrics when log_domain is set, which is also the fallback when
linear metrics underflow.
"""

from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Sequence

import numpy as np
from loguru import logger
from scipy.special import logsumexp

from src.channel.auxiliary import AuxiliaryChannel
from src.errors import StateSpaceTooLargeError
from src.modem.alphabet import ModulationAlphabet
from src.sic.apps import AppMatrix
from src.sic.receiver import StageInput

DEFAULT_MAX_STATES = 2 ** 20


def _digits(M: int, k: int) -> np.ndarray:
    """All M^k digit strings, most significant (oldest) first."""
    powers = M ** np.arange(k - 1, -1, -1)
    return (np.arange(M ** k)[:, None] // powers[None, :]) % M


@dataclass(frozen=True)
class StateSpace:
    """Unknown/known split of the working memory for stage s of S."""
    s: int
    S: int
    M: int
    N_tilde: int

    @property
    def width(self) -> int:
        """Working memory padded to a multiple of S (at least S)."""
        return max(1, -(-self.N_tilde // self.S)) * self.S

    @property
    def unknown(self) -> int:
        return (self.S - self.s + 1) * self.width // self.S

    @property
    def known(self) -> int:
        return (self.s - 1) * self.width // self.S

    @property
    def n_states(self) -> int:
        return self.M ** self.unknown

    def check(self, max_states: int = DEFAULT_MAX_STATES) -> None:
        branches = self.M ** (self.unknown + 1)
        if branches > max_states:
            raise StateSpaceTooLargeError(
                f"Stage {self.s}/{self.S}: {branches} trellis branches exceed the cap of {max_states}"
            )

    def stage_of(self, kappa: np.ndarray) -> np.ndarray:
        return (np.asarray(kappa) - 1) % self.S + 1

    def is_unknown(self, kappa) -> np.ndarray:
        return self.stage_of(kappa) >= self.s


@dataclass
class TrellisMetrics:
    """Forward/backward metrics at the stage-s positions and the per-step scales.

    Linear metrics are sum-normalized per position. With log_domain they hold
    log-metrics shifted by their log-sum-exp instead.
    """
    forward: np.ndarray
    backward: np.ndarray
    log_scale: np.ndarray
    cases: Dict[str, int] = field(default_factory=dict)
    log_domain: bool = False

    def apps(self, M: int) -> AppMatrix:
        # newest digit is the least significant one
        if self.log_domain:
            joint = self.forward + self.backward
            return AppMatrix.from_log_weights(logsumexp(joint.reshape(joint.shape[0], -1, M), axis=1))
        joint = self.forward * self.backward
        weights = joint.reshape(joint.shape[0], -1, M).sum(axis=1)
        return AppMatrix.from_weights(weights)


class _StepWindows:
    """Builds the symbol windows entering each trellis step."""

    def __init__(self, space: StateSpace, points: np.ndarray, x_known: np.ndarray, N_tilde: int):
        self.space = space
        self.points = points
        self.x_known = x_known
        self.N_tilde = N_tilde
        self.n = x_known.shape[0]
        self._digits = {
            True: _digits(space.M, space.unknown + 1),
            False: _digits(space.M, space.unknown),
        }

    def __call__(self, kappa: int) -> np.ndarray:
        width = self.space.width
        pos = kappa - width + np.arange(width + 1)
        unknown = self.space.is_unknown(pos)
        digits = self._digits[bool(unknown[-1])]

        values = np.zeros((digits.shape[0], width + 1), dtype=complex)
        values[:, unknown] = self.points[digits]
        known_cols = np.flatnonzero(~unknown & (pos >= 1))
        values[:, known_cols] = self.x_known[pos[known_cols] - 1]
        values[:, pos < 1] = 0.0
        return values[:, width - self.N_tilde:]


def _step_log_likelihood(aux: AuxiliaryChannel, y_slots: np.ndarray, kappa: int, windows: np.ndarray):
    """Log-likelihood of the slot explained by position kappa, or None if it lies past the block."""
    slot = kappa + aux.D
    if slot > y_slots.shape[0]:
        return None
    return aux.log_likelihood(y_slots[slot - 1], windows)


def likelihood_fI(aux: AuxiliaryChannel, y_slot: np.ndarray, windows: np.ndarray, M: int) -> np.ndarray:
    """Branch weight of an unknown-position transition.

    windows holds, per (previous state, new symbol) pair, the N_tilde + 1
    symbols explaining y_slot. The 1/M factor is the uniform symbol prior.
    """
    return np.exp(aux.log_likelihood(y_slot, windows)) / M


def factor_fII(aux: AuxiliaryChannel, y_slots: Sequence[np.ndarray], windows: Sequence[np.ndarray]) -> np.ndarray:
    """Product of the known-symbol slot likelihoods preceding a stage-s transition.

    With no known slots (stage 1) the factor is exactly 1.
    """
    out = np.array(1.0)
    for y_slot, w in zip(y_slots, windows):
        out = out * np.exp(aux.log_likelihood(y_slot, w))
    return out


class _Underflow(Exception):
    """Linear metrics vanished at the given position."""


def _recursions(stage: StageInput,
                aux: AuxiliaryChannel,
                alphabet: ModulationAlphabet,
                space: StateSpace,
                normalize: bool,
                log_domain: bool) -> TrellisMetrics:
    M = alphabet.M
    n = stage.n
    y_slots = np.asarray(stage.y).reshape(n, aux.N_os)
    windows = _StepWindows(space, alphabet.points, stage.x_known, aux.memory)
    stage_positions = stage.partition.positions(stage.s) + 1
    N = stage_positions.size
    n_states = space.n_states
    rest = n_states // M
    cases = Counter()

    def branch_log_weights(kappa: int, unknown: bool):
        ll = _step_log_likelihood(aux, y_slots, kappa, windows(kappa))
        if ll is None:
            return None, np.zeros(n_states * M if unknown else n_states)
        return ll, (ll - ll.max() if normalize else ll)

    forward = np.empty((N, n_states))
    log_scale = np.zeros(n)
    alpha = np.full(n_states, -np.log(n_states) if log_domain else 1.0 / n_states)
    t = 0
    for kappa in range(1, n + 1):
        unknown = bool(space.is_unknown(kappa))
        observed, ll = branch_log_weights(kappa, unknown)
        if observed is None:
            cases["unobserved"] += 1
        if unknown:
            cases["stage" if space.stage_of(kappa) == stage.s else "future"] += 1
        else:
            cases["fII"] += 1

        if log_domain:
            if unknown:
                alpha = logsumexp(alpha.reshape(M, rest, 1) + ll.reshape(M, rest, M), axis=0).ravel()
            else:
                alpha = alpha + ll
            if normalize:
                log_scale[kappa - 1] = logsumexp(alpha)
                alpha = alpha - log_scale[kappa - 1]
        else:
            L = np.exp(ll)
            if unknown:
                alpha = (alpha.reshape(M, rest, 1) * L.reshape(M, rest, M)).sum(axis=0).ravel()
            else:
                alpha = alpha * L
            total = alpha.sum()
            if not total > 0:
                raise _Underflow(kappa)
            if normalize:
                log_scale[kappa - 1] = np.log(total)
                alpha = alpha / total
        if t < N and kappa == stage_positions[t]:
            forward[t] = alpha
            t += 1

    backward = np.empty((N, n_states))
    beta = np.zeros(n_states) if log_domain else np.ones(n_states)
    t = N - 1
    for kappa in range(n, 0, -1):
        if t >= 0 and kappa == stage_positions[t]:
            backward[t] = beta
            t -= 1
        unknown = bool(space.is_unknown(kappa))
        _, ll = branch_log_weights(kappa, unknown)
        if log_domain:
            if unknown:
                beta = logsumexp(ll.reshape(M, rest, M) + beta.reshape(1, rest, M), axis=2).ravel()
            else:
                beta = ll + beta
            if normalize:
                beta = beta - logsumexp(beta)
        else:
            L = np.exp(ll)
            if unknown:
                beta = (L.reshape(M, rest, M) * beta.reshape(1, rest, M)).sum(axis=2).ravel()
            else:
                beta = L * beta
            total = beta.sum()
            if not total > 0:
                raise _Underflow(kappa)
            if normalize:
                beta = beta / total

    if not log_domain:
        joint = (forward * backward).sum(axis=1)
        if not np.all(joint > 0):
            raise _Underflow(int(stage_positions[np.argmin(joint)]))
    return TrellisMetrics(forward=forward, backward=backward, log_scale=log_scale,
                          cases=dict(cases), log_domain=log_domain)


def run_fba_stage(stage: StageInput,
                  aux: AuxiliaryChannel,
                  alphabet: ModulationAlphabet,
                  normalize: bool = True,
                  max_states: int = DEFAULT_MAX_STATES,
                  log_domain: bool = False) -> TrellisMetrics:
    """Forward and backward recursions for stage s; APPs via TrellisMetrics.apps.

    Linear metrics that underflow fall back to a log-domain rerun of the stage.
    """
    space = StateSpace(s=stage.s, S=stage.S, M=alphabet.M, N_tilde=aux.memory)
    space.check(max_states)
    try:
        metrics = _recursions(stage, aux, alphabet, space, normalize, log_domain)
    except _Underflow as e:
        logger.warning(f"Stage {stage.s}/{stage.S}: linear FBA metrics underflowed at position {e.args[0]}, "
                       f"rerunning in the log domain")
        metrics = _recursions(stage, aux, alphabet, space, normalize, log_domain=True)

    logger.debug(f"Stage {stage.s}/{stage.S}: FBA over {stage.n} positions with {space.n_states} states, "
                 f"cases {metrics.cases}")
    return metrics

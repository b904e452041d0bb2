"""mufasa.split
   ============

   Train/test views for the leave-one-out and zero-shot protocols.

   :license: Apache License, Version 2.0, see LICENSE for details.
"""

from dataclasses import dataclass, field
from typing import List
import warnings

import numpy as np

from mufasa.catalog import UserRecord
from mufasa.errors import ConfigError, SplitWarning

LEAVE_ONE_OUT = 'leave_one_out'
ZERO_SHOT = 'zero_shot'
SPLIT_MODES = (LEAVE_ONE_OUT, ZERO_SHOT)


@dataclass
class SplitSpec:
    mode: str = LEAVE_ONE_OUT
    holdout_users: int = 200
    targets_per_user: int = 3
    seed: int = 0

    def __post_init__(self):
        if self.mode not in SPLIT_MODES:
            raise ConfigError(
                f"Unknown split mode '{self.mode}', expected one of "
                f"{', '.join(SPLIT_MODES)}"
            )
        if self.holdout_users < 0 or self.targets_per_user < 1:
            raise ConfigError('holdout_users must be >= 0 and '
                              'targets_per_user >= 1')

    @property
    def n_targets(self):
        return 1 if self.mode == LEAVE_ONE_OUT else self.targets_per_user


@dataclass
class EvalCase:
    user_id: str
    context: List[str]
    targets: List[str]


@dataclass
class Split:
    spec: SplitSpec
    train: List[UserRecord] = field(default_factory=list)
    test: List[EvalCase] = field(default_factory=list)
    skipped: int = 0

    @property
    def train_ids(self):
        return {user.user_id for user in self.train}


def _prefix(user, n):
    return UserRecord(user.user_id, user.items[:-n], user.timestamps[:-n])


def split(users, spec):
    """Split ``users`` into training sequences and evaluation cases.

    Leave-one-out holds out every user's last interaction. Zero-shot holds
    out whole users, chosen by a seeded permutation, and evaluates their
    last ``targets_per_user`` interactions.
    """
    result = Split(spec)
    if spec.mode == LEAVE_ONE_OUT:
        for user in users:
            if len(user) < 2:
                result.skipped += 1
                continue
            result.train.append(_prefix(user, 1))
            result.test.append(EvalCase(user.user_id, user.items[:-1],
                                        user.items[-1:]))
    else:
        n = spec.targets_per_user
        rng = np.random.default_rng(spec.seed)
        holdout = set()
        for index in rng.permutation(len(users)):
            if len(holdout) == spec.holdout_users:
                break
            user = users[index]
            if len(user) < n + 1:
                result.skipped += 1
                continue
            holdout.add(user.user_id)
            result.test.append(EvalCase(user.user_id, user.items[:-n],
                                        user.items[-n:]))
        result.test.sort(key=lambda case: case.user_id)
        result.train = [user for user in users
                        if user.user_id not in holdout and len(user) >= 2]

    if result.skipped:
        warnings.warn(f'Skipped {result.skipped} users too short for '
                      f'{spec.mode} evaluation', SplitWarning)
    return result


def cf_training_users(users, holdout_ids=()):
    """Interactions the CF oracle may see: no held-out user and no final
    interaction of any user."""
    return [_prefix(user, 1) for user in users
            if user.user_id not in holdout_ids and len(user) >= 2]

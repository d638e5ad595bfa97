"""Discrete action space: cooperation flag plus the two cache placements.

An action is ``(I_t, B_p, B_s)``. With cooperation off (``I_t = 0``) the whole
cache holds ``C_s`` CIoT items; with cooperation on (``I_t = 1``) it holds
``C_s / 2`` PU items and ``C_s / 2`` CIoT items. For M = N = 5, C_s = 4 this
gives 5 + 100 = 105 actions.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np


@dataclass(frozen=True)
class Action:
    index: int
    I_t: int
    B_p: frozenset
    B_s: frozenset

    @property
    def key(self) -> tuple[int, tuple[int, ...], tuple[int, ...]]:
        return (self.I_t, tuple(sorted(self.B_p)), tuple(sorted(self.B_s)))


class ActionTable:
    """Immutable, densely indexed list of actions in lexicographic order."""

    def __init__(self, actions: list[Action], M: int, N: int, C_s: int, cooperative: bool):
        self.actions = tuple(actions)
        self.M, self.N, self.C_s = M, N, C_s
        self.cooperative = cooperative
        self._lookup = {a.key: a.index for a in self.actions}
        # membership masks, shape (z, M + 1) and (z, N + 1); column 0 unused
        self.pu_mask = np.zeros((len(self.actions), M + 1), dtype=bool)
        self.su_mask = np.zeros((len(self.actions), N + 1), dtype=bool)
        for a in self.actions:
            self.pu_mask[a.index, list(a.B_p)] = True
            self.su_mask[a.index, list(a.B_s)] = True
        self.coop_flags = np.array([a.I_t for a in self.actions], dtype=np.int8)

    @property
    def z(self) -> int:
        return len(self.actions)

    def __len__(self) -> int:
        return len(self.actions)

    def __iter__(self):
        return iter(self.actions)

    def __getitem__(self, index: int) -> Action:
        return decode(self, index)

    def __repr__(self) -> str:
        return (f"ActionTable(z={self.z}, M={self.M}, N={self.N}, C_s={self.C_s}, "
                f"cooperative={self.cooperative})")


def enumerate_actions(M: int, N: int, C_s: int, cooperative: bool = True) -> ActionTable:
    if cooperative and C_s % 2:
        raise ValueError(f"cooperative action space needs an even C_s, got {C_s}")
    keys = []
    for B_s in combinations(range(1, N + 1), C_s):
        keys.append((0, (), B_s))
    if cooperative:
        half = C_s // 2
        for B_p in combinations(range(1, M + 1), half):
            for B_s in combinations(range(1, N + 1), half):
                keys.append((1, B_p, B_s))
    keys.sort()
    actions = [Action(i, I_t, frozenset(bp), frozenset(bs)) for i, (I_t, bp, bs) in enumerate(keys)]
    return ActionTable(actions, M, N, C_s, cooperative)


def decode(table: ActionTable, index: int) -> Action:
    if not 0 <= int(index) < table.z:
        raise IndexError(f"action index {index} out of range for z={table.z}")
    return table.actions[int(index)]


def encode(table: ActionTable, I_t: int, B_p, B_s) -> int:
    B_p, B_s = frozenset(B_p), frozenset(B_s)
    if len(B_p) + len(B_s) > table.C_s:
        raise ValueError(
            f"placement of {len(B_p) + len(B_s)} items exceeds cache capacity {table.C_s}"
        )
    key = (int(I_t), tuple(sorted(B_p)), tuple(sorted(B_s)))
    try:
        return table._lookup[key]
    except KeyError:
        raise KeyError(f"action {key} is not in the table") from None


def satisfies_requests(action: Action, d_p: int, d_s: int) -> tuple[bool, bool]:
    """Return ``(pu_hit, su_hit)``: whether each request is in the cached set."""
    return d_p in action.B_p, d_s in action.B_s

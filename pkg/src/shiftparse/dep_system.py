"""The arc-standard dependency transition system.

A configuration is (stack of head indices, queue start j, arc set, step
count). Shift pushes j; ReduceLeft pops the second-topmost item s1 and
attaches it under the top s0; ReduceRight pops s0 and attaches it under
s1. Every derivation of an n-word sentence takes exactly 2n-1 actions and
ends with one item on the stack, which attaches to ROOT.

States are immutable; apply returns a new state, so decoding different
sentences in parallel is safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .trees import ROOT, DepTree, Sentence

SHIFT = "shift"
LEFT = "left"
RIGHT = "right"

DEP_ACTION_KINDS = (SHIFT, LEFT, RIGHT)


class IllegalAction(ValueError):
    """An action whose precondition does not hold in the given state."""


class NotDerivable(ValueError):
    """The gold structure cannot be produced by the transition system."""


@dataclass(frozen=True)
class DepAction:
    kind: str
    label: Optional[str] = None

    def __post_init__(self):
        if self.kind not in DEP_ACTION_KINDS:
            raise ValueError("unknown dependency action kind %r" % self.kind)
        if self.kind == SHIFT and self.label is not None:
            raise ValueError("shift carries no label")
        if self.kind != SHIFT and self.label is None:
            raise ValueError("reduce actions need a label")

    def __str__(self) -> str:
        if self.kind == SHIFT:
            return "SHIFT"
        return ("LEFT:" if self.kind == LEFT else "RIGHT:") + self.label

    @classmethod
    def parse(cls, text: str) -> "DepAction":
        if text == "SHIFT":
            return cls(SHIFT)
        for prefix, kind in (("LEFT:", LEFT), ("RIGHT:", RIGHT)):
            if text.startswith(prefix):
                return cls(kind, text[len(prefix):])
        raise ValueError("cannot parse dependency action %r" % text)


@dataclass(frozen=True)
class DepState:
    n: int
    stack: tuple[int, ...]
    j: int
    arcs: tuple[tuple[int, int, str], ...]
    step: int

    @property
    def is_terminal(self) -> bool:
        return self.j == self.n and len(self.stack) == 1


def dep_initial(n: int) -> DepState:
    if n < 1:
        raise ValueError("sentence length must be at least 1")
    return DepState(n=n, stack=(), j=0, arcs=(), step=0)


def dep_legal(state: DepState) -> set[str]:
    legal = set()
    if state.j < state.n:
        legal.add(SHIFT)
    if len(state.stack) >= 2:
        legal.add(LEFT)
        legal.add(RIGHT)
    return legal


def dep_apply(state: DepState, action: DepAction) -> DepState:
    if action.kind == SHIFT:
        if state.j >= state.n:
            raise IllegalAction("shift requires j < n (queue is empty)")
        return DepState(state.n, state.stack + (state.j,), state.j + 1,
                        state.arcs, state.step + 1)
    if len(state.stack) < 2:
        raise IllegalAction("reduce requires at least two stack items")
    s0, s1 = state.stack[-1], state.stack[-2]
    if action.kind == LEFT:
        arc = (s0, s1, action.label)     # s1 becomes a dependent of s0
        new_stack = state.stack[:-2] + (s0,)
    else:
        arc = (s1, s0, action.label)     # s0 becomes a dependent of s1
        new_stack = state.stack[:-1]
    return DepState(state.n, new_stack, state.j, state.arcs + (arc,), state.step + 1)


def dep_oracle(tree: DepTree) -> list[DepAction]:
    """The static arc-standard oracle.

    At each state: ReduceLeft if s1 is a gold dependent of s0 and s1 has
    collected all its gold children; else ReduceRight under the mirrored
    condition; else Shift. Delaying a reduce until the dependent is complete
    is what makes the sequence replay to exactly the gold tree. Only
    projective trees are derivable.
    """
    if not tree.is_projective:
        raise NotDerivable("tree is not projective; arc-standard cannot derive it")
    n = len(tree)
    heads = tree.heads
    labels = tree.labels
    n_children = [0] * n
    for h in heads:
        if h != ROOT:
            n_children[h] += 1
    collected = [0] * n

    actions: list[DepAction] = []
    stack: list[int] = []
    j = 0
    while not (j == n and len(stack) == 1):
        did_reduce = False
        if len(stack) >= 2:
            s0, s1 = stack[-1], stack[-2]
            if heads[s1] == s0 and collected[s1] == n_children[s1]:
                actions.append(DepAction(LEFT, labels[s1]))
                stack.pop(-2)
                collected[s0] += 1
                did_reduce = True
            elif heads[s0] == s1 and collected[s0] == n_children[s0]:
                actions.append(DepAction(RIGHT, labels[s0]))
                stack.pop()
                collected[s1] += 1
                did_reduce = True
        if not did_reduce:
            if j >= n:
                raise NotDerivable("oracle is stuck; tree is not derivable")
            actions.append(DepAction(SHIFT))
            stack.append(j)
            j += 1
    return actions


def dep_replay(sentence: Sentence, actions: Iterable[DepAction],
               root_label: str = "root") -> DepTree:
    """Apply an action sequence and return the resulting tree.

    The single remaining stack item attaches to ROOT. Gold oracle sequences
    do not encode the root arc's label, so it is supplied here.
    """
    n = len(sentence)
    state = dep_initial(n)
    for action in actions:
        state = dep_apply(state, action)
    if not state.is_terminal:
        raise IllegalAction(
            "non-terminal final state: j=%d/%d, stack size %d" % (state.j, n, len(state.stack)))
    assert state.step == 2 * n - 1
    arcs = set(state.arcs)
    arcs.add((ROOT, state.stack[0], root_label))
    return DepTree(sentence, frozenset(arcs))


def write_dep_actions(sequences: Iterable[Iterable[DepAction]]) -> str:
    """One action per line, blank line between sentences."""
    blocks = ["\n".join(str(a) for a in seq) for seq in sequences]
    return "\n\n".join(blocks) + ("\n" if blocks else "")


def read_dep_actions(text: str) -> list[list[DepAction]]:
    sequences = []
    for block in text.split("\n\n"):
        lines = [l for l in block.splitlines() if l.strip()]
        if lines:
            sequences.append([DepAction.parse(l.strip()) for l in lines])
    return sequences

"""Minimal feature extraction from parser states.

The dependency parser sees three sentence positions: the head words of the
top two stack items and the next queue word. The constituency parser adds
the leftmost word of each of the top two spans, plus eight label
identities describing those two partial trees. Slots are None when the
structure they describe is absent; the model realizes None positions as
learned per-slot-family vectors and None labels as a reserved embedding.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .const_system import ConstState, StackEntry
from .dep_system import DepState
from .trees import Internal, Leaf

# slot families for learned "absent" vectors, by position slot
DEP_POSITION_FAMILIES = ("stack", "stack", "queue")           # s1, s0, q0
CONST_POSITION_FAMILIES = ("stack", "stack", "queue", "stack", "stack")
# label slot order: s0.left, s0.right, s0.root, s0.head, then the same for s1
CONST_LABEL_SLOTS = ("s0.left", "s0.right", "s0.root", "s0.head",
                     "s1.left", "s1.right", "s1.root", "s1.head")


@dataclass(frozen=True)
class DepFeatures:
    positions: tuple[Optional[int], Optional[int], Optional[int]]  # s1, s0, q0


@dataclass(frozen=True)
class ConstFeatures:
    positions: tuple  # s1, s0, q0, s1.left, s0.left
    labels: tuple     # 8 label names or None, ordered as CONST_LABEL_SLOTS


def extract_dep(state: DepState) -> DepFeatures:
    s0 = state.stack[-1] if len(state.stack) >= 1 else None
    s1 = state.stack[-2] if len(state.stack) >= 2 else None
    q0 = state.j if state.j < state.n else None
    return DepFeatures((s1, s0, q0))


def _entry_labels(entry: Optional[StackEntry]) -> tuple:
    """(left, right, root, head) label names for one stack entry."""
    if entry is None or isinstance(entry.node, Leaf):
        return (None, None, None, None)
    node = entry.node
    h = node.head_child
    left = right = None
    if h > 0:
        first = node.children[0]
        left = first.label if isinstance(first, Internal) else None
    if h < len(node.children) - 1:
        last = node.children[-1]
        right = last.label if isinstance(last, Internal) else None
    head_child = node.children[h]
    head = head_child.label if isinstance(head_child, Internal) else None
    return (left, right, node.label, head)


def extract_const(state: ConstState) -> ConstFeatures:
    s0 = state.stack[-1] if len(state.stack) >= 1 else None
    s1 = state.stack[-2] if len(state.stack) >= 2 else None
    q0 = state.j if state.j < state.n else None
    positions = (
        s1.head_index if s1 else None,
        s0.head_index if s0 else None,
        q0,
        s1.span_left if s1 else None,
        s0.span_left if s0 else None,
    )
    labels = _entry_labels(s0) + _entry_labels(s1)
    return ConstFeatures(positions, labels)

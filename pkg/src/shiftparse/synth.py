"""Seeded synthetic data: random trees for property tests and small
patterned corpora for overfitting smoke runs and demos.

Random projective dependency trees are built by recursive interval
splitting, so every subtree covers a contiguous span by construction.
Random constituency trees are k-ary with optional unary wrappers; wrapper
depth is limited (2 inside the tree, 3 at the root) so that gold oracle
sequences stay within the default consecutive-promote cap.
"""

from __future__ import annotations

import numpy as np

from .trees import ConstTree, DepTree, Internal, Leaf, Sentence, Token

DEP_LABELS = ("amod", "nsubj", "dobj", "prep", "pobj", "conj")
NONTERMINALS = ("S", "NP", "VP", "PP", "ADJP")


def _generic_sentence(n: int, rng: np.random.Generator) -> Sentence:
    tags = ("DT", "NN", "VB", "JJ", "IN")
    return Sentence(tuple(
        Token("w%d" % i, tags[int(rng.integers(len(tags)))]) for i in range(n)))


def random_projective_tree(rng: np.random.Generator, n: int,
                           labels=DEP_LABELS, root_label: str = "root") -> DepTree:
    heads = [0] * n
    arc_labels = [""] * n

    def build(lo: int, hi: int) -> int:
        head = int(rng.integers(lo, hi + 1))
        pos = lo
        while pos < head:
            end = int(rng.integers(pos, head))
            child = build(pos, end)
            heads[child] = head
            arc_labels[child] = labels[int(rng.integers(len(labels)))]
            pos = end + 1
        pos = head + 1
        while pos <= hi:
            end = int(rng.integers(pos, hi + 1))
            child = build(pos, end)
            heads[child] = head
            arc_labels[child] = labels[int(rng.integers(len(labels)))]
            pos = end + 1
        return head

    root = build(0, n - 1)
    heads[root] = -1
    arc_labels[root] = root_label
    return DepTree.from_heads(_generic_sentence(n, rng), heads, arc_labels)


def random_const_tree(rng: np.random.Generator, n: int,
                      nonterminals=NONTERMINALS, max_children: int = 5,
                      max_root_unary: int = 3) -> ConstTree:
    """Random head-annotated k-ary tree over n tokens (n >= 2)."""

    def pick_label() -> str:
        return nonterminals[int(rng.integers(len(nonterminals)))]

    def wrap(node, depth: int):
        for _ in range(depth):
            node = Internal(pick_label(), (node,), head_child=0)
        return node

    def build(lo: int, hi: int):
        if lo == hi:
            node = Leaf(lo)
            # sometimes project the leaf through a short unary chain
            return wrap(node, int(rng.integers(0, 3)))
        width = hi - lo + 1
        k = int(rng.integers(2, min(max_children, width) + 1))
        cuts = sorted(rng.choice(np.arange(lo + 1, hi + 1), size=k - 1, replace=False))
        bounds = [lo] + [int(c) for c in cuts] + [hi + 1]
        children = tuple(build(bounds[i], bounds[i + 1] - 1) for i in range(k))
        node = Internal(pick_label(), children, head_child=int(rng.integers(k)))
        return wrap(node, int(rng.integers(0, 3)))

    if n < 2:
        raise ValueError("need at least 2 tokens")
    root = build(0, n - 1)
    extra = int(rng.integers(0, max_root_unary - 1))
    root = wrap(root, extra)
    assert isinstance(root, Internal)
    return ConstTree(_generic_sentence(n, rng), root)


# ---------------------------------------------------------------------------
# patterned toy corpora
# ---------------------------------------------------------------------------

_DETS = ("the", "a")
_ADJS = ("big", "small", "red", "old", "good", "bad", "tall", "young")
_NOUNS = ("dog", "cat", "bird", "horse", "fish", "cow", "fox", "pig",
          "bear", "wolf", "goat", "duck", "mouse", "sheep")
_VERBS = ("sees", "likes", "finds", "follows", "chases", "fears",
          "helps", "knows", "hears", "wants")
_PL_NOUNS = ("dogs", "cats", "birds", "horses", "foxes", "ducks")
_PL_VERBS = ("run", "sleep", "sing", "jump", "swim")
_ADVS = ("quickly", "slowly", "often", "badly", "well")


def _toy_items(n_sentences: int, seed: int):
    """Deterministic mix of three sentence patterns with gold analyses."""
    rng = np.random.default_rng(seed)
    items = []
    for i in range(n_sentences):
        kind = i % 3
        def pick(pool):
            return pool[int(rng.integers(len(pool)))]

        if kind == 0:
            # DT NN VBZ DT NN: the dog sees a cat
            words = [(pick(_DETS), "DT"), (pick(_NOUNS), "NN"), (pick(_VERBS), "VBZ"),
                     (pick(_DETS), "DT"), (pick(_NOUNS), "NN")]
            heads = [1, 2, -1, 4, 2]
            labels = ["det", "nsubj", "root", "det", "dobj"]
            bracket = ("S", [("NP", [0, 1]), ("VP", [2, ("NP", [3, 4])])])
        elif kind == 1:
            # DT JJ NN VBZ DT NN
            words = [(pick(_DETS), "DT"), (pick(_ADJS), "JJ"), (pick(_NOUNS), "NN"),
                     (pick(_VERBS), "VBZ"), (pick(_DETS), "DT"), (pick(_NOUNS), "NN")]
            heads = [2, 2, 3, -1, 5, 3]
            labels = ["det", "amod", "nsubj", "root", "det", "dobj"]
            bracket = ("S", [("NP", [0, 1, 2]), ("VP", [3, ("NP", [4, 5])])])
        else:
            # NNS VBP RB: dogs run quickly
            words = [(pick(_PL_NOUNS), "NNS"), (pick(_PL_VERBS), "VBP"),
                     (pick(_ADVS), "RB")]
            heads = [1, -1, 1]
            labels = ["nsubj", "root", "advmod"]
            bracket = ("S", [("NP", [0]), ("VP", [1, ("ADVP", [2])])])
        items.append((words, heads, labels, bracket))
    return items


def _bracket_to_node(shape):
    label, parts = shape
    children = []
    for part in parts:
        if isinstance(part, int):
            children.append(Leaf(part))
        else:
            children.append(_bracket_to_node(part))
    return Internal(label, tuple(children))


def toy_dep_corpus(n_sentences: int = 32, seed: int = 7) -> list[DepTree]:
    trees = []
    for words, heads, labels, _ in _toy_items(n_sentences, seed):
        sentence = Sentence.from_pairs(words)
        trees.append(DepTree.from_heads(sentence, heads, labels))
    return trees


def toy_const_corpus(n_sentences: int = 32, seed: int = 7) -> list[ConstTree]:
    """Bracketed version of the toy corpus; heads left for head rules."""
    trees = []
    for words, _, _, bracket in _toy_items(n_sentences, seed):
        sentence = Sentence.from_pairs(words)
        trees.append(ConstTree(sentence, _bracket_to_node(bracket)))
    return trees

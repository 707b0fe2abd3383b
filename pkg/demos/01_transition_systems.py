#!/usr/bin/env python3
"""Walk through both transition systems on a three-word sentence.

Shows the arc-standard derivation of a dependency tree, the
shift-promote-adjoin derivation of the matching constituency tree, and
the dependency tree that falls out of the constituency derivation for
free (the head child is always the first-attached child).
"""

from shiftparse import (assign_heads, const_oracle, const_replay, dep_oracle,
                        dep_replay, read_brackets, read_conll, write_brackets,
                        write_conll)
from shiftparse.headrules import HeadRules

CONLL = """1\tI\t_\t_\tPRP\t_\t2\tnsubj\t_\t_
2\tlike\t_\t_\tVBP\t_\t0\troot\t_\t_
3\tsports\t_\t_\tNNS\t_\t2\tdobj\t_\t_
"""

BRACKETS = "(S (NP (PRP I)) (VP (VBP like) (NP (NNS sports))))"


def main():
    [dep_tree] = read_conll(CONLL)
    print("gold dependency tree:")
    print(write_conll([dep_tree]))

    actions = dep_oracle(dep_tree)
    print("arc-standard oracle sequence (%d actions = 2n-1):" % len(actions))
    for i, action in enumerate(actions, start=1):
        print("  %d. %s" % (i, action))
    replayed = dep_replay(dep_tree.sentence, actions)
    print("replay reproduces the gold tree:", replayed == dep_tree)

    [const_tree] = read_brackets(BRACKETS)
    const_tree = assign_heads(const_tree, HeadRules.bundled())
    print("\ngold constituency tree: %s" % write_brackets([const_tree]).strip())
    cactions = const_oracle(const_tree)
    print("shift-promote-adjoin oracle sequence (%d actions):" % len(cactions))
    for i, action in enumerate(cactions, start=1):
        print("  %d. %s" % (i, action))
    creplayed, coderived = const_replay(const_tree.sentence, cactions,
                                        with_dependencies=True)
    print("replay reproduces the gold tree:", creplayed == const_tree)
    print("\nco-derived dependency heads (from the same derivation):")
    for i, token in enumerate(const_tree.sentence.tokens):
        head = coderived.head_of(i)
        head_form = "ROOT" if head == -1 else const_tree.sentence[head].form
        print("  %-8s <- %s" % (token.form, head_form))


if __name__ == "__main__":
    main()

#!/usr/bin/env python3
"""Tour of the scoring machinery on hand-checkable examples.

Covers attachment scores with and without punctuation, labeled bracket
precision/recall/F1 with and without the root bracket, and the
arc-recall-by-length table.
"""

from shiftparse import (arc_recall_by_length, read_brackets, recall_table_csv,
                        score_brackets, score_dep)
from shiftparse.trees import ROOT, DepTree, Sentence


def main():
    sent = Sentence.from_pairs([("I", "PRP"), ("like", "VBP"), ("sports", "NNS")])
    gold = DepTree.from_heads(sent, [1, ROOT, 1], ["nsubj", "root", "dobj"])
    wrong_head = DepTree.from_heads(sent, [2, ROOT, 1], ["nsubj", "root", "dobj"])
    print("one wrong head out of three:", score_dep([gold], [wrong_head],
                                                    exclude_punct=False))

    punct_sent = Sentence.from_pairs([("hi", "UH"), ("!", ".")])
    punct_gold = DepTree.from_heads(punct_sent, [ROOT, 0], ["root", "punct"])
    both = score_dep([punct_gold], [punct_gold], exclude_punct=False)
    no_punct = score_dep([punct_gold], [punct_gold], exclude_punct=True)
    print("punctuation included scores %d tokens, excluded scores %d"
          % (both.scored, no_punct.scored))

    [bgold] = read_brackets("(S (NP (PRP I)) (VP (VBP like) (NP (NNS sports))))")
    [bpred] = read_brackets("(S (NP (PRP I)) (VP (VBP like) (NNS sports)))")
    print("\nmissing one bracket, root ignored: ",
          score_brackets([bgold], [bpred], ignore_root=True))
    print("same trees, root counted:          ",
          score_brackets([bgold], [bpred], ignore_root=False))

    print("\nrecall by arc length (perfect prediction):")
    print(recall_table_csv(arc_recall_by_length([gold], [gold])))


if __name__ == "__main__":
    main()

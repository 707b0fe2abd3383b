#!/usr/bin/env python3
"""Train the dependency parser on a synthetic corpus and inspect it.

Overfits a 32-sentence patterned corpus with a reduced model, reports
training accuracy, parses a sentence the model never saw, and prints the
arc-recall-by-length table.
"""

from shiftparse import (DepConfig, DepModel, Sentence, arc_recall_by_length,
                        build_vocab, recall_table_csv, score_dep, write_conll)
from shiftparse import synth


def main():
    train = synth.toy_dep_corpus(32, seed=7)
    vocab = build_vocab([t.sentence for t in train], dep_trees=train, min_form_count=1)
    print("corpus: %d sentences, %d distinct forms" % (len(train), vocab.num_forms - 1))

    config = DepConfig(word_dims=16, tag_dims=8, lstm_units=32, layers=2, hidden=32,
                       epochs=10, minibatch=1, dropout=0.0, word_dropout=0.0, seed=1)
    model = DepModel(config, vocab)
    model.fit(train, log=lambda line: line.startswith("epoch") and print(" ", line))

    predicted = [model.parse(t.sentence) for t in train]
    print("training accuracy:", score_dep(train, predicted, exclude_punct=False))

    unseen = Sentence.from_pairs([("the", "DT"), ("old", "JJ"), ("fox", "NN"),
                                  ("fears", "VBZ"), ("a", "DT"), ("horse", "NN")])
    print("\nparse of an unseen sentence:")
    print(write_conll([model.parse(unseen)]))

    print("arc recall by length (training set):")
    print(recall_table_csv(arc_recall_by_length(train, predicted)))


if __name__ == "__main__":
    main()

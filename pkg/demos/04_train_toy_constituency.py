#!/usr/bin/env python3
"""Train the constituency parser on a synthetic bracketed corpus.

Applies the bundled head rules, overfits a reduced model, reports bracket
precision/recall/F1 on the training set, and parses a tagged sentence the
model never saw.
"""

from shiftparse import (ConstConfig, ConstModel, Sentence, assign_heads,
                        build_vocab, score_brackets, write_brackets)
from shiftparse.headrules import HeadRules
from shiftparse import synth


def main():
    rules = HeadRules.bundled()
    train = [assign_heads(t, rules) for t in synth.toy_const_corpus(32, seed=7)]
    vocab = build_vocab([t.sentence for t in train], const_trees=train,
                        min_form_count=1)
    print("corpus: %d sentences, %d nonterminal labels"
          % (len(train), vocab.num_nonterminals))

    config = ConstConfig(word_dims=16, tag_dims=8, nonterminal_dims=16,
                         lstm_units=32, layers=2, hidden=32, epochs=10,
                         minibatch=1, dropout=0.0, word_dropout=0.0, l2=0.0, seed=1)
    model = ConstModel(config, vocab)
    model.fit(train, log=lambda line: line.startswith("epoch") and print(" ", line))

    predicted = [model.parse(t.sentence) for t in train]
    print("training accuracy:", score_brackets(train, predicted))

    unseen = Sentence.from_pairs([("the", "DT"), ("small", "JJ"), ("cow", "NN"),
                                  ("chases", "VBZ"), ("a", "DT"), ("pig", "NN")])
    print("\nparse of an unseen sentence:")
    print(write_brackets([model.parse(unseen)]))


if __name__ == "__main__":
    main()

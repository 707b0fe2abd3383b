#!/usr/bin/env python3
"""Inspect the encoder arithmetic and verify gradients numerically.

Builds a small dependency model, shows how the per-position feature width
follows from the layer count, then runs the finite-difference checker
over every parameter tensor and prints the worst relative error per
tensor. Finishes with the two-step ADADELTA trace on a scalar.
"""

import math

import numpy as np

from shiftparse import DepConfig, DepModel, build_vocab
from shiftparse.model import model_grad_check
from shiftparse import nn, synth


def main():
    rng = np.random.default_rng(5)
    trees = [synth.random_projective_tree(rng, 5) for _ in range(2)]
    vocab = build_vocab([t.sentence for t in trees], dep_trees=trees, min_form_count=1)

    for layers in (1, 2):
        config = DepConfig(word_dims=8, tag_dims=6, lstm_units=8, layers=layers,
                           hidden=12, dropout=0.0, word_dropout=0.0, seed=3)
        model = DepModel(config, vocab)
        print("layers=%d: positional feature width = 2 x %d x %d = %d, "
              "classifier input = 3 slots x %d = %d"
              % (layers, config.lstm_units, layers, model.enc_dims,
                 model.enc_dims, 3 * model.enc_dims))

    config = DepConfig(word_dims=8, tag_dims=6, lstm_units=8, layers=2,
                       hidden=12, dropout=0.0, word_dropout=0.0, seed=3)
    model = DepModel(config, vocab)
    report = model_grad_check(model, trees, samples_per_param=12)
    print("\nfinite-difference check (64-bit, central differences, h=1e-5)")
    print("loss over probe sentences: %.6f" % report["loss"])
    for name, err in sorted(report["by_param"].items()):
        print("  %-20s max rel error %.3e" % (name, err))
    print("overall max: %.3e (tolerance %.0e) -> %s"
          % (report["max_rel_error"], report["tolerance"],
             "OK" if report["ok"] else "FAIL"))

    print("\ntwo-step ADADELTA trace (rho=0.99, eps=1e-7, gradient 1 twice):")
    store = nn.ParamStore(np.float64)
    store.add("x", np.zeros(1))
    x, eg2, ed2 = 0.0, 0.0, 0.0
    for step in (1, 2):
        store["x"].grad[...] = 1.0
        store.adadelta_step(rho=0.99, eps=1e-7)
        eg2 = 0.99 * eg2 + 0.01
        dx = -math.sqrt(ed2 + 1e-7) / math.sqrt(eg2 + 1e-7)
        ed2 = 0.99 * ed2 + 0.01 * dx * dx
        x += dx
        print("  step %d: implementation %.12e, hand computation %.12e"
              % (step, store["x"].value[0], x))


if __name__ == "__main__":
    main()

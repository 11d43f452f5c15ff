"""
Training on a synthetic corpus
==============================

Generate programs with known properties, encode them, and fit a small
network on the cycle-membership task.  A default-sized model on 200
programs is what the acceptance suite runs; this one takes seconds.
"""
import numpy as np

from horngraphs import (TrainConfig, add_self_loops, build_cdhg, catalog, evaluate, gen_corpus,
                        init_model, make_labels, normalize, split_corpus, train)

corpus = gen_corpus(40, seed=3)
print(corpus[0][1]["template"])
print(corpus[0][1]["source"])

items = []
for system, _ in corpus:
    g = add_self_loops(build_cdhg(normalize(system)))
    items.append((g, make_labels(system, g, "T3")))
tr, va, te = split_corpus(items)
print(len(tr), len(va), len(te))

cfg = TrainConfig(task="T3", hidden=16, steps=4, max_epochs=40, patience=10, lr=3e-3)
model = init_model(catalog("CDHG"), cfg)
print(model.num_parameters, "parameters")
best, hist = train(model, tr, va, cfg)
print("epochs:", hist.epochs_run, " last valid loss:", np.round(hist.valid_loss[-1], 4))

m = evaluate(best, te)
print(m.as_json())

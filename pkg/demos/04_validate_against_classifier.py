"""Check the separability-based choice against a trained classifier."""
from gestlex import best_lexicon_exact, edrm_matrix
from gestlex.oracle import brute_force_best_lexicon, preset, recognition_rates, split_dataset, train_classifier

# Five synthetic classes: a/e overlap across a line, u/v sit on either side of a curved surface.
ds = preset("fig1", seed=0)
S = edrm_matrix(ds)
i = {c: k for k, c in enumerate(S.labels)}
print("EDRM(a,e) =", S.edrm[i["a"], i["e"]], " EDRM(u,v) =", round(S.edrm[i["u"], i["v"]], 4))

choice = best_lexicon_exact(S.tm, S.labels, 3)
print("separability picks:", choice.members)

# Ground truth: train one-vs-rest discriminants on every 3-subset and compare rates.
truth = brute_force_best_lexicon(ds, 3, train_fraction=0.3, seed=0)
for combo, rate in sorted(truth.rates.items(), key=lambda kv: -kv[1])[:6]:
    print(f"  {combo}: average rate {rate:.3f}")
print("choice among the best:", choice.members in truth.ties)

# The overlapping pair really is harder to tell apart.
train, test = split_dataset(ds, 0.3, 0)
for pair in (("a", "e"), ("u", "v")):
    rep = recognition_rates(train_classifier(train.subset(pair)), test.subset(pair))
    print(pair, rep.as_dict())

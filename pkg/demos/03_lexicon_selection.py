"""Blend separability with human ratings and pick the best lexicons."""
import numpy as np

from gestlex import best_lexicon_exact, best_lexicon_greedy, sm_matrix, total_measure_matrix

labels = list("abcd")
ratings = {"a": 0.9, "b": 0.2, "c": 0.7, "d": 0.5}
SM = sm_matrix(ratings, labels)
print("subjective measure:\n", SM)

# Ratings alone: the best lexicon is simply the top-rated classes.
for n in (2, 3):
    r = best_lexicon_exact(SM, labels, n)
    print(f"n={n}: {r.members} score {r.score:.2f} "
          f"({r.evaluated_subsets} subsets, {r.evaluated_pairsums} pair-sums)")

# A made-up separability matrix where a and c are nearly indistinguishable.
E = np.array([[0, .6, .05, .5],
              [.6, 0, .7, .4],
              [.05, .7, 0, .6],
              [.5, .4, .6, 0]])
for alpha in (0.0, 0.5, 1.0):
    TM = total_measure_matrix(E, SM, alpha)
    print(f"alpha={alpha}: best 3 = {best_lexicon_exact(TM, labels, 3).members}")

# Greedy can be fooled: a-b is the best pair, but c and d suit a better together.
trap = np.array([[0, 1.0, .5, .5], [1.0, 0, 0, 0], [.5, 0, 0, .9], [.5, 0, .9, 0]])
print("greedy:", best_lexicon_greedy(trap, list("ABCD"), 3).members,
      "exact:", best_lexicon_exact(trap, list("ABCD"), 3).members)

# Constraints: force a class in, keep another out.
print(best_lexicon_exact(SM, labels, 2, must_include=["b"], exclude=["a"]).members)

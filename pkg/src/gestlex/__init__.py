"""Select the best n-gesture lexicon from a larger library.

Pairs of gesture classes are scored by how well their feature-space
ellipsoids are separated (the ellipsoidal distance ratio metric, EDRM),
optionally blended with subjective ratings, and the best subset of size n is
found exactly or greedily.  :mod:`gestlex.oracle` supplies the recognition-rate
ground truth used to validate a selection.
"""
from .data import FeatureDataset, FeatureStats, feature_stats, filter_features, fsw, fsw_all, load_features, write_features
from .edrm import DistanceSolution, ScoreMatrices, edrm_matrix, edrm_pair, min_surface_distance
from .ellipsoid import Ellipsoid, contains, fit_ellipsoid, project_onto, project_to_surface
from .errors import ConfigError, DataError, EnumerationCapError, GestlexError, SolverError
from .selection import (LexiconResult, RatingTable, best_lexicon, best_lexicon_exact,
                        best_lexicon_greedy, lexicon_score, load_ratings, sm_matrix,
                        subjective_measure, total_measure_matrix)

__version__ = "0.1.0"

"""Story point estimation from pairwise effort comparisons.

Train a linear effort scorer from "which item needs more effort"
judgments, benchmark it against MAE regression and an SVM-on-differences
baseline within projects, and collect real judgments over HTTP.
"""

__version__ = "0.1.0"

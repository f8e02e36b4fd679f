"""Topic-aware comment moderation pipeline.

Corpus handling, corpus analytics (MSTTR, PMI bigrams, topic overlap),
an embedded topic model with logistic-normal variational inference,
ten text/topic classifier variants, macro-F1 evaluation, and a
moderation-queue HTTP service.
"""

__version__ = "0.1.0"

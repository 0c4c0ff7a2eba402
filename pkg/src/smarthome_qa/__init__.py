"""Smart-home security QA dataset toolkit.

Turns forum-thread exports into versioned, refined QA datasets with contexts
and synthetic augmentation, extracts security topics with LDA, and evaluates
QA model predictions (token F1, ROUGE-L, semantic F1) -- with a human-review
loop for every LLM-assisted stage.
"""

__version__ = "0.1.0"

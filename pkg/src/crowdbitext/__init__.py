"""Crowd-in-the-loop bitext mining.

Workers submit URL pairs they believe are translations of each other; the
pipeline fetches both pages politely, extracts and aligns sentences, scores
the aligned pairs for alignment quality and domain fit, and computes a
quality-dependent reward. The service packages the pipeline behind an HTTP
API with an append-only payment ledger; the CLI exposes the pieces for
offline corpus work.
"""

__version__ = "0.1.0"

"""Goal-oriented semantic communication simulator for edge visual QA.

A question-aware pipeline over a simulated noisy link: scene semantics
(bounding boxes or scene-graph triplets) are ranked by relevance to a
question, the top items are serialized, LDPC-coded, sent over an AWGN or
Rayleigh channel, and a small program interpreter answers the question from
whatever survives decoding.
"""

__version__ = "0.1.0"

"""Collaborative annotation of 3D design models.

Annotations pair an illocutionary force (why it was said) with an utterance
(what was said), anchor to a point on a mesh surface, and are discussed in
threads, reviewed in live sessions, and compiled into design minutes.
"""

__version__ = "0.1.0"

"""Citation-aware drafting at desk scale: a small language model trained
jointly for generation and retrieval, a corpus pipeline, retrieval indexes,
an interleaved decoding orchestrator, evaluation tools, and a writing
service."""

__version__ = "0.1.0"

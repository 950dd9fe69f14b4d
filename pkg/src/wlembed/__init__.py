"""Weisfeiler-Lehman node embeddings for graph neural networks."""

"""Wind-tree billiards: negative-refraction trajectories in a lattice of
tilted rectangles, the equivalent slit surface, and its renormalization."""

__version__ = "0.1.0"

"""Zero-learning game framework: self-play tree search, a from-scratch
convolutional policy/value network, replay-buffer training, an ELO opponent
pool, and a live play service."""

__version__ = "0.1.0"

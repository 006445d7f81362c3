"""
specsynth
Learning control policies for probabilistically-labeled MDPs against LTL objectives
"""
__version__ = "0.1.0"

"""Simulator for the multi-mode clock billiard-ball circuit.

A single quantum clock enters ``M`` external modes, interacts through
vacuum-modified swaps with ``M`` looped modes, and the loop is closed either
by a Deutsch fixed point or by postselected teleportation.  The number of
clock ticks accumulated in the loop is read out as a loop-count
distribution.
"""

__version__ = "0.1.0"

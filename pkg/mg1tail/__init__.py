"""Stationary distributions and tail asymptotics of M/G/1-type Markov chains"""

from .mg1tail import *

__version__ = "0.1.0"

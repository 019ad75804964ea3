"""
mg1tail
Stationary distributions and light-tailed asymptotics of M/G/1-type Markov
chains.
"""


from mg1tail.asymptotics import *
from mg1tail.benchmark_models import *
from mg1tail.exceptions import *
from mg1tail.fundamental import *
from mg1tail.linalg import *
from mg1tail.mg1_system import *
from mg1tail.model import *
from mg1tail.oracle import *
from mg1tail.solver_parameters import *
from mg1tail.spectral import *
from mg1tail.utilities import *

"""
IL-(P) Workbench

Proof search, cut elimination, interpolation, fixed points and certified
countermodels for the interpretability logic IL- extended by persistence.
"""

__version__ = "1.0.0"
__author__ = "IL-(P) Workbench Project"
__license__ = "MIT"

from .calculus import Derivation, Sequent, System, check
from .canonical import countermodel
from .config import Config
from .errors import BudgetExceeded, IlpError
from .fixedpoint import fixpoint
from .interpolation import interpolate
from .search import decide, prove
from .syntax import parse, to_text

__all__ = ["Config", "Derivation", "Sequent", "System", "check", "countermodel", "decide",
           "fixpoint", "interpolate", "parse", "prove", "to_text", "BudgetExceeded",
           "IlpError"]

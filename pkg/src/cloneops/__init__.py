"""Clones of finitary operations, block algebras and clone algebras over finite sets."""
from .finite_ops import (Block, FinUniverse, OperationError, OpTable, Stream, canonicalize,
                         compose, constant, depends_on, evaluate, projection, similar,
                         top_eval)
from .clone_engine import (CapError, ClonePresentation, CloneSection, FinAlgebra, Undecided,
                           clone_close, clone_contains, term_block, term_clone, term_eval)
from .terms import App, Term, Var, parse_term
from .block_algebra import (BlockAlgebra, CloneAlgebra, dimension, from_constants, q_apply,
                            rca_embed, to_constants)

__version__ = "0.1.0"

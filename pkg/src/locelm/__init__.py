"""Local extreme learning machines for linear and nonlinear PDEs.

Domain decomposition into sub-domains, one random-feature tanh network per
sub-domain, collocation least squares coupling the sub-domains through
interface conditions, and block time marching.
"""

from .assembly import (
    AssemblyError,
    Assembler,
    LeastSquaresSystem,
    Nonlinearity,
    ProblemSpec,
    assemble_linear,
    jacobian,
    residual,
)
from .mesh import CollocationSet, DomainPartition, collocation, gauss_lobatto_legendre, partition
from .metrics import ErrorReport, error_report
from .network import (
    DomainError,
    FeatureJet,
    LocalNetwork,
    evaluate,
    feature_jet,
    new_local_network,
    set_output_weights,
)
from .problems import PROBLEMS, get_problem
from .solvers import (
    LmOptions,
    NlsqOptions,
    SolverError,
    levenberg_marquardt,
    lstsq_min_norm,
    newton_llsq,
    nlsq_perturb,
)
from .timemarch import BlockConfig, BlockSolution, MarchResult, evaluate_solution, march, solve_block

__version__ = "0.1.0"

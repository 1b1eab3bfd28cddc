from .encoding import Block, EncodingOracle, EnumerationOracle, LinearEncoding, OracleError
from .explicit import ExplicitInstance, explicit_problem, random_explicit, toy_t1, toy_t2
from .sahlp import SahlpInstance, generate_sahlp, sahlp_problem
from .capital_budgeting import CbInstance, cb_problem, generate_cb

__all__ = [
    "Block", "EncodingOracle", "EnumerationOracle", "LinearEncoding", "OracleError",
    "ExplicitInstance", "explicit_problem", "random_explicit", "toy_t1", "toy_t2",
    "SahlpInstance", "generate_sahlp", "sahlp_problem", "CbInstance", "cb_problem", "generate_cb",
]

"""Encode finite-domain CSPs as ground logic programs and solve them by unit propagation and nogood learning."""

from .csp import (
    Constraint, CspInstance, Domain, InstanceFormatError, Kind, Polarity, Variable,
    alldifferent, parse_instance, permutation, satisfies, serialize_instance, table, validate,
)
from .encoders import (
    ConEncoding, ConfigError, EncodedInstance, EncodingConfig, VarEncoding,
    encode_instance, lowered_tight_program, named_config,
)
from .engine import Engine, SolveResult, enumerate_models, extract_csp_solution, extract_domains
from .nogoods import NogoodDb, NotTightError, compile_program
from .program import Program, parse_program, serialize_program, translate_cardinality

__all__ = [
    "Constraint", "CspInstance", "Domain", "InstanceFormatError", "Kind", "Polarity", "Variable",
    "alldifferent", "parse_instance", "permutation", "satisfies", "serialize_instance", "table",
    "validate", "ConEncoding", "ConfigError", "EncodedInstance", "EncodingConfig", "VarEncoding",
    "encode_instance", "lowered_tight_program", "named_config", "Engine", "SolveResult",
    "enumerate_models", "extract_csp_solution", "extract_domains", "NogoodDb", "NotTightError",
    "compile_program", "Program", "parse_program", "serialize_program", "translate_cardinality",
]

"""Cayley-graph hash functions on SL_n(F_p) with non-backtracking walks."""

from .algebra import Matrix, mat_det, mat_inv, mat_mul, mat_pow
from .hasher import Digest, Hasher, Step, default_table, hash_bytes, hash_trits
from .params import GeneratorSet, ParamSet, build_generators, default_params, validate_params

__all__ = [
    "Digest",
    "GeneratorSet",
    "Hasher",
    "Matrix",
    "ParamSet",
    "Step",
    "build_generators",
    "default_params",
    "default_table",
    "hash_bytes",
    "hash_trits",
    "mat_det",
    "mat_inv",
    "mat_mul",
    "mat_pow",
    "validate_params",
]

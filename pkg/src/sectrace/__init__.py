"""Secondary traces of commuting pairs in a skeletal model of 2-vector spaces."""

from .linalg import GF, QQ, Field, Matrix
from .kv2vect import KVObject, KVOneMor, KVTwoMor

__all__ = ["GF", "QQ", "Field", "Matrix", "KVObject", "KVOneMor", "KVTwoMor"]
__version__ = "0.1.0"

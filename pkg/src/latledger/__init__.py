"""Confidential multi-asset ledger over module lattices.

Commitments live in Z_q[X]/(X^d + 1); transactions carry zero-knowledge
proofs that each row balances and every new balance stays in range.
"""

from .params import ParamSet, desk_params, load_params, paper_params, validate
from .ring import Ring, RingArray, backend_name, get_ring
from .commit import Commitment, KeyPair, PublicKeys, commit_tx, expand_keys, extract, keygen
from .ledger import Ledger, LedgerFile, Transaction, append, check_balance, create_tx, setup, verify_tx

__version__ = "0.1.0"

__all__ = [
    "ParamSet", "desk_params", "paper_params", "load_params", "validate",
    "Ring", "RingArray", "get_ring", "backend_name",
    "Commitment", "KeyPair", "PublicKeys", "commit_tx", "expand_keys", "extract", "keygen",
    "Ledger", "LedgerFile", "Transaction", "setup", "create_tx", "verify_tx", "append", "check_balance",
]

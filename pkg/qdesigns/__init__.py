"""
qdesigns: exact arithmetic for subspace designs over finite fields.

Enumerates subspaces of F_q^n, builds t-vs-k incidence structures, verifies
t-(n,k,lambda) designs and evaluates the local decoding system and the
existence-bound parameters with arbitrary-precision integers.
"""

import sys

__version__ = "1.0.0"

# Report values (existence bounds) routinely exceed the default 4300-digit
# int->str limit.
if hasattr(sys, "set_int_max_str_digits"):
    sys.set_int_max_str_digits(0)

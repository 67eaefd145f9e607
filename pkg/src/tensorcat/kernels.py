"""Batched numeric evaluation of scalar expression DAGs.

Expressions are compiled into a flat register program (one instruction
per distinct subexpression) which is then run over many sample points at
once.  Two interchangeable backends execute programs: a compiled Cython
loop (``tensorcat._ckernel``) and a numpy-vectorised fallback
(``tensorcat._pykernel``).  The compiled one is used when it imports and
``TENSORCAT_PURE`` is not set.
"""

import os
from dataclasses import dataclass

import numpy as np

from tensorcat import scalar as S

OP_CONST, OP_VAR, OP_ADD, OP_MUL, OP_NEG, OP_RECIP, OP_POWI, OP_SIN, OP_COS, OP_LOG = range(10)


@dataclass(frozen=True)
class Program:
    ops: np.ndarray  # int32 opcode per register
    arg0: np.ndarray  # int32 first operand register (or variable column)
    arg1: np.ndarray  # int32 second operand register (or exponent)
    consts: np.ndarray  # float64 constant per register (only used by OP_CONST)
    outputs: np.ndarray  # int32 register of each requested expression
    variables: tuple

    @property
    def size(self):
        return len(self.ops)


def compile_exprs(exprs) -> Program:
    ops, a0, a1, consts = [], [], [], []
    memo = {}
    variables = []
    var_col = {}

    def emit(op, x=0, y=0, c=0.0):
        ops.append(op)
        a0.append(x)
        a1.append(y)
        consts.append(c)
        return len(ops) - 1

    def chain(op, regs):
        acc = regs[0]
        for r in regs[1:]:
            acc = emit(op, acc, r)
        return acc

    # iterative post-order walk; deep trees would overflow recursion
    def visit(root):
        stack = [(root, False)]
        while stack:
            e, ready = stack.pop()
            if e in memo:
                continue
            kids = S.children(e)
            if not ready and kids:
                stack.append((e, True))
                stack.extend((k, False) for k in kids if k not in memo)
                continue
            if isinstance(e, S.Const):
                r = emit(OP_CONST, c=float(e.value))
            elif isinstance(e, S.Symbol):
                if e.name not in var_col:
                    var_col[e.name] = len(variables)
                    variables.append(e.name)
                r = emit(OP_VAR, var_col[e.name])
            elif isinstance(e, S.Add):
                r = chain(OP_ADD, [memo[k] for k in e.args])
            elif isinstance(e, S.Mul):
                r = chain(OP_MUL, [memo[k] for k in e.args])
            elif isinstance(e, S.IntPow):
                r = emit(OP_POWI, memo[e.base], e.exp)
            else:
                op = {S.Neg: OP_NEG, S.Recip: OP_RECIP, S.Sin: OP_SIN,
                      S.Cos: OP_COS, S.Log: OP_LOG}[type(e)]
                r = emit(op, memo[e.arg])
            memo[e] = r
        return memo[root]

    outputs = [visit(S.as_expr(e)) for e in exprs]
    return Program(
        np.asarray(ops, dtype=np.int32), np.asarray(a0, dtype=np.int32),
        np.asarray(a1, dtype=np.int32), np.asarray(consts, dtype=np.float64),
        np.asarray(outputs, dtype=np.int32), tuple(variables))


def _load_backend():
    if os.environ.get("TENSORCAT_PURE"):
        from tensorcat import _pykernel as mod
        return mod, "python"
    try:
        from tensorcat import _ckernel as mod
        return mod, "cython"
    except ImportError:
        from tensorcat import _pykernel as mod
        return mod, "python"


_backend, BACKEND = _load_backend()


def run_program(program: Program, points: np.ndarray, backend=None):
    """Evaluate at each row of ``points`` (columns follow ``program.variables``).

    Returns ``(values, bad)`` where ``values`` has shape ``(n_outputs, n_points)``
    and ``bad[p]`` flags points at which some instruction was singular or
    non-finite.
    """
    mod = _backend if backend is None else backend
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim == 1:
        points = points.reshape(-1, len(program.variables))
    return mod.run(program.ops, program.arg0, program.arg1, program.consts,
                   program.outputs, points)


def backends():
    """Importable backends by name, for benchmarks and cross-checks."""
    from tensorcat import _pykernel
    found = {"python": _pykernel}
    try:
        from tensorcat import _ckernel
        found["cython"] = _ckernel
    except ImportError:
        pass
    return found

"""numpy fallback for the register-program evaluator."""

import numpy as np

SINGULAR_EPS = 1e-300

OP_CONST, OP_VAR, OP_ADD, OP_MUL, OP_NEG, OP_RECIP, OP_POWI, OP_SIN, OP_COS, OP_LOG = range(10)


def run(ops, arg0, arg1, consts, outputs, points):
    n = points.shape[0]
    regs = [None] * len(ops)
    bad = np.zeros(n, dtype=bool)
    with np.errstate(all="ignore"):
        for r in range(len(ops)):
            op = ops[r]
            if op == OP_CONST:
                v = np.full(n, consts[r])
            elif op == OP_VAR:
                v = points[:, arg0[r]]
            elif op == OP_ADD:
                v = regs[arg0[r]] + regs[arg1[r]]
            elif op == OP_MUL:
                v = regs[arg0[r]] * regs[arg1[r]]
            elif op == OP_NEG:
                v = -regs[arg0[r]]
            elif op == OP_RECIP:
                x = regs[arg0[r]]
                bad |= np.abs(x) < SINGULAR_EPS
                v = 1.0 / x
            elif op == OP_POWI:
                x = regs[arg0[r]]
                k = int(arg1[r])
                if k < 0:
                    bad |= np.abs(x) < SINGULAR_EPS
                    v = 1.0 / x ** (-k)
                else:
                    v = x ** k
            elif op == OP_SIN:
                v = np.sin(regs[arg0[r]])
            elif op == OP_COS:
                v = np.cos(regs[arg0[r]])
            elif op == OP_LOG:
                x = regs[arg0[r]]
                bad |= ~(x > 0.0)
                v = np.log(x)
            else:
                raise ValueError(f"unknown opcode {op}")
            bad |= ~np.isfinite(v)
            regs[r] = v
        values = np.empty((len(outputs), n))
        for i, r in enumerate(outputs):
            values[i] = regs[r]
    return values, bad

# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled register-program evaluator (same contract as _pykernel.run)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, log, fabs, isfinite

cnp.import_array()

cdef double SINGULAR_EPS = 1e-300

DEF OP_CONST = 0
DEF OP_VAR = 1
DEF OP_ADD = 2
DEF OP_MUL = 3
DEF OP_NEG = 4
DEF OP_RECIP = 5
DEF OP_POWI = 6
DEF OP_SIN = 7
DEF OP_COS = 8
DEF OP_LOG = 9


cdef inline double powi(double x, int k) noexcept nogil:
    cdef double acc = 1.0
    cdef int m = k if k >= 0 else -k
    while m:
        if m & 1:
            acc *= x
        x *= x
        m >>= 1
    return acc if k >= 0 else 1.0 / acc


def run(const int[::1] ops, const int[::1] arg0, const int[::1] arg1,
        const double[::1] consts, const int[::1] outputs, const double[:, ::1] points):
    cdef Py_ssize_t n = points.shape[0]
    cdef Py_ssize_t m = ops.shape[0]
    cdef Py_ssize_t n_out = outputs.shape[0]
    values_arr = np.empty((n_out, n), dtype=np.float64)
    bad_arr = np.zeros(n, dtype=np.uint8)
    regs_arr = np.empty(max(m, 1), dtype=np.float64)
    cdef double[:, ::1] values = values_arr
    cdef unsigned char[::1] bad = bad_arr
    cdef double[::1] regs = regs_arr
    cdef Py_ssize_t p, r, i
    cdef double v, x
    cdef int op
    for r in range(m):
        if ops[r] < OP_CONST or ops[r] > OP_LOG:
            raise ValueError(f"unknown opcode {ops[r]}")
    with nogil:
        for p in range(n):
            for r in range(m):
                op = ops[r]
                if op == OP_CONST:
                    v = consts[r]
                elif op == OP_VAR:
                    v = points[p, arg0[r]]
                elif op == OP_ADD:
                    v = regs[arg0[r]] + regs[arg1[r]]
                elif op == OP_MUL:
                    v = regs[arg0[r]] * regs[arg1[r]]
                elif op == OP_NEG:
                    v = -regs[arg0[r]]
                elif op == OP_RECIP:
                    x = regs[arg0[r]]
                    if fabs(x) < SINGULAR_EPS:
                        bad[p] = 1
                        v = 0.0
                    else:
                        v = 1.0 / x
                elif op == OP_POWI:
                    x = regs[arg0[r]]
                    if arg1[r] < 0 and fabs(x) < SINGULAR_EPS:
                        bad[p] = 1
                        v = 0.0
                    else:
                        v = powi(x, arg1[r])
                elif op == OP_SIN:
                    v = sin(regs[arg0[r]])
                elif op == OP_COS:
                    v = cos(regs[arg0[r]])
                else:
                    x = regs[arg0[r]]
                    if not x > 0.0:
                        bad[p] = 1
                        v = 0.0
                    else:
                        v = log(x)
                if not isfinite(v):
                    bad[p] = 1
                regs[r] = v
            for i in range(n_out):
                values[i, p] = regs[outputs[i]]
    return values_arr, bad_arr.astype(bool)

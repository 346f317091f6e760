"""Compiled inner loops for the master-equation integrator.

The Liouvillian of H(t) = (alpha a + alpha* a^dag) Jy with a single lowering
dissipator is block diagonal over the Jy eigenvalue pairs (l, l'): each block
R^{ll'} of the density matrix (Jy eigenbasis (x) Fock) obeys

    dR/dt = -i (l B R - l' R B) + kappa (a R a^dag - (n R + R n)/2),
    B = alpha a + alpha* a^dag,  n = a^dag a.

Blocks never couple, so threads own whole blocks for an entire segment.
The right-hand side is an elementwise recurrence on the tridiagonal
structure of a and a^dag; rows are processed with branch-free inner loops so
the compiler can vectorize.  Results are deterministic (no shared
accumulation).
"""
from __future__ import annotations

import warnings

import numpy as np

# the TBB layer probe warns on older TBB builds; the fallback layer is fine
warnings.filterwarnings("ignore", message=".*TBB threading layer.*")

from numba import complex128, njit, prange


@njit(cache=True, fastmath=True)
def _rhs_block(rb, out, alpha, lr, lc, w, kappa, jump, n):
    """out = -i(l B rb - l' rb B) + kappa*(a rb a^dag - (n_i+n_j)/2 rb) for one block.

    `jump` toggles the a rb a^dag recycling term (off for no-jump evolution).
    """
    ca_l = -1j * alpha * lr            # coefficient of w[i]   * rb[i+1, j]
    cad_l = -1j * np.conj(alpha) * lr  # coefficient of w[i-1] * rb[i-1, j]
    ca_r = 1j * alpha * lc             # coefficient of w[j-1] * rb[i, j-1]
    cad_r = 1j * np.conj(alpha) * lc   # coefficient of w[j]   * rb[i, j+1]
    cjump = kappa if jump else 0.0     # coefficient of w[i]w[j] * rb[i+1, j+1]
    kap2 = 0.5 * kappa
    for i in range(n):
        rc = rb[i]
        cu = ca_l * w[i] if i + 1 < n else 0.0j
        cd = cad_l * w[i - 1] if i > 0 else 0.0j
        ru = rb[i + 1] if i + 1 < n else rb[i]      # masked by cu/cj when absent
        rd = rb[i - 1] if i > 0 else rb[i]          # masked by cd when absent
        cj = cjump * w[i] if i + 1 < n else 0.0
        oi = out[i]
        # j = 0 column
        acc = cu * ru[0] + cd * rd[0] + cad_r * w[0] * rc[1]
        acc += cj * w[0] * ru[1] - kap2 * i * rc[0]
        oi[0] = acc
        # interior columns, branch-free
        for j in range(1, n - 1):
            acc = cu * ru[j] + cd * rd[j]
            acc += ca_r * w[j - 1] * rc[j - 1] + cad_r * w[j] * rc[j + 1]
            acc += cj * w[j] * ru[j + 1]
            acc -= kap2 * (i + j) * rc[j]
            oi[j] = acc
        # j = n-1 column
        acc = cu * ru[n - 1] + cd * rd[n - 1] + ca_r * w[n - 2] * rc[n - 2]
        acc -= kap2 * (i + n - 1) * rc[n - 1]
        oi[n - 1] = acc


@njit(cache=True, parallel=True, fastmath=True)
def rk4_blocks(blocks, lrow, lcol, w, kappa, alpha_sub, h, nsteps, jump):
    """Advance all blocks by `nsteps` fixed RK4 steps of size h, in place.

    alpha_sub samples the drive on the half-step grid: alpha_sub[2*m] is
    alpha at the start of step m, alpha_sub[2*m + 1] at its midpoint, and
    alpha_sub[2*m + 2] at its end (2*nsteps + 1 entries in total).
    """
    nblocks, n, _ = blocks.shape
    for b in prange(nblocks):
        lr = lrow[b]
        lc = lcol[b]
        rb = blocks[b]
        k1 = np.empty((n, n), complex128)
        k2 = np.empty((n, n), complex128)
        k3 = np.empty((n, n), complex128)
        k4 = np.empty((n, n), complex128)
        yt = np.empty((n, n), complex128)
        for m in range(nsteps):
            a0 = alpha_sub[2 * m]
            am = alpha_sub[2 * m + 1]
            a1 = alpha_sub[2 * m + 2]
            _rhs_block(rb, k1, a0, lr, lc, w, kappa, jump, n)
            for i in range(n):
                for j in range(n):
                    yt[i, j] = rb[i, j] + 0.5 * h * k1[i, j]
            _rhs_block(yt, k2, am, lr, lc, w, kappa, jump, n)
            for i in range(n):
                for j in range(n):
                    yt[i, j] = rb[i, j] + 0.5 * h * k2[i, j]
            _rhs_block(yt, k3, am, lr, lc, w, kappa, jump, n)
            for i in range(n):
                for j in range(n):
                    yt[i, j] = rb[i, j] + h * k3[i, j]
            _rhs_block(yt, k4, a1, lr, lc, w, kappa, jump, n)
            for i in range(n):
                for j in range(n):
                    rb[i, j] += (h / 6.0) * (k1[i, j] + 2.0 * (k2[i, j] + k3[i, j]) + k4[i, j])

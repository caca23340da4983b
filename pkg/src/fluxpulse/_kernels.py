"""Compiled inner loops for Crank-Nicolson stepping on a uniform grid.

The Hamiltonian is tridiagonal: off-diagonal -kin, diagonal
v_static + ej * cos_term + 2 kin, with zero Dirichlet values beyond the ends.
``coef`` is i*d_tau/2 for real time and d_tau/2 for imaginary time.
"""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def thomas_solve(lower, diag, upper, rhs):
    """Solve a complex tridiagonal system without pivoting.

    ``lower`` and ``upper`` have length n - 1; ``lower[j]`` multiplies x[j]
    in row j + 1.
    """
    n = diag.size
    cp = np.empty(n, np.complex128)
    dp = np.empty(n, np.complex128)
    cp[0] = upper[0] / diag[0] if n > 1 else 0j
    dp[0] = rhs[0] / diag[0]
    for j in range(1, n):
        denom = diag[j] - lower[j - 1] * cp[j - 1]
        if j < n - 1:
            cp[j] = upper[j] / denom
        dp[j] = (rhs[j] - lower[j - 1] * dp[j - 1]) / denom
    x = np.empty(n, np.complex128)
    x[n - 1] = dp[n - 1]
    for j in range(n - 2, -1, -1):
        x[j] = dp[j] - cp[j] * x[j + 1]
    return x


@njit(cache=True, nogil=True)
def _cn_step(psi, v_static, cos_term, kin, ej, coef, cp, dp, rhs):
    n = psi.size
    off = -kin * coef
    for j in range(n):
        hd = v_static[j] + ej * cos_term[j] + 2.0 * kin
        rhs[j] = (1.0 - coef * hd) * psi[j]
    for j in range(1, n):
        rhs[j] -= off * psi[j - 1]
    for j in range(n - 1):
        rhs[j] -= off * psi[j + 1]
    # forward sweep; the reciprocal is spelled out because the dependency chain
    # through c_prev is latency bound
    c_prev = 0j
    d_prev = 0j
    for j in range(n):
        z = 1.0 + coef * (v_static[j] + ej * cos_term[j] + 2.0 * kin) - off * c_prev
        m = 1.0 / (z.real * z.real + z.imag * z.imag)
        inv = complex(z.real * m, -z.imag * m)
        c_prev = off * inv
        d_prev = (rhs[j] - off * d_prev) * inv
        cp[j] = c_prev
        dp[j] = d_prev
    nxt = dp[n - 1]
    psi[n - 1] = nxt
    for j in range(n - 2, -1, -1):
        nxt = dp[j] - cp[j] * nxt
        psi[j] = nxt


@njit(cache=True, nogil=True)
def cn_steps(psi, v_static, cos_term, kin, ej_steps, coef):
    """Advance ``psi`` in place by one step per entry of ``ej_steps``."""
    n = psi.size
    cp = np.empty(n, np.complex128)
    dp = np.empty(n, np.complex128)
    rhs = np.empty(n, np.complex128)
    for s in range(ej_steps.size):
        _cn_step(psi, v_static, cos_term, kin, ej_steps[s], coef, cp, dp, rhs)
    return psi


@njit(cache=True, nogil=True)
def apply_h(psi, v_static, cos_term, kin, ej):
    n = psi.size
    out = np.empty(n, np.complex128)
    for j in range(n):
        out[j] = (v_static[j] + ej * cos_term[j] + 2.0 * kin) * psi[j]
    for j in range(1, n):
        out[j] -= kin * psi[j - 1]
    for j in range(n - 1):
        out[j] -= kin * psi[j + 1]
    return out


@njit(cache=True, nogil=True)
def _norm_sq(psi, dx):
    s = 0.0
    for j in range(psi.size):
        s += psi[j].real * psi[j].real + psi[j].imag * psi[j].imag
    return s * dx


@njit(cache=True, nogil=True)
def _expectation(psi, v_static, cos_term, kin, ej, dx):
    hpsi = apply_h(psi, v_static, cos_term, kin, ej)
    s = 0.0
    for j in range(psi.size):
        s += (psi[j].conjugate() * hpsi[j]).real
    return s * dx


@njit(cache=True, nogil=True)
def relax_loop(psi, v_static, cos_term, kin, ej, d_tau, dx, tol, max_steps):
    """Imaginary-time CN with renormalization after every step.

    Stops once |dE| / d_tau < tol. Returns (energy, steps_taken, converged).
    """
    n = psi.size
    cp = np.empty(n, np.complex128)
    dp = np.empty(n, np.complex128)
    rhs = np.empty(n, np.complex128)
    coef = 0.5 * d_tau + 0j
    scale = 1.0 / np.sqrt(_norm_sq(psi, dx))
    for j in range(n):
        psi[j] *= scale
    energy = _expectation(psi, v_static, cos_term, kin, ej, dx)
    for step in range(1, max_steps + 1):
        _cn_step(psi, v_static, cos_term, kin, ej, coef, cp, dp, rhs)
        scale = 1.0 / np.sqrt(_norm_sq(psi, dx))
        for j in range(n):
            psi[j] *= scale
        new_energy = _expectation(psi, v_static, cos_term, kin, ej, dx)
        change = abs(new_energy - energy) / d_tau
        energy = new_energy
        if change < tol:
            return energy, step, True
    return energy, max_steps, False

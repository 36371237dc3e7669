"""Compiled column update shared by the shrinkage and SSSL samplers.

Both samplers put independent normal priors on the off-diagonal entries,
``sigma_jk ~ N(0, V[j, k])``; they differ only in how ``V`` is refreshed.
The kernels below take ``V`` as a p x p matrix of prior *variances*.

The precision matrix ``Omega = inv(Sigma)`` is carried alongside ``Sigma`` so
that ``inv(Sigma11) = Omega11 - omega12 omega12^T / omega22`` costs O(p^2)
per column; callers refresh ``Omega`` from a Cholesky of ``Sigma`` once per
sweep to stop drift.  ``gather_blocks``/``u_conditional`` form the column
conditional directly (O(p^3)) and serve as the reference for the cached path
in ``column_pass``.
"""

from __future__ import annotations

import math

import numba as nb
import numpy as np

from .rand_dist import gig_draw

CHI_FLOOR = 1e-12


@nb.njit(cache=True)
def _forward(L, b):
    m = b.shape[0]
    y = np.empty(m)
    for i in range(m):
        acc = b[i]
        for k in range(i):
            acc -= L[i, k] * y[k]
        y[i] = acc / L[i, i]
    return y


@nb.njit(cache=True)
def _backward_t(L, y):
    # solves L^T x = y
    m = y.shape[0]
    x = np.empty(m)
    for i in range(m - 1, -1, -1):
        acc = y[i]
        for k in range(i + 1, m):
            acc -= L[k, i] * x[k]
        x[i] = acc / L[i, i]
    return x


@nb.njit(cache=True)
def gather_blocks(Sig, Om, S, V, j):
    """Blocks of the column-``j`` partition used by the full conditionals.

    Returns ``(o, Si, S11, s12, s22, v, dvar)`` where ``Si = inv(Sigma11)``,
    ``v`` is the Schur complement and ``dvar`` the prior variances of ``u``.
    """
    p = Sig.shape[0]
    m = p - 1
    o = np.empty(m, np.int64)
    k = 0
    for i in range(p):
        if i != j:
            o[k] = i
            k += 1
    om22 = Om[j, j]
    om12 = np.empty(m)
    s12 = np.empty(m)
    dvar = np.empty(m)
    for a in range(m):
        om12[a] = Om[o[a], j]
        s12[a] = S[o[a], j]
        dvar[a] = V[o[a], j]
    Si = np.empty((m, m))
    S11 = np.empty((m, m))
    for a in range(m):
        for b in range(a, m):
            val = Om[o[a], o[b]] - om12[a] * om12[b] / om22
            Si[a, b] = val
            Si[b, a] = val
            sv = S[o[a], o[b]]
            S11[a, b] = sv
            S11[b, a] = sv
    return o, Si, S11, s12, S[j, j], 1.0 / om22, dvar


@nb.njit(cache=True)
def u_conditional(Si, S11, s12, v, dvar, lam):
    """Precision ``B + D^{-1}``, linear term ``w`` and ``A = Si S11 Si``."""
    A = Si @ S11 @ Si
    m = A.shape[0]
    P = np.empty((m, m))
    for a in range(m):
        for b in range(a, m):
            val = 0.5 * (A[a, b] + A[b, a]) / v + lam * Si[a, b]
            P[a, b] = val
            P[b, a] = val
        P[a, a] += 1.0 / dvar[a]
    w = Si @ s12 / v
    return P, w, A


@nb.njit(cache=True)
def draw_u(P, w, gen):
    L = np.linalg.cholesky(P)
    y = _forward(L, w)
    z = gen.standard_normal(w.shape[0])
    return _backward_t(L, y + z)


@nb.njit(cache=True)
def v_chi(A, Si, s12, s22, u):
    """``u^T A u - 2 s12^T Si u + s22`` (GIG ``b`` argument for ``v``)."""
    return u @ (A @ u) - 2.0 * (s12 @ (Si @ u)) + s22


@nb.njit(cache=True)
def _rank2_coeffs(Om, j, o, Siu, v_new):
    """Vectors ``w_new, w_old`` and weights with ``Om_new - Om_old = sum_k alpha_k w_k w_k^T``."""
    p = Om.shape[0]
    om22 = Om[j, j]
    w_new = np.empty(p)
    w_old = np.empty(p)
    for a in range(o.shape[0]):
        w_new[o[a]] = Siu[a]
        w_old[o[a]] = -Om[o[a], j] / om22
    w_new[j] = -1.0
    w_old[j] = -1.0
    return w_new, w_old, 1.0 / v_new, -om22


@nb.njit(cache=True)
def _cached_update(Sig, Om, S, N, M, V, j, n, lam, gen):
    """Column update using ``N = Om S`` and ``M = Om S Om`` kept in step with ``Om``.

    With ``c = omega12 / omega22`` the quantities the conditionals need are
    rank-one corrections of the cached products::

        Si S11 Si = M11 - M1j c^T - c Mj1 + Mjj c c^T
        Si s12    = N1j - c Njj

    so a column costs O(p^2) plus one Cholesky of the (p-1)-dimensional
    precision.  Afterwards ``Om`` moves by a rank-two term and ``N``, ``M``
    are patched to match.
    """
    p = Sig.shape[0]
    m = p - 1
    o = np.empty(m, np.int64)
    k = 0
    for i in range(p):
        if i != j:
            o[k] = i
            k += 1
    om22 = Om[j, j]
    v = 1.0 / om22
    c = np.empty(m)
    sis12 = np.empty(m)
    for a in range(m):
        c[a] = Om[o[a], j] / om22
    Mjj = M[j, j]
    Njj = N[j, j]
    for a in range(m):
        sis12[a] = N[o[a], j] - c[a] * Njj
    Si = np.empty((m, m))
    A = np.empty((m, m))
    P = np.empty((m, m))
    for a in range(m):
        oa = o[a]
        for b in range(a, m):
            ob = o[b]
            si = Om[oa, ob] - c[a] * c[b] * om22
            aa = M[oa, ob] - M[oa, j] * c[b] - c[a] * M[j, ob] + c[a] * c[b] * Mjj
            Si[a, b] = si
            Si[b, a] = si
            A[a, b] = aa
            A[b, a] = aa
            pv = aa / v + lam * si
            P[a, b] = pv
            P[b, a] = pv
        P[a, a] += 1.0 / V[oa, j]
    u = draw_u(P, sis12 / v, gen)

    Au = A @ u
    chi = u @ Au - 2.0 * (sis12 @ u) + S[j, j]
    clamped = 0
    if not chi > CHI_FLOOR:
        chi = CHI_FLOOR
        clamped = 1
    v_new = gig_draw(1.0 - 0.5 * n, lam, chi, gen)

    Siu = Si @ u
    w_new, w_old, al_new, al_old = _rank2_coeffs(Om, j, o, Siu, v_new)

    for a in range(m):
        Sig[o[a], j] = u[a]
        Sig[j, o[a]] = u[a]
    Sig[j, j] = v_new + u @ Siu
    for a in range(m):
        for b in range(a, m):
            val = Si[a, b] + Siu[a] * Siu[b] / v_new
            Om[o[a], o[b]] = val
            Om[o[b], o[a]] = val
        Om[o[a], j] = -Siu[a] / v_new
        Om[j, o[a]] = -Siu[a] / v_new
    Om[j, j] = 1.0 / v_new

    # N += Delta S;  M += N_new Delta + Delta N_old^T
    y_new = N @ w_new
    y_old = N @ w_old
    sw_new = S @ w_new
    sw_old = S @ w_old
    for r in range(p):
        b1 = al_new * w_new[r]
        b2 = al_old * w_old[r]
        for s in range(p):
            N[r, s] += b1 * sw_new[s] + b2 * sw_old[s]
    z_new = N @ w_new
    z_old = N @ w_old
    for r in range(p):
        a1 = al_new * z_new[r]
        a2 = al_new * w_new[r]
        a3 = al_old * z_old[r]
        a4 = al_old * w_old[r]
        for s in range(p):
            M[r, s] += a1 * w_new[s] + a2 * y_new[s] + a3 * w_old[s] + a4 * y_old[s]
    return clamped


@nb.njit(cache=True)
def column_pass(Sig, Om, S, V, order, n, lam, gen):
    """Update the columns in ``order``; returns the number of floored chi-terms."""
    N = Om @ S
    M = N @ Om
    M = 0.5 * (M + M.T)
    clamps = 0
    for j in order:
        clamps += _cached_update(Sig, Om, S, N, M, V, j, n, lam, gen)
    return clamps


@nb.njit(cache=True)
def update_column_inplace(Sig, Om, S, V, j, n, lam, gen):
    """Single-column update; returns 1 if the GIG chi-term had to be floored."""
    order = np.array([j], np.int64)
    return column_pass(Sig, Om, S, V, order, n, lam, gen)


@nb.njit(cache=True)
def local_shrinkage_inplace(Sig, Phi, Psi, a, b, tau1_sq, gen):
    """psi_jk ~ Gamma(a+b, phi_jk+1), then phi_jk ~ GIG(a-1/2, 2 psi_jk, sigma_jk^2/tau1^2)."""
    p = Sig.shape[0]
    clamps = 0
    for j in range(p):
        for k in range(j + 1, p):
            psi = gen.standard_gamma(a + b) / (Phi[j, k] + 1.0)
            chi = Sig[j, k] * Sig[j, k] / tau1_sq
            if not chi >= 1e-300:
                chi = 1e-300
                clamps += 1
            if not psi >= 1e-300:
                psi = 1e-300
                clamps += 1
            phi = gig_draw(a - 0.5, 2.0 * psi, chi, gen)
            if not (phi >= 1e-290 and phi <= 1e290):
                phi = min(max(phi, 1e-290), 1e290)
                clamps += 1
            Psi[j, k] = psi
            Psi[k, j] = psi
            Phi[j, k] = phi
            Phi[k, j] = phi
    return clamps


@nb.njit(cache=True)
def indicator_pass(Sig, Z, log_odds_prior, nu0_sq, nu1_sq, gen):
    """Z_jk ~ Bernoulli(slab responsibility of sigma_jk), computed on the log scale."""
    p = Sig.shape[0]
    half_log_ratio = 0.5 * math.log(nu0_sq / nu1_sq)
    diff = 0.5 * (1.0 / nu0_sq - 1.0 / nu1_sq)
    for j in range(p):
        for k in range(j + 1, p):
            s2 = Sig[j, k] * Sig[j, k]
            # log[pi N(s|0,nu1)] - log[(1-pi) N(s|0,nu0)]
            t = log_odds_prior + half_log_ratio + diff * s2
            if t >= 0:
                prob = 1.0 / (1.0 + math.exp(-t))
            else:
                e = math.exp(t)
                prob = e / (1.0 + e)
            z = 1.0 if gen.random() < prob else 0.0
            Z[j, k] = z
            Z[k, j] = z

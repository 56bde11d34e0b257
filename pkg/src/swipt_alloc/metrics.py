"""Closed-form performance functionals for the two allocation problems.

Separated-receiver downlink (one information receiver h, one energy
receiver g, beam w_I, energy covariance W_E):

    R      = log2(1 + |h' w_I|^2 / sigma^2)                    [bits/s/Hz]
    P_harv = eta (|g' w_I|^2 + g' W_E g)                       [W]
    P_tot  = (|w_I|^2 + tr W_E)/xi + N_T P_ant + P_c           [W]
    Phi_IR = R / P_tot            (information energy efficiency)
    Phi_EH = P_harv / P_tot      (harvesting energy efficiency)

Rates are spectral (bits/s/Hz) throughout; bandwidth never multiplies
into them here, so efficiencies carry units of bits/Hz/J.

Secure multiuser downlink (desired users h_k with power-splitting ratio
rho_k, roaming receivers G_m with N_R antennas, beams W_k, artificial
noise covariance V):

    SINR_k = rho_k h_k' W_k h_k
             / (rho_k (sum_{j!=k} h_k' W_j h_k + h_k' V h_k + s_ant^2) + s_s^2)

    eavesdropper upper bound (receiver m decoding user k, all received
    energy devoted to interception):

    Rbar_{m,k} = log2 det(I + (Sigma_m + s_s^2 I)^{-1} G_m' W_k G_m),
    Sigma_m    = G_m' V G_m + s_ant^2 I

    secrecy rate: [R_k - max_m Rbar_{m,k}]^+

    harvested, desired k:  eta (1-rho_k) (sum_j h_k' W_j h_k + h_k' V h_k + s_ant^2)
    harvested, roaming m:  eta (1-rho_m) (sum_k tr(G_m' W_k G_m)
                                          + tr(G_m G_m' V) + N_R s_ant^2)

All functions are pure; determinants are evaluated through a Cholesky
factorization of the PSD argument so the log never sees a negative
intermediate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "MoopObjectives",
    "SecureQoS",
    "rate_sep",
    "harvested_sep",
    "total_power",
    "moop_objectives",
    "sinr_k",
    "eav_rate_upper",
    "secrecy_rate",
    "harvested_secure",
]


@dataclass
class MoopObjectives:
    """The three competing figures of merit of the separated-receiver design.

    ir_ee : bits/Hz/J, rate per watt consumed.
    eh_ee : dimensionless, watts harvested per watt consumed.
    p_tx  : W, radiated power |w_I|^2 + tr W_E (the quantity whose negative
            is the third design objective).
    """

    ir_ee: float
    eh_ee: float
    p_tx: float


@dataclass
class SecureQoS:
    """Per-receiver quality-of-service report for the secure design.

    sinr              : (K,) linear SINRs at the desired receivers.
    eav_rate_upper    : (M, K) interception-rate upper bounds, roaming
                        receiver m decoding the stream of user k.
    secrecy_rate      : (K,) clamped secrecy rates [R_k - max_m Rbar_mk]^+.
    harvested_desired : (K,) W at the desired receivers' energy harvesters.
    harvested_roaming : (M,) W at the roaming receivers.
    """

    sinr: np.ndarray
    eav_rate_upper: np.ndarray
    secrecy_rate: np.ndarray
    harvested_desired: np.ndarray
    harvested_roaming: np.ndarray


# -- separated-receiver functionals ----------------------------------------------


def rate_sep(h, w_i, noise_power):
    """Achievable rate log2(1 + |h' w_I|^2 / sigma^2) in bits/s/Hz."""
    if noise_power <= 0:
        raise ValueError("noise_power must be positive")
    h = np.asarray(h)
    w_i = np.asarray(w_i)
    snr = abs(np.vdot(h, w_i)) ** 2 / noise_power
    return float(np.log2(1.0 + snr))


def harvested_sep(g, w_i, w_e, eta):
    """Harvested power eta (|g' w_I|^2 + g' W_E g) in watts.

    W_E enters only through the quadratic form, so it may be any PSD
    covariance, including exact zero.
    """
    g = np.asarray(g)
    w_i = np.asarray(w_i)
    w_e = np.asarray(w_e)
    beam = abs(np.vdot(g, w_i)) ** 2
    broad = float(np.real(np.vdot(g, w_e @ g))) if w_e.ndim == 2 else 0.0
    return float(eta * (beam + broad))


def total_power(w_i, w_e, params):
    """Consumed power (|w_I|^2 + tr W_E)/xi + N_T P_ant + P_c in watts."""
    w_i = np.asarray(w_i)
    w_e = np.asarray(w_e)
    p_rad = float(np.real(np.vdot(w_i, w_i)))
    if w_e.ndim == 2:
        p_rad += float(np.real(np.trace(w_e)))
    return p_rad / params.pa_efficiency + params.circuit_power


def moop_objectives(w_i, w_e, channels, params):
    """Evaluate (Phi_IR, Phi_EH, p_tx) for a separated-receiver allocation."""
    w_i = np.asarray(w_i)
    w_e = np.asarray(w_e)
    p_tx = float(np.real(np.vdot(w_i, w_i)))
    if w_e.ndim == 2:
        p_tx += float(np.real(np.trace(w_e)))
    p_tot = p_tx / params.pa_efficiency + params.circuit_power
    rate = rate_sep(channels.h, w_i, params.noise_power)
    harv = harvested_sep(channels.g, w_i, w_e, params.eta)
    return MoopObjectives(ir_ee=rate / p_tot, eh_ee=harv / p_tot, p_tx=p_tx)


# -- secure-downlink functionals --------------------------------------------------


def sinr_k(k, h_list, w_list, v, rho_k, sigma_ant2, sigma_s2):
    """SINR at desired receiver k after power splitting.

    rho_k = 0 sends no power to the information decoder; the SINR is
    defined as 0 in that limit (the expression's continuous extension
    when sigma_s2 > 0).
    """
    if not 0.0 <= rho_k <= 1.0:
        raise ValueError("rho_k must lie in [0, 1]")
    if rho_k == 0.0:
        return 0.0
    h = np.asarray(h_list[k])
    own = float(np.real(np.vdot(h, np.asarray(w_list[k]) @ h)))
    inter = sum(
        float(np.real(np.vdot(h, np.asarray(w) @ h)))
        for j, w in enumerate(w_list)
        if j != k
    )
    an = float(np.real(np.vdot(h, np.asarray(v) @ h)))
    denom = rho_k * (inter + an + sigma_ant2) + sigma_s2
    return rho_k * own / denom


def _log2_det_psd(mat):
    """log2 det of a Hermitian positive definite matrix via Cholesky."""
    chol = np.linalg.cholesky(mat)
    return 2.0 * float(np.sum(np.log2(np.real(np.diag(chol)))))


def eav_rate_upper(m, k, g_m, w_k, v, sigma_ant2, sigma_s2):
    """Interception-rate upper bound of roaming receiver m on user k's stream.

    log2 det(I + (Sigma_m + s_s^2 I)^{-1} G_m' W_k G_m) with
    Sigma_m = G_m' V G_m + s_ant^2 I, evaluated as
    log2 det(B + A) - log2 det(B) so both determinants come from Cholesky
    factorizations of Hermitian PD matrices.  The bound corresponds to the
    receiver devoting all received energy to interception.
    """
    g_m = np.asarray(g_m)
    n_r = g_m.shape[1]
    a = g_m.conj().T @ np.asarray(w_k) @ g_m
    b = (
        g_m.conj().T @ np.asarray(v) @ g_m
        + (sigma_ant2 + sigma_s2) * np.eye(n_r)
    )
    val = _log2_det_psd(b + a) - _log2_det_psd(b)
    return max(val, 0.0)


def secrecy_rate(rate, eav_rates):
    """Clamped secrecy rate [R - max_m Rbar_m]^+ for one desired user.

    `eav_rates` holds the interception bounds of every roaming receiver on
    this user's stream; with no roaming receivers present the maximum is
    vacuously 0 and the secrecy rate equals the clamped own rate.
    """
    eav_rates = np.asarray(eav_rates, dtype=float)
    worst = float(eav_rates.max()) if eav_rates.size else 0.0
    return max(float(rate) - worst, 0.0)


def harvested_secure(channel, w_list, v, rho, eta, sigma_ant2, n_r=None):
    """Harvested power at a desired (vector channel) or roaming (matrix
    channel) receiver under power-splitting ratio rho.

    A 1-D channel h_k gives the desired-receiver form
    eta (1-rho)(sum_j h' W_j h + h' V h + s_ant^2); a 2-D channel G_m gives
    the roaming form eta (1-rho)(sum_k tr(G' W_k G) + tr(G G' V) + N_R s_ant^2)
    with N_R read from the channel's column count unless given explicitly.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    ch = np.asarray(channel)
    v = np.asarray(v)
    if ch.ndim == 1:
        sig = sum(float(np.real(np.vdot(ch, np.asarray(w) @ ch))) for w in w_list)
        an = float(np.real(np.vdot(ch, v @ ch)))
        return eta * (1.0 - rho) * (sig + an + sigma_ant2)
    if ch.ndim != 2:
        raise ValueError("channel must be a vector (desired) or matrix (roaming)")
    if n_r is None:
        n_r = ch.shape[1]
    sig = sum(
        float(np.real(np.trace(ch.conj().T @ np.asarray(w) @ ch))) for w in w_list
    )
    an = float(np.real(np.trace(ch @ ch.conj().T @ v)))
    return eta * (1.0 - rho) * (sig + an + n_r * sigma_ant2)

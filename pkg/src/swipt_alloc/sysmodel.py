"""Physical-layer system model: units, parameters, geometry, channel draws.

Two parameter sets are modeled.  `SystemParams` describes the two-receiver
downlink (one information receiver, one energy harvester) used by the
energy-efficiency allocator; `SecureParams` describes the multiuser downlink
with K desired single-antenna receivers and M multi-antenna roaming
receivers (potential eavesdroppers) used by the secrecy-constrained
allocator.  Defaults give the 470 MHz indoor setups used by the bundled
experiment presets.

Channels combine a dual-slope distance path loss with Rician small-scale
fading.  The path loss follows free space (20 dB/decade) out to a 5 m
breakpoint and 35 dB/decade beyond it; a single antenna-gain term is applied
once per link.  Fading entries are
sqrt(gain) * ( sqrt(kappa/(1+kappa)) * 1 + sqrt(1/(1+kappa)) * CN(0,1) ),
so E|entry|^2 = gain exactly, with the deterministic all-ones phase
reference standing in for the line-of-sight steering vector.

Randomness is counter-based: every draw derives its own generator from
(master seed, trial index, draw counter), so any trial can be regenerated
bit-identically in isolation and evaluation order never matters.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s
BREAKPOINT_M = 5.0              # dual-slope breakpoint distance
SLOPE_BEYOND_DB = 35.0          # dB per decade past the breakpoint


def dbm_to_watt(p_dbm):
    """Convert dBm to watt: 10^((p-30)/10)."""
    return 10.0 ** ((np.asarray(p_dbm, dtype=float) - 30.0) / 10.0)


def watt_to_dbm(p_watt):
    """Convert watt to dBm; requires a strictly positive power."""
    p = np.asarray(p_watt, dtype=float)
    if np.any(p <= 0):
        raise ValueError("power must be positive to express in dBm")
    return 10.0 * np.log10(p) + 30.0


@dataclass
class SystemParams:
    """Constants of the two-receiver energy-efficiency downlink."""

    n_tx_antennas: int = 8
    carrier_freq: float = 470e6          # Hz
    bandwidth: float = 200e3             # Hz (documentation only; rates are per-Hz)
    p_ant: float = 0.075                 # W dynamic consumption per active antenna
    p_c: float = 1.0                     # W static circuit consumption
    pa_efficiency: float = 0.4           # power-amplifier efficiency xi
    p_max: float = 1.0                   # W transmit power budget
    eta: float = 0.8                     # RF-to-DC conversion efficiency
    noise_power: float = dbm_to_watt(-47.0)   # W, receiver noise sigma^2
    rician_factor_db: float = 3.0
    antenna_gain_dbi: float = 10.0
    d_ref: float = 1.0                   # m reference distance
    d_max: float = 10.0                  # m maximum service distance

    def __post_init__(self):
        if not 0 < self.pa_efficiency <= 1:
            raise ValueError("pa_efficiency must lie in (0, 1]")
        if not 0 <= self.eta <= 1:
            raise ValueError("eta must lie in [0, 1]")
        if self.p_max <= 0 or self.noise_power <= 0:
            raise ValueError("p_max and noise_power must be positive")
        if not self.d_ref < self.d_max:
            raise ValueError("d_ref must be smaller than d_max")
        if self.n_tx_antennas < 1:
            raise ValueError("need at least one transmit antenna")

    @property
    def circuit_power(self):
        """Signal-independent consumption N_T * P_ant + P_c in watt."""
        return self.n_tx_antennas * self.p_ant + self.p_c


@dataclass
class SecureParams:
    """Constants of the secrecy-constrained multiuser downlink."""

    n_tx_antennas: int = 8
    n_rx_antennas: int = 2               # antennas per roaming receiver
    n_desired: int = 3                   # K single-antenna desired receivers
    n_roaming: int = 2                   # M roaming receivers / eavesdroppers
    sigma_ant2: float = dbm_to_watt(-124.0)   # W antenna noise
    sigma_s2: float = dbm_to_watt(-23.0)      # W signal-processing noise
    gamma_req: object = 10.0             # linear SINR target, scalar or per-user
    r_max: object = 1.0                  # bit/s/Hz eavesdropper cap, scalar or (M,K)
    p_req1: object = dbm_to_watt(0.0)    # W harvest floor, desired receivers
    p_req2: object = dbm_to_watt(0.0)    # W harvest floor, roaming receivers
    eta: float = 0.5
    carrier_freq: float = 470e6
    rician_factor_db: float = 3.0
    antenna_gain_dbi: float = 10.0
    d_ref: float = 2.0
    d_max: float = 50.0

    def __post_init__(self):
        if not self.n_tx_antennas > self.n_rx_antennas >= 1:
            raise ValueError("model assumes n_tx_antennas > n_rx_antennas >= 1")
        if self.n_desired < 1 or self.n_roaming < 0:
            raise ValueError("need K >= 1 desired and M >= 0 roaming receivers")
        if not 0 <= self.eta <= 1:
            raise ValueError("eta must lie in [0, 1]")
        if self.sigma_ant2 <= 0 or self.sigma_s2 <= 0:
            raise ValueError("noise powers must be positive")
        if np.any(self.gamma_reqs() <= 0):
            raise ValueError("SINR targets must be positive")
        if np.any(self.r_maxes() <= 0):
            raise ValueError("eavesdropper rate caps must be positive")
        if not self.d_ref < self.d_max:
            raise ValueError("d_ref must be smaller than d_max")

    def gamma_reqs(self):
        """Per-desired-user linear SINR targets, shape (K,)."""
        return np.broadcast_to(np.asarray(self.gamma_req, float), (self.n_desired,)).copy()

    def r_maxes(self):
        """Per-(roaming, desired) eavesdropper rate caps, shape (M, K)."""
        return np.broadcast_to(
            np.asarray(self.r_max, float), (self.n_roaming, self.n_desired)
        ).copy()

    def p_req1s(self):
        """Per-desired-user harvest floors in watt, shape (K,)."""
        return np.broadcast_to(np.asarray(self.p_req1, float), (self.n_desired,)).copy()

    def p_req2s(self):
        """Per-roaming-user harvest floors in watt, shape (M,)."""
        return np.broadcast_to(np.asarray(self.p_req2, float), (self.n_roaming,)).copy()


@dataclass
class ChannelSet:
    """One realization of every link the active model needs.

    The two-receiver model fills h (information receiver) and g (harvester);
    the multiuser model fills h_list (K desired-user vectors) and g_list
    (M roaming-receiver N_T x N_R matrices).  `distances` records the drawn
    receiver distances in the same order the channels were drawn.
    """

    h: np.ndarray | None = None
    g: np.ndarray | None = None
    h_list: list | None = None
    g_list: list | None = None
    distances: np.ndarray = field(default_factory=lambda: np.zeros(0))


def path_loss_gain(d, params):
    """Linear power gain of a link at distance d (meters).

    Free-space loss 20*log10(4 pi d f / c) up to the 5 m breakpoint,
    35 dB/decade beyond it, minus once the antenna gain in dBi.  Distances
    below the model's reference distance are outside the fitted range.
    """
    d = float(d)
    if d < params.d_ref:
        raise ValueError(f"distance {d} m below reference distance {params.d_ref} m")
    f = params.carrier_freq
    fs_at = lambda dist: 20.0 * np.log10(4.0 * np.pi * dist * f / SPEED_OF_LIGHT)
    if d <= BREAKPOINT_M:
        loss_db = fs_at(d)
    else:
        loss_db = fs_at(BREAKPOINT_M) + SLOPE_BEYOND_DB * np.log10(d / BREAKPOINT_M)
    return 10.0 ** ((params.antenna_gain_dbi - loss_db) / 10.0)


def draw_rician(rng, rows, cols, rician_factor_db, link_gain):
    """Rician fading matrix with per-entry mean power exactly link_gain."""
    if link_gain <= 0:
        raise ValueError("link_gain must be positive")
    kappa = 10.0 ** (float(rician_factor_db) / 10.0)
    los = np.ones((rows, cols), dtype=complex)
    scatter = (
        rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    ) / np.sqrt(2.0)
    return np.sqrt(link_gain) * (
        np.sqrt(kappa / (1.0 + kappa)) * los + np.sqrt(1.0 / (1.0 + kappa)) * scatter
    )


def place_receivers(rng, n, d_ref, d_max):
    """Distances drawn i.i.d. uniform on [d_ref, d_max]; shape (n,)."""
    if n < 0:
        raise ValueError("receiver count must be nonnegative")
    return d_ref + (d_max - d_ref) * rng.random(int(n))


def _rng_for(seed, trial, counter):
    """Counter-based generator: one independent stream per (seed, trial, draw)."""
    return np.random.default_rng(
        np.random.SeedSequence(entropy=int(seed), spawn_key=(int(trial), int(counter)))
    )


def _draw_nonzero(seed, trial, counter, shape, rician_db, gain):
    """Rician draw with resampling of the measure-zero all-zero outcome."""
    for attempt in range(100):
        mat = draw_rician(
            _rng_for(seed, trial, counter + 1000 * attempt), shape[0], shape[1],
            rician_db, gain,
        )
        if np.linalg.norm(mat) > 0:
            return mat
    raise RuntimeError("channel draw degenerate 100 times in a row")  # pragma: no cover


def _sanity_bounds(norm_sq, gain, n_entries):
    """Plausibility window for a drawn channel's squared norm.

    Mean energy is n_entries * gain exactly; a factor-64 ceiling and 1e-9
    floor sit so far in the tails that a trip indicates a units bug, not
    bad luck.
    """
    if not (1e-9 * n_entries * gain < norm_sq < 64.0 * n_entries * gain):
        raise AssertionError(
            f"channel energy {norm_sq:.3e} outside plausible range for gain {gain:.3e}"
        )


def draw_channels_sep(params: SystemParams, seed, trial):
    """One two-receiver realization: h (information) and g (harvester).

    Pure function of (seed, trial): distances use draw counter 0, h counter 1,
    g counter 2.
    """
    n_t = params.n_tx_antennas
    dists = place_receivers(_rng_for(seed, trial, 0), 2, params.d_ref, params.d_max)
    gain_h = path_loss_gain(dists[0], params)
    gain_g = path_loss_gain(dists[1], params)
    h = _draw_nonzero(seed, trial, 1, (n_t, 1), params.rician_factor_db, gain_h).ravel()
    g = _draw_nonzero(seed, trial, 2, (n_t, 1), params.rician_factor_db, gain_g).ravel()
    _sanity_bounds(float(np.linalg.norm(h) ** 2), gain_h, n_t)
    _sanity_bounds(float(np.linalg.norm(g) ** 2), gain_g, n_t)
    return ChannelSet(h=h, g=g, distances=dists)


def draw_channels_secure(params: SecureParams, seed, trial):
    """One multiuser realization: K desired vectors and M roaming matrices.

    Pure function of (seed, trial): distances use draw counter 0, desired
    user k counter 1+k, roaming receiver m counter 1+K+m.  Distances are
    ordered desired first, then roaming.
    """
    n_t, n_r = params.n_tx_antennas, params.n_rx_antennas
    K, M = params.n_desired, params.n_roaming
    dists = place_receivers(_rng_for(seed, trial, 0), K + M, params.d_ref, params.d_max)
    h_list, g_list = [], []
    for k in range(K):
        gain = path_loss_gain(dists[k], params)
        hk = _draw_nonzero(seed, trial, 1 + k, (n_t, 1), params.rician_factor_db, gain)
        _sanity_bounds(float(np.linalg.norm(hk) ** 2), gain, n_t)
        h_list.append(hk.ravel())
    for m in range(M):
        gain = path_loss_gain(dists[K + m], params)
        gm = _draw_nonzero(
            seed, trial, 1 + K + m, (n_t, n_r), params.rician_factor_db, gain
        )
        _sanity_bounds(float(np.linalg.norm(gm) ** 2), gain, n_t * n_r)
        g_list.append(gm)
    return ChannelSet(h_list=h_list, g_list=g_list, distances=dists)

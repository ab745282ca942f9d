"""Radar-side quantities: SINR, clutter covariance, the closed-form receive
filter, beampatterns, and the quadratic forms consumed by the code update.

Target and clutter amplitudes follow a Swerling I model, so the unit-modulus
data symbol is absorbed into them and never appears on the radar path.
"""

from dataclasses import dataclass

import numpy as np

from . import linalg
from . import scenario as sc

__all__ = [
    "ClutterComponent",
    "RadarChannel",
    "radar_channel",
    "sinr",
    "clutter_covariance",
    "optimal_radar_filter",
    "transmit_beampattern",
    "receive_beampattern",
    "sinr_forms",
]


@dataclass(frozen=True)
class ClutterComponent:
    power: float
    response: np.ndarray


@dataclass(frozen=True)
class RadarChannel:
    """One subcarrier as seen by the radar receiver."""

    target_response: np.ndarray  # space-time matrix toward the inspected direction
    target_power: float
    clutter: tuple
    noise_power: float

    @property
    def dim_rx(self):
        return self.target_response.shape[0]


def radar_channel(scn, k):
    """Build the radar channel of subcarrier ``k`` from a scenario."""
    sub = scn.subcarriers[k]
    t = scn.num_slots
    psi = scn.target_directions[k]
    g_t = sc.steering(scn.radar_rx_array, sub.center_frequency, psi)
    s_t = sc.steering(scn.tx_array, sub.center_frequency, psi)
    clutter = []
    for cl in scn.clutter:
        g_c = sc.steering(scn.radar_rx_array, sub.center_frequency, cl.angle)
        s_c = sc.steering(scn.tx_array, sub.center_frequency, cl.angle)
        clutter.append(ClutterComponent(cl.power[k], sc.g_matrix(g_c, s_c, t)))
    return RadarChannel(
        target_response=sc.g_matrix(g_t, s_t, t),
        target_power=scn.target_powers[k],
        clutter=tuple(clutter),
        noise_power=scn.radar_noise[k],
    )


def sinr(u, w, ch):
    """Radar SINR for code ``u`` and filter ``w``: target power over clutter plus noise."""
    wn = float(np.vdot(w, w).real)
    if wn == 0.0:
        raise ValueError("radar filter must be nonzero")
    num = ch.target_power * abs(np.vdot(w, ch.target_response @ u)) ** 2
    den = ch.noise_power * wn
    for cl in ch.clutter:
        den += cl.power * abs(np.vdot(w, cl.response @ u)) ** 2
    return num / den


def clutter_covariance(u, ch):
    """Clutter-plus-noise covariance of the filtered samples for code ``u``.

    Hermitian positive definite: the noise floor bounds its spectrum below.
    """
    n = ch.dim_rx
    phi = ch.noise_power * np.eye(n, dtype=complex)
    for cl in ch.clutter:
        v = cl.response @ u
        phi += cl.power * np.outer(v, v.conj())
    return 0.5 * (phi + phi.conj().T)


def optimal_radar_filter(u, ch, normalize=True):
    """SINR-optimal receive filter: whitened matched filter against clutter.

    Solves Phi(u) w = G u; the achieved SINR equals the quadratic-form bound
    sigma_eta^2 u^H G^H Phi^-1 G u.  The returned filter is unit-norm by
    default (the SINR is scale invariant).
    """
    phi = clutter_covariance(u, ch)
    v = ch.target_response @ u
    try:
        w = linalg.solve_hpd(phi, v)
    except np.linalg.LinAlgError:
        # cannot happen with a positive noise floor; guard with loading anyway
        phi += (1e-12 * ch.noise_power + 1e-300) * np.eye(ch.dim_rx)
        w = linalg.solve_hpd(phi, v)
    if normalize:
        nrm = np.linalg.norm(w)
        if nrm > 0:
            w = w / nrm
    return w


def transmit_beampattern(u, tx_array, subcarrier, angle):
    """Power radiated toward ``angle``: ||s^T(angle) U||^2 / T.

    ``angle`` may be an array.  Never exceeds Nt * P when the code power
    ||u||^2 / T stays within P.
    """
    nt = tx_array.num_elements
    t = u.shape[0] // nt
    code = np.asarray(u).reshape(t, nt)  # row per slot
    s = sc.steering(tx_array, subcarrier.center_frequency, angle)
    proj = code @ s  # (T,) or (T, n_angles)
    return (np.abs(proj) ** 2).sum(axis=0) / t


def receive_beampattern(filter_matrix, rx_array, subcarrier, angle):
    """Receive gain toward ``angle`` for a space-time filter W: ||W^H g||^2 / T."""
    w = np.asarray(filter_matrix)
    t = w.shape[1]
    g = sc.steering(rx_array, subcarrier.center_frequency, angle)
    proj = w.conj().T @ g
    return (np.abs(proj) ** 2).sum(axis=0) / t


def sinr_forms(w, ch):
    """Quadratic forms over codes whose ratio is the radar SINR.

    Returns ``(target_form, clutter_form)``: both PSD, the first rank one, and
    SINR(u, w) = u^H T u / (u^H C u + noise ||w||^2) for every code u.
    """
    vt = ch.target_response.conj().T @ w
    target_form = ch.target_power * np.outer(vt, vt.conj())
    dim = ch.target_response.shape[1]
    clutter_form = np.zeros((dim, dim), dtype=complex)
    for cl in ch.clutter:
        vc = cl.response.conj().T @ w
        clutter_form += cl.power * np.outer(vc, vc.conj())
    return 0.5 * (target_form + target_form.conj().T), 0.5 * (clutter_form + clutter_form.conj().T)

"""Communication-side quantities for the served users.

For a user on one subcarrier, the channel magnitude produced by the direct
and indirect paths is Rice distributed; this module computes its scale/shape
parameters, the receive SNR, the differential-detection error probability,
the SNR threshold that a target error rate translates into, and the quadratic
form over transmit codes whose value is the SNR (used by the code update).
"""

import math
from dataclasses import dataclass

import numpy as np

from . import scenario as sc

__all__ = [
    "DegenerateLinkError",
    "PathResponse",
    "UserLink",
    "RicianParams",
    "SnrThreshold",
    "user_link",
    "rician_params",
    "snr",
    "mode_snr",
    "dpsk_error_prob",
    "error_prob_d2",
    "snr_threshold",
    "q_function",
    "q_inverse",
    "snr_form",
]


class DegenerateLinkError(RuntimeError):
    """Direct and indirect contributions both vanished; the link carries no signal."""


@dataclass(frozen=True)
class PathResponse:
    kind: str
    power: float  # |beta|^2 for direct, fading variance for indirect
    response: np.ndarray  # space-time matrix mapping codes to receive samples


@dataclass(frozen=True)
class UserLink:
    """Per-(subcarrier, user) geometry: path responses plus the noise floor."""

    paths: tuple
    noise_power: float
    num_rx: int
    num_slots: int

    def direct(self):
        return tuple(p for p in self.paths if p.kind == sc.DIRECT)

    def indirect(self):
        return tuple(p for p in self.paths if p.kind == sc.INDIRECT)


@dataclass(frozen=True)
class RicianParams:
    """Rice magnitude parameters: total mean power and direct-to-indirect ratio."""

    scale: float  # received power summed over all paths
    shape: float  # k-factor; math.inf for a pure line-of-sight link


@dataclass(frozen=True)
class SnrThreshold:
    rho: float
    mode: str  # "direct" or "indirect"


def user_link(user, subcarrier, num_slots, tx_array):
    """Precompute the space-time response of every path of ``user``."""
    paths = []
    for p in user.paths:
        g = sc.steering(user.array, subcarrier.center_frequency, p.angle_arrival)
        s = sc.steering(tx_array, subcarrier.center_frequency, p.angle_departure)
        paths.append(PathResponse(p.kind, p.power, sc.g_matrix(g, s, num_slots)))
    return UserLink(
        paths=tuple(paths),
        noise_power=user.noise_power,
        num_rx=user.array.num_elements,
        num_slots=num_slots,
    )


def _path_powers(u, w, link):
    """|w^H G u|^2 weighted by the path power, split by path kind."""
    direct = 0.0
    indirect = 0.0
    for p in link.paths:
        contrib = p.power * abs(np.vdot(w, p.response @ u)) ** 2
        if p.kind == sc.DIRECT:
            direct += contrib
        else:
            indirect += contrib
    return direct, indirect


def rician_params(u, w, link):
    """Scale and shape of the Rice-distributed channel magnitude.

    The shape is infinite when no indirect power survives the filter and zero
    when the direct contribution vanishes; a link with neither is degenerate.
    """
    direct, indirect = _path_powers(u, w, link)
    if direct == 0.0 and indirect == 0.0:
        raise DegenerateLinkError("no received signal power on this link")
    if indirect == 0.0:
        return RicianParams(scale=direct, shape=math.inf)
    return RicianParams(scale=direct + indirect, shape=direct / indirect)


def snr(u, w, link):
    """Receive SNR: all-path power over noise, invariant to the filter scale."""
    wn = float(np.vdot(w, w).real)
    if wn == 0.0:
        raise ValueError("receive filter must be nonzero")
    direct, indirect = _path_powers(u, w, link)
    return (direct + indirect) / (link.noise_power * wn)


def mode_snr(u, w, link, mode):
    """SNR restricted to the direct or the indirect paths only."""
    wn = float(np.vdot(w, w).real)
    if wn == 0.0:
        raise ValueError("receive filter must be nonzero")
    direct, indirect = _path_powers(u, w, link)
    part = direct if mode == sc.DIRECT else indirect
    return part / (link.noise_power * wn)


def error_prob_d2(kappa, snr_value):
    """Binary DPSK error probability over a Rician channel.

    Reduces to exp(-SNR)/2 for a pure line-of-sight link (kappa infinite) and
    to 1/(2 (1 + SNR)) under Rayleigh fading (kappa = 0); decreasing in both
    arguments.
    """
    if snr_value < 0:
        raise ValueError("snr must be non-negative")
    if math.isinf(kappa):
        return 0.5 * math.exp(-snr_value)
    denom = kappa + snr_value
    expo = 0.0 if denom == 0.0 else -kappa * snr_value / denom
    return (1.0 + kappa) / (2.0 * (1.0 + kappa + snr_value)) * math.exp(expo)


def q_function(x):
    """Gaussian tail probability Q(x)."""
    return 0.5 * math.erfc(x / math.sqrt(2.0))


def q_inverse(p, tol=1e-12):
    """Inverse Gaussian tail by bisection on erfc; p in (0, 1/2]."""
    if not 0.0 < p <= 0.5:
        raise ValueError("q_inverse defined for p in (0, 1/2]")
    lo, hi = 0.0, 45.0
    while q_function(hi) > p:
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if q_function(mid) > p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def dpsk_error_prob(mode, snr_value, constellation_size):
    """DPSK error probability in a pure direct or pure indirect regime.

    For a binary constellation the expression is exact; for larger ones the
    direct case uses the nearest-neighbor high-SNR approximation and the
    indirect case the standard upper bound, both clipped to 1/2.
    """
    d = int(constellation_size)
    if d < 2:
        raise ValueError("constellation size must be >= 2")
    if d == 2:
        kappa = math.inf if mode == sc.DIRECT else 0.0
        return error_prob_d2(kappa, snr_value)
    sin2 = math.sin(math.pi / d) ** 2
    if mode == sc.DIRECT:
        return min(0.5, 2.0 * q_function(math.sqrt(snr_value * sin2)))
    if snr_value == 0.0:
        return 0.5
    bound = (2.0 * math.pi * (1.0 - 1.0 / d) + math.sin(2.0 * math.pi / d)) / (2.0 * math.pi * snr_value * sin2)
    return min(0.5, bound)


def snr_threshold(epsilon, mode, constellation_size):
    """Minimum SNR so the error probability stays below ``epsilon``.

    Inverts the binary DPSK expressions exactly; for larger constellations it
    inverts the same approximation / bound used by :func:`dpsk_error_prob`.
    """
    if not 0.0 < epsilon < 0.5:
        raise ValueError("error target must lie in (0, 1/2)")
    d = int(constellation_size)
    if d < 2:
        raise ValueError("constellation size must be >= 2")
    if mode not in (sc.DIRECT, sc.INDIRECT):
        raise ValueError(f"mode must be direct or indirect, got {mode!r}")
    if d == 2:
        if mode == sc.DIRECT:
            rho = math.log(1.0 / (2.0 * epsilon))
        else:
            rho = 1.0 / (2.0 * epsilon) - 1.0
    else:
        sin2 = math.sin(math.pi / d) ** 2
        if mode == sc.DIRECT:
            rho = q_inverse(epsilon / 2.0) ** 2 / sin2
        else:
            rho = (2.0 * math.pi * (1.0 - 1.0 / d) + math.sin(2.0 * math.pi / d)) / (2.0 * math.pi * epsilon * sin2)
    return SnrThreshold(rho=rho, mode=mode)


def snr_form(w, link):
    """Hermitian PSD matrix Y with u^H Y u equal to the receive SNR for every code u.

    Y sums (path power / (noise ||w||^2)) G^H w w^H G over the paths; the
    filter scale cancels.
    """
    wn = float(np.vdot(w, w).real)
    if wn == 0.0:
        raise ValueError("receive filter must be nonzero")
    dim = link.paths[0].response.shape[1]
    y = np.zeros((dim, dim), dtype=complex)
    for p in link.paths:
        gw = p.response.conj().T @ w
        y += (p.power / (link.noise_power * wn)) * np.outer(gw, gw.conj())
    return 0.5 * (y + y.conj().T)

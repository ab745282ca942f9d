"""Physical data model and configuration ingestion.

A :class:`Scenario` carries everything the designer needs: the arrays, the
shared subcarriers, the served users with their propagation paths, the known
clutter scatterers, the inspected target direction per subcarrier, and the
power / beampattern / error-rate constraint levels.

All powers are stored in linear scale and all angles in radians; dB and
degrees appear only at the JSON config boundary.  Angle fields in a config
may also hold the string ``"random"``, which is resolved to a uniform draw on
[-60, 60] degrees from the seed passed to :func:`load_config` (that is how a
fresh problem instance per seed is generated in sweeps).
"""

import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import linalg

SPEED_OF_LIGHT = 299_792_458.0
RANDOM_ANGLE_SPAN = math.pi / 3  # draws for "random" angles are uniform on [-60, 60] deg

DIRECT = "direct"
INDIRECT = "indirect"
KAPPA_MODES = ("auto", "force-direct", "force-indirect")


def db_to_linear(db):
    return 10.0 ** (np.asarray(db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform linear array: element count and spacing in meters."""

    num_elements: int
    element_spacing: float


@dataclass(frozen=True)
class Subcarrier:
    center_frequency: float  # Hz


@dataclass(frozen=True)
class UserPath:
    """One propagation path between the transmitter and a user.

    ``power`` is the squared direct-path gain for a ``direct`` path and the
    per-path fading variance for an ``indirect`` one (linear scale).
    """

    kind: str
    angle_departure: float
    angle_arrival: float
    power: float


@dataclass(frozen=True)
class User:
    array: ArrayGeometry
    paths: tuple
    noise_power: float
    error_target: tuple  # one value per subcarrier, each in (0, 1/2)
    kappa_mode: str = "auto"

    def direct_path(self):
        for p in self.paths:
            if p.kind == DIRECT:
                return p
        return None

    def indirect_paths(self):
        return tuple(p for p in self.paths if p.kind == INDIRECT)


@dataclass(frozen=True)
class ClutterScatterer:
    angle: float
    power: tuple  # per-subcarrier linear power


@dataclass(frozen=True)
class ProtectedDirection:
    subcarrier: int
    angle: float
    cap_fraction: float  # radiated power toward the angle capped at cap_fraction * Nt * P


@dataclass(frozen=True)
class Scenario:
    tx_array: ArrayGeometry
    radar_rx_array: ArrayGeometry
    subcarriers: tuple
    num_slots: int
    constellation_size: int
    power_budget: float
    users: tuple
    clutter: tuple
    target_directions: tuple
    target_powers: tuple
    radar_noise: tuple
    protected_directions: tuple = field(default_factory=tuple)

    @property
    def num_subcarriers(self):
        return len(self.subcarriers)

    @property
    def num_users(self):
        return len(self.users)


def steering(array, freq, angle):
    """Steering vector of a uniform linear array, unit-magnitude entries.

    Entry n is exp(-j 2 pi (f b / c) sin(angle) n) for n = 0..N-1, with b the
    element spacing.  ``angle`` may be a scalar or an array; an array input
    yields one column per angle.
    """
    n = np.arange(array.num_elements)
    phase = -2j * math.pi * freq * array.element_spacing / SPEED_OF_LIGHT
    ang = np.asarray(angle, dtype=float)
    return np.exp(phase * np.multiply.outer(n, np.sin(ang)))


def g_matrix(rx_steer, tx_steer, num_slots):
    """Space-time response I_T (x) (g s^T) of a path over ``num_slots`` symbols."""
    core = np.outer(np.asarray(rx_steer), np.asarray(tx_steer))
    return linalg.kron(np.eye(num_slots), core)


def scr_calibrate(scr, target_power, num_clutter):
    """Per-scatterer clutter power for a given signal-to-clutter ratio.

    Each of the ``num_clutter`` scatterers gets an equal share so that the
    target power divided by the summed clutter power reproduces ``scr``.
    """
    if num_clutter < 1:
        raise ValueError("num_clutter must be >= 1")
    if scr <= 0:
        raise ValueError("scr must be positive")
    return target_power / (scr * num_clutter)


def default_element_spacing(subcarrier_freqs):
    """Half-wavelength spacing at the highest shared subcarrier."""
    return SPEED_OF_LIGHT / (2.0 * max(subcarrier_freqs))


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------

_ANGLE_LIMIT = math.pi / 2


def _check_angle(violations, path, angle):
    if not (-_ANGLE_LIMIT < angle < _ANGLE_LIMIT):
        violations.append(f"{path}: angle {angle!r} outside (-pi/2, pi/2)")


def validate(scenario):
    """Collect every invariant violation; an empty list means the scenario is usable."""
    v = []
    for name, arr in (("tx_array", scenario.tx_array), ("radar_rx_array", scenario.radar_rx_array)):
        if arr.num_elements < 1:
            v.append(f"{name}.num_elements: must be >= 1")
        if not arr.element_spacing > 0:
            v.append(f"{name}.element_spacing: must be > 0")
    if not scenario.subcarriers:
        v.append("subcarriers: at least one required")
    for k, sc in enumerate(scenario.subcarriers):
        if not sc.center_frequency > 0:
            v.append(f"subcarriers[{k}].center_frequency: must be > 0")
    if scenario.num_slots < 2:
        v.append("num_slots: differential detection spans two symbols, need >= 2")
    if scenario.constellation_size < 2:
        v.append("constellation_size: must be >= 2")
    if not scenario.power_budget > 0:
        v.append("power_budget: must be > 0")
    kk = scenario.num_subcarriers
    for field_name in ("target_directions", "target_powers", "radar_noise"):
        if len(getattr(scenario, field_name)) != kk:
            v.append(f"{field_name}: expected one entry per subcarrier ({kk})")
    for k, ang in enumerate(scenario.target_directions):
        _check_angle(v, f"target_directions[{k}]", ang)
    for k, p in enumerate(scenario.target_powers):
        if not p > 0:
            v.append(f"target_powers[{k}]: must be > 0")
    for k, p in enumerate(scenario.radar_noise):
        if not p > 0:
            v.append(f"radar_noise[{k}]: must be > 0")
    for m, user in enumerate(scenario.users):
        if user.array.num_elements < 1:
            v.append(f"users[{m}].array.num_elements: must be >= 1")
        if not user.array.element_spacing > 0:
            v.append(f"users[{m}].array.element_spacing: must be > 0")
        if not user.paths:
            v.append(f"users[{m}].paths: at least one path required")
        n_direct = sum(1 for p in user.paths if p.kind == DIRECT)
        if n_direct > 1:
            v.append(f"users[{m}].paths: more than one direct path")
        for q, p in enumerate(user.paths):
            if p.kind not in (DIRECT, INDIRECT):
                v.append(f"users[{m}].paths[{q}].kind: {p.kind!r} not in (direct, indirect)")
            _check_angle(v, f"users[{m}].paths[{q}].angle_departure", p.angle_departure)
            _check_angle(v, f"users[{m}].paths[{q}].angle_arrival", p.angle_arrival)
            if p.kind == DIRECT and not p.power > 0:
                v.append(f"users[{m}].paths[{q}].power: declared direct path must have power > 0")
            if p.power < 0:
                v.append(f"users[{m}].paths[{q}].power: must be >= 0")
        if not user.noise_power > 0:
            v.append(f"users[{m}].noise_power: must be > 0")
        if len(user.error_target) != kk:
            v.append(f"users[{m}].error_target: expected one entry per subcarrier ({kk})")
        for k, eps in enumerate(user.error_target):
            if not (0.0 < eps < 0.5):
                v.append(f"users[{m}].error_target[{k}]: {eps!r} outside (0, 1/2)")
        if user.kappa_mode not in KAPPA_MODES:
            v.append(f"users[{m}].kappa_mode: {user.kappa_mode!r} not in {KAPPA_MODES}")
        elif user.kappa_mode == "force-direct" and n_direct == 0:
            v.append(f"users[{m}].kappa_mode: force-direct but no direct path declared")
        elif user.kappa_mode == "force-indirect" and not user.indirect_paths():
            v.append(f"users[{m}].kappa_mode: force-indirect but no indirect path declared")
    for j, cl in enumerate(scenario.clutter):
        _check_angle(v, f"clutter[{j}].angle", cl.angle)
        if len(cl.power) != kk:
            v.append(f"clutter[{j}].power: expected one entry per subcarrier ({kk})")
        for k, p in enumerate(cl.power):
            if p < 0:
                v.append(f"clutter[{j}].power[{k}]: must be >= 0")
        for k, psi in enumerate(scenario.target_directions):
            if abs(cl.angle - psi) < 1e-12:
                v.append(f"clutter[{j}].angle: coincides with target_directions[{k}]")
    for i, prot in enumerate(scenario.protected_directions):
        if not (0 <= prot.subcarrier < kk):
            v.append(f"protected_directions[{i}].subcarrier: index {prot.subcarrier} out of range")
            continue
        if not (0.0 <= prot.cap_fraction <= 1.0):
            v.append(f"protected_directions[{i}].cap_fraction: {prot.cap_fraction!r} outside [0, 1]")
        _check_angle(v, f"protected_directions[{i}].angle", prot.angle)
        if abs(prot.angle - scenario.target_directions[prot.subcarrier]) < 1e-12:
            v.append(f"protected_directions[{i}].angle: coincides with the inspected direction")
    return v


# --------------------------------------------------------------------------
# JSON config boundary (powers in dB, angles in degrees)
# --------------------------------------------------------------------------


class ConfigError(ValueError):
    """Malformed configuration document."""


def _resolve_angle(value, rng, path):
    if value == "random":
        return float(rng.uniform(-RANDOM_ANGLE_SPAN, RANDOM_ANGLE_SPAN))
    try:
        return math.radians(float(value))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: expected a number in degrees or 'random', got {value!r}") from exc


def _per_subcarrier(value, kk, path):
    if isinstance(value, (list, tuple)):
        if len(value) != kk:
            raise ConfigError(f"{path}: expected {kk} entries, got {len(value)}")
        return tuple(float(x) for x in value)
    return (float(value),) * kk


_MISSING = object()


def _get(cfg, key, path, default=_MISSING):
    if key in cfg:
        return cfg[key]
    if default is _MISSING:
        raise ConfigError(f"{path}.{key}: missing required field")
    return default


def load_config(source, seed=0):
    """Build a :class:`Scenario` from a JSON document, file path, or dict.

    ``seed`` resolves every ``"random"`` angle field; a config without random
    fields produces the same scenario for every seed.
    """
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    elif isinstance(source, dict):
        cfg = source
    else:
        raise ConfigError(f"unsupported config source {type(source)!r}")
    rng = np.random.default_rng(np.random.SeedSequence([0x5CE4A210, int(seed)]))
    try:
        freqs = [float(f) for f in _get(cfg, "subcarriers", "config")]
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"subcarriers: expected a list of center frequencies in Hz: {exc}") from exc
    if not freqs:
        raise ConfigError("subcarriers: at least one center frequency required")
    kk = len(freqs)
    spacing_default = default_element_spacing(freqs)

    def array_geometry(block, path):
        if not isinstance(block, dict):
            raise ConfigError(f"{path}: expected an object")
        n = int(_get(block, "num_elements", path))
        spacing = block.get("element_spacing")
        return ArrayGeometry(n, float(spacing) if spacing is not None else spacing_default)

    tx = array_geometry(_get(cfg, "tx_array", "config"), "tx_array")
    rx = array_geometry(_get(cfg, "radar_rx_array", "config"), "radar_rx_array")

    target_dirs = _get(cfg, "target_directions", "config")
    if not isinstance(target_dirs, (list, tuple)) or len(target_dirs) != kk:
        raise ConfigError(f"target_directions: expected {kk} entries (one per subcarrier)")
    target_dirs = tuple(_resolve_angle(a, rng, f"target_directions[{k}]") for k, a in enumerate(target_dirs))
    target_powers = tuple(db_to_linear(_per_subcarrier(_get(cfg, "target_powers", "config"), kk, "target_powers")))
    radar_noise = tuple(db_to_linear(_per_subcarrier(_get(cfg, "radar_noise", "config"), kk, "radar_noise")))

    clutter_cfg = cfg.get("clutter", [])
    scatterers = []
    if isinstance(clutter_cfg, dict):
        angles = clutter_cfg.get("angles")
        if angles is None:
            angles = ["random"] * int(_get(clutter_cfg, "count", "clutter"))
        powers = clutter_cfg.get("powers")
        if powers is None:
            scr = db_to_linear(float(_get(clutter_cfg, "scr_db", "clutter")))
            per_k = tuple(scr_calibrate(scr, tp, len(angles)) for tp in target_powers)
        for j, ang in enumerate(angles):
            if powers is not None:
                per_k = tuple(db_to_linear(_per_subcarrier(powers[j], kk, f"clutter.powers[{j}]")))
            scatterers.append(ClutterScatterer(_resolve_angle(ang, rng, f"clutter.angles[{j}]"), per_k))
    else:
        for j, entry in enumerate(clutter_cfg):
            ang = _resolve_angle(_get(entry, "angle", f"clutter[{j}]"), rng, f"clutter[{j}].angle")
            per_k = tuple(db_to_linear(_per_subcarrier(_get(entry, "power", f"clutter[{j}]"), kk, f"clutter[{j}].power")))
            scatterers.append(ClutterScatterer(ang, per_k))

    users = []
    for m, ucfg in enumerate(cfg.get("users", [])):
        paths = []
        for q, pcfg in enumerate(_get(ucfg, "paths", f"users[{m}]")):
            kind = _get(pcfg, "kind", f"users[{m}].paths[{q}]")
            paths.append(
                UserPath(
                    kind=kind,
                    angle_departure=_resolve_angle(
                        _get(pcfg, "angle_departure", f"users[{m}].paths[{q}]"), rng, f"users[{m}].paths[{q}].angle_departure"
                    ),
                    angle_arrival=_resolve_angle(
                        _get(pcfg, "angle_arrival", f"users[{m}].paths[{q}]"), rng, f"users[{m}].paths[{q}].angle_arrival"
                    ),
                    power=float(db_to_linear(float(_get(pcfg, "power", f"users[{m}].paths[{q}]")))),
                )
            )
        users.append(
            User(
                array=array_geometry(_get(ucfg, "array", f"users[{m}]"), f"users[{m}].array"),
                paths=tuple(paths),
                noise_power=float(db_to_linear(float(_get(ucfg, "noise_power", f"users[{m}]")))),
                error_target=tuple(_per_subcarrier(_get(ucfg, "error_target", f"users[{m}]"), kk, f"users[{m}].error_target")),
                kappa_mode=ucfg.get("kappa_mode", "auto"),
            )
        )

    protected = []
    for i, pcfg in enumerate(cfg.get("protected_directions", [])):
        protected.append(
            ProtectedDirection(
                subcarrier=int(_get(pcfg, "subcarrier", f"protected_directions[{i}]")),
                angle=_resolve_angle(_get(pcfg, "angle", f"protected_directions[{i}]"), rng, f"protected_directions[{i}].angle"),
                cap_fraction=float(_get(pcfg, "cap_fraction", f"protected_directions[{i}]")),
            )
        )

    return Scenario(
        tx_array=tx,
        radar_rx_array=rx,
        subcarriers=tuple(Subcarrier(f) for f in freqs),
        num_slots=int(_get(cfg, "num_slots", "config")),
        constellation_size=int(_get(cfg, "constellation_size", "config")),
        power_budget=float(db_to_linear(float(_get(cfg, "power_budget", "config")))),
        users=tuple(users),
        clutter=tuple(scatterers),
        target_directions=target_dirs,
        target_powers=target_powers,
        radar_noise=radar_noise,
        protected_directions=tuple(protected),
    )


def to_config(scenario):
    """Scenario -> JSON-ready dict with powers in dB and angles in degrees."""

    def arr(a):
        return {"num_elements": a.num_elements, "element_spacing": a.element_spacing}

    return {
        "tx_array": arr(scenario.tx_array),
        "radar_rx_array": arr(scenario.radar_rx_array),
        "subcarriers": [sc.center_frequency for sc in scenario.subcarriers],
        "num_slots": scenario.num_slots,
        "constellation_size": scenario.constellation_size,
        "power_budget": float(linear_to_db(scenario.power_budget)),
        "radar_noise": [float(x) for x in linear_to_db(scenario.radar_noise)],
        "target_directions": [math.degrees(a) for a in scenario.target_directions],
        "target_powers": [float(x) for x in linear_to_db(scenario.target_powers)],
        "clutter": [
            {"angle": math.degrees(c.angle), "power": [float(x) for x in linear_to_db(c.power)]} for c in scenario.clutter
        ],
        "users": [
            {
                "array": arr(u.array),
                "paths": [
                    {
                        "kind": p.kind,
                        "angle_departure": math.degrees(p.angle_departure),
                        "angle_arrival": math.degrees(p.angle_arrival),
                        "power": float(linear_to_db(p.power)),
                    }
                    for p in u.paths
                ],
                "noise_power": float(linear_to_db(u.noise_power)),
                "error_target": list(u.error_target),
                "kappa_mode": u.kappa_mode,
            }
            for u in scenario.users
        ],
        "protected_directions": [
            {"subcarrier": p.subcarrier, "angle": math.degrees(p.angle), "cap_fraction": p.cap_fraction}
            for p in scenario.protected_directions
        ],
    }


def sample_scenario(
    seed,
    *,
    epsilon=1e-2,
    delta=1e-6,
    scr_db=-20.0,
    num_direct=2,
    num_indirect=2,
    indirect_paths=2,
    num_protected=6,
    num_subcarriers=4,
    num_tx=11,
    num_radar_rx=4,
    num_user_rx=4,
    num_slots=2,
    constellation_size=2,
    power_budget_dbw=20.0,
    radar_noise_dbw=-150.0,
    target_power_db=-160.0,
    user_noise_dbw=-150.0,
    path_power_db=-130.0,
    num_clutter=4,
    f0=2.0e9,
    delta_f=1.0e5,
):
    """Draw one random benchmark instance of the reference measurement setup.

    Direct users have a single line-of-sight path; indirect users have
    ``indirect_paths`` scattered paths splitting the same total power.  All
    angles are uniform on [-60, 60] degrees, protected directions are drawn
    independently per subcarrier, and clutter powers follow the requested
    signal-to-clutter ratio.
    """
    rng = np.random.default_rng(np.random.SeedSequence([0xD4C0DE, int(seed)]))
    freqs = [f0 + k * delta_f for k in range(num_subcarriers)]
    spacing = default_element_spacing(freqs)

    def draw_angle():
        return float(rng.uniform(-RANDOM_ANGLE_SPAN, RANDOM_ANGLE_SPAN))

    target_dirs = tuple(draw_angle() for _ in range(num_subcarriers))
    target_power = float(db_to_linear(target_power_db))
    clutter_power = scr_calibrate(float(db_to_linear(scr_db)), target_power, num_clutter)
    clutter = []
    for _ in range(num_clutter):
        ang = draw_angle()
        while any(abs(ang - psi) < 1e-9 for psi in target_dirs):
            ang = draw_angle()
        clutter.append(ClutterScatterer(ang, (clutter_power,) * num_subcarriers))

    path_power = float(db_to_linear(path_power_db))
    users = []
    for _ in range(num_direct):
        users.append(
            User(
                array=ArrayGeometry(num_user_rx, spacing),
                paths=(UserPath(DIRECT, draw_angle(), draw_angle(), path_power),),
                noise_power=float(db_to_linear(user_noise_dbw)),
                error_target=(float(epsilon),) * num_subcarriers,
            )
        )
    for _ in range(num_indirect):
        paths = tuple(
            UserPath(INDIRECT, draw_angle(), draw_angle(), path_power / indirect_paths) for _ in range(indirect_paths)
        )
        users.append(
            User(
                array=ArrayGeometry(num_user_rx, spacing),
                paths=paths,
                noise_power=float(db_to_linear(user_noise_dbw)),
                error_target=(float(epsilon),) * num_subcarriers,
            )
        )

    protected = tuple(
        ProtectedDirection(k, draw_angle(), float(delta)) for k in range(num_subcarriers) for _ in range(num_protected)
    )

    return Scenario(
        tx_array=ArrayGeometry(num_tx, spacing),
        radar_rx_array=ArrayGeometry(num_radar_rx, spacing),
        subcarriers=tuple(Subcarrier(f) for f in freqs),
        num_slots=num_slots,
        constellation_size=constellation_size,
        power_budget=float(db_to_linear(power_budget_dbw)),
        users=tuple(users),
        clutter=tuple(clutter),
        target_directions=target_dirs,
        target_powers=(target_power,) * num_subcarriers,
        radar_noise=(float(db_to_linear(radar_noise_dbw)),) * num_subcarriers,
        protected_directions=protected,
    )


def with_error_target(scenario, epsilon):
    """Copy of the scenario with every user's error target set to ``epsilon``."""
    kk = scenario.num_subcarriers
    users = tuple(replace(u, error_target=(float(epsilon),) * kk) for u in scenario.users)
    return replace(scenario, users=users)


def with_cap_fraction(scenario, delta):
    """Copy of the scenario with every protected-direction cap set to ``delta``."""
    prot = tuple(replace(p, cap_fraction=float(delta)) for p in scenario.protected_directions)
    return replace(scenario, protected_directions=prot)


def with_scr(scenario, scr_db):
    """Copy of the scenario with equal-share clutter powers at the given SCR."""
    kk = scenario.num_subcarriers
    jj = len(scenario.clutter)
    scr = float(db_to_linear(scr_db))
    clutter = tuple(
        replace(c, power=tuple(scr_calibrate(scr, scenario.target_powers[k], jj) for k in range(kk)))
        for c in scenario.clutter
    )
    return replace(scenario, clutter=clutter)

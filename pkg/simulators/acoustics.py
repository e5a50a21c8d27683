"""
Sound propagation from the speaker to a drive bay.

All functions are pure. Levels use the 20*log10 amplitude convention, so one
neper of attenuation is 20*log10(e) ~= 8.686 dB.
"""

import math
from typing import Optional, Sequence, Tuple

import numpy as np

from models.acoustic_models import (
    AcousticSource, BoundaryLoad, EffectiveExcitation, Medium, ResonanceProfile, SILENT, SolidLayer, Vector3,
    VolumeSchedule,
)
from models.calibration_models import Calibration, DisplacementReference
from utils.errors import ConfigurationError, ValidationError

NEPER_DB = 20.0 * math.log10(math.e)
UNIT_NORMAL_TOLERANCE = 1e-9


def delta_spl(measured_spl: float, noise_spl: float) -> float:
    """Level above the environmental noise floor"""
    return measured_spl - noise_spl


def attenuate_amplitude(a0: float, alpha: float, x: float) -> float:
    if alpha < 0 or x < 0:
        raise ValidationError(f"attenuation needs alpha >= 0 and x >= 0 (got {alpha}, {x})")
    return a0 * math.exp(-alpha * x)


def attenuate_spl(spl: float, alpha: float, x: float) -> float:
    """dB form of attenuate_amplitude"""
    if alpha < 0 or x < 0:
        raise ValidationError(f"attenuation needs alpha >= 0 and x >= 0 (got {alpha}, {x})")
    return spl - NEPER_DB * alpha * x


def db_to_amplitude_ratio(db: float) -> float:
    return 10.0 ** (db / 20.0)


def empirical_spl_at_distance(curve: Sequence[Tuple[float, float]], x: float) -> float:
    """Piecewise-linear SPL vs distance, clamped to the measured range"""
    if len(curve) < 2:
        raise ConfigurationError(f"SPL-distance curve needs at least 2 points, got {len(curve)}")
    xs = np.array([p[0] for p in curve], dtype=float)
    ys = np.array([p[1] for p in curve], dtype=float)
    if np.any(np.diff(xs) < 0):
        raise ConfigurationError("SPL-distance curve must be sorted by distance")
    return float(np.interp(x, xs, ys))


def boundary_force(pressure: float, normal: Vector3) -> Vector3:
    """Fluid load per unit area on a solid boundary"""
    n = np.asarray(normal, dtype=float)
    if n.shape != (3,) or abs(np.linalg.norm(n) - 1.0) > UNIT_NORMAL_TOLERANCE:
        raise ValidationError(f"surface normal must be a unit 3-vector, got {tuple(normal)}")
    force = pressure * n
    return (float(force[0]), float(force[1]), float(force[2]))


def boundary_load(pressure: float, normal: Vector3,
                  solid_acceleration: Vector3 = (0.0, 0.0, 0.0)) -> BoundaryLoad:
    return BoundaryLoad(pressure, tuple(float(c) for c in normal), boundary_force(pressure, normal),
                        solid_acceleration)


def reflection_transmission(z1: float, z2: float) -> Tuple[float, float]:
    """Pressure reflection and transmission coefficients going from z1 into z2"""
    if z1 <= 0 or z2 <= 0:
        raise ValidationError(f"impedances must be positive (got {z1}, {z2})")
    total = z2 + z1
    return (z2 - z1) / total, 2.0 * z2 / total


def wave_speeds(layer: SolidLayer) -> Tuple[float, float]:
    """(longitudinal, shear) wave speeds in m/s"""
    v_l = math.sqrt((layer.lame_lambda + 2.0 * layer.lame_mu) / layer.density)
    v_s = math.sqrt(layer.shear_modulus / layer.density)
    return v_l, v_s


def angle_factor(orientation_deg: float, table: Sequence[Tuple[float, float]]) -> float:
    if not table or table[0][0] != 0.0 or table[0][1] != 1.0:
        raise ConfigurationError("angle table must start with (0 deg, 1.0)")
    xs = [p[0] for p in table]
    ys = [p[1] for p in table]
    return float(min(1.0, max(0.0, np.interp(orientation_deg, xs, ys))))


def resonance_gain(frequency_hz: float, profile: ResonanceProfile) -> float:
    if frequency_hz <= 0:
        raise ValidationError(f"frequency must be positive, got {frequency_hz}")
    gains = [band.gain for band in profile.bands if band.contains(frequency_hz)]
    return max(gains) if gains else profile.off_band_gain


def displacement_nm(source_spl: float, alpha: float, distance_m: float,
                    reference: DisplacementReference) -> float:
    """Induced displacement scaled from the reference level, then attenuated"""
    base = reference.displacement_nm * db_to_amplitude_ratio(source_spl - reference.source_spl)
    return attenuate_amplitude(base, alpha, distance_m)


def received_spl(source_spl: float, medium: Medium, distance_m: float,
                 propagation: str = "analytic") -> float:
    """SPL at the enclosure for a source at ``distance_m``"""
    if propagation == "empirical":
        if not medium.spl_distance_curve:
            raise ConfigurationError(f"medium '{medium.name}' has no SPL-distance curve")
        reference = medium.curve_source_spl if medium.curve_source_spl is not None else source_spl
        return empirical_spl_at_distance(medium.spl_distance_curve, distance_m) + (source_spl - reference)
    return attenuate_spl(source_spl, medium.attenuation_coeff, distance_m)


def effective_excitation(src: AcousticSource, medium: Medium, distance_m: float,
                         profile: ResonanceProfile, position_factor: float, t: float,
                         angle_table: Sequence[Tuple[float, float]] = ((0.0, 1.0),),
                         propagation: str = "analytic", passive_attenuation_db: float = 0.0,
                         reference: Optional[DisplacementReference] = None) -> EffectiveExcitation:
    """Excitation at a drive bay at time t.

    The resonance, angle and position factors do not change the dB value; they are
    carried as ``combined_factor`` and scale the degradation fraction downstream.
    """
    if not 0.0 < position_factor <= 1.0:
        raise ValidationError(f"position factor must be in (0, 1], got {position_factor}")
    level = src.spl_at(t)
    if level is None:
        return SILENT

    at_target = received_spl(level, medium, distance_m, propagation) - passive_attenuation_db
    factor = (resonance_gain(src.frequency_hz, profile)
              * angle_factor(src.orientation_deg, angle_table)
              * position_factor)
    disp = displacement_nm(level, medium.attenuation_coeff, distance_m, reference or DisplacementReference())
    return EffectiveExcitation(delta_spl=delta_spl(at_target, medium.noise_floor_spl),
                               displacement_nm=disp, combined_factor=factor)


class ExcitationFeed:
    """Time-indexed excitation for one scenario source, bound to a calibration"""

    def __init__(self, source: AcousticSource, calibration: Calibration, environment: str = "lab",
                 distance_m: float = 0.06, location: int = 1, propagation: str = "analytic",
                 passive_attenuation_db: float = 0.0):
        self.source = source
        self.medium = calibration.medium(environment)
        self.profile = calibration.resonance_profile
        self.angle_table = calibration.angle_table
        try:
            self.position_factor = calibration.position_factors[location]
        except KeyError:
            raise ConfigurationError(f"no position factor for injection location {location}")
        self.distance_m = distance_m
        self.propagation = propagation
        self.passive_attenuation_db = passive_attenuation_db
        self.reference = calibration.displacement_reference

    @classmethod
    def constant(cls, delta_spl_db: float, calibration: Calibration, environment: str = "lab",
                 frequency_hz: float = 5100.0, **kwargs) -> 'ExcitationFeed':
        """Feed that holds ``delta_spl_db`` above noise at the enclosure"""
        medium = calibration.medium(environment)
        distance = kwargs.get("distance_m", 0.06)
        loss = medium.noise_floor_spl + delta_spl_db - received_spl(
            medium.noise_floor_spl + delta_spl_db, medium, distance, kwargs.get("propagation", "analytic"))
        spl = medium.noise_floor_spl + delta_spl_db + loss + kwargs.get("passive_attenuation_db", 0.0)
        schedule = kwargs.pop("schedule", None) or VolumeSchedule()
        source = AcousticSource(amplitude_spl=spl, frequency_hz=frequency_hz,
                                orientation_deg=kwargs.pop("orientation_deg", 0.0),
                                volume_schedule=schedule)
        return cls(source, calibration, environment, **kwargs)

    def at(self, t: float) -> EffectiveExcitation:
        return effective_excitation(self.source, self.medium, self.distance_m, self.profile,
                                    self.position_factor, t, self.angle_table, self.propagation,
                                    self.passive_attenuation_db, self.reference)

    def change_times(self, horizon_s: float):
        return self.source.volume_schedule.change_times(horizon_s)

"""
Acoustic data models: sources, media, solid layers and the excitation they produce.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple
import bisect
import math

from utils.errors import ValidationError


Vector3 = Tuple[float, float, float]


@dataclass(frozen=True)
class VolumeSchedule:
    """Piecewise-constant SPL offset over time.

    ``steps`` holds (start_time_s, offset_db) pairs; the offset before the first
    step is 0 dB. ``step_db``/``step_period_s`` describe a staircase ramp
    ("+2 dB every 210 s") applied on top of the explicit steps.
    """
    steps: Tuple[Tuple[float, float], ...] = ()
    step_db: float = 0.0
    step_period_s: float = 0.0
    ramp_start_s: float = 0.0
    ramp_stop_s: Optional[float] = None
    # Source is switched off at/after this time
    off_after_s: Optional[float] = None

    def __post_init__(self):
        times = [t for t, _ in self.steps]
        if times != sorted(times):
            raise ValidationError("volume schedule steps must be sorted by time")
        if self.step_db and self.step_period_s <= 0:
            raise ValidationError("volume ramp needs a positive step period")

    def offset_at(self, t: float) -> float:
        """SPL offset (dB) at time t"""
        offset = 0.0
        if self.steps:
            idx = bisect.bisect_right([s for s, _ in self.steps], t) - 1
            if idx >= 0:
                offset = self.steps[idx][1]
        if self.step_db and t >= self.ramp_start_s:
            ramp_t = t if self.ramp_stop_s is None else min(t, self.ramp_stop_s)
            offset += self.step_db * math.floor((ramp_t - self.ramp_start_s) / self.step_period_s)
        return offset

    def is_on(self, t: float) -> bool:
        return self.off_after_s is None or t < self.off_after_s

    def change_times(self, horizon_s: float) -> List[float]:
        """All times in [0, horizon] at which the offset or on/off state changes"""
        times = {t for t, _ in self.steps if 0.0 <= t <= horizon_s}
        if self.step_db:
            stop = horizon_s if self.ramp_stop_s is None else min(horizon_s, self.ramp_stop_s)
            t = self.ramp_start_s + self.step_period_s
            while t <= stop:
                times.add(t)
                t += self.step_period_s
        if self.off_after_s is not None and self.off_after_s <= horizon_s:
            times.add(self.off_after_s)
        return sorted(times)


@dataclass(frozen=True)
class AcousticSource:
    """Underwater speaker driving a tone at the enclosure"""
    amplitude_spl: float            # dB SPL re 1 uPa at the source
    frequency_hz: float
    position: Vector3 = (0.0, 0.0, 0.0)
    orientation_deg: float = 0.0    # speaker axis vs target normal
    volume_schedule: VolumeSchedule = field(default_factory=VolumeSchedule)

    def __post_init__(self):
        if self.frequency_hz <= 0:
            raise ValidationError(f"frequency must be positive, got {self.frequency_hz}")
        if self.amplitude_spl < 0:
            raise ValidationError(f"amplitude SPL must be non-negative, got {self.amplitude_spl}")
        if not 0.0 <= self.orientation_deg <= 180.0:
            raise ValidationError(f"orientation must be in [0, 180] degrees, got {self.orientation_deg}")

    @property
    def angular_frequency(self) -> float:
        return 2.0 * math.pi * self.frequency_hz

    def spl_at(self, t: float) -> Optional[float]:
        """Schedule-adjusted source level, or None while the source is off"""
        if not self.volume_schedule.is_on(t):
            return None
        return self.amplitude_spl + self.volume_schedule.offset_at(t)


@dataclass(frozen=True)
class Medium:
    """Fluid carrying the sound"""
    name: str
    density: float                  # kg/m^3
    sound_speed: float              # m/s
    attenuation_coeff: float        # Np/m
    noise_floor_spl: float          # dB SPL
    salinity: Optional[float] = None
    temperature_c: Optional[float] = None
    # Empirical (distance_m, spl_db) measurements for a reference source level
    spl_distance_curve: Tuple[Tuple[float, float], ...] = ()
    curve_source_spl: Optional[float] = None

    def __post_init__(self):
        if self.density <= 0 or self.sound_speed <= 0:
            raise ValidationError(f"medium '{self.name}' needs positive density and sound speed")
        if self.attenuation_coeff < 0:
            raise ValidationError(f"medium '{self.name}' attenuation must be non-negative")

    @property
    def acoustic_impedance(self) -> float:
        return self.density * self.sound_speed

    def wavenumber(self, angular_frequency: float) -> float:
        """k = omega / c"""
        return angular_frequency / self.sound_speed


@dataclass(frozen=True)
class SolidLayer:
    """Isotropic solid (enclosure wall, rack, drive chassis)"""
    name: str
    density: float          # kg/m^3
    lame_lambda: float      # Pa
    lame_mu: float          # Pa
    shear_modulus: float    # Pa
    acoustic_impedance: float  # Pa*s/m

    def __post_init__(self):
        for label, value in (("density", self.density), ("acoustic_impedance", self.acoustic_impedance)):
            if value <= 0:
                raise ValidationError(f"solid '{self.name}' {label} must be positive")
        for label, value in (("lame_lambda", self.lame_lambda), ("lame_mu", self.lame_mu),
                             ("shear_modulus", self.shear_modulus)):
            if value < 0:
                raise ValidationError(f"solid '{self.name}' {label} must be non-negative")


@dataclass(frozen=True)
class BoundaryLoad:
    """Fluid load on a solid boundary"""
    pressure: float                 # Pa
    surface_normal: Vector3
    force_per_area: Vector3         # Pa
    solid_acceleration: Vector3 = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if abs(math.sqrt(sum(c * c for c in self.surface_normal)) - 1.0) > 1e-9:
            raise ValidationError(f"surface normal must be a unit vector, got {self.surface_normal}")
        expected = [self.pressure * c for c in self.surface_normal]
        if any(not math.isclose(f, e, rel_tol=1e-9, abs_tol=1e-12)
               for f, e in zip(self.force_per_area, expected)):
            raise ValidationError("force per area must equal pressure times the surface normal")


@dataclass(frozen=True)
class ResonanceBand:
    center_hz: float
    half_width_hz: float
    gain: float

    def contains(self, frequency_hz: float) -> bool:
        return self.center_hz - self.half_width_hz <= frequency_hz <= self.center_hz + self.half_width_hz


@dataclass(frozen=True)
class ResonanceProfile:
    """Frequency bands in which the enclosure + drives resonate"""
    bands: Tuple[ResonanceBand, ...]
    off_band_gain: float = 0.0

    def __post_init__(self):
        if not self.bands:
            raise ValidationError("resonance profile needs at least one band")
        centers = [b.center_hz for b in self.bands]
        if len(set(centers)) != len(centers):
            raise ValidationError("resonance band centers must be distinct")
        for gain in [b.gain for b in self.bands] + [self.off_band_gain]:
            if not 0.0 <= gain <= 1.0:
                raise ValidationError(f"resonance gain {gain} outside [0, 1]")


@dataclass(frozen=True)
class EffectiveExcitation:
    """Excitation reaching a target: level above noise, induced displacement and
    the factor by which resonance/angle/position scale downstream degradation"""
    delta_spl: float
    displacement_nm: float
    combined_factor: float = 1.0

    @property
    def is_effective(self) -> bool:
        return self.delta_spl > 0.0 and self.combined_factor > 0.0


SILENT = EffectiveExcitation(delta_spl=0.0, displacement_nm=0.0, combined_factor=0.0)

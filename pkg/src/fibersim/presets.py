"""Parameter sets for the worked examples, kept as versioned fixtures.

Lengths are in units of the reference wavelength (k0 = 2 pi) and rates in
units of the trap frequency unless noted otherwise.
"""
from __future__ import annotations

import numpy as np

from .coulombmap import TargetCoulombSystem, default_planar_fiber
from .model import ChainGeometry, OscillatorParams, PumpSpectrum
from .regime import PhysicalParams, cesium_d2

PRESET_VERSION = "1"
K0 = 2 * np.pi
SQRT3_2 = np.sqrt(3) / 2


def line3_target() -> TargetCoulombSystem:
    """Three equally spaced ions on a line, spacing D = 1."""
    return TargetCoulombSystem([0.0, 1.0, 2.0])


def line3_fiber() -> ChainGeometry:
    return ChainGeometry.from_spacings([3 / 8, 3 / 8])


def triangle_target(mask_pairs=()) -> TargetCoulombSystem:
    """Equilateral triangle with ions 0 and 2 on the base and ion 1 at the apex."""
    t = TargetCoulombSystem([[0.0, 0.0], [0.5, SQRT3_2], [1.0, 0.0]])
    return t.without_pairs(mask_pairs) if mask_pairs else t


def triangle_fiber() -> ChainGeometry:
    return default_planar_fiber(3, K0)


# Reference pump strengths (Omega_l / Omega~, l = 0..13) for the triangle
# designs; second row has the (0, 2) interaction switched off.
TRIANGLE_TABLE = np.array([251.5, 643.0, 580.5, 72.0, 0.0, 666.2, 1149.7, 754.3, 104.7, 115.5,
                           591.3, 724.8, 392.4, 81.2])
TRIANGLE_MASKED_TABLE = np.array([251.4, 642.6, 580.1, 72.0, 0.0, 665.8, 1149.1, 754.3, 104.8, 115.3,
                                  590.8, 724.5, 392.4, 81.3])
TRIANGLE_DK = 0.33 * K0
TRIANGLE_NFREQ = 14
LINE_DK = 0.7 * K0


def fig5_chain(omega1: float = 0.01):
    """Two-colour pump that decouples particle 2 from the (0, 1) pair.

    d01 = 3/4 and d12 = 7/8 wavelengths of k1, k2 = 4/3 k1, Omega2 = 0.82 Omega1.
    """
    geometry = ChainGeometry.from_spacings([0.75, 0.875])
    spectrum = PumpSpectrum([K0, 4 / 3 * K0], [omega1, 0.82 * omega1])
    return geometry, spectrum


def fig6_chain(omega: float = 0.05):
    """d01 = 1/2, d12 = 0.6: particle 2 couples equally and oppositely to 0 and 1."""
    return ChainGeometry.from_spacings([0.5, 0.6]), PumpSpectrum.single(K0, omega)


def fig7_sweep(n_points: int = 40, k_delta0: float = 0.1):
    """Particle 2 swept from just past d01 = 1 to three wavelengths."""
    x3 = np.linspace(1.05, 2.95, n_points)
    geometries = [ChainGeometry([0.0, 1.0, x]) for x in x3]
    return x3, geometries, PumpSpectrum.single(K0, 0.05), OscillatorParams(1.0, k_delta0 / K0)


def fig8_chain(omega: float = 0.1, k_delta0: float = 0.1):
    geometry, spectrum = fig6_chain(omega)
    return geometry, spectrum, OscillatorParams(1.0, k_delta0 / K0)


def cesium() -> PhysicalParams:
    return cesium_d2()


PRESETS = ("line3", "triangle", "fig5", "fig6", "fig7", "fig8", "cesium")

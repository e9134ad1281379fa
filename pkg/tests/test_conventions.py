from __future__ import annotations

import math

import numpy as np
import pytest

from cislunar.conventions import (ConventionConfigError, CoordinateConvention,
                                  PeriodicTerm, convention_discrepancy,
                                  coordinate_label, label_difference)

SYNODIC = 2.4625e-6  # rad/s


def test_identity_convention():
    conv = CoordinateConvention("plain")
    for t in (0.0, 123.456, 8.64e4):
        assert coordinate_label(conv, t) == t


def test_single_term_peak_offset():
    amp = 0.5e-6
    conv = CoordinateConvention("wavy", periodic_terms=(
        PeriodicTerm(amp, SYNODIC, 0.0),))
    t_peak = (math.pi / 2) / SYNODIC
    # label magnitude ~6.4e5 s leaves ~1e-10 of float quantization
    assert coordinate_label(conv, t_peak) - t_peak == pytest.approx(amp, abs=1e-9)


def test_opposite_phase_terms_oscillate_with_doubled_amplitude():
    # A sin(wt) - A sin(wt + pi) = 2 A sin(wt)
    amp = 0.4e-6
    a = CoordinateConvention("a", periodic_terms=(PeriodicTerm(amp, SYNODIC, 0.0),))
    b = CoordinateConvention("b", periodic_terms=(PeriodicTerm(amp, SYNODIC, math.pi),))
    period = 2 * math.pi / SYNODIC
    max_diff, _ = convention_discrepancy(a, b, 0.0, period, samples=20001)
    assert max_diff == pytest.approx(2 * amp, rel=1e-6)


def test_discrepancy_of_identical_conventions_is_zero():
    conv = CoordinateConvention("x", secular_rate_offset=1e-13,
                                periodic_terms=(PeriodicTerm(1e-7, SYNODIC, 0.3),))
    max_diff, mean_diff = convention_discrepancy(conv, conv, 0.0, 1e6)
    assert max_diff == 0.0 and mean_diff == 0.0


def test_secular_difference_grows_per_day():
    a = CoordinateConvention("a", secular_rate_offset=1e-12)
    b = CoordinateConvention("b")
    max_diff, _ = convention_discrepancy(a, b, 0.0, 86400.0)
    assert max_diff >= 86.4e-9 * (1 - 1e-9)


def test_configured_amplitude_gap():
    a = CoordinateConvention("a", periodic_terms=(PeriodicTerm(0.4e-6, SYNODIC, 0.0),))
    b = CoordinateConvention("b", periodic_terms=(PeriodicTerm(0.3e-6, SYNODIC, 0.0),))
    period = 2 * math.pi / SYNODIC
    max_diff, _ = convention_discrepancy(a, b, 0.0, period, samples=40001)
    assert max_diff == pytest.approx(0.1e-6, rel=1e-6)


def test_non_monotone_parameterization_rejected_at_construction():
    with pytest.raises(ConventionConfigError, match="not monotone"):
        CoordinateConvention("steep", periodic_terms=(
            PeriodicTerm(2.0 / SYNODIC, SYNODIC, 0.0),))


def test_labels_strictly_monotone_for_reasonable_conventions():
    conv = CoordinateConvention("ok", secular_rate_offset=1e-10,
                                periodic_terms=(PeriodicTerm(0.4e-6, SYNODIC, 0.1),))
    t = np.linspace(0.0, 5e6, 200001)
    labels = coordinate_label(conv, t)
    assert np.all(np.diff(labels) > 0)


def test_label_difference_matches_absolute_labels():
    a = CoordinateConvention("a", secular_rate_offset=2e-12,
                             periodic_terms=(PeriodicTerm(3e-7, SYNODIC, 0.2),))
    b = CoordinateConvention("b", periodic_terms=(PeriodicTerm(1e-7, 2 * SYNODIC, 0.0),))
    t = np.linspace(0.0, 1e5, 1001)
    direct = label_difference(a, b, t)
    absolute = coordinate_label(a, t) - coordinate_label(b, t)
    assert np.allclose(direct, absolute, atol=1e-10)

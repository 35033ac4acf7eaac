#
# Copyright 2024 The sidetrace authors
#
# Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance with the
# License. You may obtain a copy of the License at http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software distributed under the License is distributed on an
# "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
#
# See the License for the specific language governing permissions and limitations under the License.
#

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from sidetrace.filters.filterspec import FilterSpec
from sidetrace.synth.synthscript import SynthScript
from sidetrace.synth.tracesynthesizer import TraceSynthesizer
from sidetrace.trace.powertrace import PowerTrace
from sidetrace.trace.tracecalculations import TraceCalculations
from sidetrace.util.sidetraceerrors import SideTraceProcessingError, SideTraceValidationError
from sidetrace.wavelet.fingerprint import Fingerprint, FingerprintRequest
from sidetrace.wavelet.scalogram import CandidateSet, Scalogram
from sidetrace.wavelet.waveletfingerprint import WaveletFingerprint, _local_maxima, _local_maxima_numba
from sidetrace.wavelet.waveletspec import WaveletSpec

wavelet_fingerprint = WaveletFingerprint()
trace_synth = TraceSynthesizer()
trace_calc = TraceCalculations()

small_spec = WaveletSpec(family='ricker', scales=[1.0, 2.0, 4.0, 8.0])


def direct_cwt(x, spec):
    """Convolution sums written out, zero padded, same length as x."""
    rows = []

    for a in spec.scales:
        kernel = spec.kernel(a)
        half = len(kernel) // 2

        row = np.zeros(len(x))

        for t in range(len(x)):
            for j in range(len(kernel)):
                m = t + half - j

                if 0 <= m < len(x):
                    row[t] += x[m] * kernel[j]

        rows.append(row)

    return np.vstack(rows)


def synth_fingerprint(cycles, seed=0, samples_per_clock=64, total_cycles=500, white_sigma=0.1, alpha=1.0):
    script = SynthScript(total_cycles, samples_per_clock, branch_events=[(c, 1.0) for c in cycles],
                         white_sigma=white_sigma, seed=seed)

    trace, _ = trace_synth.synth_trace(script)

    return wavelet_fingerprint.fingerprint(trace_calc.scale_trace(trace, alpha))


def matches(fp, truth, tolerance=1):
    """Every detected cycle is near a true one and every true cycle was detected."""
    detected = np.asarray(fp.cycles)
    truth = np.asarray(truth)

    return len(detected) > 0 and all(np.min(np.abs(truth - c)) <= tolerance for c in detected) \
        and all(np.min(np.abs(detected - c)) <= tolerance for c in truth)


def test_wavelet_spec():
    # Test Case 1: default ladder runs from one sample to one clock cycle
    scales = WaveletSpec.default_scales(64.0, 8)

    assert len(scales) == 8
    assert scales[0] == pytest.approx(1.0) and scales[-1] == pytest.approx(64.0)

    # Test Case 2: kernels are unit norm and zero mean
    for family in WaveletSpec.FAMILIES:
        spec = WaveletSpec(family=family, scales=[2.0, 6.0])

        for a in spec.scales:
            kernel = spec.kernel(a)

            assert len(kernel) == spec.footprint(a)
            assert np.sum(kernel ** 2) == pytest.approx(1.0)
            assert abs(np.sum(kernel)) < 1e-3

    # Test Case 3: invalid specs
    with pytest.raises(SideTraceValidationError):
        WaveletSpec(family='haar', scales=[1.0])

    with pytest.raises(SideTraceValidationError):
        WaveletSpec(scales=[0.5, 2.0])

    with pytest.raises(SideTraceValidationError):
        WaveletSpec(scales=[4.0, 2.0])

    with pytest.raises(SideTraceValidationError):
        WaveletSpec(scales=[])


def test_cwt():
    # Test Case 1: zero trace gives an all zero scalogram
    scalogram = wavelet_fingerprint.cwt(PowerTrace(np.zeros(128), 1e6), small_spec)

    assert scalogram.shape == (4, 128)
    assert scalogram.max_abs() == 0.0

    # Test Case 2: unit impulse reproduces the (time reversed) wavelet around it
    x = np.zeros(200)
    x[100] = 1.0

    scalogram = wavelet_fingerprint.cwt(PowerTrace(x, 1e6), small_spec)

    for i, a in enumerate(small_spec.scales):
        kernel = small_spec.kernel(a)
        half = len(kernel) // 2

        assert_allclose(scalogram.coefficients[i, 100 - half:100 + half + 1], kernel[::-1], atol=1e-12)

    # Test Case 3: linearity
    x = np.random.default_rng(2).standard_normal(256)

    single = wavelet_fingerprint.cwt(PowerTrace(x, 1e6), small_spec).coefficients
    double = wavelet_fingerprint.cwt(PowerTrace(2 * x, 1e6), small_spec).coefficients

    assert_allclose(double, 2 * single, rtol=1e-9, atol=1e-12)

    # Test Case 4: direct convolution sums
    assert_allclose(single, direct_cwt(x, small_spec), rtol=1e-9, atol=1e-9 * np.max(np.abs(single)))

    # Test Case 5: footprint longer than the trace
    with pytest.raises(SideTraceValidationError):
        wavelet_fingerprint.cwt(PowerTrace(np.zeros(50), 1e6), small_spec)


def test_threshold_candidates():
    # Test Case 1: theta_abs is relative to the largest coefficient
    candidates = wavelet_fingerprint.threshold_candidates(Scalogram([[0.0, 2.0, 0.0]], [1.0], 1e6), 0.3)

    assert candidates.theta_abs == pytest.approx(0.6)

    # Test Case 2: lone peak
    candidates = wavelet_fingerprint.threshold_candidates(Scalogram([[0.0, 1.0, 0.0]], [1.0], 1e6), 0.5)

    assert_array_equal(candidates.time_slots, [1])

    # Test Case 3: shoulders above the threshold are not local maxima
    candidates = wavelet_fingerprint.threshold_candidates(Scalogram([[0.0, 0.9, 1.0, 0.9, 0.0]], [1.0], 1e6), 0.5)

    assert_array_equal(candidates.time_slots, [2])

    # Test Case 4: plateaus keep their leftmost index, negative coefficients count by magnitude
    candidates = wavelet_fingerprint.threshold_candidates(Scalogram([[0.0, -1.0, -1.0, 0.0, 0.2, 0.0]], [1.0], 1e6),
                                                          0.5)

    assert_array_equal(candidates.time_slots, [1])

    # Test Case 5: every row is scanned
    candidates = wavelet_fingerprint.threshold_candidates(Scalogram([[0, 1, 0, 0], [0, 0, 0.8, 0]], [1.0, 2.0], 1e6),
                                                          0.5)

    assert_array_equal(candidates.time_slots, [1, 2])
    assert_array_equal(candidates.scale_indices, [0, 1])

    # Test Case 6: all zero scalogram is an error, not an empty result
    with pytest.raises(SideTraceProcessingError):
        wavelet_fingerprint.threshold_candidates(Scalogram(np.zeros((2, 10)), [1.0, 2.0], 1e6), 0.3)

    # Test Case 7: theta outside (0, 1)
    with pytest.raises(SideTraceValidationError):
        wavelet_fingerprint.threshold_candidates(Scalogram([[0.0, 1.0, 0.0]], [1.0], 1e6), 1.0)


def test_local_maxima_kernels_agree():
    rng = np.random.default_rng(9)

    for _ in range(50):
        # small integer alphabet so that plateaus are common
        row = rng.integers(0, 4, size=int(rng.integers(1, 40))).astype(np.float64)
        threshold = float(rng.integers(0, 3))

        assert_array_equal(_local_maxima_numba(row, threshold), _local_maxima(row, threshold))


def test_dedupe_spectral():
    # Test Case 1: exact duplicates across scales
    candidates = CandidateSet([5, 5, 9], [2, 3, 1], [1.0, 1.0, 1.0], 0.5, 0.0)

    assert_array_equal(wavelet_fingerprint.dedupe_spectral(candidates, 0), [5, 9])

    # Test Case 2: group keeps its largest member
    candidates = CandidateSet([100, 101], [0, 1], [1.0, 0.7], 0.5, 0.0)

    assert_array_equal(wavelet_fingerprint.dedupe_spectral(candidates, 2), [100])

    candidates = CandidateSet([100, 101], [0, 1], [0.7, 1.0], 0.5, 0.0)

    assert_array_equal(wavelet_fingerprint.dedupe_spectral(candidates, 2), [101])

    # Test Case 3: empty set
    assert len(wavelet_fingerprint.dedupe_spectral(CandidateSet([], [], [], 0.5, 0.0), 2)) == 0

    # Test Case 4: suppression only reaches slot_radius around a kept slot, 14 survives although 12 links it to 10
    candidates = CandidateSet.from_slots([10, 12, 14, 30])

    assert_array_equal(wavelet_fingerprint.dedupe_spectral(candidates, 2), [10, 14, 30])

    # Test Case 5: the strongest member wins even in the middle of a run
    candidates = CandidateSet([10, 12, 14], [0, 1, 2], [0.5, 1.0, 0.5], 0.5, 0.0)

    assert_array_equal(wavelet_fingerprint.dedupe_spectral(candidates, 2), [12])


def test_dedupe_spectral_idempotent():
    rng = np.random.default_rng(11)

    for _ in range(50):
        slots = rng.integers(0, 200, size=int(rng.integers(1, 60)))
        candidates = CandidateSet(slots, rng.integers(0, 8, size=len(slots)), rng.random(len(slots)), 0.5, 0.0)

        for radius in (0, 2, 5):
            once = wavelet_fingerprint.dedupe_spectral(candidates, radius)

            assert np.all(np.diff(once) > radius)
            assert_array_equal(wavelet_fingerprint.dedupe_spectral(CandidateSet.from_slots(once), radius), once)


def test_dedupe_spectral_monotone_in_threshold():
    rng = np.random.default_rng(12)

    for _ in range(50):
        slots = rng.integers(0, 300, size=80)
        magnitudes = rng.random(80)

        candidates = CandidateSet(slots, np.zeros(80), magnitudes, 0.5, 0.0)

        kept_low = set(wavelet_fingerprint.dedupe_spectral(candidates, 2).tolist())

        for cut in (0.3, 0.6, 0.9):
            strong = magnitudes > cut
            kept_high = wavelet_fingerprint.dedupe_spectral(
                CandidateSet(slots[strong], np.zeros(int(strong.sum())), magnitudes[strong], 0.5, 0.0), 2)

            assert set(kept_high.tolist()) <= kept_low


def test_fingerprint_monotone_in_theta():
    for seed in range(10):
        script = SynthScript(400, 64, branch_events=[(int(c), 1.0) for c in
                                                     np.random.default_rng(seed).choice(np.arange(20, 380), 20,
                                                                                        replace=False)],
                             white_sigma=0.3, seed=seed)

        trace, _ = trace_synth.synth_trace(script)

        previous = None

        for theta in (0.2, 0.3, 0.5, 0.7):
            cycles = set(wavelet_fingerprint.fingerprint(trace, FingerprintRequest(theta=theta)).cycles.tolist())

            if previous is not None:
                assert cycles <= previous

            previous = cycles


def test_map_to_cycles():
    # Test Case 1: 3.125 GS/s against an 8 MHz clock
    fp = wavelet_fingerprint.map_to_cycles([400, 780], 3.125e9, 8e6)

    assert fp.samples_per_clock == 390.625
    assert_array_equal(fp.cycles, [1])

    # Test Case 2: floor arithmetic
    assert_array_equal(wavelet_fingerprint.map_to_cycles([0, 391, 782], 3.125e9, 8e6).cycles, [0, 1, 2])

    # Test Case 3: unknown clock
    with pytest.raises(SideTraceValidationError):
        wavelet_fingerprint.map_to_cycles([0], 3.125e9, None)


def test_rasterize():
    # Test Case 1: raw indicator
    assert_array_equal(wavelet_fingerprint.rasterize(Fingerprint([1, 3], 0.3, 8), 5, 0), [0, 1, 0, 1, 0])

    # Test Case 2: empty fingerprint
    assert_array_equal(wavelet_fingerprint.rasterize(Fingerprint([], 0.3, 8), 4), [0, 0, 0, 0])

    # Test Case 3: triangular kernel
    assert_allclose(wavelet_fingerprint.rasterize(Fingerprint([2], 0.3, 8), 5, 1), [0, 0.5, 1, 0.5, 0])

    # Test Case 4: too short
    with pytest.raises(SideTraceValidationError):
        wavelet_fingerprint.rasterize(Fingerprint([1, 3], 0.3, 8), 3)


def test_fingerprint_pipeline():
    # Test Case 1: constant trace has no high frequency content
    with pytest.raises(SideTraceProcessingError):
        wavelet_fingerprint.fingerprint(PowerTrace(np.full(2000, 1.5), 8e6, clock_hz=1e6))

    # Test Case 2: bursts at 100, 250 and 400 are found within one cycle
    fp = synth_fingerprint([100, 250, 400])

    assert len(fp) == 3
    assert np.max(np.abs(fp.cycles - np.array([100, 250, 400]))) <= 1

    # Test Case 3: amplitude invariance
    for alpha in (0.5, 2.0, 10.0):
        assert synth_fingerprint([100, 250, 400], alpha=alpha) == fp

    # Test Case 4: the clock is required
    with pytest.raises(SideTraceValidationError):
        wavelet_fingerprint.fingerprint(PowerTrace(np.zeros(100), 8e6))


def test_fingerprint_options():
    script = SynthScript(300, 64, branch_events=[(2, 1.0), (150, 1.0)], white_sigma=0.05, drift_amplitude=2.0,
                         drift_freq_hz=3.125e9 / 64 / 200, seed=4)

    trace, _ = trace_synth.synth_trace(script)

    # Test Case 1: high-pass prefilter against drift
    fr = FingerprintRequest(theta=0.3, prefilter=FilterSpec.highpass(script.clock_hz / 20, phase_mode='zero_phase'))

    fp, diagnostics = wavelet_fingerprint.fingerprint(trace, fr, return_diagnostics=True)

    assert matches(fp, [2, 150])

    # Test Case 2: diagnostics flag the event next to the trace start but keep it
    assert diagnostics.scalogram.shape == (8, len(trace))
    assert diagnostics.theta_abs > 0
    assert len(diagnostics.boundary_slots) >= 1
    assert np.all(diagnostics.boundary_slots < 5 * 64)

    # Test Case 3: morlet wavelets find the same events
    fr = FingerprintRequest(wavelet_spec=WaveletSpec.default(64.0, family='morlet'),
                            prefilter=FilterSpec.highpass(script.clock_hz / 20, phase_mode='zero_phase'))

    fp = wavelet_fingerprint.fingerprint(trace, fr)

    assert matches(fp, [2, 150])

    # Test Case 4: request validation
    with pytest.raises(SideTraceValidationError):
        FingerprintRequest(theta=0.0)

    with pytest.raises(SideTraceValidationError):
        FingerprintRequest(slot_radius=-1)


def test_fingerprint_type():
    # Test Case 1: invariants
    with pytest.raises(SideTraceValidationError):
        Fingerprint([3, 3], 0.3, 8)

    with pytest.raises(SideTraceValidationError):
        Fingerprint([-1], 0.3, 8)

    with pytest.raises(SideTraceValidationError):
        Fingerprint([1], 0.3, 0.5)

    # Test Case 2: shifting and span
    fp = Fingerprint([4, 10], 0.3, 8)

    assert_array_equal(fp.shifted(3).cycles, [7, 13])
    assert fp.span_cycles == 7
    assert list(fp) == [4, 10]

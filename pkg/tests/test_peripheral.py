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
from numpy.testing import assert_array_equal

from sidetrace.peripheral.peakdetector import PeakDetector, find_runs, merge_runs
from sidetrace.peripheral.peaksegment import PeakSegment, SpiDecodeConfig
from sidetrace.peripheral.spidecoder import SpiDecoder, _integrate_edges, _integrate_edges_numba
from sidetrace.synth.synthscript import SpiSynthConfig
from sidetrace.synth.tracesynthesizer import TraceSynthesizer
from sidetrace.trace.powertrace import PowerTrace
from sidetrace.trace.tracecalculations import TraceCalculations
from sidetrace.util.sidetraceerrors import SideTraceProcessingError, SideTraceValidationError

peak_detector = PeakDetector()
spi_decoder = SpiDecoder()
trace_synth = TraceSynthesizer()
trace_calc = TraceCalculations()


def noise_trace(seed, n=10000):
    return PowerTrace(np.random.default_rng(seed).standard_normal(n), 1e6)


def test_runs():
    starts, ends = find_runs([False, True, True, False, True, False, False, True])

    assert_array_equal(starts, [1, 4, 7])
    assert_array_equal(ends, [3, 5, 8])

    # gaps of 1 are merged with merge_gap 2, the gap of 2 is not
    starts, ends = merge_runs(starts, ends, 2)

    assert_array_equal(starts, [1, 7])
    assert_array_equal(ends, [5, 8])


def test_detect_peaks():
    # Test Case 1: one 15 sigma spike in unit noise
    trace = noise_trace(1)

    samples = trace.samples.copy()
    samples[5000] += 15.0

    segments = peak_detector.detect_peaks(trace.with_samples(samples), k=8)

    assert len(segments) == 1
    assert segments[0].start <= 5000 < segments[0].end
    assert segments[0].polarity == 'rise'

    # Test Case 2: drops are reported with their polarity
    samples[5000] -= 30.0

    segments = peak_detector.detect_peaks(trace.with_samples(samples), k=8)

    assert len(segments) == 1 and segments[0].polarity == 'drop'

    # Test Case 3: pure noise gives no segments
    clean = sum(len(peak_detector.detect_peaks(noise_trace(seed, 100000), k=8)) == 0 for seed in range(100))

    assert clean >= 99

    # Test Case 4: invariant under positive affine transforms
    samples[5000] += 30.0
    spiked = trace.with_samples(samples)

    segments = peak_detector.detect_peaks(spiked, k=8)

    assert peak_detector.detect_peaks(trace_calc.scale_trace(spiked, 1.0, 3.0), k=8) == segments
    assert peak_detector.detect_peaks(trace_calc.scale_trace(spiked, 2.5, -1.0), k=8) == segments

    # Test Case 5: constant trace has no MAD
    with pytest.raises(SideTraceProcessingError):
        peak_detector.detect_peaks(PowerTrace(np.ones(100), 1e6))

    # Test Case 6: k must be positive
    with pytest.raises(SideTraceValidationError):
        peak_detector.detect_peaks(trace, k=0)


def test_excise():
    trace = PowerTrace(np.arange(10.0), 1e6)

    # Test Case 1: one segment, no guard
    excised = peak_detector.excise(trace, [PeakSegment(3, 5, 'rise', 1.0)], guard=0)

    assert len(excised.trace) == 8
    assert_array_equal(excised.index_map, [0, 1, 2, 5, 6, 7, 8, 9])
    assert_array_equal(excised.trace.samples, [0, 1, 2, 5, 6, 7, 8, 9])

    # Test Case 2: no segments is the identity
    excised = peak_detector.excise(trace, [], guard=0)

    assert_array_equal(excised.index_map, np.arange(10))
    assert excised.trace == trace

    # Test Case 3: guards are clamped and overlapping intervals merged, lengths are conserved
    segments = [PeakSegment(1, 2, 'rise', 1.0), PeakSegment(4, 5, 'drop', -1.0), PeakSegment(9, 10, 'rise', 1.0)]

    excised = peak_detector.excise(trace, segments, guard=1)

    assert excised.removed == [(0, 6), (8, 10)]
    assert len(excised.trace) + excised.removed_samples == len(trace)
    assert_array_equal(excised.index_map, [6, 7])

    # Test Case 4: out of range segment and negative guard
    with pytest.raises(SideTraceValidationError):
        peak_detector.excise(trace, [PeakSegment(8, 12, 'rise', 1.0)], guard=0)

    with pytest.raises(SideTraceValidationError):
        peak_detector.excise(trace, [], guard=-1)


def test_clip_between_peaks():
    trace = PowerTrace(np.arange(20.0), 1e6)

    # Test Case 1: longest free stretch
    clipped, offset = peak_detector.clip_between_peaks(trace, [PeakSegment(3, 4, 'rise', 1.0),
                                                               PeakSegment(12, 13, 'rise', 1.0)], guard=0)

    assert offset == 4
    assert_array_equal(clipped.samples, np.arange(4.0, 12.0))

    # Test Case 2: nothing left
    with pytest.raises(SideTraceProcessingError):
        peak_detector.clip_between_peaks(trace, [PeakSegment(0, 20, 'rise', 1.0)], guard=0)

    # Test Case 3: without a guard, clipping widens peaks by the same 2 cycles as excise
    trace = PowerTrace(np.arange(200.0), 8e6, clock_hz=1e6)
    segments = [PeakSegment(50, 51, 'rise', 1.0)]

    clipped, offset = peak_detector.clip_between_peaks(trace, segments)

    assert peak_detector.excise(trace, segments).removed == [(34, 67)]
    assert offset == 67
    assert len(clipped) == 133


def test_peak_segment():
    with pytest.raises(SideTraceValidationError):
        PeakSegment(5, 5, 'rise', 1.0)

    with pytest.raises(SideTraceValidationError):
        PeakSegment(1, 5, 'up', 1.0)

    seg = PeakSegment(1, 5, 'drop', -2.0)

    assert PeakSegment.from_dict(seg.to_dict()) == seg
    assert len(seg) == 4


def test_integrate_edges_kernels_agree():
    rng = np.random.default_rng(4)

    for _ in range(20):
        codes = rng.integers(-1, 2, size=16).astype(np.int64)

        for idle in (0, 1):
            assert_array_equal(_integrate_edges_numba(codes, idle), _integrate_edges(codes, idle))

    assert_array_equal(_integrate_edges(np.array([0, 1, 0, -1, 0], dtype=np.int64), 0), [0, 1, 1, 0, 0])


def test_decode_spi():
    # Test Case 1: 0xA5
    trace, truth = trace_synth.synth_spi(b'\xa5')

    result = spi_decoder.decode_spi(trace)

    assert result.data == b'\xa5'
    assert len(result.byte_windows) == 1

    # Test Case 2: 0x00 from idle low has no transitions
    trace, _ = trace_synth.synth_spi(b'\x00')

    result = spi_decoder.decode_spi(trace)

    assert result.data == b'\x00'
    assert result.bit_edges == [['none'] * 8]

    # Test Case 3: 0xFF from idle low rises once before bit 0
    trace, _ = trace_synth.synth_spi(b'\xff')

    result = spi_decoder.decode_spi(trace)

    assert result.data == b'\xff'
    assert result.bit_edges == [['rising'] + ['none'] * 7]

    # Test Case 4: several bytes, windows in order and disjoint
    data = bytes([0x12, 0xff, 0x00, 0x80, 0x7e])

    trace, _ = trace_synth.synth_spi(data)

    result = spi_decoder.decode_spi(trace)

    assert result.data == data
    assert all(a[1] <= b[0] for a, b in zip(result.byte_windows[:-1], result.byte_windows[1:]))
    assert result.to_dict()['bytes'] == data.hex()


def test_decode_spi_options():
    # Test Case 1: idle high
    trace, _ = trace_synth.synth_spi(b'\x00\x3c', SpiSynthConfig(idle_level='high', seed=3))

    result = spi_decoder.decode_spi(trace, SpiDecodeConfig(idle_level='high'))

    assert result.data == b'\x00\x3c'
    assert result.bit_edges[0][0] == 'falling'

    # Test Case 2: least significant bit first
    trace, _ = trace_synth.synth_spi(b'\x01\xa0', SpiSynthConfig(bit_order='lsb_first', seed=5))

    assert spi_decoder.decode_spi(trace, SpiDecodeConfig(bit_order='lsb_first')).data == b'\x01\xa0'

    # Test Case 3: noise free capture
    trace, _ = trace_synth.synth_spi(b'\x5a\xc3', SpiSynthConfig(noise_sigma=0.0))

    assert spi_decoder.decode_spi(trace).data == b'\x5a\xc3'


def test_decode_spi_errors():
    # Test Case 1: no peak train in pure noise
    with pytest.raises(SideTraceProcessingError):
        spi_decoder.decode_spi(noise_trace(0, 5000))

    # Test Case 2: a word cut short names its window
    trace, truth = trace_synth.synth_spi(b'\x12\x34')

    clipped = trace_calc.slice_trace(trace, 0, truth.clock_edges[11] + 10)

    with pytest.raises(SideTraceProcessingError, match='4 clock peaks'):
        spi_decoder.decode_spi(clipped)

    # Test Case 3: configuration
    with pytest.raises(SideTraceValidationError):
        SpiDecodeConfig(bits_per_word=9)

    with pytest.raises(SideTraceValidationError):
        SpiDecodeConfig(bit_order='middle_first')

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

import io
import struct

import numpy as np
import pytest
from numpy.testing import assert_array_equal, assert_allclose

from sidetrace.trace.powertrace import PowerTrace
from sidetrace.trace.tracecalculations import TraceCalculations
from sidetrace.trace.traceio import TraceIO
from sidetrace.util.sidetraceerrors import SideTraceValidationError
from sidetrace.wavelet.fingerprint import Fingerprint
from sidetrace.wavelet.scalogram import Scalogram

trace_io = TraceIO()
trace_calc = TraceCalculations()


def csv_stream(text):
    return io.BytesIO(text.encode('utf-8'))


def test_power_trace():
    # Test Case 1: rates and derived samples per clock
    trace = PowerTrace([0.1, 0.2], 3.125e9, clock_hz=8e6)

    assert trace.samples_per_clock == 390.625
    assert len(trace) == 2

    # Test Case 2: samples are read-only
    with pytest.raises(ValueError):
        trace.samples[0] = 1.0

    # Test Case 3: invalid inputs
    with pytest.raises(SideTraceValidationError):
        PowerTrace([0.0, float('nan')], 1e3)

    with pytest.raises(SideTraceValidationError):
        PowerTrace([0.0], 0.0)

    with pytest.raises(SideTraceValidationError):
        PowerTrace([0.0], 1e3, clock_hz=2e3)

    # Test Case 4: unknown clock fails fast where it is needed
    with pytest.raises(SideTraceValidationError):
        PowerTrace([0.0], 1e3).require_samples_per_clock()


def test_load_trace_csv():
    # Test Case 1: single column with a supplied rate
    trace = trace_io.load_trace_csv(csv_stream("0.1\n0.2\n0.3"), sample_rate_hz=1000)

    assert_allclose(trace.samples, [0.1, 0.2, 0.3], rtol=1e-15)
    assert trace.sample_rate_hz == 1000.0

    # Test Case 2: two column form infers the rate from the time deltas
    trace = trace_io.load_trace_csv(csv_stream("time_s,voltage_v\n0,0.1\n1e-6,0.2\n2e-6,0.3\n3e-6,0.4\n"))

    assert trace.sample_rate_hz == pytest.approx(1e6, rel=1e-9)
    assert_allclose(trace.samples, [0.1, 0.2, 0.3, 0.4], rtol=1e-15)

    # Test Case 3: a malformed row is reported with its line number
    with pytest.raises(SideTraceValidationError) as e:
        trace_io.load_trace_csv(csv_stream("0.1\n0.2\n0.3\n0.4\n0.5\n0.6\nabc\n"), sample_rate_hz=1000)

    assert e.value.line == 7
    assert 'line 7' in str(e.value)

    # Test Case 4: time column going backwards
    with pytest.raises(SideTraceValidationError) as e:
        trace_io.load_trace_csv(csv_stream("time_s,voltage_v\n0,0.1\n2e-6,0.2\n1e-6,0.3\n"))

    assert e.value.line == 4

    # Test Case 5: inferred rate conflicts with the supplied one
    with pytest.raises(SideTraceValidationError):
        trace_io.load_trace_csv(csv_stream("time_s,voltage_v\n0,0.1\n1e-6,0.2\n2e-6,0.3\n"), sample_rate_hz=2e6)

    # Test Case 6: single column without a rate
    with pytest.raises(SideTraceValidationError):
        trace_io.load_trace_csv(csv_stream("0.1\n0.2\n"))

    # Test Case 7: wrong number of fields in the two column form
    with pytest.raises(SideTraceValidationError) as e:
        trace_io.load_trace_csv(csv_stream("time_s,voltage_v\n0,0.1\n1e-6\n"))

    assert e.value.line == 3


def test_trace_csv_round_trip():
    samples = np.random.default_rng(1).standard_normal(500)

    trace = PowerTrace(samples, 1e6, clock_hz=1e5)

    sink = io.BytesIO()
    trace_io.save_trace_csv(trace, sink)

    loaded = trace_io.load_trace_csv(io.BytesIO(sink.getvalue()), clock_hz=1e5)

    assert loaded.samples.tobytes() == samples.tobytes()
    assert loaded.sample_rate_hz == pytest.approx(1e6, rel=1e-6)


def test_csv_and_bin_loaders_agree():
    samples = np.random.default_rng(3).standard_normal(500) * np.logspace(-6, 2, 500)

    text = '\n'.join(repr(float(v)) for v in samples) + '\n'

    from_csv = trace_io.load_trace_csv(csv_stream(text), sample_rate_hz=3.125e9, clock_hz=8e6)

    sink = io.BytesIO()
    trace_io.save_trace_bin(PowerTrace(samples, 3.125e9, clock_hz=8e6), sink)

    from_bin = trace_io.load_trace_bin(io.BytesIO(sink.getvalue()))

    assert from_csv == from_bin
    assert from_csv.samples.tobytes() == from_bin.samples.tobytes()


def test_trace_bin():
    samples = np.random.default_rng(7).standard_normal(1000) * 1e-3

    # Test Case 1: round trip is bit-exact, rates included
    trace = PowerTrace(samples, 3.125e9, clock_hz=8e6)

    sink = io.BytesIO()
    trace_io.save_trace_bin(trace, sink)

    loaded = trace_io.load_trace_bin(io.BytesIO(sink.getvalue()))

    assert loaded == trace
    assert loaded.samples.tobytes() == samples.tobytes()

    # Test Case 2: a missing clock stays missing
    sink = io.BytesIO()
    trace_io.save_trace_bin(PowerTrace(samples, 1e6), sink)

    assert trace_io.load_trace_bin(io.BytesIO(sink.getvalue())).clock_hz is None

    # Test Case 3: bad magic
    with pytest.raises(SideTraceValidationError, match='magic'):
        trace_io.load_trace_bin(io.BytesIO(b'XXXX' + sink.getvalue()[4:]))

    # Test Case 4: header declares 10 samples, body holds 6
    raw = struct.pack('<4sHHddQ', b'PSCT', 1, 0, 1e6, 0.0, 10) + np.zeros(6).tobytes()

    with pytest.raises(SideTraceValidationError, match='truncated'):
        trace_io.load_trace_bin(io.BytesIO(raw))

    # Test Case 5: unsupported version
    raw = struct.pack('<4sHHddQ', b'PSCT', 2, 0, 1e6, 0.0, 0)

    with pytest.raises(SideTraceValidationError, match='version'):
        trace_io.load_trace_bin(io.BytesIO(raw))


def test_load_trace():
    trace = PowerTrace([1.0, 2.0, 3.0], 1e6, clock_hz=1e5)

    sink = io.BytesIO()
    trace_io.save_trace_bin(trace, sink)

    # Test Case 1: binary detected by its magic
    assert trace_io.load_trace(io.BytesIO(sink.getvalue())) == trace

    # Test Case 2: explicit clock overrides the stored one
    assert trace_io.load_trace(io.BytesIO(sink.getvalue()), clock_hz=5e5).clock_hz == 5e5

    # Test Case 3: anything else is CSV
    assert len(trace_io.load_trace(csv_stream("1\n2\n"), sample_rate_hz=10)) == 2


def test_fingerprint_json():
    fp = Fingerprint([3, 10, 42], 0.3, 390.625)

    # Test Case 1: round trip
    sink = io.BytesIO()
    trace_io.save_fingerprint_json(fp, sink)

    assert trace_io.load_fingerprint_json(io.BytesIO(sink.getvalue())) == fp

    # Test Case 2: invariants are checked on load
    with pytest.raises(SideTraceValidationError):
        trace_io.load_fingerprint_json(csv_stream('{"theta": 0.3, "samples_per_clock": 8, "cycles": [5, 2]}'))

    with pytest.raises(SideTraceValidationError):
        trace_io.load_fingerprint_json(csv_stream('{"theta": 0.3, "cycles": [1]}'))

    with pytest.raises(SideTraceValidationError):
        trace_io.load_fingerprint_json(csv_stream('not json'))


def test_scalogram_bin():
    coefficients = np.arange(12, dtype=np.float64).reshape(3, 4)

    sink = io.BytesIO()
    trace_io.save_scalogram_bin(Scalogram(coefficients, [1.0, 2.0, 4.0], 1e6), sink)

    assert sink.getvalue()[:4] == b'PSCW'
    assert_array_equal(trace_io.load_scalogram_bin(io.BytesIO(sink.getvalue())), coefficients)

    with pytest.raises(SideTraceValidationError):
        trace_io.load_scalogram_bin(io.BytesIO(sink.getvalue()[:-8]))


def test_slice_trace():
    trace = PowerTrace([1, 2, 3, 4], 1e3)

    # Test Case 1: [start, end)
    assert_array_equal(trace_calc.slice_trace(trace, 1, 3).samples, [2, 3])

    # Test Case 2: whole trace
    assert trace_calc.slice_trace(trace, 0, len(trace)) == trace

    # Test Case 3: empty and out of range
    with pytest.raises(SideTraceValidationError):
        trace_calc.slice_trace(trace, 3, 3)

    with pytest.raises(SideTraceValidationError):
        trace_calc.slice_trace(trace, 0, 5)

    # Test Case 4: slicing a slice is one slice of the original
    trace = PowerTrace(np.random.default_rng(4).standard_normal(300), 1e6, clock_hz=1e5)
    rng = np.random.default_rng(5)

    for _ in range(50):
        a = int(rng.integers(0, 299))
        b = int(rng.integers(a + 1, 301))
        c = int(rng.integers(0, b - a))
        d = int(rng.integers(c + 1, b - a + 1))

        assert trace_calc.slice_trace(trace_calc.slice_trace(trace, a, b), c, d) \
               == trace_calc.slice_trace(trace, a + c, a + d)


def test_trace_stats():
    # Test Case 1: constant
    stats = trace_calc.trace_stats(PowerTrace([1, 1, 1], 1e3))

    assert stats.mean == 1 and stats.std_dev == 0 and stats.mad == 0

    # Test Case 2: hand computed order statistics
    stats = trace_calc.trace_stats(PowerTrace([1, 2, 3, 4, 5], 1e3))

    assert stats.median == 3 and stats.mad == 1

    # Test Case 3: two samples
    stats = trace_calc.trace_stats(PowerTrace([0, 10], 1e3))

    assert (stats.mean, stats.min, stats.max) == (5, 0, 10)

    # Test Case 4: empty
    with pytest.raises(SideTraceValidationError):
        trace_calc.trace_stats(PowerTrace([], 1e3))


def test_prepend_baseline_and_scale():
    trace = PowerTrace([1.0, 2.0, 3.0], 8e3, clock_hz=2e3)

    shifted = trace_calc.prepend_baseline(trace, 2, level=0.0)

    assert len(shifted) == 3 + 8
    assert_array_equal(shifted.samples[:8], 0.0)

    assert_allclose(trace_calc.scale_trace(trace, 2.0, 1.0).samples, [3.0, 5.0, 7.0])

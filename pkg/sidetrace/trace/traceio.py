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
import json
import os
import struct
from contextlib import contextmanager

import numpy
import pandas

from findatapy.util.loggermanager import LoggerManager

from sidetrace.trace.powertrace import PowerTrace
from sidetrace.util.sidetraceconstants import SideTraceConstants
from sidetrace.util.sidetraceerrors import SideTraceValidationError

constants = SideTraceConstants()

# magic, version, flags, sample_rate_hz, clock_hz, count
_TRACE_HEADER = struct.Struct('<4sHHddQ')
_SCALOGRAM_HEADER = struct.Struct('<4sII')

_FLAG_CLOCK_PRESENT = 0x1


@contextmanager
def _open_stream(source, mode):
    # accept either a path or an already open binary stream (which is left open)
    if isinstance(source, (str, os.PathLike)):
        with open(source, mode) as f:
            yield f
    else:
        yield source


def _source_name(source):
    if isinstance(source, (str, os.PathLike)):
        return str(source)

    return getattr(source, 'name', None)


class TraceIO(object):
    """Reads and writes traces, fingerprints and scalograms.

    Binary trace format (little-endian): magic PSCT, version u16 = 1, flags u16 (bit0 = clock present),
    sample_rate_hz f64, clock_hz f64 (0.0 when absent), count u64, then count f64 samples.

    Fingerprints are UTF-8 JSON objects {"theta": ..., "samples_per_clock": ..., "cycles": [...]}.

    Scalograms (diagnostics) are magic PSCW, u32 rows, u32 columns, then row-major f64.

    """

    def __init__(self):
        self.logger = LoggerManager().getLogger(__name__)

    ##### CSV traces
    def load_trace_csv(self, source, sample_rate_hz=None, clock_hz=None, label=None):
        """Loads a trace from UTF-8 CSV text, either a single voltage column or two columns with the header
        time_s,voltage_v. For the two column form the sample rate is inferred from the median time delta.

        Parameters
        ----------
        source : binary stream or path
            CSV text
        sample_rate_hz : float
            samples per second (required for the single column form, checked against the time axis otherwise)
        clock_hz : float (optional)
            device clock frequency
        label : str (optional)
            free text metadata

        Returns
        -------
        PowerTrace
        """
        name = _source_name(source)

        with _open_stream(source, 'rb') as f:
            raw = f.read()

        try:
            text = raw.decode('utf-8') if isinstance(raw, bytes) else raw
        except UnicodeDecodeError as e:
            raise SideTraceValidationError("trace CSV is not valid UTF-8 (" + str(e) + ")", source=name)

        lines = text.splitlines()
        first = next((i for i, l in enumerate(lines) if l.strip() != ''), None)

        if first is None:
            raise SideTraceValidationError("trace CSV contains no samples", source=name)

        header = [x.strip() for x in lines[first].split(',')]
        two_column = header == [constants.csv_time_column, constants.csv_voltage_column]

        if two_column:
            df = self._read_csv_frame(lines, 2, first + 1, name)
            time_s = self._to_numeric(df, 0, name)
            voltage = self._to_numeric(df, 1, name)

            sample_rate_hz = self._infer_sample_rate(time_s, df.index, sample_rate_hz, name)
        else:
            if sample_rate_hz is None:
                raise SideTraceValidationError("sample_rate_hz is required for single column traces", source=name)

            df = self._read_csv_frame(lines, 1, first, name)
            voltage = self._to_numeric(df, 0, name)

        self.logger.debug("Loaded " + str(len(voltage)) + " samples from CSV")

        return PowerTrace(voltage, sample_rate_hz, clock_hz=clock_hz, label=label)

    def _read_csv_frame(self, lines, columns, skip, name):
        # rows are indexed by their 1 based line number so that malformed rows can be reported
        rows = pandas.Series(lines[skip:], index=numpy.arange(skip + 1, len(lines) + 1), dtype=object)
        rows = rows[rows.str.strip() != '']

        if len(rows) == 0:
            raise SideTraceValidationError("trace CSV contains no samples", source=name)

        wrong = (rows.str.count(',') + 1) != columns

        if wrong.any():
            line = int(wrong.idxmax())

            raise SideTraceValidationError("malformed row " + repr(rows[line]) + " (expected " + str(columns)
                                           + " fields)", line=line, source=name)

        return rows.str.split(',', expand=True)

    def _to_numeric(self, df, column, name):
        col = df[column].str.strip()
        values = pandas.to_numeric(col, errors='coerce')

        bad = values.isna() | ~numpy.isfinite(values.fillna(0.0))

        if bad.any():
            line = int(bad.idxmax())

            raise SideTraceValidationError("malformed row " + repr(','.join(df.loc[line].tolist())), line=line,
                                           source=name)

        # to_numeric is only used to find bad rows, it can be off by an ulp, astype parses with exact rounding
        return col.astype(numpy.float64).to_numpy()

    def _infer_sample_rate(self, time_s, line_index, sample_rate_hz, name):
        if len(time_s) < 2:
            if sample_rate_hz is None:
                raise SideTraceValidationError("at least two rows are needed to infer the sample rate", source=name)

            return sample_rate_hz

        delta = numpy.diff(time_s)

        if numpy.any(delta <= 0):
            line = int(line_index[numpy.flatnonzero(delta <= 0)[0] + 1])

            raise SideTraceValidationError("time column is not strictly increasing", line=line, source=name)

        median_delta = numpy.median(delta)
        deviation = numpy.abs(delta - median_delta) / median_delta

        if numpy.max(deviation) > constants.csv_uniform_tolerance:
            line = int(line_index[int(numpy.argmax(deviation)) + 1])

            raise SideTraceValidationError("non-uniform sampling (time delta deviates more than "
                                           + str(100 * constants.csv_uniform_tolerance) + "% from the median)",
                                           line=line, source=name)

        inferred = 1.0 / median_delta

        if sample_rate_hz is not None:
            if abs(inferred - sample_rate_hz) / sample_rate_hz > constants.csv_uniform_tolerance:
                raise SideTraceValidationError("inferred sample rate " + repr(inferred) + " Hz conflicts with supplied "
                                               + "rate " + repr(float(sample_rate_hz)) + " Hz", source=name)

            return sample_rate_hz

        self.logger.debug("Inferred sample rate " + str(inferred) + " Hz from time column")

        return inferred

    def save_trace_csv(self, trace, sink):
        """Writes the two column time_s,voltage_v form."""
        df = trace.to_series().to_frame()

        text = df.to_csv(float_format='%.17g', lineterminator='\n')

        with _open_stream(sink, 'wb') as f:
            f.write(text.encode('utf-8'))

    ##### binary traces
    def load_trace_bin(self, source, label=None):
        """Loads a trace from the PSCT binary format.

        Parameters
        ----------
        source : binary stream or path

        Returns
        -------
        PowerTrace
        """
        name = _source_name(source)

        with _open_stream(source, 'rb') as f:
            raw = f.read()

        if len(raw) < 4 or raw[:4] != constants.trace_bin_magic:
            raise SideTraceValidationError("bad magic " + repr(bytes(raw[:4])) + ", expected "
                                           + repr(constants.trace_bin_magic), source=name)

        if len(raw) < _TRACE_HEADER.size:
            raise SideTraceValidationError("truncated header (" + str(len(raw)) + " bytes)", source=name)

        magic, version, flags, sample_rate_hz, clock_hz, count = _TRACE_HEADER.unpack_from(raw, 0)

        if version != constants.trace_bin_version:
            raise SideTraceValidationError("unsupported version " + str(version), source=name)

        available = len(raw) - _TRACE_HEADER.size

        if available != 8 * count:
            raise SideTraceValidationError("truncated payload: header declares " + str(count) + " samples, body holds "
                                           + str(available) + " bytes (" + str(available // 8) + " samples)",
                                           source=name)

        samples = numpy.frombuffer(raw, dtype='<f8', count=count, offset=_TRACE_HEADER.size).astype(numpy.float64)

        if not (flags & _FLAG_CLOCK_PRESENT):
            clock_hz = None

        return PowerTrace(samples, sample_rate_hz, clock_hz=clock_hz, label=label)

    def save_trace_bin(self, trace, sink):
        """Writes a trace in the PSCT binary format, bit-exact for every finite sample."""
        flags = _FLAG_CLOCK_PRESENT if trace.clock_hz is not None else 0
        clock_hz = trace.clock_hz if trace.clock_hz is not None else 0.0

        header = _TRACE_HEADER.pack(constants.trace_bin_magic, constants.trace_bin_version, flags,
                                    trace.sample_rate_hz, clock_hz, len(trace))

        with _open_stream(sink, 'wb') as f:
            f.write(header)
            f.write(trace.samples.astype('<f8').tobytes())

    def load_trace(self, source, sample_rate_hz=None, clock_hz=None):
        """Loads either format, chosen by the magic bytes. Rates given explicitly override those in a binary file."""
        name = _source_name(source)

        with _open_stream(source, 'rb') as f:
            raw = f.read()

        if raw[:4] == constants.trace_bin_magic:
            trace = self.load_trace_bin(io.BytesIO(raw))

            if sample_rate_hz is not None or clock_hz is not None:
                trace = PowerTrace(trace.samples,
                                   sample_rate_hz if sample_rate_hz is not None else trace.sample_rate_hz,
                                   clock_hz=clock_hz if clock_hz is not None else trace.clock_hz)

            return trace

        try:
            return self.load_trace_csv(io.BytesIO(raw), sample_rate_hz=sample_rate_hz, clock_hz=clock_hz)
        except SideTraceValidationError as e:
            if name is not None and e.source is None:
                raise SideTraceValidationError(str(e), source=name)

            raise

    ##### generic JSON (reports, scripts, ground truth)
    def write_json(self, obj, sink):
        with _open_stream(sink, 'wb') as f:
            f.write((json.dumps(obj, indent=2) + '\n').encode('utf-8'))

    def read_json(self, source):
        name = _source_name(source)

        with _open_stream(source, 'rb') as f:
            raw = f.read()

        try:
            return json.loads(raw.decode('utf-8'))
        except (UnicodeDecodeError, ValueError) as e:
            raise SideTraceValidationError("not valid UTF-8 JSON (" + str(e) + ")", source=name)

    def load_script_json(self, source):
        """Loads a SynthScript from JSON mirroring its field names.

        Returns
        -------
        SynthScript
        """
        from sidetrace.synth.synthscript import SynthScript

        obj = self.read_json(source)

        try:
            return SynthScript.from_dict(obj)
        except SideTraceValidationError as e:
            raise SideTraceValidationError(str(e), source=_source_name(source))

    def save_script_json(self, script, sink):
        self.write_json(script.to_dict(), sink)

    ##### fingerprints
    def fingerprint_to_json(self, fingerprint):
        return json.dumps({'theta': fingerprint.theta, 'samples_per_clock': fingerprint.samples_per_clock,
                           'cycles': [int(c) for c in fingerprint.cycles]})

    def save_fingerprint_json(self, fingerprint, sink):
        with _open_stream(sink, 'wb') as f:
            f.write((self.fingerprint_to_json(fingerprint) + '\n').encode('utf-8'))

    def load_fingerprint_json(self, source):
        """Loads a fingerprint written by save_fingerprint_json, checking its invariants.

        Returns
        -------
        Fingerprint
        """
        from sidetrace.wavelet.fingerprint import Fingerprint

        name = _source_name(source)

        obj = self.read_json(source)

        if not isinstance(obj, dict):
            raise SideTraceValidationError("fingerprint JSON must be an object", source=name)

        for k in ('theta', 'samples_per_clock', 'cycles'):
            if k not in obj:
                raise SideTraceValidationError("fingerprint JSON is missing field '" + k + "'", source=name)

        try:
            return Fingerprint(obj['cycles'], obj['theta'], obj['samples_per_clock'])
        except SideTraceValidationError as e:
            raise SideTraceValidationError(str(e), source=name)

    ##### scalograms
    def save_scalogram_bin(self, scalogram, sink):
        coefficients = scalogram.coefficients
        n, m = coefficients.shape

        with _open_stream(sink, 'wb') as f:
            f.write(_SCALOGRAM_HEADER.pack(constants.scalogram_bin_magic, n, m))
            f.write(numpy.ascontiguousarray(coefficients, dtype='<f8').tobytes())

    def load_scalogram_bin(self, source):
        """Reads the PSCW coefficient matrix (scale axis and sample rate are not part of the format).

        Returns
        -------
        numpy.ndarray of shape (n, m)
        """
        name = _source_name(source)

        with _open_stream(source, 'rb') as f:
            raw = f.read()

        if raw[:4] != constants.scalogram_bin_magic:
            raise SideTraceValidationError("bad magic " + repr(bytes(raw[:4])) + ", expected "
                                           + repr(constants.scalogram_bin_magic), source=name)

        if len(raw) < _SCALOGRAM_HEADER.size:
            raise SideTraceValidationError("truncated header", source=name)

        _, n, m = _SCALOGRAM_HEADER.unpack_from(raw, 0)

        if len(raw) - _SCALOGRAM_HEADER.size != 8 * n * m:
            raise SideTraceValidationError("truncated payload: header declares " + str(n) + "x" + str(m)
                                           + " coefficients", source=name)

        return numpy.frombuffer(raw, dtype='<f8', offset=_SCALOGRAM_HEADER.size).astype(numpy.float64).reshape(n, m)

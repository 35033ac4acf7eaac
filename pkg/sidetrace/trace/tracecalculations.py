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

import numpy

from sidetrace.trace.powertrace import TraceStats
from sidetrace.util.sidetraceerrors import SideTraceValidationError


class TraceCalculations(object):
    """Basic manipulations of power traces: slicing, statistics and the affine/shift transforms used when checking
    invariance properties of the fingerprinting pipeline.

    """

    def slice_trace(self, trace, start, end):
        """Samples [start, end) of a trace, keeping its rates. Used to clip a trace between peripheral peaks.

        Parameters
        ----------
        trace : PowerTrace
            trace to slice
        start : int
            first sample index (inclusive)
        end : int
            last sample index (exclusive)

        Returns
        -------
        PowerTrace
        """
        start = int(start)
        end = int(end)

        if not (0 <= start < end <= len(trace)):
            raise SideTraceValidationError("slice [" + str(start) + ", " + str(end) + ") is out of range for a trace of "
                                           + str(len(trace)) + " samples")

        return trace.with_samples(trace.samples[start:end])

    def trace_stats(self, trace):
        """Minimum, maximum, mean, standard deviation, median and median absolute deviation of a trace.

        Parameters
        ----------
        trace : PowerTrace

        Returns
        -------
        TraceStats
        """
        samples = trace.samples

        if len(samples) == 0:
            raise SideTraceValidationError("cannot calculate statistics of an empty trace")

        median = numpy.median(samples)
        mad = numpy.median(numpy.abs(samples - median))

        return TraceStats(min=samples.min(), max=samples.max(), mean=samples.mean(), std_dev=samples.std(),
                          median=median, mad=mad)

    def scale_trace(self, trace, alpha, beta=0.0):
        """alpha * x + beta, same rates."""
        return trace.with_samples(alpha * trace.samples + beta)

    def prepend_baseline(self, trace, cycles, level=None):
        """Prepends a flat baseline of the given number of clock cycles (at the trace median unless a level is given).

        The sample count is rounded to the nearest integer, so the shift in clock cycles is exact only when
        cycles * samples_per_clock is integral.
        """
        samples_per_clock = trace.require_samples_per_clock()

        if level is None:
            level = numpy.median(trace.samples) if len(trace) > 0 else 0.0

        prefix = numpy.full(int(round(cycles * samples_per_clock)), float(level))

        return trace.with_samples(numpy.concatenate([prefix, trace.samples]))

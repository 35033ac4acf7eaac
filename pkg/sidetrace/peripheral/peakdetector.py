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

import math

import numpy

from findatapy.util.loggermanager import LoggerManager

from sidetrace.peripheral.peaksegment import ExcisedTrace, PeakSegment
from sidetrace.util.sidetraceconstants import SideTraceConstants
from sidetrace.util.sidetraceerrors import SideTraceProcessingError, SideTraceValidationError

constants = SideTraceConstants()


def find_runs(mask):
    """Maximal runs of True in a boolean array as (starts, ends), ends exclusive."""
    mask = numpy.asarray(mask, dtype=numpy.int8)

    edges = numpy.diff(numpy.r_[0, mask, 0])

    return numpy.flatnonzero(edges == 1), numpy.flatnonzero(edges == -1)


def merge_runs(starts, ends, merge_gap):
    """Merges consecutive runs whose gap (next start - previous end) is below merge_gap."""
    if len(starts) == 0:
        return starts, ends

    keep_start = numpy.r_[True, (starts[1:] - ends[:-1]) >= merge_gap]
    keep_end = numpy.r_[keep_start[1:], True]

    return starts[keep_start], ends[keep_end]


class PeakDetector(object):
    """Detects the large peaks that peripheral interactions (UART, SPI...) leave in a power trace, and cuts them out
    before fingerprinting.

    The threshold is k median absolute deviations either side of the trace median, so the peaks themselves do not
    inflate it.

    """

    def __init__(self):
        self.logger = LoggerManager().getLogger(__name__)

    def _default_samples(self, trace, cycles, fallback):
        if trace.clock_hz is None:
            return fallback

        return int(math.ceil(cycles * trace.samples_per_clock))

    def detect_peaks(self, trace, k=constants.peak_mad_k, merge_gap=None):
        """Segments of samples further than k * MAD from the median.

        Parameters
        ----------
        trace : PowerTrace
        k : float
            MAD multiplier
        merge_gap : int
            segments separated by fewer samples are merged (default one clock cycle)

        Returns
        -------
        list of PeakSegment
        """
        if not k > 0:
            raise SideTraceValidationError("k must be > 0, got " + repr(k))

        if len(trace) == 0:
            raise SideTraceValidationError("cannot detect peaks in an empty trace")

        if merge_gap is None:
            merge_gap = self._default_samples(trace, constants.peak_merge_gap_cycles,
                                              constants.peak_merge_gap_samples)

        if merge_gap < 0:
            raise SideTraceValidationError("merge_gap must be >= 0, got " + repr(merge_gap))

        deviation = trace.samples - numpy.median(trace.samples)
        mad = numpy.median(numpy.abs(deviation))

        if mad == 0:
            raise SideTraceProcessingError("trace has zero median absolute deviation, peak threshold is undefined")

        starts, ends = find_runs(numpy.abs(deviation) > k * mad)
        starts, ends = merge_runs(starts, ends, merge_gap)

        segments = []

        for s, e in zip(starts, ends):
            extremum = deviation[s + int(numpy.argmax(numpy.abs(deviation[s:e])))]

            segments.append(PeakSegment(s, e, 'rise' if extremum > 0 else 'drop', extremum))

        self.logger.debug("Found " + str(len(segments)) + " peaks beyond " + str(k) + " x MAD (" + str(mad) + ")")

        return segments

    def _widen(self, segments, guard, length):
        """Widens segments by guard on both sides, clamps and merges overlapping or touching intervals."""
        for seg in segments:
            if seg.end > length:
                raise SideTraceValidationError("segment " + repr(seg) + " is out of range for a trace of "
                                               + str(length) + " samples")

        if guard < 0:
            raise SideTraceValidationError("guard must be >= 0, got " + repr(guard))

        intervals = sorted((max(0, seg.start - guard), min(length, seg.end + guard)) for seg in segments)

        merged = []

        for s, e in intervals:
            if merged and s <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], e))
            else:
                merged.append((s, e))

        return merged

    def excise(self, trace, segments, guard=None):
        """Removes each segment widened by guard samples and concatenates what is left.

        Parameters
        ----------
        trace : PowerTrace
        segments : list of PeakSegment
        guard : int
            samples removed either side of each segment (default two clock cycles), absorbs post-peak ringing

        Returns
        -------
        ExcisedTrace
        """
        if guard is None:
            guard = self._default_samples(trace, constants.peak_guard_cycles, constants.peak_guard_samples)

        removed = self._widen(segments, int(guard), len(trace))

        keep = numpy.ones(len(trace), dtype=numpy.bool_)

        for s, e in removed:
            keep[s:e] = False

        index_map = numpy.flatnonzero(keep)

        return ExcisedTrace(trace.with_samples(trace.samples[keep]), index_map, removed)

    def clip_between_peaks(self, trace, segments, guard=None):
        """Longest stretch of the trace free of (guarded) peaks, eg. the computation between two UART messages.

        Parameters
        ----------
        trace : PowerTrace
        segments : list of PeakSegment
        guard : int
            samples, defaults to the same guard as excise

        Returns
        -------
        PowerTrace, int
            the clipped trace and the index of its first sample in the original trace
        """
        if guard is None:
            guard = self._default_samples(trace, constants.peak_guard_cycles, constants.peak_guard_samples)

        removed = self._widen(segments, int(guard), len(trace))

        bounds = [0] + [x for interval in removed for x in interval] + [len(trace)]

        # free stretches are [bounds[2i], bounds[2i + 1])
        free = [(bounds[i], bounds[i + 1]) for i in range(0, len(bounds), 2)]
        free = [(s, e) for s, e in free if e > s]

        if not free:
            raise SideTraceProcessingError("no peak-free samples left to clip")

        start, end = max(free, key=lambda f: (f[1] - f[0], -f[0]))

        self.logger.debug("Clipping trace to [" + str(start) + ", " + str(end) + ")")

        return trace.with_samples(trace.samples[start:end]), start

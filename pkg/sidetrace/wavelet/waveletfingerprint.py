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

import bisect
import math

import numpy
from numba import guvectorize
from scipy import signal

from findatapy.util import SwimPool
from findatapy.util.loggermanager import LoggerManager

from sidetrace.filters.tracefilter import TraceFilter
from sidetrace.peripheral.peakdetector import PeakDetector
from sidetrace.util.sidetraceconstants import SideTraceConstants
from sidetrace.util.sidetraceerrors import SideTraceProcessingError, SideTraceValidationError
from sidetrace.wavelet.fingerprint import Fingerprint, FingerprintDiagnostics, FingerprintRequest
from sidetrace.wavelet.scalogram import CandidateSet, Scalogram
from sidetrace.wavelet.waveletspec import WaveletSpec

constants = SideTraceConstants()


@guvectorize(['void(f8[:], f8, b1[:])'], '(n),()->(n)', cache=True, target="cpu", nopython=True)
def _local_maxima_numba(row, threshold, out):
    n = row.shape[0]

    for i in range(n):
        out[i] = False

    # walk over runs of equal values, a plateau is marked at its leftmost index
    left = 0.0
    i = 0

    while i < n:
        j = i

        while j + 1 < n and row[j + 1] == row[i]:
            j += 1

        if j + 1 < n:
            right = row[j + 1]
        else:
            right = 0.0

        if row[i] > threshold and row[i] > left and row[i] > right:
            out[i] = True

        left = row[i]
        i = j + 1


def _local_maxima(row, threshold):
    out = numpy.zeros(len(row), dtype=numpy.bool_)

    if len(row) == 0:
        return out

    starts = numpy.flatnonzero(numpy.r_[True, row[1:] != row[:-1]])
    values = row[starts]

    left = numpy.r_[0.0, values[:-1]]
    right = numpy.r_[values[1:], 0.0]

    out[starts[(values > threshold) & (values > left) & (values > right)]] = True

    return out


def _convolve_row(samples, kernel):
    return signal.convolve(samples, kernel, mode='same')


class WaveletFingerprint(object):
    """Control-flow fingerprinting of a single power trace with the continuous wavelet transform.

    The pipeline runs
        cwt - one row of W_x(t, a) per daughter wavelet scale
        threshold_candidates - row-wise local maxima of |W| above theta * max |W| (relative, so amplitude free)
        dedupe_spectral - collapse the same event seen at neighbouring slots on several scales
        map_to_cycles - divide by samples per clock and collapse events inside one cycle

    """

    def __init__(self):
        self.logger = LoggerManager().getLogger(__name__)

    def cwt(self, trace, wavelet_spec):
        """Continuous wavelet transform of a trace, with zero padded boundaries and same length rows.

        Parameters
        ----------
        trace : PowerTrace
        wavelet_spec : WaveletSpec

        Returns
        -------
        Scalogram
        """
        if len(trace) == 0:
            raise SideTraceValidationError("cannot transform an empty trace")

        wavelet_spec.validate(len(trace))

        samples = trace.samples
        kernels = [wavelet_spec.kernel(a) for a in wavelet_spec.scales]

        thread_no = min(constants.thread_no(), len(kernels))

        self.logger.info("Calculating CWT over " + str(len(kernels)) + " scales (" + wavelet_spec.family + ")")

        if thread_no > 1:
            swim_pool = SwimPool(multiprocessing_library=constants.multiprocessing_library)

            pool = swim_pool.create_pool(thread_technique=constants.thread_technique, thread_no=thread_no)

            results = [pool.apply_async(_convolve_row, args=(samples, k,)) for k in kernels]
            rows = [r.get() for r in results]

            swim_pool.close_pool(pool)
        else:
            rows = [_convolve_row(samples, k) for k in kernels]

        return Scalogram(numpy.vstack(rows), wavelet_spec.scales, trace.sample_rate_hz)

    def threshold_candidates(self, scalogram, theta):
        """Candidate event locations: every strict local maximum of |W| along time, within its row, that exceeds
        theta_abs = theta * max |W|.

        Parameters
        ----------
        scalogram : Scalogram
        theta : float
            relative threshold in (0, 1)

        Returns
        -------
        CandidateSet
        """
        if not 0 < theta < 1:
            raise SideTraceValidationError("theta must lie in (0, 1), got " + repr(theta))

        if scalogram.coefficients.size == 0:
            raise SideTraceValidationError("empty scalogram")

        magnitude = numpy.abs(scalogram.coefficients)
        max_abs = float(magnitude.max())

        if max_abs == 0:
            raise SideTraceProcessingError("scalogram is all zero, there is no high-frequency content to threshold")

        theta_abs = theta * max_abs

        if constants.use_numba:
            mask = _local_maxima_numba(magnitude, theta_abs)
        else:
            mask = numpy.vstack([_local_maxima(row, theta_abs) for row in magnitude])

        scale_indices, time_slots = numpy.nonzero(mask)

        self.logger.debug("Threshold " + str(theta_abs) + " keeps " + str(len(time_slots)) + " candidates")

        return CandidateSet(time_slots, scale_indices, magnitude[scale_indices, time_slots], theta, theta_abs)

    def dedupe_spectral(self, candidates, slot_radius=constants.wavelet_slot_radius):
        """Removes spectral duplicates by magnitude suppression. Candidates (across all scales) are visited from the
        largest magnitude down, and a candidate is dropped when its time slot lies within slot_radius of a slot that
        was already kept. Kept slots are therefore pairwise more than slot_radius apart, and the slots kept for a
        higher theta are always a subset of the slots kept for a lower one.

        Parameters
        ----------
        candidates : CandidateSet
        slot_radius : int
            samples

        Returns
        -------
        numpy.ndarray
            ascending, duplicate free time slots
        """
        if slot_radius < 0:
            raise SideTraceValidationError("slot_radius must be >= 0, got " + repr(slot_radius))

        if len(candidates) == 0:
            return numpy.array([], dtype=numpy.int64)

        # magnitude ties go to the earlier slot
        df = candidates.to_frame().sort_values(['magnitude', 'time_slot'], ascending=[False, True], kind='mergesort')

        kept = []

        for slot in df['time_slot'].values:
            i = bisect.bisect_left(kept, slot - slot_radius)

            if i < len(kept) and kept[i] <= slot + slot_radius:
                continue

            bisect.insort(kept, int(slot))

        return numpy.array(kept, dtype=numpy.int64)

    def map_to_cycles(self, slots, sample_rate_hz, clock_hz, theta=constants.wavelet_theta):
        """Divides time slots by the samples per clock, flooring to the cycle index, and removes temporal duplicates.

        Parameters
        ----------
        slots : array-like
            sample indices
        sample_rate_hz : float
        clock_hz : float
        theta : float
            stored on the Fingerprint

        Returns
        -------
        Fingerprint
        """
        if clock_hz is None:
            raise SideTraceValidationError("clock_hz is unknown, samples per clock cannot be computed")

        samples_per_clock = float(sample_rate_hz) / float(clock_hz)

        if samples_per_clock < 1:
            raise SideTraceValidationError("samples_per_clock must be >= 1, got " + repr(samples_per_clock))

        slots = numpy.asarray(slots, dtype=numpy.float64)

        if numpy.any(slots < 0):
            raise SideTraceValidationError("time slots must be non-negative")

        cycles = numpy.unique(numpy.floor(slots / samples_per_clock).astype(numpy.int64))

        return Fingerprint(cycles, theta, samples_per_clock)

    def fingerprint(self, trace, fingerprint_request=None, return_diagnostics=False):
        """Runs the whole single-trace pipeline: optional prefilter, optional peripheral excision (fingerprint cycles
        are still reported in the coordinates of the original trace), median detrend, CWT, threshold, spectral then
        temporal deduplication.

        Parameters
        ----------
        trace : PowerTrace
            clock_hz must be known
        fingerprint_request : FingerprintRequest
        return_diagnostics : bool
            also return FingerprintDiagnostics

        Returns
        -------
        Fingerprint (, FingerprintDiagnostics)
        """
        fr = fingerprint_request if fingerprint_request is not None else FingerprintRequest()

        samples_per_clock = trace.require_samples_per_clock()

        working = trace

        if fr.prefilter is not None:
            self.logger.info("Prefiltering with " + repr(fr.prefilter))

            working = TraceFilter().apply(working, fr.prefilter)

        index_map = None
        segments = []

        if fr.excise_peripheral:
            merge_gap = fr.merge_gap
            guard = fr.guard

            if merge_gap is None:
                merge_gap = int(math.ceil(constants.peak_merge_gap_cycles * samples_per_clock))

            if guard is None:
                guard = int(math.ceil(constants.peak_guard_cycles * samples_per_clock))

            peak_detector = PeakDetector()

            segments = peak_detector.detect_peaks(working, fr.peak_k, merge_gap)
            excised = peak_detector.excise(working, segments, guard)

            self.logger.info("Excised " + str(len(segments)) + " peripheral peaks, " + str(len(excised.trace))
                             + " of " + str(len(working)) + " samples left")

            working = excised.trace
            index_map = excised.index_map

        if len(working) == 0:
            raise SideTraceValidationError("no samples left to fingerprint")

        if fr.detrend:
            working = working.with_samples(working.samples - numpy.median(working.samples))

        wavelet_spec = fr.wavelet_spec

        if wavelet_spec is None:
            wavelet_spec = WaveletSpec.default(samples_per_clock)

        scalogram = self.cwt(working, wavelet_spec)
        candidates = self.threshold_candidates(scalogram, fr.theta)
        slots = self.dedupe_spectral(candidates, fr.slot_radius)

        half = wavelet_spec.max_footprint // 2
        boundary = slots[(slots < half) | (slots > len(working) - 1 - half)]

        if len(boundary) > 0:
            self.logger.warning(str(len(boundary)) + " events lie within half a wavelet footprint (" + str(half)
                                + " samples) of the trace ends")

        if index_map is not None:
            slots = index_map[slots]
            boundary = index_map[boundary]

        fp = self.map_to_cycles(slots, trace.sample_rate_hz, trace.clock_hz, theta=fr.theta)

        self.logger.info("Fingerprint has " + str(len(fp)) + " events from " + str(len(candidates)) + " candidates")

        if return_diagnostics:
            return fp, FingerprintDiagnostics(candidates.theta_abs, len(candidates), slots, boundary, segments,
                                              scalogram=scalogram)

        return fp

    def rasterize(self, fp, length_cycles, smoothing_halfwidth=constants.compare_smoothing_halfwidth):
        """Indicator vector over [0, length_cycles) with a one at every fingerprint cycle, convolved with a triangular
        kernel 1 - |j| / (h + 1) for |j| <= h.

        Parameters
        ----------
        fp : Fingerprint
        length_cycles : int
        smoothing_halfwidth : int
            h, 0 gives the raw indicator

        Returns
        -------
        numpy.ndarray
        """
        if smoothing_halfwidth < 0:
            raise SideTraceValidationError("smoothing_halfwidth must be >= 0, got " + repr(smoothing_halfwidth))

        length_cycles = int(length_cycles)

        if length_cycles < 1 or (len(fp) > 0 and length_cycles <= fp.cycles[-1]):
            raise SideTraceValidationError("length_cycles " + str(length_cycles) + " must exceed the largest "
                                           + "fingerprint cycle")

        indicator = numpy.zeros(length_cycles)
        indicator[fp.cycles] = 1.0

        h = int(smoothing_halfwidth)

        if h == 0:
            return indicator

        kernel = 1.0 - numpy.abs(numpy.arange(-h, h + 1)) / float(h + 1)

        return numpy.convolve(indicator, kernel, mode='full')[h:h + length_cycles]

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
import pandas

from findatapy.util.loggermanager import LoggerManager

from sidetrace.analysis.fingerprintcomparison import pearson
from sidetrace.analysis.reports import MotifReport, SpinLoopReport
from sidetrace.util.sidetraceconstants import SideTraceConstants
from sidetrace.util.sidetraceerrors import SideTraceValidationError
from sidetrace.wavelet.waveletfingerprint import WaveletFingerprint

constants = SideTraceConstants()


class MotifDetection(object):
    """Finds repeated structure in fingerprints.

    detect_motif looks for a dominant repetition period (eg. cipher rounds) with the normalized autocorrelation of
    the smoothed fingerprint raster, then counts the repetitions by matching the first period against the rest.
    detect_spin_loop looks for the tight periodic loop a fault handler spins in after a crash.

    """

    def __init__(self):
        self.logger = LoggerManager().getLogger(__name__)

    def autocorrelation(self, raster, min_period, max_period):
        """Pearson correlation of the raster with itself shifted by each lag in [min_period, max_period].

        Returns
        -------
        pandas.Series
            indexed by lag, constant overlaps count as 0
        """
        series = pandas.Series(raster)

        lags = numpy.arange(min_period, max_period + 1)

        return pandas.Series([series.autocorr(lag=int(l)) for l in lags], index=lags).fillna(0.0)

    def detect_motif(self, fp, min_period, max_period, smoothing_halfwidth=constants.motif_smoothing_halfwidth,
                     strength_cutoff=constants.motif_strength_cutoff):
        """Dominant repetition period of a fingerprint and where each repetition starts.

        Parameters
        ----------
        fp : Fingerprint
        min_period : int
            cycles, >= 2
        max_period : int
            cycles, at most half the fingerprint span
        smoothing_halfwidth : int
        strength_cutoff : float
            weaker autocorrelation peaks are not reported

        Returns
        -------
        MotifReport or None
        """
        if len(fp) == 0:
            raise SideTraceValidationError("cannot detect motifs in an empty fingerprint")

        span = fp.span_cycles

        if int(min_period) != min_period or min_period < 2 or max_period < min_period or max_period > span / 2.0:
            raise SideTraceValidationError("invalid period window [" + str(min_period) + ", " + str(max_period)
                                           + "], need 2 <= min_period <= max_period <= span / 2 = " + str(span / 2.0))

        min_period = int(min_period)
        max_period = int(max_period)

        h = int(smoothing_halfwidth)

        # below 2h + 1 the smoothing kernel overlaps itself and every fingerprint looks periodic
        min_lag = max(min_period, 2 * h + 1)

        if min_lag > max_period:
            self.logger.debug("Period window [" + str(min_period) + ", " + str(max_period) + "] lies inside the "
                              + "smoothing kernel, no motif")

            return None

        first = int(fp.cycles[0])
        last = int(fp.cycles[-1])

        # pad by one maximum period so that a window starting on the last repetition stays inside the raster
        raster = WaveletFingerprint().rasterize(fp, last + 1 + h + max_period, h)

        lo = max(0, first - h)
        body = raster[lo:last + h + 1]

        strengths = self.autocorrelation(body, min_lag, max_period)
        best = float(strengths.max())

        if best < strength_cutoff:
            self.logger.debug("No motif, best autocorrelation " + str(best))

            return None

        # the shortest lag close to the best one, so multiples of the period are not picked
        period = int(strengths.index[strengths.values >= constants.motif_fundamental_ratio * best][0])
        strength = float(strengths[period])

        # candidate templates start on the (smoothed) events of the first period
        anchors = sorted(set([lo] + [max(0, int(c) - h) for c in fp.cycles if int(c) - h < lo + period]))

        starts = self._occurrences(raster, anchors, period, strength_cutoff)

        self.logger.info("Motif with period " + str(period) + " cycles repeats " + str(len(starts)) + " times")

        return MotifReport(period, [s + (first - lo) for s in starts], strength)

    def _occurrences(self, raster, anchors, period, cutoff):
        tolerance = int(math.floor(constants.motif_gap_tolerance * period))

        best_chain = []

        for anchor in anchors:
            if anchor + period > len(raster):
                continue

            template = raster[anchor:anchor + period]

            chain = [anchor]
            pos = anchor

            while True:
                candidates = range(max(pos + 1, pos + period - tolerance), pos + period + tolerance + 1)
                candidates = [q for q in candidates if q + period <= len(raster)]

                if not candidates:
                    break

                scores = [pearson(template, raster[q:q + period]) for q in candidates]
                k = int(numpy.argmax(scores))

                if scores[k] < cutoff:
                    break

                pos = candidates[k]
                chain.append(pos)

            if len(chain) > len(best_chain):
                best_chain = chain

        return best_chain

    def detect_spin_loop(self, fp, max_period=constants.spin_loop_max_period,
                         min_repeats=constants.spin_loop_min_repeats):
        """Trailing run of events spaced by the same short period, as left by a default fault handler spinning in
        an infinite loop.

        Parameters
        ----------
        fp : Fingerprint
        max_period : int
            cycles
        min_repeats : int
            number of equal gaps needed

        Returns
        -------
        SpinLoopReport
        """
        if max_period < 1 or min_repeats < 1:
            raise SideTraceValidationError("max_period and min_repeats must be >= 1")

        gaps = numpy.diff(fp.cycles)

        if len(gaps) == 0 or gaps[-1] > max_period:
            return SpinLoopReport(False)

        period = int(gaps[-1])

        # length of the trailing run of equal gaps
        different = numpy.flatnonzero(gaps != period)
        run_start = int(different[-1]) + 1 if len(different) > 0 else 0
        repeats = len(gaps) - run_start

        if repeats < min_repeats:
            return SpinLoopReport(False)

        onset = int(fp.cycles[run_start])

        self.logger.info("Spin loop with period " + str(period) + " cycles from cycle " + str(onset))

        return SpinLoopReport(True, onset_cycle=onset, period_cycles=period, repeats=repeats)

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

from findatapy.util.loggermanager import LoggerManager

from sidetrace.analysis.reports import FingerprintScore, SimilarityReport
from sidetrace.util.sidetraceconstants import SideTraceConstants
from sidetrace.util.sidetraceerrors import SideTraceProcessingError, SideTraceValidationError
from sidetrace.wavelet.waveletfingerprint import WaveletFingerprint

constants = SideTraceConstants()


def pearson(a, b):
    """Correlation coefficient, 0 when either vector is constant."""
    a = numpy.asarray(a, dtype=numpy.float64)
    b = numpy.asarray(b, dtype=numpy.float64)

    a = a - a.mean()
    b = b - b.mean()

    denom = numpy.sqrt(numpy.sum(a * a) * numpy.sum(b * b))

    if denom == 0:
        return 0.0

    return float(numpy.clip(numpy.sum(a * b) / denom, -1.0, 1.0))


def _nearest_distance(x, ref):
    """Distance from every point of x to the nearest point of the sorted, non-empty ref."""
    pos = numpy.searchsorted(ref, x)

    left = ref[numpy.clip(pos - 1, 0, len(ref) - 1)]
    right = ref[numpy.clip(pos, 0, len(ref) - 1)]

    return numpy.minimum(numpy.abs(x - left), numpy.abs(x - right))


class FingerprintComparison(object):
    """Compares fingerprints of two executions (eg. to spot a different branch being taken), and scores a
    fingerprint against ground truth.

    """

    METRICS = ('mse', 'pearson')

    def __init__(self):
        self.logger = LoggerManager().getLogger(__name__)

    def compare_fingerprints(self, fp_a, fp_b, metric=constants.compare_metric,
                             smoothing_halfwidth=constants.compare_smoothing_halfwidth):
        """Rasterizes both fingerprints over a common length (largest cycle + 1) and computes MSE or correlation.

        Parameters
        ----------
        fp_a, fp_b : Fingerprint
        metric : str
            'mse' or 'pearson'
        smoothing_halfwidth : int
            cycles, absorbs the +/- 1 cycle jitter of detection

        Returns
        -------
        SimilarityReport
        """
        if metric not in FingerprintComparison.METRICS:
            raise SideTraceValidationError("metric must be mse or pearson, got " + repr(metric))

        if fp_a.samples_per_clock != fp_b.samples_per_clock:
            raise SideTraceValidationError("fingerprints come from traces with different samples per clock ("
                                           + repr(fp_a.samples_per_clock) + " vs " + repr(fp_b.samples_per_clock)
                                           + ")")

        if len(fp_a) == 0 and len(fp_b) == 0:
            raise SideTraceProcessingError("both fingerprints are empty, there is nothing to compare")

        length = 1 + max(int(fp.cycles[-1]) for fp in (fp_a, fp_b) if len(fp) > 0)

        wavelet_fingerprint = WaveletFingerprint()

        a = wavelet_fingerprint.rasterize(fp_a, length, smoothing_halfwidth)
        b = wavelet_fingerprint.rasterize(fp_b, length, smoothing_halfwidth)

        if metric == 'mse':
            score = float(numpy.mean((a - b) ** 2))
        else:
            score = pearson(a, b)

        self.logger.debug("Compared fingerprints over " + str(length) + " cycles, " + metric + " = " + str(score))

        return SimilarityReport(metric, score, length, smoothing_halfwidth)

    def score_fingerprint(self, fp, truth_cycles, tolerance_cycles=constants.score_tolerance_cycles):
        """Recall and false positive rate of a fingerprint against the true branch cycles.

        Parameters
        ----------
        fp : Fingerprint
        truth_cycles : list of int
        tolerance_cycles : int

        Returns
        -------
        FingerprintScore
        """
        if tolerance_cycles < 0:
            raise SideTraceValidationError("tolerance_cycles must be >= 0")

        detected = numpy.asarray(fp.cycles, dtype=numpy.int64)
        truth = numpy.unique(numpy.asarray(truth_cycles, dtype=numpy.int64))

        if len(detected) == 0 or len(truth) == 0:
            return FingerprintScore(len(detected), len(truth), 0, len(detected), tolerance_cycles)

        matched_existing = int(numpy.sum(_nearest_distance(truth, detected) <= tolerance_cycles))
        unmatched_detected = int(numpy.sum(_nearest_distance(detected, truth) > tolerance_cycles))

        return FingerprintScore(len(detected), len(truth), matched_existing, unmatched_detected, tolerance_cycles)

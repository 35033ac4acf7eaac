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
from scipy import signal
from sklearn.cluster import AgglomerativeClustering

from findatapy.util import SwimPool
from findatapy.util.loggermanager import LoggerManager

from sidetrace.analysis.reports import CrashClusterReport
from sidetrace.filters.filterspec import FilterSpec
from sidetrace.filters.tracefilter import TraceFilter
from sidetrace.util.sidetraceconstants import SideTraceConstants
from sidetrace.util.sidetraceerrors import SideTraceValidationError

constants = SideTraceConstants()


def _distance_row(i, normalized, lag_fraction):
    a = normalized[i]
    row = numpy.zeros(len(normalized))

    for j in range(i + 1, len(normalized)):
        b = normalized[j]

        max_lag = int(math.floor(lag_fraction * max(len(a), len(b))))

        cc = signal.correlate(a, b, mode='full')
        lags = signal.correlation_lags(len(a), len(b), mode='full')

        best = cc[numpy.abs(lags) <= max_lag].max() / math.sqrt(len(a) * len(b))

        row[j] = min(2.0, max(0.0, 1.0 - best))

    return row


class CrashClustering(object):
    """Groups the power traces of crashes by the kind of fault behind them. Fault handlers leave rigid, hardware
    generated power patterns, so after low-pass filtering (against jitter) and normalization, traces of the same
    fault correlate strongly up to a small trigger lag.

    """

    def __init__(self):
        self.logger = LoggerManager().getLogger(__name__)

    def normalize(self, traces, lowpass_cutoff_hz):
        """Low-pass filters (zero phase), removes the mean and scales every trace to unit RMS.

        Returns
        -------
        list of numpy.ndarray
        """
        if len(traces) < 2:
            raise SideTraceValidationError("need at least 2 traces to cluster, got " + str(len(traces)))

        rate = traces[0].sample_rate_hz

        for t in traces:
            if t.sample_rate_hz != rate:
                raise SideTraceValidationError("all traces must share one sample rate (" + repr(rate) + " vs "
                                               + repr(t.sample_rate_hz) + ")")

            if len(t) == 0:
                raise SideTraceValidationError("cannot cluster an empty trace")

        spec = FilterSpec.lowpass(lowpass_cutoff_hz, order=constants.crash_lowpass_order, phase_mode='zero_phase')

        trace_filter = TraceFilter()

        normalized = []

        for t in traces:
            x = trace_filter.butterworth(t, spec).samples
            x = x - x.mean()

            rms = math.sqrt(float(numpy.mean(x ** 2)))

            normalized.append(x / rms if rms > 0 else x)

        return normalized

    def pairwise_distances(self, normalized, lag_fraction=constants.crash_lag_fraction):
        """Symmetric matrix of 1 - max normalized cross-correlation over lags within lag_fraction of the length.

        Parameters
        ----------
        normalized : list of numpy.ndarray
            unit RMS, zero mean
        lag_fraction : float

        Returns
        -------
        numpy.ndarray
        """
        n = len(normalized)

        thread_no = min(constants.thread_no(), n)

        if thread_no > 1:
            swim_pool = SwimPool(multiprocessing_library=constants.multiprocessing_library)

            pool = swim_pool.create_pool(thread_technique=constants.thread_technique, thread_no=thread_no)

            results = [pool.apply_async(_distance_row, args=(i, normalized, lag_fraction,)) for i in range(n)]
            rows = [r.get() for r in results]

            swim_pool.close_pool(pool)
        else:
            rows = [_distance_row(i, normalized, lag_fraction) for i in range(n)]

        upper = numpy.vstack(rows)

        return upper + upper.T

    def cluster_crashes(self, traces, lowpass_cutoff_hz, linkage_threshold=constants.crash_linkage_threshold):
        """Average linkage agglomerative clustering of crash traces, cut at linkage_threshold.

        Parameters
        ----------
        traces : list of PowerTrace
            trimmed to the fault window, equal sample rates
        lowpass_cutoff_hz : float
        linkage_threshold : float
            correlation distance at or above which clusters are not merged

        Returns
        -------
        CrashClusterReport
        """
        if lowpass_cutoff_hz is None:
            raise SideTraceValidationError("lowpass_cutoff_hz is required")

        if not linkage_threshold > 0:
            raise SideTraceValidationError("linkage_threshold must be > 0, got " + repr(linkage_threshold))

        self.logger.info("Clustering " + str(len(traces)) + " crash traces")

        distances = self.pairwise_distances(self.normalize(traces, lowpass_cutoff_hz))

        model = AgglomerativeClustering(n_clusters=None, metric='precomputed', linkage='average',
                                        distance_threshold=linkage_threshold)

        raw = model.fit_predict(distances)

        # relabel in order of first appearance
        mapping = {}

        for r in raw:
            if r not in mapping:
                mapping[r] = len(mapping)

        labels = numpy.array([mapping[r] for r in raw])

        medoids = []

        for c in range(len(mapping)):
            members = numpy.flatnonzero(labels == c)
            medoids.append(int(members[numpy.argmin(distances[numpy.ix_(members, members)].sum(axis=1))]))

        self.logger.info("Found " + str(len(medoids)) + " crash clusters")

        return CrashClusterReport(labels, medoids, linkage_threshold, distances=distances)

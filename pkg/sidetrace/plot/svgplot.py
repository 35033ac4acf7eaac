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

import matplotlib
import numpy
from matplotlib.figure import Figure

from findatapy.util.loggermanager import LoggerManager

from sidetrace.util.sidetraceconstants import SideTraceConstants
from sidetrace.wavelet.waveletfingerprint import WaveletFingerprint

constants = SideTraceConstants()

# traces longer than this are decimated (min/max per bucket) before plotting
MAX_PLOT_POINTS = 20000


class SvgPlot(object):
    """Writes traces and fingerprints as SVG. The hash salt is fixed and the date stamp dropped, so identical inputs
    give byte-identical files.

    """

    def __init__(self):
        self.logger = LoggerManager().getLogger(__name__)

    def _figure(self):
        return Figure(figsize=(constants.plot_width_inches, constants.plot_height_inches))

    def _save(self, fig, sink):
        with matplotlib.rc_context({'svg.hashsalt': constants.plot_svg_hashsalt, 'svg.fonttype': 'path'}):
            fig.savefig(sink, format='svg', metadata={'Date': None})

    def _decimate(self, x):
        if len(x) <= MAX_PLOT_POINTS:
            return numpy.arange(len(x)), x

        buckets = MAX_PLOT_POINTS // 2
        edges = numpy.linspace(0, len(x), buckets + 1).astype(numpy.int64)

        index = []
        values = []

        for s, e in zip(edges[:-1], edges[1:]):
            chunk = x[s:e]
            lo, hi = int(numpy.argmin(chunk)), int(numpy.argmax(chunk))

            for k in sorted((lo, hi)):
                index.append(s + k)
                values.append(chunk[k])

        return numpy.array(index), numpy.array(values)

    def plot_trace(self, trace, sink, fingerprint=None, segments=None, title=None):
        """Trace against time in microseconds, with fingerprint events and peripheral segments marked.

        Parameters
        ----------
        trace : PowerTrace
        sink : str or binary stream
        fingerprint : Fingerprint (optional)
        segments : list of PeakSegment (optional)
        title : str
        """
        fig = self._figure()
        ax = fig.add_subplot(1, 1, 1)

        index, values = self._decimate(trace.samples)

        ax.plot(index / trace.sample_rate_hz * 1e6, values, linewidth=0.5, color='black')

        if segments:
            for seg in segments:
                ax.axvspan(seg.start / trace.sample_rate_hz * 1e6, seg.end / trace.sample_rate_hz * 1e6,
                           color='grey', alpha=0.3)

        if fingerprint is not None and len(fingerprint) > 0:
            starts = (fingerprint.cycles + 0.5) * fingerprint.samples_per_clock / trace.sample_rate_hz * 1e6

            ax.vlines(starts, float(trace.samples.min()), float(trace.samples.max()), colors='red', linewidth=0.5)

        ax.set_xlabel('time (us)')
        ax.set_ylabel('voltage (V)')

        if title is not None:
            ax.set_title(title)

        self._save(fig, sink)

    def plot_fingerprint(self, fingerprint, sink, smoothing_halfwidth=constants.compare_smoothing_halfwidth,
                         motif=None, title=None):
        """Smoothed fingerprint raster against clock cycles, with motif occurrences shaded.

        Parameters
        ----------
        fingerprint : Fingerprint
        sink : str or binary stream
        smoothing_halfwidth : int
        motif : MotifReport (optional)
        title : str
        """
        length = int(fingerprint.cycles[-1]) + 1 if len(fingerprint) > 0 else 1

        raster = WaveletFingerprint().rasterize(fingerprint, length, smoothing_halfwidth)

        fig = self._figure()
        ax = fig.add_subplot(1, 1, 1)

        ax.plot(numpy.arange(length), raster, linewidth=0.8, color='black')

        if motif is not None:
            for i, s in enumerate(motif.occurrence_starts):
                ax.axvspan(s, s + motif.period_cycles, color='red' if i % 2 == 0 else 'orange', alpha=0.2)

        ax.set_xlabel('clock cycle')
        ax.set_ylabel('events')

        if title is not None:
            ax.set_title(title)

        self._save(fig, sink)

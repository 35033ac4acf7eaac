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
import pandas
from numba import guvectorize

from findatapy.util.loggermanager import LoggerManager

from sidetrace.peripheral.peakdetector import find_runs, merge_runs
from sidetrace.peripheral.peaksegment import SpiDecodeConfig, SpiDecodeResult
from sidetrace.util.sidetraceconstants import SideTraceConstants
from sidetrace.util.sidetraceerrors import SideTraceProcessingError, SideTraceValidationError

constants = SideTraceConstants()

EDGE_NAMES = {1: 'rising', -1: 'falling', 0: 'none'}


@guvectorize(['void(i8[:], i8, i8[:])'], '(n),()->(n)', cache=True, target="cpu", nopython=True)
def _integrate_edges_numba(edges, idle, out):
    level = idle

    for i in range(edges.shape[0]):
        if edges[i] == 1:
            level = 1
        elif edges[i] == -1:
            level = 0

        out[i] = level


def _integrate_edges(edges, idle):
    levels = pandas.Series(numpy.where(edges == 1, 1.0, numpy.where(edges == -1, 0.0, numpy.nan)))

    return levels.ffill().fillna(float(idle)).values.astype(numpy.int64)


class SpiDecoder(object):
    """Recovers SPI bytes from the power trace of the bus master alone.

    A rising clock edge draws a short burst of current, which shows up as a regular train of large voltage drops
    (eight per byte). Between two rising clock edges the data line may change: a rising data edge is a drop, a
    falling data edge a rise, and no change leaves no peak. Classifying these peaks into the three groups and
    integrating from the idle level gives each bit as sampled on the rising clock edge.

    """

    def __init__(self):
        self.logger = LoggerManager().getLogger(__name__)

    def _clock_edges(self, deviation, cfg):
        mad = numpy.median(numpy.abs(deviation))
        max_drop = -float(deviation.min())

        if max_drop <= cfg.clock_peak_k * mad or max_drop <= 0:
            raise SideTraceProcessingError("no periodic peak train found, the largest drop does not stand out from "
                                           + "the noise")

        starts, ends = find_runs(deviation < -cfg.clock_level_fraction * max_drop)

        if len(starts) < 2:
            raise SideTraceProcessingError("no periodic peak train found, fewer than two clock peaks")

        # threshold crossings broken by noise: a clock period is always much longer than the run gap
        spacing = numpy.median(starts[1:] - starts[:-1])
        starts, ends = merge_runs(starts, ends, max(1, int(spacing // 4)))

        return numpy.array([s + int(numpy.argmin(deviation[s:e])) for s, e in zip(starts, ends)], dtype=numpy.int64)

    def _words(self, edges, cfg):
        period = float(numpy.median(numpy.diff(edges)))

        if period <= 0:
            raise SideTraceProcessingError("no periodic peak train found")

        breaks = numpy.flatnonzero(numpy.diff(edges) > cfg.word_gap_periods * period) + 1

        return numpy.split(edges, breaks), period

    def decode_spi(self, trace, spi_decode_config=None):
        """Decodes the bytes sent over SPI during the trace.

        Parameters
        ----------
        trace : PowerTrace
        spi_decode_config : SpiDecodeConfig

        Returns
        -------
        SpiDecodeResult
        """
        cfg = spi_decode_config if spi_decode_config is not None else SpiDecodeConfig()

        if len(trace) == 0:
            raise SideTraceValidationError("cannot decode an empty trace")

        deviation = trace.samples - numpy.median(trace.samples)

        edges = self._clock_edges(deviation, cfg)
        words, period = self._words(edges, cfg)

        for w in words:
            if len(w) != cfg.bits_per_word:
                raise SideTraceProcessingError("word with " + str(len(w)) + " clock peaks instead of "
                                               + str(cfg.bits_per_word) + " in samples [" + str(int(w[0])) + ", "
                                               + str(int(w[-1]) + 1) + ")")

        self.logger.info("Found " + str(len(words)) + " words, clock period " + str(period) + " samples")

        # boxcar smoothing against noise, then the extremum half a period before each rising clock edge
        width = max(1, int(round(period / 16.0)))
        smoothed = numpy.convolve(deviation, numpy.ones(width) / width, mode='same')

        half_window = max(1, int(period // 4))
        n = len(smoothed)

        amplitudes = []

        for r in edges:
            centre = int(round(r - period / 2.0))
            window = smoothed[max(0, centre - half_window):min(n, centre + half_window + 1)]

            if len(window) == 0:
                amplitudes.append(0.0)
            else:
                amplitudes.append(float(window[numpy.argmax(numpy.abs(window))]))

        amplitudes = numpy.array(amplitudes)

        # transitions never count below a small fraction of the clock peak, even on a noise free capture
        noise_floor = max(cfg.clock_peak_k * numpy.median(numpy.abs(smoothed - numpy.median(smoothed))),
                          constants.spi_edge_floor_fraction * -float(deviation.min()))

        present = numpy.abs(amplitudes)[numpy.abs(amplitudes) > noise_floor]

        if len(present) > 0:
            threshold = max(noise_floor, cfg.edge_threshold_fraction * float(numpy.median(present)))
        else:
            threshold = numpy.inf

        self.logger.debug("Edge threshold " + str(threshold) + " (noise floor " + str(noise_floor) + ")")

        # a rising data edge draws current, so it is a drop
        codes = numpy.where(amplitudes < -threshold, 1, numpy.where(amplitudes > threshold, -1, 0)).astype(numpy.int64)

        idle = 1 if cfg.idle_level == 'high' else 0

        if constants.use_numba:
            bits = _integrate_edges_numba(codes, idle)
        else:
            bits = _integrate_edges(codes, idle)

        data = []
        byte_windows = []
        bit_edges = []

        offset = 0

        for w in words:
            word_bits = bits[offset:offset + len(w)]
            word_codes = codes[offset:offset + len(w)]

            offset = offset + len(w)

            if cfg.bit_order == 'lsb_first':
                word_bits = word_bits[::-1]

            value = 0

            for b in word_bits:
                value = (value << 1) | int(b)

            data.append(value)
            byte_windows.append((max(0, int(w[0] - period)), min(n, int(w[-1] + period / 2.0) + 1)))
            bit_edges.append([EDGE_NAMES[int(c)] for c in word_codes])

        return SpiDecodeResult(data, byte_windows, bit_edges)

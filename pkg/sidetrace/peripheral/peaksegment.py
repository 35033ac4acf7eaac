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

from sidetrace.util.sidetraceconstants import SideTraceConstants
from sidetrace.util.sidetraceerrors import SideTraceValidationError

constants = SideTraceConstants()


class PeakSegment(object):
    """Half-open run [start, end) of samples beyond the peak threshold, caused by a peripheral interaction (UART/SPI
    line transitions). peak_magnitude is the signed extremum relative to the trace median.

    """

    POLARITIES = ('drop', 'rise')

    def __init__(self, start, end, polarity, peak_magnitude):
        start = int(start)
        end = int(end)

        if not 0 <= start < end:
            raise SideTraceValidationError("peak segment needs 0 <= start < end, got [" + str(start) + ", "
                                           + str(end) + ")")

        if polarity not in PeakSegment.POLARITIES:
            raise SideTraceValidationError("polarity must be drop or rise, got " + repr(polarity))

        self.__start = start
        self.__end = end
        self.__polarity = polarity
        self.__peak_magnitude = float(peak_magnitude)

    @property
    def start(self): return self.__start

    @property
    def end(self): return self.__end

    @property
    def polarity(self): return self.__polarity

    @property
    def peak_magnitude(self): return self.__peak_magnitude

    def __len__(self):
        return self.__end - self.__start

    def to_dict(self):
        return {'start': self.__start, 'end': self.__end, 'polarity': self.__polarity,
                'peak_magnitude': self.__peak_magnitude}

    @staticmethod
    def from_dict(d):
        return PeakSegment(d['start'], d['end'], d['polarity'], d['peak_magnitude'])

    def __eq__(self, other):
        if not isinstance(other, PeakSegment):
            return NotImplemented

        return (self.__start, self.__end, self.__polarity) == (other.start, other.end, other.polarity)

    __hash__ = None

    def __repr__(self):
        return "PeakSegment([%d, %d), %s, %.6g)" % (self.__start, self.__end, self.__polarity, self.__peak_magnitude)


class ExcisedTrace(object):
    """A trace with peripheral peaks cut out and the remainder concatenated. index_map gives, for every retained
    sample, its index in the original trace.

    """

    def __init__(self, trace, index_map, removed):
        index_map = numpy.asarray(index_map, dtype=numpy.int64)

        if len(index_map) != len(trace):
            raise SideTraceValidationError("index_map must have one entry per retained sample")

        if numpy.any(numpy.diff(index_map) <= 0):
            raise SideTraceValidationError("index_map must be strictly increasing")

        index_map.flags.writeable = False

        self.__trace = trace
        self.__index_map = index_map
        self.__removed = list(removed)

    @property
    def trace(self): return self.__trace

    @property
    def index_map(self): return self.__index_map

    @property
    def removed(self):
        """Merged [start, end) intervals actually removed, guards included."""
        return self.__removed

    @property
    def removed_samples(self):
        return int(sum(e - s for s, e in self.__removed))


class SpiDecodeConfig(object):
    """Parameters of the SPI decoder. Defaults assume mode 0 (data sampled on the rising clock edge, idle low) and
    MSB-first words of 8 bits.

    """

    BIT_ORDERS = ('msb_first', 'lsb_first')
    IDLE_LEVELS = ('low', 'high')

    def __init__(self, clock_peak_k=constants.spi_clock_peak_k, bits_per_word=constants.spi_bits_per_word,
                 bit_order=constants.spi_bit_order, idle_level=constants.spi_idle_level,
                 clock_level_fraction=constants.spi_clock_level_fraction,
                 word_gap_periods=constants.spi_word_gap_periods,
                 edge_threshold_fraction=constants.spi_edge_threshold_fraction):

        if not clock_peak_k > 0:
            raise SideTraceValidationError("clock_peak_k must be > 0, got " + repr(clock_peak_k))

        if int(bits_per_word) != bits_per_word or not 1 <= bits_per_word <= 8:
            raise SideTraceValidationError("bits_per_word must be an integer in [1, 8], got " + repr(bits_per_word))

        if bit_order not in SpiDecodeConfig.BIT_ORDERS:
            raise SideTraceValidationError("bit_order must be msb_first or lsb_first, got " + repr(bit_order))

        if idle_level not in SpiDecodeConfig.IDLE_LEVELS:
            raise SideTraceValidationError("idle_level must be low or high, got " + repr(idle_level))

        if not 0 < clock_level_fraction < 1:
            raise SideTraceValidationError("clock_level_fraction must lie in (0, 1)")

        if not word_gap_periods > 1:
            raise SideTraceValidationError("word_gap_periods must be > 1")

        if not 0 < edge_threshold_fraction < 1:
            raise SideTraceValidationError("edge_threshold_fraction must lie in (0, 1)")

        self.clock_peak_k = float(clock_peak_k)
        self.bits_per_word = int(bits_per_word)
        self.bit_order = bit_order
        self.idle_level = idle_level
        self.clock_level_fraction = float(clock_level_fraction)
        self.word_gap_periods = float(word_gap_periods)
        self.edge_threshold_fraction = float(edge_threshold_fraction)


class SpiDecodeResult(object):
    """Bytes recovered from a power trace together with where each word sits and how each bit edge was classified
    (rising, falling or none).

    """

    def __init__(self, data, byte_windows, bit_edges):
        self.__data = bytes(data)
        self.__byte_windows = [(int(s), int(e)) for s, e in byte_windows]
        self.__bit_edges = [list(b) for b in bit_edges]

    @property
    def data(self): return self.__data

    @property
    def byte_windows(self): return self.__byte_windows

    @property
    def bit_edges(self): return self.__bit_edges

    def hex(self):
        return self.__data.hex()

    def to_dict(self):
        return {'bytes': self.hex(), 'byte_windows': [list(w) for w in self.__byte_windows],
                'bit_edges': self.__bit_edges}

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

from sidetrace.util.sidetraceerrors import SideTraceValidationError


class PowerTrace(object):
    """Sampled voltage series measured across a sense point while a target executes. This is the raw input of every
    pipeline in sidetrace.

    Samples are held as a read-only float64 array, so a PowerTrace can be shared freely between threads. Derived
    traces (filtered, sliced, excised) are always new objects.

    """

    def __init__(self, samples, sample_rate_hz, clock_hz=None, label=None):
        samples = numpy.array(samples, dtype=numpy.float64)

        if samples.ndim != 1:
            raise SideTraceValidationError("samples must be one dimensional, got shape " + str(samples.shape))

        if not numpy.all(numpy.isfinite(samples)):
            bad = int(numpy.flatnonzero(~numpy.isfinite(samples))[0])

            raise SideTraceValidationError("sample " + str(bad) + " is not a finite number")

        sample_rate_hz = float(sample_rate_hz)

        if not (math.isfinite(sample_rate_hz) and sample_rate_hz > 0):
            raise SideTraceValidationError("sample_rate_hz must be > 0, got " + repr(sample_rate_hz))

        if clock_hz is not None:
            clock_hz = float(clock_hz)

            if not (math.isfinite(clock_hz) and 0 < clock_hz <= sample_rate_hz):
                raise SideTraceValidationError("clock_hz must satisfy 0 < clock_hz <= sample_rate_hz, got "
                                               + repr(clock_hz))

        samples.flags.writeable = False

        self.__samples = samples
        self.__sample_rate_hz = sample_rate_hz
        self.__clock_hz = clock_hz
        self.__label = label

    @property
    def samples(self): return self.__samples

    @property
    def sample_rate_hz(self): return self.__sample_rate_hz

    @property
    def clock_hz(self): return self.__clock_hz

    @property
    def label(self): return self.__label

    @property
    def samples_per_clock(self):
        """Sampling rate divided by the device clock, or None when the clock is unknown."""
        if self.__clock_hz is None:
            return None

        return self.__sample_rate_hz / self.__clock_hz

    def require_samples_per_clock(self):
        """Samples per clock cycle, failing fast when the device clock was never supplied.

        Returns
        -------
        float
        """
        if self.__clock_hz is None:
            raise SideTraceValidationError("clock_hz is unknown for this trace; supply the device clock frequency")

        return self.samples_per_clock

    def with_samples(self, samples, label=None):
        """New trace with the same rates (and label unless overridden) but different samples."""
        if label is None:
            label = self.__label

        return PowerTrace(samples, self.__sample_rate_hz, clock_hz=self.__clock_hz, label=label)

    def to_series(self):
        """Samples as a pandas Series indexed by time in seconds.

        Returns
        -------
        pandas.Series
        """
        index = pandas.Index(numpy.arange(len(self.__samples)) / self.__sample_rate_hz, name='time_s')

        return pandas.Series(self.__samples, index=index, name='voltage_v')

    def __len__(self):
        return len(self.__samples)

    def __eq__(self, other):
        if not isinstance(other, PowerTrace):
            return NotImplemented

        return self.__sample_rate_hz == other.sample_rate_hz and self.__clock_hz == other.clock_hz \
               and numpy.array_equal(self.__samples, other.samples)

    __hash__ = None

    def __repr__(self):
        return "PowerTrace(n=%d, sample_rate_hz=%r, clock_hz=%r, label=%r)" \
               % (len(self.__samples), self.__sample_rate_hz, self.__clock_hz, self.__label)


class TraceStats(object):
    """Summary statistics of a trace, all in volts. Median and MAD are exact order statistics.

    """

    def __init__(self, min, max, mean, std_dev, median, mad):
        self.__min = float(min)
        self.__max = float(max)
        self.__mean = float(mean)
        self.__std_dev = float(std_dev)
        self.__median = float(median)
        self.__mad = float(mad)

    @property
    def min(self): return self.__min

    @property
    def max(self): return self.__max

    @property
    def mean(self): return self.__mean

    @property
    def std_dev(self): return self.__std_dev

    @property
    def median(self): return self.__median

    @property
    def mad(self): return self.__mad

    def to_dict(self):
        return {'min': self.__min, 'max': self.__max, 'mean': self.__mean, 'std_dev': self.__std_dev,
                'median': self.__median, 'mad': self.__mad}

    def __repr__(self):
        return "TraceStats(" + ", ".join(k + "=" + repr(v) for k, v in self.to_dict().items()) + ")"
